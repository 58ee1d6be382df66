#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "c4/errors.hpp"
#include "c4/rng.hpp"

namespace c4 {

struct Tensor;
using TensorPtr = std::shared_ptr<Tensor>;

// Dense double-precision tensor. Gradient storage exists iff requires_grad.
struct Tensor {
    std::vector<int> shape;
    std::vector<double> values;
    std::vector<double> grad;
    bool requires_grad = false;

    static TensorPtr create(std::vector<int> shape, bool requires_grad = false);
    static TensorPtr from_values(std::vector<int> shape, std::vector<double> v,
                                 bool requires_grad = false);
    static TensorPtr scalar(double v, bool requires_grad = false);

    size_t size() const {
        size_t n = 1;
        for (int d : shape) n *= static_cast<size_t>(d);
        return n;
    }
    bool is_scalar() const { return size() == 1; }
    int dim(int i) const { return shape[static_cast<size_t>(i)]; }
    int rank() const { return static_cast<int>(shape.size()); }

    void set_requires_grad(bool rg);
    void zero_grad();
};

// Define-by-run gradient tape. Each differentiable op records one backward
// node; backward() replays them in exact reverse order, accumulating (+=)
// into input gradients. A tape and its tensors belong to one worker.
class Tape {
public:
    void record(std::function<void()> fn) { nodes_.push_back(std::move(fn)); }

    // Seeds loss->grad with 1 and runs all recorded nodes in reverse.
    // Throws a contract error if loss is not a scalar on this tape.
    void backward(const TensorPtr& loss);

    void clear() { nodes_.clear(); }
    size_t size() const { return nodes_.size(); }

private:
    std::vector<std::function<void()>> nodes_;
};

// ---- differentiable ops -------------------------------------------------

// Cross-correlation (deep-learning "convolution"); input [N,C,H,W],
// weight [K,C,kh,kw], bias [K]; output [N,K,H',W'].
TensorPtr conv2d(Tape& tape, const TensorPtr& input, const TensorPtr& weight,
                 const TensorPtr& bias, int stride, int padding);

TensorPtr relu(Tape& tape, const TensorPtr& x);

// Inverted dropout: training => zero with probability p, scale survivors by
// 1/(1-p); inference => identity. p in [0,1).
TensorPtr dropout(Tape& tape, const TensorPtr& x, double p, bool training, Rng& rng);

// [N,C,H,W] -> [N,C], summing over the spatial dimensions.
TensorPtr spatial_sum(Tape& tape, const TensorPtr& x);

TensorPtr add(Tape& tape, const TensorPtr& a, const TensorPtr& b);
TensorPtr sub(Tape& tape, const TensorPtr& a, const TensorPtr& b);
TensorPtr mul(Tape& tape, const TensorPtr& a, const TensorPtr& b);
TensorPtr scale(Tape& tape, const TensorPtr& x, double s);
TensorPtr sum_all(Tape& tape, const TensorPtr& x);          // -> scalar
TensorPtr mean_all(Tape& tape, const TensorPtr& x);         // -> scalar

// Elementwise max(x, floor); gradient passes only where x > floor.
TensorPtr clamp_min(Tape& tape, const TensorPtr& x, double floor);

// Per-channel division: x [N,C,H,W] divided by d [N,C], broadcast over H,W.
TensorPtr broadcast_div_channels(Tape& tape, const TensorPtr& x, const TensorPtr& d);

// Rows of x [N,C] scaled to unit Euclidean norm.
TensorPtr normalize_rows(Tape& tape, const TensorPtr& x);

// Row-wise dot product of a and b [N,C] -> [N].
TensorPtr row_dot(Tape& tape, const TensorPtr& a, const TensorPtr& b);

// Elementwise arccos with the argument clamped to [-1+eps, 1-eps];
// gradient is zero in the clamped region.
TensorPtr acos_clamped(Tape& tape, const TensorPtr& x, double eps = 1e-7);

// Copy with the graph cut: result never propagates gradient.
TensorPtr detach(const TensorPtr& x);

// ---- optimizer ----------------------------------------------------------

struct AdamState {
    std::vector<std::vector<double>> m, v;
    long step = 0;

    void init(const std::vector<TensorPtr>& params);
    bool initialized() const { return !m.empty(); }
};

// One ADAM update over params using their current .grad buffers.
void adam_step(const std::vector<TensorPtr>& params, AdamState& state, double lr,
               double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

// ---- verification harness ----------------------------------------------

// Compares analytic gradients of a scalar-valued function against central
// differences. Returns the max over checked coordinates of
//   |analytic - numeric| / max(1e-4, |analytic| + |numeric|),
// where the floor absorbs finite-difference roundoff on zero-gradient
// coordinates.
// max_coords_per_tensor = 0 checks every coordinate; a positive value
// checks a deterministic random subset (seeded by `seed`).
double grad_check(const std::function<TensorPtr(Tape&, const std::vector<TensorPtr>&)>& f,
                  const std::vector<TensorPtr>& inputs, double h = 1e-6,
                  int max_coords_per_tensor = 0, uint64_t seed = 0);

} // namespace c4
