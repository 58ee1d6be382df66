#pragma once

#include <string>
#include <vector>

#include "c4/color.hpp"
#include "c4/tensor.hpp"

namespace c4 {

struct ConvLayerSpec {
    int out_channels = 0;
    int kernel = 3;
    int stride = 1;
    int padding = 1;
};

// Architecture shared by all cascade stages. The final conv must emit 3
// channels; dropout is applied only before the final conv.
struct StageNetConfig {
    std::vector<ConvLayerSpec> layers;
    double dropout_p = 0.5;

    void validate() const;

    // Desk-scale default: 4 conv layers, channels 8 -> 16 -> 16 -> 3,
    // kernel 3, strides 2,2,1,1.
    static StageNetConfig desk_default();
};

// One cascade stage: conv stack with ReLU after every conv, dropout before
// the last conv, spatial summation, clamp and unit normalization.
struct StageNet {
    StageNetConfig config;
    std::vector<TensorPtr> weights; // [K,C,kh,kw] per layer
    std::vector<TensorPtr> biases;  // [K] per layer

    void init(const StageNetConfig& cfg, Rng& rng);
    std::vector<TensorPtr> parameters() const;
    StageNet clone() const; // deep copy of parameter values
};

// Ordered stages with identical architecture and independent parameters.
struct CascadeModel {
    std::vector<StageNet> stages;

    int num_stages() const { return static_cast<int>(stages.size()); }
    std::vector<TensorPtr> parameters() const;
};

CascadeModel make_cascade(const StageNetConfig& cfg, int stages, Rng& rng);

// Per-stage loss weights w_l.
struct LossConfig {
    std::vector<double> weights;

    void validate(int stages) const;
    static LossConfig uniform(int stages);
};

struct CascadeOutput {
    std::vector<TensorPtr> stage_estimates;      // L tensors [N,3], unit rows
    std::vector<TensorPtr> cumulative_estimates; // L tensors [N,3], unit rows
};

// Forward through one stage: [N,3,H,W] image batch -> [N,3] unit-norm
// illuminant estimates.
TensorPtr stage_forward(Tape& tape, const StageNet& net, const TensorPtr& image,
                        bool training, Rng& rng);

// Runs the full cascade. Stage l+1 sees the previous image divided
// channelwise by stage l's estimate; cumulative estimates are the unit
// normalized running elementwise products. With stop_gradient = true the
// estimate is detached before the division, so gradients do not flow into
// earlier stages through the corrected image.
CascadeOutput cascade_forward(Tape& tape, const CascadeModel& model, const TensorPtr& image,
                              bool training, Rng& rng, bool stop_gradient = false);

// Weighted sum over stages of the angular loss (radians, clamped cosine)
// between cumulative estimate l and the ground truth, averaged over the
// batch. truth is [N,3].
TensorPtr multiply_accumulate_loss(Tape& tape, const CascadeOutput& output,
                                   const TensorPtr& truth, const LossConfig& config);

// Unweighted variant: plain sum over stages.
TensorPtr multiply_accumulate_loss(Tape& tape, const CascadeOutput& output,
                                   const TensorPtr& truth);

// ---- tensor bridging ----------------------------------------------------

// Stacks images into an [N,3,H,W] tensor. Masked pixels are zeroed.
// All images must share dimensions.
TensorPtr batch_to_tensor(const std::vector<const LinearImage*>& images);
TensorPtr image_to_tensor(const LinearImage& image);

// [N,3] tensor of unit-normalized illuminants.
TensorPtr illuminants_to_tensor(const std::vector<Illuminant>& labels);

// Row n of a [N,3] tensor as an Illuminant.
Illuminant tensor_row_to_illuminant(const TensorPtr& t, int row);

// ---- serialization ------------------------------------------------------

// Model file: magic "C4MD", u32 version, u64 JSON header length, JSON
// header (architecture, stage count, named tensor index), then raw
// little-endian 64-bit floats in header order. Round trips bit-exactly.
void save_model(const CascadeModel& model, const std::string& path);
CascadeModel load_model(const std::string& path);

} // namespace c4
