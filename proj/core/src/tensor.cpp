#include "c4/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace c4 {

namespace {

void check_finite(const TensorPtr& t, const char* op) {
    for (double v : t->values) {
        if (!std::isfinite(v))
            throw NumericError(std::string("non-finite value produced by ") + op);
    }
}

void require_same_shape(const TensorPtr& a, const TensorPtr& b, const char* op) {
    if (a->shape != b->shape)
        throw ShapeError(std::string(op) + ": operand shapes differ");
}

} // namespace

TensorPtr Tensor::create(std::vector<int> shape, bool requires_grad) {
    auto t = std::make_shared<Tensor>();
    t->shape = std::move(shape);
    t->values.assign(t->size(), 0.0);
    t->set_requires_grad(requires_grad);
    return t;
}

TensorPtr Tensor::from_values(std::vector<int> shape, std::vector<double> v, bool requires_grad) {
    auto t = std::make_shared<Tensor>();
    t->shape = std::move(shape);
    if (v.size() != t->size())
        throw ShapeError("Tensor::from_values: value count does not match shape");
    t->values = std::move(v);
    t->set_requires_grad(requires_grad);
    return t;
}

TensorPtr Tensor::scalar(double v, bool requires_grad) {
    return from_values({1}, {v}, requires_grad);
}

void Tensor::set_requires_grad(bool rg) {
    requires_grad = rg;
    if (rg)
        grad.assign(size(), 0.0);
    else
        grad.clear();
}

void Tensor::zero_grad() {
    std::fill(grad.begin(), grad.end(), 0.0);
}

void Tape::backward(const TensorPtr& loss) {
    if (!loss->is_scalar())
        throw Error("Tape::backward: loss must be a scalar");
    if (!loss->requires_grad)
        throw Error("Tape::backward: loss does not require grad");
    loss->grad[0] += 1.0;
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it)
        (*it)();
}

TensorPtr conv2d(Tape& tape, const TensorPtr& input, const TensorPtr& weight,
                 const TensorPtr& bias, int stride, int padding) {
    if (input->rank() != 4 || weight->rank() != 4 || bias->rank() != 1)
        throw ShapeError("conv2d: expected input [N,C,H,W], weight [K,C,kh,kw], bias [K]");
    const int N = input->dim(0), C = input->dim(1), H = input->dim(2), W = input->dim(3);
    const int K = weight->dim(0), kh = weight->dim(2), kw = weight->dim(3);
    if (weight->dim(1) != C) throw ShapeError("conv2d: channel mismatch between input and weight");
    if (bias->dim(0) != K) throw ShapeError("conv2d: bias length != output channels");
    if (stride < 1) throw DomainError("conv2d: stride must be >= 1");
    if (padding < 0) throw DomainError("conv2d: padding must be >= 0");
    if (kh > H + 2 * padding || kw > W + 2 * padding)
        throw ShapeError("conv2d: kernel larger than padded input");

    const int Ho = (H + 2 * padding - kh) / stride + 1;
    const int Wo = (W + 2 * padding - kw) / stride + 1;

    bool rg = input->requires_grad || weight->requires_grad || bias->requires_grad;
    auto out = Tensor::create({N, K, Ho, Wo}, rg);

    const double* in = input->values.data();
    const double* wt = weight->values.data();
    double* o = out->values.data();

    for (int n = 0; n < N; ++n) {
        for (int k = 0; k < K; ++k) {
            double b = bias->values[k];
            double* omap = o + ((static_cast<size_t>(n) * K + k) * Ho) * Wo;
            for (int i = 0; i < Ho * Wo; ++i) omap[i] = b;
            for (int c = 0; c < C; ++c) {
                const double* imap = in + ((static_cast<size_t>(n) * C + c) * H) * W;
                const double* wmap = wt + ((static_cast<size_t>(k) * C + c) * kh) * kw;
                for (int ky = 0; ky < kh; ++ky) {
                    for (int kx = 0; kx < kw; ++kx) {
                        const double wv = wmap[ky * kw + kx];
                        if (wv == 0.0) continue;
                        for (int oy = 0; oy < Ho; ++oy) {
                            const int iy = oy * stride + ky - padding;
                            if (iy < 0 || iy >= H) continue;
                            const double* irow = imap + static_cast<size_t>(iy) * W;
                            double* orow = omap + static_cast<size_t>(oy) * Wo;
                            for (int ox = 0; ox < Wo; ++ox) {
                                const int ix = ox * stride + kx - padding;
                                if (ix < 0 || ix >= W) continue;
                                orow[ox] += wv * irow[ix];
                            }
                        }
                    }
                }
            }
        }
    }
    check_finite(out, "conv2d");

    if (rg) {
        tape.record([input, weight, bias, out, N, C, H, W, K, kh, kw, Ho, Wo, stride, padding]() {
            const double* og = out->grad.data();
            const double* in = input->values.data();
            const double* wt = weight->values.data();
            for (int n = 0; n < N; ++n) {
                for (int k = 0; k < K; ++k) {
                    const double* gmap = og + ((static_cast<size_t>(n) * K + k) * Ho) * Wo;
                    if (bias->requires_grad) {
                        double acc = 0.0;
                        for (int i = 0; i < Ho * Wo; ++i) acc += gmap[i];
                        bias->grad[k] += acc;
                    }
                    for (int c = 0; c < C; ++c) {
                        const double* imap = in + ((static_cast<size_t>(n) * C + c) * H) * W;
                        const double* wmap = wt + ((static_cast<size_t>(k) * C + c) * kh) * kw;
                        double* igmap = input->requires_grad
                                            ? input->grad.data() + ((static_cast<size_t>(n) * C + c) * H) * W
                                            : nullptr;
                        double* wgmap = weight->requires_grad
                                            ? weight->grad.data() + ((static_cast<size_t>(k) * C + c) * kh) * kw
                                            : nullptr;
                        for (int ky = 0; ky < kh; ++ky) {
                            for (int kx = 0; kx < kw; ++kx) {
                                const double wv = wmap[ky * kw + kx];
                                double wacc = 0.0;
                                for (int oy = 0; oy < Ho; ++oy) {
                                    const int iy = oy * stride + ky - padding;
                                    if (iy < 0 || iy >= H) continue;
                                    const double* grow = gmap + static_cast<size_t>(oy) * Wo;
                                    const double* irow = imap + static_cast<size_t>(iy) * W;
                                    double* igrow = igmap ? igmap + static_cast<size_t>(iy) * W : nullptr;
                                    for (int ox = 0; ox < Wo; ++ox) {
                                        const int ix = ox * stride + kx - padding;
                                        if (ix < 0 || ix >= W) continue;
                                        const double g = grow[ox];
                                        if (igrow) igrow[ix] += wv * g;
                                        wacc += irow[ix] * g;
                                    }
                                }
                                if (wgmap) wgmap[ky * kw + kx] += wacc;
                            }
                        }
                    }
                }
            }
        });
    }
    return out;
}

TensorPtr relu(Tape& tape, const TensorPtr& x) {
    auto out = Tensor::create(x->shape, x->requires_grad);
    for (size_t i = 0; i < x->values.size(); ++i)
        out->values[i] = x->values[i] > 0.0 ? x->values[i] : 0.0;
    if (x->requires_grad) {
        tape.record([x, out]() {
            // subgradient at 0 is 0
            for (size_t i = 0; i < x->values.size(); ++i)
                if (x->values[i] > 0.0) x->grad[i] += out->grad[i];
        });
    }
    return out;
}

TensorPtr dropout(Tape& tape, const TensorPtr& x, double p, bool training, Rng& rng) {
    if (!(p >= 0.0 && p < 1.0))
        throw DomainError("dropout: p must be in [0, 1)");
    if (!training || p == 0.0) {
        auto out = Tensor::create(x->shape, x->requires_grad);
        out->values = x->values;
        if (x->requires_grad) {
            tape.record([x, out]() {
                for (size_t i = 0; i < x->grad.size(); ++i) x->grad[i] += out->grad[i];
            });
        }
        return out;
    }
    auto keep = std::make_shared<std::vector<uint8_t>>(x->values.size());
    const double inv_keep = 1.0 / (1.0 - p);
    auto out = Tensor::create(x->shape, x->requires_grad);
    for (size_t i = 0; i < x->values.size(); ++i) {
        bool k = !rng.bernoulli(p);
        (*keep)[i] = k;
        out->values[i] = k ? x->values[i] * inv_keep : 0.0;
    }
    check_finite(out, "dropout");
    if (x->requires_grad) {
        tape.record([x, out, keep, inv_keep]() {
            for (size_t i = 0; i < x->grad.size(); ++i)
                if ((*keep)[i]) x->grad[i] += out->grad[i] * inv_keep;
        });
    }
    return out;
}

TensorPtr spatial_sum(Tape& tape, const TensorPtr& x) {
    if (x->rank() != 4)
        throw ShapeError("spatial_sum: expected rank-4 input [N,C,H,W]");
    const int N = x->dim(0), C = x->dim(1), H = x->dim(2), W = x->dim(3);
    auto out = Tensor::create({N, C}, x->requires_grad);
    const size_t hw = static_cast<size_t>(H) * W;
    for (int n = 0; n < N; ++n)
        for (int c = 0; c < C; ++c) {
            const double* m = x->values.data() + (static_cast<size_t>(n) * C + c) * hw;
            double acc = 0.0;
            for (size_t i = 0; i < hw; ++i) acc += m[i];
            out->values[static_cast<size_t>(n) * C + c] = acc;
        }
    check_finite(out, "spatial_sum");
    if (x->requires_grad) {
        tape.record([x, out, N, C, hw]() {
            for (int n = 0; n < N; ++n)
                for (int c = 0; c < C; ++c) {
                    const double g = out->grad[static_cast<size_t>(n) * C + c];
                    double* m = x->grad.data() + (static_cast<size_t>(n) * C + c) * hw;
                    for (size_t i = 0; i < hw; ++i) m[i] += g;
                }
        });
    }
    return out;
}

TensorPtr add(Tape& tape, const TensorPtr& a, const TensorPtr& b) {
    require_same_shape(a, b, "add");
    auto out = Tensor::create(a->shape, a->requires_grad || b->requires_grad);
    for (size_t i = 0; i < a->values.size(); ++i)
        out->values[i] = a->values[i] + b->values[i];
    check_finite(out, "add");
    if (out->requires_grad) {
        tape.record([a, b, out]() {
            for (size_t i = 0; i < out->grad.size(); ++i) {
                if (a->requires_grad) a->grad[i] += out->grad[i];
                if (b->requires_grad) b->grad[i] += out->grad[i];
            }
        });
    }
    return out;
}

TensorPtr sub(Tape& tape, const TensorPtr& a, const TensorPtr& b) {
    require_same_shape(a, b, "sub");
    auto out = Tensor::create(a->shape, a->requires_grad || b->requires_grad);
    for (size_t i = 0; i < a->values.size(); ++i)
        out->values[i] = a->values[i] - b->values[i];
    check_finite(out, "sub");
    if (out->requires_grad) {
        tape.record([a, b, out]() {
            for (size_t i = 0; i < out->grad.size(); ++i) {
                if (a->requires_grad) a->grad[i] += out->grad[i];
                if (b->requires_grad) b->grad[i] -= out->grad[i];
            }
        });
    }
    return out;
}

TensorPtr mul(Tape& tape, const TensorPtr& a, const TensorPtr& b) {
    require_same_shape(a, b, "mul");
    auto out = Tensor::create(a->shape, a->requires_grad || b->requires_grad);
    for (size_t i = 0; i < a->values.size(); ++i)
        out->values[i] = a->values[i] * b->values[i];
    check_finite(out, "mul");
    if (out->requires_grad) {
        tape.record([a, b, out]() {
            for (size_t i = 0; i < out->grad.size(); ++i) {
                if (a->requires_grad) a->grad[i] += out->grad[i] * b->values[i];
                if (b->requires_grad) b->grad[i] += out->grad[i] * a->values[i];
            }
        });
    }
    return out;
}

TensorPtr scale(Tape& tape, const TensorPtr& x, double s) {
    auto out = Tensor::create(x->shape, x->requires_grad);
    for (size_t i = 0; i < x->values.size(); ++i)
        out->values[i] = x->values[i] * s;
    check_finite(out, "scale");
    if (x->requires_grad) {
        tape.record([x, out, s]() {
            for (size_t i = 0; i < x->grad.size(); ++i) x->grad[i] += out->grad[i] * s;
        });
    }
    return out;
}

TensorPtr sum_all(Tape& tape, const TensorPtr& x) {
    auto out = Tensor::create({1}, x->requires_grad);
    double acc = 0.0;
    for (double v : x->values) acc += v;
    out->values[0] = acc;
    check_finite(out, "sum_all");
    if (x->requires_grad) {
        tape.record([x, out]() {
            const double g = out->grad[0];
            for (size_t i = 0; i < x->grad.size(); ++i) x->grad[i] += g;
        });
    }
    return out;
}

TensorPtr mean_all(Tape& tape, const TensorPtr& x) {
    auto s = sum_all(tape, x);
    return scale(tape, s, 1.0 / static_cast<double>(x->size()));
}

TensorPtr clamp_min(Tape& tape, const TensorPtr& x, double floor) {
    auto out = Tensor::create(x->shape, x->requires_grad);
    for (size_t i = 0; i < x->values.size(); ++i)
        out->values[i] = x->values[i] > floor ? x->values[i] : floor;
    check_finite(out, "clamp_min");
    if (x->requires_grad) {
        tape.record([x, out, floor]() {
            for (size_t i = 0; i < x->grad.size(); ++i)
                if (x->values[i] > floor) x->grad[i] += out->grad[i];
        });
    }
    return out;
}

TensorPtr broadcast_div_channels(Tape& tape, const TensorPtr& x, const TensorPtr& d) {
    if (x->rank() != 4 || d->rank() != 2)
        throw ShapeError("broadcast_div_channels: expected x [N,C,H,W], d [N,C]");
    const int N = x->dim(0), C = x->dim(1), H = x->dim(2), W = x->dim(3);
    if (d->dim(0) != N || d->dim(1) != C)
        throw ShapeError("broadcast_div_channels: divisor shape mismatch");
    const size_t hw = static_cast<size_t>(H) * W;
    auto out = Tensor::create(x->shape, x->requires_grad || d->requires_grad);
    for (int n = 0; n < N; ++n)
        for (int c = 0; c < C; ++c) {
            const double dv = d->values[static_cast<size_t>(n) * C + c];
            const double* src = x->values.data() + (static_cast<size_t>(n) * C + c) * hw;
            double* dst = out->values.data() + (static_cast<size_t>(n) * C + c) * hw;
            for (size_t i = 0; i < hw; ++i) dst[i] = src[i] / dv;
        }
    check_finite(out, "broadcast_div_channels");
    if (out->requires_grad) {
        tape.record([x, d, out, N, C, hw]() {
            for (int n = 0; n < N; ++n)
                for (int c = 0; c < C; ++c) {
                    const size_t nc = static_cast<size_t>(n) * C + c;
                    const double dv = d->values[nc];
                    const double* g = out->grad.data() + nc * hw;
                    if (x->requires_grad) {
                        double* xg = x->grad.data() + nc * hw;
                        for (size_t i = 0; i < hw; ++i) xg[i] += g[i] / dv;
                    }
                    if (d->requires_grad) {
                        const double* ov = out->values.data() + nc * hw;
                        double acc = 0.0;
                        for (size_t i = 0; i < hw; ++i) acc += g[i] * ov[i];
                        d->grad[nc] -= acc / dv;
                    }
                }
        });
    }
    return out;
}

TensorPtr normalize_rows(Tape& tape, const TensorPtr& x) {
    if (x->rank() != 2)
        throw ShapeError("normalize_rows: expected rank-2 input [N,C]");
    const int N = x->dim(0), C = x->dim(1);
    auto out = Tensor::create(x->shape, x->requires_grad);
    std::vector<double> norms(static_cast<size_t>(N));
    for (int n = 0; n < N; ++n) {
        const double* row = x->values.data() + static_cast<size_t>(n) * C;
        double s = 0.0;
        for (int c = 0; c < C; ++c) s += row[c] * row[c];
        double nrm = std::sqrt(s);
        if (!(nrm > 0.0))
            throw NumericError("normalize_rows: zero-norm row");
        norms[static_cast<size_t>(n)] = nrm;
        double* orow = out->values.data() + static_cast<size_t>(n) * C;
        for (int c = 0; c < C; ++c) orow[c] = row[c] / nrm;
    }
    check_finite(out, "normalize_rows");
    if (x->requires_grad) {
        // d(x/|x|)/dx = (I - u u^T) / |x|, u = x/|x|
        tape.record([x, out, norms, N, C]() {
            for (int n = 0; n < N; ++n) {
                const double* u = out->values.data() + static_cast<size_t>(n) * C;
                const double* g = out->grad.data() + static_cast<size_t>(n) * C;
                double* xg = x->grad.data() + static_cast<size_t>(n) * C;
                double gu = 0.0;
                for (int c = 0; c < C; ++c) gu += g[c] * u[c];
                const double inv = 1.0 / norms[static_cast<size_t>(n)];
                for (int c = 0; c < C; ++c) xg[c] += (g[c] - gu * u[c]) * inv;
            }
        });
    }
    return out;
}

TensorPtr row_dot(Tape& tape, const TensorPtr& a, const TensorPtr& b) {
    require_same_shape(a, b, "row_dot");
    if (a->rank() != 2)
        throw ShapeError("row_dot: expected rank-2 inputs [N,C]");
    const int N = a->dim(0), C = a->dim(1);
    auto out = Tensor::create({N}, a->requires_grad || b->requires_grad);
    for (int n = 0; n < N; ++n) {
        const double* ar = a->values.data() + static_cast<size_t>(n) * C;
        const double* br = b->values.data() + static_cast<size_t>(n) * C;
        double acc = 0.0;
        for (int c = 0; c < C; ++c) acc += ar[c] * br[c];
        out->values[static_cast<size_t>(n)] = acc;
    }
    check_finite(out, "row_dot");
    if (out->requires_grad) {
        tape.record([a, b, out, N, C]() {
            for (int n = 0; n < N; ++n) {
                const double g = out->grad[static_cast<size_t>(n)];
                for (int c = 0; c < C; ++c) {
                    const size_t i = static_cast<size_t>(n) * C + c;
                    if (a->requires_grad) a->grad[i] += g * b->values[i];
                    if (b->requires_grad) b->grad[i] += g * a->values[i];
                }
            }
        });
    }
    return out;
}

TensorPtr acos_clamped(Tape& tape, const TensorPtr& x, double eps) {
    auto out = Tensor::create(x->shape, x->requires_grad);
    auto clamped = std::make_shared<std::vector<uint8_t>>(x->values.size());
    for (size_t i = 0; i < x->values.size(); ++i) {
        double v = x->values[i];
        bool cl = v <= -1.0 + eps || v >= 1.0 - eps;
        (*clamped)[i] = cl;
        out->values[i] = std::acos(std::clamp(v, -1.0 + eps, 1.0 - eps));
    }
    check_finite(out, "acos_clamped");
    if (x->requires_grad) {
        tape.record([x, out, clamped]() {
            for (size_t i = 0; i < x->grad.size(); ++i) {
                if ((*clamped)[i]) continue;
                const double v = x->values[i];
                x->grad[i] += out->grad[i] * (-1.0 / std::sqrt(1.0 - v * v));
            }
        });
    }
    return out;
}

TensorPtr detach(const TensorPtr& x) {
    auto out = Tensor::create(x->shape, false);
    out->values = x->values;
    return out;
}

void AdamState::init(const std::vector<TensorPtr>& params) {
    m.clear();
    v.clear();
    step = 0;
    for (const auto& p : params) {
        m.emplace_back(p->size(), 0.0);
        v.emplace_back(p->size(), 0.0);
    }
}

void adam_step(const std::vector<TensorPtr>& params, AdamState& state, double lr,
               double beta1, double beta2, double eps) {
    if (!(lr > 0.0))
        throw DomainError("adam_step: learning rate must be positive");
    if (!state.initialized())
        state.init(params);
    if (state.m.size() != params.size())
        throw ConfigError("adam_step: state does not match parameter set");
    ++state.step;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));
    for (size_t t = 0; t < params.size(); ++t) {
        Tensor& p = *params[t];
        auto& m = state.m[t];
        auto& v = state.v[t];
        for (size_t i = 0; i < p.values.size(); ++i) {
            const double g = p.grad[i];
            m[i] = beta1 * m[i] + (1.0 - beta1) * g;
            v[i] = beta2 * v[i] + (1.0 - beta2) * g * g;
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            p.values[i] -= lr * mhat / (std::sqrt(vhat) + eps);
        }
    }
}

double grad_check(const std::function<TensorPtr(Tape&, const std::vector<TensorPtr>&)>& f,
                  const std::vector<TensorPtr>& inputs, double h, int max_coords_per_tensor,
                  uint64_t seed) {
    // analytic pass
    for (const auto& t : inputs) t->zero_grad();
    std::vector<std::vector<double>> analytic;
    {
        Tape tape;
        auto loss = f(tape, inputs);
        if (!loss->is_scalar())
            throw Error("grad_check: function must be scalar-valued");
        tape.backward(loss);
    }
    for (const auto& t : inputs) analytic.push_back(t->grad);

    auto eval = [&]() {
        Tape tape;
        return f(tape, inputs)->values[0];
    };

    Rng rng(derive_seed(seed, 0x67c5));
    double worst = 0.0;
    for (size_t t = 0; t < inputs.size(); ++t) {
        Tensor& x = *inputs[t];
        std::vector<size_t> coords;
        if (max_coords_per_tensor <= 0 ||
            x.values.size() <= static_cast<size_t>(max_coords_per_tensor)) {
            coords.resize(x.values.size());
            for (size_t i = 0; i < coords.size(); ++i) coords[i] = i;
        } else {
            for (int i = 0; i < max_coords_per_tensor; ++i)
                coords.push_back(rng.uniform_index(x.values.size()));
        }
        for (size_t i : coords) {
            const double saved = x.values[i];
            x.values[i] = saved + h;
            const double fp = eval();
            x.values[i] = saved - h;
            const double fm = eval();
            x.values[i] = saved;
            const double numeric = (fp - fm) / (2.0 * h);
            const double a = analytic[t][i];
            // The 1e-4 floor absorbs central-difference roundoff (~eps*|f|/h)
            // on coordinates whose true gradient is zero, e.g. dead ReLU paths.
            const double rel = std::abs(a - numeric) / std::max(1e-4, std::abs(a) + std::abs(numeric));
            worst = std::max(worst, rel);
        }
    }
    return worst;
}

} // namespace c4
