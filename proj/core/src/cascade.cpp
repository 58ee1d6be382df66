#include "c4/cascade.hpp"

#include <cmath>

namespace c4 {

void StageNetConfig::validate() const {
    if (layers.empty())
        throw ConfigError("StageNetConfig: at least one conv layer required");
    if (layers.back().out_channels != 3)
        throw ConfigError("StageNetConfig: final conv must emit exactly 3 channels");
    for (const auto& l : layers) {
        if (l.out_channels < 1 || l.kernel < 1 || l.stride < 1 || l.padding < 0)
            throw ConfigError("StageNetConfig: invalid conv layer spec");
    }
    if (!(dropout_p >= 0.0 && dropout_p < 1.0))
        throw ConfigError("StageNetConfig: dropout_p must be in [0, 1)");
}

StageNetConfig StageNetConfig::desk_default() {
    StageNetConfig cfg;
    cfg.layers = {
        {8, 3, 2, 1},
        {16, 3, 2, 1},
        {16, 3, 1, 1},
        {3, 3, 1, 1},
    };
    cfg.dropout_p = 0.5;
    return cfg;
}

void StageNet::init(const StageNetConfig& cfg, Rng& rng) {
    cfg.validate();
    config = cfg;
    weights.clear();
    biases.clear();
    int in_channels = 3;
    for (const auto& l : cfg.layers) {
        auto w = Tensor::create({l.out_channels, in_channels, l.kernel, l.kernel}, true);
        const double std = std::sqrt(2.0 / (in_channels * l.kernel * l.kernel));
        for (double& v : w->values) v = rng.normal() * std;
        auto b = Tensor::create({l.out_channels}, true);
        for (double& v : b->values) v = 0.1;
        weights.push_back(w);
        biases.push_back(b);
        in_channels = l.out_channels;
    }
}

std::vector<TensorPtr> StageNet::parameters() const {
    std::vector<TensorPtr> out;
    for (size_t i = 0; i < weights.size(); ++i) {
        out.push_back(weights[i]);
        out.push_back(biases[i]);
    }
    return out;
}

StageNet StageNet::clone() const {
    StageNet copy;
    copy.config = config;
    for (const auto& w : weights)
        copy.weights.push_back(Tensor::from_values(w->shape, w->values, true));
    for (const auto& b : biases)
        copy.biases.push_back(Tensor::from_values(b->shape, b->values, true));
    return copy;
}

std::vector<TensorPtr> CascadeModel::parameters() const {
    std::vector<TensorPtr> out;
    for (const auto& s : stages)
        for (const auto& p : s.parameters())
            out.push_back(p);
    return out;
}

CascadeModel make_cascade(const StageNetConfig& cfg, int stages, Rng& rng) {
    if (stages < 1)
        throw ConfigError("make_cascade: need at least one stage");
    CascadeModel model;
    for (int i = 0; i < stages; ++i) {
        StageNet net;
        net.init(cfg, rng);
        model.stages.push_back(std::move(net));
    }
    return model;
}

void LossConfig::validate(int stages) const {
    if (static_cast<int>(weights.size()) != stages)
        throw ConfigError("LossConfig: weight count does not match stage count");
    bool any = false;
    for (double w : weights) {
        if (w < 0.0 || !std::isfinite(w))
            throw ConfigError("LossConfig: weights must be non-negative and finite");
        if (w > 0.0) any = true;
    }
    if (!any)
        throw ConfigError("LossConfig: at least one weight must be positive");
}

LossConfig LossConfig::uniform(int stages) {
    return LossConfig{std::vector<double>(static_cast<size_t>(stages), 1.0)};
}

TensorPtr stage_forward(Tape& tape, const StageNet& net, const TensorPtr& image,
                        bool training, Rng& rng) {
    const size_t n_layers = net.weights.size();
    TensorPtr x = image;
    try {
        for (size_t i = 0; i < n_layers; ++i) {
            if (i + 1 == n_layers)
                x = dropout(tape, x, net.config.dropout_p, training, rng);
            x = conv2d(tape, x, net.weights[i], net.biases[i], net.config.layers[i].stride,
                       net.config.layers[i].padding);
            x = relu(tape, x);
        }
    } catch (const NumericError& e) {
        throw NumericError(std::string("stage_forward: ") + e.what());
    }
    auto summed = spatial_sum(tape, x);
    auto clamped = clamp_min(tape, summed, kIlluminantClampFloor);
    return normalize_rows(tape, clamped);
}

CascadeOutput cascade_forward(Tape& tape, const CascadeModel& model, const TensorPtr& image,
                              bool training, Rng& rng, bool stop_gradient) {
    if (model.num_stages() < 1)
        throw ConfigError("cascade_forward: empty model");
    CascadeOutput out;
    TensorPtr current = image;
    for (int l = 0; l < model.num_stages(); ++l) {
        TensorPtr estimate;
        try {
            estimate = stage_forward(tape, model.stages[static_cast<size_t>(l)], current,
                                     training, rng);
        } catch (const Error& e) {
            throw NumericError("cascade stage " + std::to_string(l) + ": " + e.what());
        }
        out.stage_estimates.push_back(estimate);
        if (l == 0) {
            out.cumulative_estimates.push_back(estimate);
        } else {
            auto prod = mul(tape, out.cumulative_estimates.back(), estimate);
            out.cumulative_estimates.push_back(normalize_rows(tape, prod));
        }
        if (l + 1 < model.num_stages()) {
            auto divisor = stop_gradient ? detach(estimate) : estimate;
            current = broadcast_div_channels(tape, current, divisor);
        }
    }
    return out;
}

TensorPtr multiply_accumulate_loss(Tape& tape, const CascadeOutput& output,
                                   const TensorPtr& truth, const LossConfig& config) {
    const int stages = static_cast<int>(output.cumulative_estimates.size());
    config.validate(stages);
    auto truth_unit = normalize_rows(tape, truth);
    TensorPtr total;
    for (int l = 0; l < stages; ++l) {
        auto cosines = row_dot(tape, output.cumulative_estimates[static_cast<size_t>(l)], truth_unit);
        auto radians = acos_clamped(tape, cosines);
        auto stage_loss = mean_all(tape, radians);
        auto weighted = scale(tape, stage_loss, config.weights[static_cast<size_t>(l)]);
        total = total ? add(tape, total, weighted) : weighted;
    }
    return total;
}

TensorPtr multiply_accumulate_loss(Tape& tape, const CascadeOutput& output,
                                   const TensorPtr& truth) {
    const int stages = static_cast<int>(output.cumulative_estimates.size());
    return multiply_accumulate_loss(tape, output, truth, LossConfig::uniform(stages));
}

TensorPtr batch_to_tensor(const std::vector<const LinearImage*>& images) {
    if (images.empty())
        throw ConfigError("batch_to_tensor: empty batch");
    const int h = images[0]->height, w = images[0]->width;
    const int n = static_cast<int>(images.size());
    auto t = Tensor::create({n, 3, h, w});
    const size_t hw = static_cast<size_t>(h) * w;
    for (int i = 0; i < n; ++i) {
        const LinearImage& img = *images[static_cast<size_t>(i)];
        if (img.height != h || img.width != w)
            throw ShapeError("batch_to_tensor: images have differing dimensions");
        for (int c = 0; c < 3; ++c) {
            double* dst = t->values.data() + (static_cast<size_t>(i) * 3 + c) * hw;
            for (size_t p = 0; p < hw; ++p)
                dst[p] = (img.has_mask() && img.mask[p]) ? 0.0 : img.data[p * 3 + c];
        }
    }
    return t;
}

TensorPtr image_to_tensor(const LinearImage& image) {
    return batch_to_tensor({&image});
}

TensorPtr illuminants_to_tensor(const std::vector<Illuminant>& labels) {
    auto t = Tensor::create({static_cast<int>(labels.size()), 3});
    for (size_t i = 0; i < labels.size(); ++i) {
        Illuminant e = normalize_illuminant(labels[i]);
        t->values[i * 3 + 0] = e.r;
        t->values[i * 3 + 1] = e.g;
        t->values[i * 3 + 2] = e.b;
    }
    return t;
}

Illuminant tensor_row_to_illuminant(const TensorPtr& t, int row) {
    if (t->rank() != 2 || t->dim(1) != 3 || row < 0 || row >= t->dim(0))
        throw ShapeError("tensor_row_to_illuminant: expected [N,3] and a valid row");
    const double* v = t->values.data() + static_cast<size_t>(row) * 3;
    return Illuminant{v[0], v[1], v[2]};
}

} // namespace c4
