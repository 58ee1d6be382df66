#include "c4/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace c4 {

namespace {

constexpr double kRadToDeg = 180.0 / M_PI;

// One pass over the dataset. Returns the mean weighted loss in degrees.
double run_epoch(CascadeModel& model, const std::vector<Sample>& dataset,
                 const TrainConfig& cfg, const AugmentConfig& aug, const LossConfig& loss_cfg,
                 AdamState& adam, uint64_t phase, int epoch) {
    const size_t n = dataset.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng(derive_seed(cfg.seed, 0x50FF, phase, static_cast<uint64_t>(epoch)));
    for (size_t i = n; i > 1; --i)
        std::swap(order[i - 1], order[shuffle_rng.uniform_index(i)]);

    auto params = model.parameters();
    double loss_sum = 0.0;
    size_t batches = 0;

    for (size_t start = 0; start < n; start += static_cast<size_t>(cfg.batch_size)) {
        const size_t end = std::min(n, start + static_cast<size_t>(cfg.batch_size));

        std::vector<LinearImage> augmented;
        std::vector<Illuminant> labels;
        for (size_t i = start; i < end; ++i) {
            const Sample& s = dataset[order[i]];
            Rng aug_rng(derive_seed(cfg.seed, 0xA060, phase,
                                    (static_cast<uint64_t>(epoch) << 32) | order[i]));
            auto [img, lbl] = augment_sample(s.image, s.truth, aug, aug_rng);
            augmented.push_back(std::move(img));
            labels.push_back(lbl);
        }
        std::vector<const LinearImage*> ptrs;
        for (const auto& img : augmented) ptrs.push_back(&img);

        Tape tape;
        auto input = batch_to_tensor(ptrs);
        auto truth = illuminants_to_tensor(labels);
        Rng drop_rng(derive_seed(cfg.seed, 0xD201, phase,
                                 (static_cast<uint64_t>(epoch) << 32) | batches));
        auto output = cascade_forward(tape, model, input, /*training=*/true, drop_rng,
                                      cfg.stop_gradient);
        auto loss = multiply_accumulate_loss(tape, output, truth, loss_cfg);
        const double loss_val = loss->values[0];
        if (!std::isfinite(loss_val))
            throw NumericError("train: NaN loss at phase " + std::to_string(phase) + " epoch " +
                               std::to_string(epoch) + " batch " + std::to_string(batches));

        for (auto& p : params) p->zero_grad();
        tape.backward(loss);
        adam_step(params, adam, cfg.learning_rate);

        loss_sum += loss_val;
        ++batches;
    }
    return batches ? loss_sum / static_cast<double>(batches) * kRadToDeg : 0.0;
}

} // namespace

void TrainConfig::validate() const {
    if (batch_size < 1) throw ConfigError("TrainConfig: batch_size must be >= 1");
    if (!(learning_rate > 0.0)) throw ConfigError("TrainConfig: learning_rate must be positive");
    if (pretrain_epochs < 0 || finetune_epochs < 0)
        throw ConfigError("TrainConfig: epoch counts must be non-negative");
}

std::vector<Sample> expand_dataset(const std::vector<Sample>& dataset, const AugmentConfig& cfg,
                                   uint64_t seed) {
    cfg.validate();
    if (cfg.rescales_per_image == 0) return dataset;
    std::vector<Sample> out;
    out.reserve(dataset.size() * static_cast<size_t>(cfg.rescales_per_image));
    for (size_t i = 0; i < dataset.size(); ++i) {
        for (int r = 0; r < cfg.rescales_per_image; ++r) {
            Rng rng(derive_seed(seed, 0x2e5c, i, static_cast<uint64_t>(r)));
            auto [img, lbl] = rescale_illuminant_augment(
                dataset[i].image, dataset[i].truth, cfg.illum_rescale_min, cfg.illum_rescale_max,
                rng);
            Sample s;
            s.image = std::move(img);
            s.truth = lbl;
            s.id = dataset[i].id + "#r" + std::to_string(r);
            out.push_back(std::move(s));
        }
    }
    return out;
}

TrainResult train(const StageNetConfig& arch, int stages, const std::vector<Sample>& dataset,
                  const TrainConfig& train_cfg, const AugmentConfig& augment_cfg) {
    train_cfg.validate();
    augment_cfg.validate();
    arch.validate();
    if (stages < 1) throw ConfigError("train: need at least one stage");
    if (dataset.empty()) throw ConfigError("train: empty dataset");

    LossConfig loss_cfg;
    loss_cfg.weights = train_cfg.loss_weights.empty()
                           ? LossConfig::uniform(stages).weights
                           : train_cfg.loss_weights;
    loss_cfg.validate(stages);

    const std::vector<Sample> expanded = expand_dataset(dataset, augment_cfg, train_cfg.seed);

    TrainResult result;

    // Phase 1: single-stage pretraining with the plain angular loss.
    Rng init_rng(derive_seed(train_cfg.seed, 0x1a17));
    CascadeModel pretrain = make_cascade(arch, 1, init_rng);
    {
        AdamState adam;
        LossConfig single = LossConfig::uniform(1);
        for (int e = 0; e < train_cfg.pretrain_epochs; ++e)
            result.epoch_loss_deg.push_back(
                run_epoch(pretrain, expanded, train_cfg, augment_cfg, single, adam, 1, e));
    }

    // Phase 2: replicate the pretrained stage into every cascade slot and
    // fine-tune jointly.
    CascadeModel model;
    for (int s = 0; s < stages; ++s)
        model.stages.push_back(pretrain.stages[0].clone());
    {
        AdamState adam;
        for (int e = 0; e < train_cfg.finetune_epochs; ++e)
            result.epoch_loss_deg.push_back(
                run_epoch(model, expanded, train_cfg, augment_cfg, loss_cfg, adam, 2, e));
    }

    result.model = std::move(model);
    return result;
}

std::vector<Illuminant> predict_cascade(const CascadeModel& model, const LinearImage& image,
                                        const AugmentConfig& augment_cfg) {
    LinearImage input = prepare_eval_input(image, augment_cfg.output_size, augment_cfg.gamma);
    Tape tape;
    Rng rng(0); // unused at inference (dropout is identity)
    auto t = image_to_tensor(input);
    auto out = cascade_forward(tape, model, t, /*training=*/false, rng);
    std::vector<Illuminant> estimates;
    for (const auto& cum : out.cumulative_estimates)
        estimates.push_back(tensor_row_to_illuminant(cum, 0));
    return estimates;
}

void write_loss_trace_csv(const std::vector<double>& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open loss trace for writing: " + path);
    out << "epoch,mean_loss_deg\n";
    char buf[48];
    for (size_t i = 0; i < trace.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%zu,%.10g\n", i + 1, trace[i]);
        out << buf;
    }
}

} // namespace c4
