#pragma once

#include <string>
#include <vector>

#include "c4/augment.hpp"
#include "c4/cascade.hpp"
#include "c4/dataset.hpp"

namespace c4 {

struct TrainConfig {
    int batch_size = 16;
    double learning_rate = 3e-4;
    int pretrain_epochs = 200;   // phase 1, single stage
    int finetune_epochs = 200;   // phase 2, full cascade
    uint64_t seed = 0;
    std::vector<double> loss_weights; // empty = uniform
    bool stop_gradient = false;

    void validate() const;
};

struct TrainResult {
    CascadeModel model;
    // mean weighted training loss per epoch, in degrees; phase 1 followed
    // by phase 2
    std::vector<double> epoch_loss_deg;
};

// Two-phase schedule: a 1-stage model is trained with the plain angular
// loss, its weights are replicated into all `stages` cascade stages, and
// the cascade is fine-tuned jointly with the multiply-accumulate loss.
// Fixed seed => reproducible loss trace and final parameters.
TrainResult train(const StageNetConfig& arch, int stages, const std::vector<Sample>& dataset,
                  const TrainConfig& train_cfg, const AugmentConfig& augment_cfg);

// Expands the dataset with rescales_per_image illuminant-rescaled copies
// per source sample (the copies replace the originals).
std::vector<Sample> expand_dataset(const std::vector<Sample>& dataset,
                                   const AugmentConfig& cfg, uint64_t seed);

// Runs the cascade on one image (deterministic test-time prep) and returns
// the cumulative estimate of every stage.
std::vector<Illuminant> predict_cascade(const CascadeModel& model, const LinearImage& image,
                                        const AugmentConfig& augment_cfg);

void write_loss_trace_csv(const std::vector<double>& trace, const std::string& path);

} // namespace c4
