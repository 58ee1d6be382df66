#pragma once

#include <string>

#include "c4/cascade.hpp"
#include "c4/train.hpp"

namespace c4 {

// Everything a training run needs, loadable from a flat key-value file.
struct RunConfig {
    TrainConfig train;
    AugmentConfig augment;
    StageNetConfig arch = StageNetConfig::desk_default();
};

// Parses "key = value" lines ('#' starts a comment). Unknown keys are an
// error. Recognized keys:
//   batch_size, learning_rate, pretrain_epochs, finetune_epochs, seed,
//   loss_weights (comma list), stop_gradient (0/1),
//   crop_scale_min, crop_scale_max, rotation_range, output_size,
//   hflip_prob, illum_rescale_min, illum_rescale_max, rescales_per_image,
//   gamma, conv_channels (comma list, last must be 3), conv_kernel,
//   conv_strides (comma list), dropout_p
RunConfig load_run_config(const std::string& path);

void save_run_config(const RunConfig& config, const std::string& path);

} // namespace c4
