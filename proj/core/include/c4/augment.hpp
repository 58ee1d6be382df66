#pragma once

#include <utility>

#include "c4/color.hpp"
#include "c4/rng.hpp"

namespace c4 {

struct AugmentConfig {
    double crop_scale_min = 0.1;     // fraction of the shorter side
    double crop_scale_max = 1.0;
    double rotation_range_degrees = 30.0; // angle drawn from [-range, +range]
    int output_size = 64;
    double hflip_prob = 0.5;
    double illum_rescale_min = 0.6;
    double illum_rescale_max = 1.4;
    int rescales_per_image = 3;
    double gamma = 2.2;

    void validate() const;
};

// Random rotate -> validity-constrained crop -> bilinear resize ->
// random horizontal flip -> gamma encode. The label is untouched by the
// geometric ops. Masked pixels are zeroed and the mask dropped.
std::pair<LinearImage, Illuminant> augment_sample(const LinearImage& image,
                                                  const Illuminant& label,
                                                  const AugmentConfig& config, Rng& rng);

// Per-channel factors s_j ~ U[lo, hi] applied to both the image and the
// label, so the reflectance (image / label) is unchanged.
std::pair<LinearImage, Illuminant> rescale_illuminant_augment(const LinearImage& image,
                                                              const Illuminant& label,
                                                              double lo, double hi, Rng& rng);

// Deterministic test-time pipeline: zero masked pixels, bilinear resize of
// the full image to output_size^2, gamma encode. No randomness.
LinearImage prepare_eval_input(const LinearImage& image, int output_size, double gamma);

// Bilinear resize helper (clamped sampling), exposed for tests.
LinearImage bilinear_resize(const LinearImage& image, int out_h, int out_w);

} // namespace c4
