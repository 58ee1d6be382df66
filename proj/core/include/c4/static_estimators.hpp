#pragma once

#include <limits>
#include <string>

#include "c4/color.hpp"

namespace c4 {

// One configuration of the Minkowski-norm estimator family. Every classic
// low-level baseline (Gray-World, White-Patch, Shades-of-Gray, Gray-Edge)
// is a point in this space: per channel,
//   e_j proportional to ( sum over unmasked pixels |d^n I_sigma,j|^p )^(1/p)
struct MinkowskiConfig {
    int derivative_order = 0;          // 0, 1 or 2
    double minkowski_p = 1.0;          // >= 1, or kMinkowskiInf for max
    double smoothing_sigma = 0.0;      // Gaussian pre-blur std in pixels

    static constexpr double kMinkowskiInf = std::numeric_limits<double>::infinity();

    void validate() const;
};

// Named presets matching the CLI strings.
MinkowskiConfig gray_world();           // n=0, p=1,  sigma=0
MinkowskiConfig white_patch();          // n=0, p=inf, sigma=0
MinkowskiConfig shades_of_gray();       // n=0, p=6,  sigma=0
MinkowskiConfig gray_edge_1();          // n=1, p=5,  sigma=2
MinkowskiConfig gray_edge_2();          // n=2, p=5,  sigma=2
MinkowskiConfig general_gray_world();   // n=0, p=13, sigma=2

// Maps a CLI preset name (e.g. "gray-world") to its config.
// Throws ConfigError for unknown names.
MinkowskiConfig preset_by_name(const std::string& name);

// Unit-norm illuminant estimate. Masked pixels are excluded from the sums.
// Throws DomainError when no unmasked pixel exists or the accumulated
// statistic is zero in every channel (e.g. Gray-Edge on a constant image).
Illuminant estimate_static(const LinearImage& image, const MinkowskiConfig& config);

// Gaussian blur used by the estimators; exposed for tests. Truncated at
// 3 sigma with reflected boundaries. sigma = 0 is the identity.
LinearImage gaussian_blur(const LinearImage& image, double sigma);

} // namespace c4
