#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "c4/errors.hpp"

namespace c4 {

// Relative RGB channel gains of a light source. Components are strictly
// positive; most of the library works with unit-Euclidean-norm instances.
struct Illuminant {
    double r = 0.0;
    double g = 0.0;
    double b = 0.0;

    double operator[](int i) const { return i == 0 ? r : (i == 1 ? g : b); }
    double& operator[](int i) { return i == 0 ? r : (i == 1 ? g : b); }

    double norm() const;
    bool finite_positive() const;
};

// Angle between two illuminant directions, in degrees. Scale-free.
struct AngularError {
    double degrees = 0.0;
};

// H x W x 3 raster of linear radiance values with an optional exclusion
// mask (true = pixel excluded from all statistics and losses).
struct LinearImage {
    int height = 0;
    int width = 0;
    std::vector<double> data;          // h*w*3, interleaved RGB
    std::vector<uint8_t> mask;         // empty, or h*w (nonzero = excluded)

    LinearImage() = default;
    LinearImage(int h, int w) : height(h), width(w), data(static_cast<size_t>(h) * w * 3, 0.0) {}

    size_t pixel_count() const { return static_cast<size_t>(height) * width; }
    bool has_mask() const { return !mask.empty(); }
    bool masked(int y, int x) const {
        return has_mask() && mask[static_cast<size_t>(y) * width + x] != 0;
    }

    double at(int y, int x, int c) const {
        return data[(static_cast<size_t>(y) * width + x) * 3 + c];
    }
    double& at(int y, int x, int c) {
        return data[(static_cast<size_t>(y) * width + x) * 3 + c];
    }

    // Throws DomainError on negative or non-finite radiance, or on a
    // data/mask length that disagrees with height x width.
    void validate() const;
};

// Floor applied to illuminant components before any channelwise division.
inline constexpr double kIlluminantClampFloor = 1e-4;

// Clamp components up to the floor, scale to unit Euclidean norm; repeated
// once if renormalization pushed a component back under the floor.
Illuminant normalize_illuminant(const Illuminant& e);

// arccos of the clamped normalized dot product, in degrees. Symmetric and
// invariant under positive scaling of either argument.
AngularError angular_error(const Illuminant& a, const Illuminant& b);

// Channelwise division of the image by the unit-normalized illuminant.
// The mask passes through unchanged.
LinearImage von_kries_correct(const LinearImage& image, const Illuminant& illuminant);

// Clip values to [0,1] and raise to 1/gamma.
LinearImage gamma_encode(const LinearImage& image, double gamma);

// Inverse of gamma_encode on [0,1]: raise to gamma.
LinearImage gamma_decode(const LinearImage& image, double gamma);

inline constexpr double kDefaultGamma = 2.2;

} // namespace c4
