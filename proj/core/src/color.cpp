#include "c4/color.hpp"

#include <algorithm>
#include <cmath>

namespace c4 {

double Illuminant::norm() const {
    return std::sqrt(r * r + g * g + b * b);
}

bool Illuminant::finite_positive() const {
    return std::isfinite(r) && std::isfinite(g) && std::isfinite(b) && r > 0.0 && g > 0.0 && b > 0.0;
}

void LinearImage::validate() const {
    if (height <= 0 || width <= 0)
        throw DomainError("LinearImage: non-positive dimensions");
    if (data.size() != pixel_count() * 3)
        throw DomainError("LinearImage: data length != height*width*3");
    if (!mask.empty() && mask.size() != pixel_count())
        throw DomainError("LinearImage: mask length != height*width");
    for (double v : data) {
        if (!std::isfinite(v) || v < 0.0)
            throw DomainError("LinearImage: negative or non-finite radiance");
    }
}

Illuminant normalize_illuminant(const Illuminant& e) {
    if (!(std::isfinite(e.r) && std::isfinite(e.g) && std::isfinite(e.b)) ||
        e.r < 0.0 || e.g < 0.0 || e.b < 0.0)
        throw DomainError("normalize_illuminant: components must be finite and non-negative");
    Illuminant out = e;
    // Clamp-then-normalize, applied at most twice. A second pass is needed
    // when the first normalization drops a clamped component back below
    // the floor.
    for (int pass = 0; pass < 2; ++pass) {
        out.r = std::max(out.r, kIlluminantClampFloor);
        out.g = std::max(out.g, kIlluminantClampFloor);
        out.b = std::max(out.b, kIlluminantClampFloor);
        double n = out.norm();
        if (!(n > 0.0) || !std::isfinite(n))
            throw DomainError("normalize_illuminant: degenerate illuminant");
        out.r /= n;
        out.g /= n;
        out.b /= n;
        if (out.r >= kIlluminantClampFloor && out.g >= kIlluminantClampFloor &&
            out.b >= kIlluminantClampFloor)
            break;
    }
    return out;
}

AngularError angular_error(const Illuminant& a, const Illuminant& b) {
    if (!a.finite_positive() || !b.finite_positive())
        throw DomainError("angular_error: components must be finite and strictly positive");
    double dot = a.r * b.r + a.g * b.g + a.b * b.b;
    double c = dot / (a.norm() * b.norm());
    c = std::clamp(c, -1.0, 1.0);
    return AngularError{std::acos(c) * 180.0 / M_PI};
}

LinearImage von_kries_correct(const LinearImage& image, const Illuminant& illuminant) {
    if (!illuminant.finite_positive())
        throw DomainError("von_kries_correct: illuminant must be finite and strictly positive");
    Illuminant e = normalize_illuminant(illuminant);
    if (e.r < 1e-12 || e.g < 1e-12 || e.b < 1e-12)
        throw DomainError("von_kries_correct: degenerate illuminant after normalization");
    LinearImage out = image;
    const size_t n = image.pixel_count();
    for (size_t p = 0; p < n; ++p) {
        out.data[p * 3 + 0] = image.data[p * 3 + 0] / e.r;
        out.data[p * 3 + 1] = image.data[p * 3 + 1] / e.g;
        out.data[p * 3 + 2] = image.data[p * 3 + 2] / e.b;
    }
    return out;
}

LinearImage gamma_encode(const LinearImage& image, double gamma) {
    if (!(gamma > 0.0) || !std::isfinite(gamma))
        throw DomainError("gamma_encode: gamma must be positive");
    LinearImage out = image;
    const double inv = 1.0 / gamma;
    for (double& v : out.data)
        v = std::pow(std::clamp(v, 0.0, 1.0), inv);
    return out;
}

LinearImage gamma_decode(const LinearImage& image, double gamma) {
    if (!(gamma > 0.0) || !std::isfinite(gamma))
        throw DomainError("gamma_decode: gamma must be positive");
    LinearImage out = image;
    for (double& v : out.data)
        v = std::pow(std::clamp(v, 0.0, 1.0), gamma);
    return out;
}

} // namespace c4
