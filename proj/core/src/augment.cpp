#include "c4/augment.hpp"

#include <algorithm>
#include <cmath>

#include "c4/errors.hpp"

namespace c4 {

namespace {

constexpr double kDegToRad = M_PI / 180.0;

LinearImage zero_masked(const LinearImage& image) {
    if (!image.has_mask()) return image;
    LinearImage out = image;
    for (size_t p = 0; p < out.pixel_count(); ++p)
        if (out.mask[p])
            for (int c = 0; c < 3; ++c) out.data[p * 3 + c] = 0.0;
    out.mask.clear();
    return out;
}

double sample_bilinear(const LinearImage& img, double y, double x, int c) {
    x = std::clamp(x, 0.0, static_cast<double>(img.width - 1));
    y = std::clamp(y, 0.0, static_cast<double>(img.height - 1));
    const int x0 = static_cast<int>(x);
    const int y0 = static_cast<int>(y);
    const int x1 = std::min(x0 + 1, img.width - 1);
    const int y1 = std::min(y0 + 1, img.height - 1);
    const double fx = x - x0, fy = y - y0;
    return (1 - fy) * ((1 - fx) * img.at(y0, x0, c) + fx * img.at(y0, x1, c)) +
           fy * ((1 - fx) * img.at(y1, x0, c) + fx * img.at(y1, x1, c));
}

// True when the crop square of side s centered at (cx, cy), rotated by
// theta, lies entirely inside the continuous image domain [0,w] x [0,h].
bool crop_valid(double cx, double cy, double s, double theta, int w, int h) {
    const double half = s / 2.0;
    const double ct = std::cos(theta), st = std::sin(theta);
    for (int sy = -1; sy <= 1; sy += 2) {
        for (int sx = -1; sx <= 1; sx += 2) {
            const double dx = sx * half, dy = sy * half;
            const double x = cx + ct * dx - st * dy;
            const double y = cy + st * dx + ct * dy;
            if (x < 0.0 || x > w || y < 0.0 || y > h) return false;
        }
    }
    return true;
}

} // namespace

void AugmentConfig::validate() const {
    if (!(crop_scale_min > 0.0 && crop_scale_max <= 1.0 && crop_scale_min <= crop_scale_max))
        throw ConfigError("AugmentConfig: crop scale range must lie in (0, 1]");
    if (!(rotation_range_degrees >= 0.0 && rotation_range_degrees <= 180.0))
        throw ConfigError("AugmentConfig: rotation range must lie in [0, 180]");
    if (output_size < 1) throw ConfigError("AugmentConfig: output_size must be positive");
    if (!(hflip_prob >= 0.0 && hflip_prob <= 1.0))
        throw ConfigError("AugmentConfig: hflip_prob must be a probability");
    if (!(illum_rescale_min > 0.0 && illum_rescale_max >= illum_rescale_min))
        throw ConfigError("AugmentConfig: bad illuminant rescale range");
    if (rescales_per_image < 0)
        throw ConfigError("AugmentConfig: rescales_per_image must be non-negative");
    if (!(gamma > 0.0)) throw ConfigError("AugmentConfig: gamma must be positive");
}

std::pair<LinearImage, Illuminant> augment_sample(const LinearImage& image,
                                                  const Illuminant& label,
                                                  const AugmentConfig& config, Rng& rng) {
    config.validate();
    if (image.height <= 2 || image.width <= 2)
        throw DomainError("augment_sample: image must be larger than 2x2");
    if (!label.finite_positive())
        throw DomainError("augment_sample: label must be strictly positive");

    const LinearImage src = zero_masked(image);
    const int h = src.height, w = src.width;
    const double shorter = static_cast<double>(std::min(h, w));

    double theta = rng.uniform(-config.rotation_range_degrees, config.rotation_range_degrees) *
                   kDegToRad;
    const double u = rng.uniform(config.crop_scale_min, config.crop_scale_max);
    const double s = u * shorter;

    double cx = 0.0, cy = 0.0;
    bool found = false;
    for (int attempt = 0; attempt < 8; ++attempt) {
        cx = rng.uniform(0.0, static_cast<double>(w));
        cy = rng.uniform(0.0, static_cast<double>(h));
        if (crop_valid(cx, cy, s, theta, w, h)) {
            found = true;
            break;
        }
    }
    if (!found) {
        // An axis-aligned crop of side s <= shorter always fits.
        theta = 0.0;
        const double half = s / 2.0;
        cx = rng.uniform(half, w - half);
        cy = rng.uniform(half, h - half);
    }

    const int out_n = config.output_size;
    LinearImage out(out_n, out_n);
    const double ct = std::cos(theta), st = std::sin(theta);
    for (int oy = 0; oy < out_n; ++oy) {
        const double ty = ((oy + 0.5) / out_n - 0.5) * s;
        for (int ox = 0; ox < out_n; ++ox) {
            const double tx = ((ox + 0.5) / out_n - 0.5) * s;
            // continuous coords -> pixel-center coords
            const double sx = cx + ct * tx - st * ty - 0.5;
            const double sy = cy + st * tx + ct * ty - 0.5;
            for (int c = 0; c < 3; ++c)
                out.at(oy, ox, c) = sample_bilinear(src, sy, sx, c);
        }
    }

    if (rng.bernoulli(config.hflip_prob)) {
        for (int oy = 0; oy < out_n; ++oy)
            for (int ox = 0; ox < out_n / 2; ++ox)
                for (int c = 0; c < 3; ++c)
                    std::swap(out.at(oy, ox, c), out.at(oy, out_n - 1 - ox, c));
    }

    return {gamma_encode(out, config.gamma), label};
}

std::pair<LinearImage, Illuminant> rescale_illuminant_augment(const LinearImage& image,
                                                              const Illuminant& label,
                                                              double lo, double hi, Rng& rng) {
    if (!label.finite_positive())
        throw DomainError("rescale_illuminant_augment: label must be strictly positive");
    if (!(lo > 0.0 && hi >= lo))
        throw DomainError("rescale_illuminant_augment: bad factor range");
    double factors[3];
    for (double& f : factors) f = rng.uniform(lo, hi);

    LinearImage out = image;
    for (size_t p = 0; p < out.pixel_count(); ++p)
        for (int c = 0; c < 3; ++c) out.data[p * 3 + c] *= factors[c];
    Illuminant new_label{label.r * factors[0], label.g * factors[1], label.b * factors[2]};
    return {std::move(out), new_label};
}

LinearImage bilinear_resize(const LinearImage& image, int out_h, int out_w) {
    if (out_h < 1 || out_w < 1)
        throw DomainError("bilinear_resize: output dimensions must be positive");
    LinearImage out(out_h, out_w);
    for (int oy = 0; oy < out_h; ++oy) {
        const double sy = (oy + 0.5) * image.height / out_h - 0.5;
        for (int ox = 0; ox < out_w; ++ox) {
            const double sx = (ox + 0.5) * image.width / out_w - 0.5;
            for (int c = 0; c < 3; ++c)
                out.at(oy, ox, c) = sample_bilinear(image, sy, sx, c);
        }
    }
    return out;
}

LinearImage prepare_eval_input(const LinearImage& image, int output_size, double gamma) {
    LinearImage src = zero_masked(image);
    LinearImage resized = bilinear_resize(src, output_size, output_size);
    return gamma_encode(resized, gamma);
}

} // namespace c4
