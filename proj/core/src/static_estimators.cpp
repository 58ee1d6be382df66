#include "c4/static_estimators.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace c4 {

void MinkowskiConfig::validate() const {
    if (derivative_order < 0 || derivative_order > 2)
        throw ConfigError("MinkowskiConfig: derivative_order must be 0, 1 or 2");
    if (!(minkowski_p >= 1.0))
        throw ConfigError("MinkowskiConfig: minkowski_p must be >= 1");
    if (!(smoothing_sigma >= 0.0) || !std::isfinite(smoothing_sigma))
        throw ConfigError("MinkowskiConfig: smoothing_sigma must be non-negative");
}

MinkowskiConfig gray_world() { return {0, 1.0, 0.0}; }
MinkowskiConfig white_patch() { return {0, MinkowskiConfig::kMinkowskiInf, 0.0}; }
MinkowskiConfig shades_of_gray() { return {0, 6.0, 0.0}; }
MinkowskiConfig gray_edge_1() { return {1, 5.0, 2.0}; }
MinkowskiConfig gray_edge_2() { return {2, 5.0, 2.0}; }
MinkowskiConfig general_gray_world() { return {0, 13.0, 2.0}; }

MinkowskiConfig preset_by_name(const std::string& name) {
    if (name == "gray-world") return gray_world();
    if (name == "white-patch") return white_patch();
    if (name == "shades-of-gray") return shades_of_gray();
    if (name == "gray-edge-1") return gray_edge_1();
    if (name == "gray-edge-2") return gray_edge_2();
    if (name == "general-gray-world") return general_gray_world();
    throw ConfigError("unknown static estimator preset: " + name);
}

namespace {

int reflect(int i, int n) {
    // Reflect-101 style boundary: ... 2 1 | 0 1 2 ... n-1 | n-2 n-3 ...
    if (n == 1) return 0;
    while (i < 0 || i >= n) {
        if (i < 0) i = -i;
        if (i >= n) i = 2 * (n - 1) - i;
    }
    return i;
}

// Central-difference first derivatives along x and y per channel.
void central_diff(const LinearImage& img, int c, std::vector<double>& dx, std::vector<double>& dy) {
    const int h = img.height, w = img.width;
    dx.assign(static_cast<size_t>(h) * w, 0.0);
    dy.assign(static_cast<size_t>(h) * w, 0.0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double xp = img.at(y, reflect(x + 1, w), c);
            double xm = img.at(y, reflect(x - 1, w), c);
            double yp = img.at(reflect(y + 1, h), x, c);
            double ym = img.at(reflect(y - 1, h), x, c);
            dx[static_cast<size_t>(y) * w + x] = 0.5 * (xp - xm);
            dy[static_cast<size_t>(y) * w + x] = 0.5 * (yp - ym);
        }
    }
}

// Second derivatives (unmixed) along x and y.
void central_diff2(const LinearImage& img, int c, std::vector<double>& dxx, std::vector<double>& dyy) {
    const int h = img.height, w = img.width;
    dxx.assign(static_cast<size_t>(h) * w, 0.0);
    dyy.assign(static_cast<size_t>(h) * w, 0.0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double v = img.at(y, x, c);
            double xp = img.at(y, reflect(x + 1, w), c);
            double xm = img.at(y, reflect(x - 1, w), c);
            double yp = img.at(reflect(y + 1, h), x, c);
            double ym = img.at(reflect(y - 1, h), x, c);
            dxx[static_cast<size_t>(y) * w + x] = xp - 2.0 * v + xm;
            dyy[static_cast<size_t>(y) * w + x] = yp - 2.0 * v + ym;
        }
    }
}

} // namespace

LinearImage gaussian_blur(const LinearImage& image, double sigma) {
    if (sigma <= 0.0) return image;
    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> kernel(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        kernel[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
        sum += kernel[i + radius];
    }
    for (double& k : kernel) k /= sum;

    const int h = image.height, w = image.width;
    LinearImage tmp = image;
    LinearImage out = image;
    // horizontal
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c) {
                double acc = 0.0;
                for (int i = -radius; i <= radius; ++i)
                    acc += kernel[i + radius] * image.at(y, reflect(x + i, w), c);
                tmp.at(y, x, c) = acc;
            }
    // vertical
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c) {
                double acc = 0.0;
                for (int i = -radius; i <= radius; ++i)
                    acc += kernel[i + radius] * tmp.at(reflect(y + i, h), x, c);
                out.at(y, x, c) = acc;
            }
    return out;
}

Illuminant estimate_static(const LinearImage& image, const MinkowskiConfig& config) {
    config.validate();
    image.validate();

    size_t unmasked = 0;
    for (size_t p = 0; p < image.pixel_count(); ++p)
        if (!image.has_mask() || image.mask[p] == 0) ++unmasked;
    if (unmasked == 0)
        throw DomainError("estimate_static: image has no unmasked pixel");

    LinearImage blurred = gaussian_blur(image, config.smoothing_sigma);

    const int h = image.height, w = image.width;
    double acc[3] = {0.0, 0.0, 0.0};
    const bool use_max = std::isinf(config.minkowski_p);
    const double p = config.minkowski_p;

    for (int c = 0; c < 3; ++c) {
        std::vector<double> gx, gy;
        if (config.derivative_order == 1)
            central_diff(blurred, c, gx, gy);
        else if (config.derivative_order == 2)
            central_diff2(blurred, c, gx, gy);

        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                if (image.masked(y, x)) continue;
                double v;
                if (config.derivative_order == 0) {
                    v = blurred.at(y, x, c);
                } else {
                    double a = gx[static_cast<size_t>(y) * w + x];
                    double b = gy[static_cast<size_t>(y) * w + x];
                    v = std::sqrt(a * a + b * b);
                }
                v = std::abs(v);
                if (use_max)
                    acc[c] = std::max(acc[c], v);
                else
                    acc[c] += std::pow(v, p);
            }
        }
        if (!use_max)
            acc[c] = std::pow(acc[c], 1.0 / p);
    }

    if (acc[0] <= 0.0 && acc[1] <= 0.0 && acc[2] <= 0.0)
        throw DomainError("estimate_static: degenerate (all-zero) channel statistic");
    return normalize_illuminant(Illuminant{acc[0], acc[1], acc[2]});
}

} // namespace c4
