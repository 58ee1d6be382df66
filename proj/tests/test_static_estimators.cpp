#include <algorithm>
#include <cmath>

#include <doctest.h>

#include "c4/dataset.hpp"
#include "c4/static_estimators.hpp"

using namespace c4;

namespace {

LinearImage uniform_image(int h, int w, double r, double g, double b) {
    LinearImage img(h, w);
    for (size_t p = 0; p < img.pixel_count(); ++p) {
        img.data[p * 3 + 0] = r;
        img.data[p * 3 + 1] = g;
        img.data[p * 3 + 2] = b;
    }
    return img;
}

// independent channel-mean oracle
Illuminant mean_oracle(const LinearImage& img) {
    double acc[3] = {0, 0, 0};
    size_t n = 0;
    for (size_t p = 0; p < img.pixel_count(); ++p) {
        if (img.has_mask() && img.mask[p]) continue;
        for (int c = 0; c < 3; ++c) acc[c] += img.data[p * 3 + c];
        ++n;
    }
    return normalize_illuminant({acc[0] / n, acc[1] / n, acc[2] / n});
}

// independent channel-max oracle
Illuminant max_oracle(const LinearImage& img) {
    double acc[3] = {0, 0, 0};
    for (size_t p = 0; p < img.pixel_count(); ++p) {
        if (img.has_mask() && img.mask[p]) continue;
        for (int c = 0; c < 3; ++c) acc[c] = std::max(acc[c], img.data[p * 3 + c]);
    }
    return normalize_illuminant({acc[0], acc[1], acc[2]});
}

} // namespace

TEST_CASE("gray-world on a uniform image matches the channel-mean oracle") {
    LinearImage img = uniform_image(8, 8, 0.4, 0.2, 0.2);
    Illuminant e = estimate_static(img, gray_world());
    Illuminant expect = normalize_illuminant({2, 1, 1});
    CHECK(angular_error(e, expect).degrees == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(e.r == doctest::Approx(2.0 / std::sqrt(6.0)).epsilon(1e-12));
}

TEST_CASE("white-patch picks the brightest pixel") {
    LinearImage img = uniform_image(6, 6, 0.1, 0.1, 0.1);
    img.at(2, 3, 0) = 0.9;
    img.at(2, 3, 1) = 0.3;
    img.at(2, 3, 2) = 0.3;
    Illuminant e = estimate_static(img, white_patch());
    Illuminant expect = normalize_illuminant({0.9, 0.3, 0.3});
    CHECK(angular_error(e, expect).degrees == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("gray-edge on a constant image is degenerate") {
    LinearImage img = uniform_image(16, 16, 0.5, 0.5, 0.5);
    CHECK_THROWS_AS(estimate_static(img, gray_edge_1()), DomainError);
    CHECK_THROWS_AS(estimate_static(img, gray_edge_2()), DomainError);
}

TEST_CASE("all-masked image and all-black image are errors") {
    LinearImage img = uniform_image(4, 4, 0.5, 0.5, 0.5);
    img.mask.assign(16, 1);
    CHECK_THROWS_AS(estimate_static(img, gray_world()), DomainError);
    LinearImage black = uniform_image(4, 4, 0.0, 0.0, 0.0);
    CHECK_THROWS_AS(estimate_static(black, gray_world()), DomainError);
}

TEST_CASE("masked pixels are excluded from the statistics") {
    LinearImage img = uniform_image(4, 4, 0.2, 0.2, 0.2);
    // make one pixel a strong outlier, then mask it out
    img.at(0, 0, 0) = 50.0;
    img.mask.assign(16, 0);
    img.mask[0] = 1;
    Illuminant e = estimate_static(img, white_patch());
    CHECK(angular_error(e, {1, 1, 1}).degrees == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(angular_error(mean_oracle(img), estimate_static(img, gray_world())).degrees ==
          doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("scale invariance of the normalized estimate") {
    Rng rng(9);
    MondrianSpec spec;
    spec.size = 24;
    for (const auto& cfg : {gray_world(), white_patch(), shades_of_gray(), gray_edge_1(),
                            gray_edge_2(), general_gray_world()}) {
        auto [img, truth] = generate_mondrian(spec, rng);
        Illuminant base = estimate_static(img, cfg);
        LinearImage scaled = img;
        for (double& v : scaled.data) v *= 4.2;
        Illuminant e = estimate_static(scaled, cfg);
        CHECK(angular_error(base, e).degrees == doctest::Approx(0.0).epsilon(1e-6));
    }
}

TEST_CASE("gray-world matches the mean oracle on random scenes") {
    Rng rng(101);
    MondrianSpec spec;
    spec.size = 32;
    for (int i = 0; i < 10; ++i) {
        auto [img, truth] = generate_mondrian(spec, rng);
        Illuminant e = estimate_static(img, gray_world());
        CHECK(angular_error(e, mean_oracle(img)).degrees == doctest::Approx(0.0).epsilon(1e-8));
        Illuminant m = estimate_static(img, white_patch());
        CHECK(angular_error(m, max_oracle(img)).degrees == doctest::Approx(0.0).epsilon(1e-8));
    }
}

TEST_CASE("large p converges to white-patch") {
    Rng rng(55);
    MondrianSpec spec;
    spec.size = 32;
    for (int i = 0; i < 5; ++i) {
        auto [img, truth] = generate_mondrian(spec, rng);
        MinkowskiConfig big{0, 50.0, 0.0};
        Illuminant e50 = estimate_static(img, big);
        Illuminant wp = estimate_static(img, white_patch());
        CHECK(angular_error(e50, wp).degrees < 1.0);
    }
}

TEST_CASE("preset lookup") {
    CHECK(preset_by_name("gray-world").minkowski_p == 1.0);
    CHECK(std::isinf(preset_by_name("white-patch").minkowski_p));
    CHECK(preset_by_name("shades-of-gray").minkowski_p == 6.0);
    CHECK(preset_by_name("gray-edge-1").derivative_order == 1);
    CHECK(preset_by_name("gray-edge-2").derivative_order == 2);
    CHECK(preset_by_name("general-gray-world").smoothing_sigma == 2.0);
    CHECK_THROWS_AS(preset_by_name("bayes"), ConfigError);
}

TEST_CASE("gaussian blur preserves channel means under reflection padding") {
    Rng rng(77);
    LinearImage img(16, 16);
    for (double& v : img.data) v = rng.uniform(0.0, 1.0);
    LinearImage blurred = gaussian_blur(img, 2.0);
    // a flat image is a fixed point
    LinearImage flat = uniform_image(16, 16, 0.3, 0.6, 0.2);
    LinearImage fb = gaussian_blur(flat, 2.0);
    for (size_t i = 0; i < flat.data.size(); ++i)
        CHECK(fb.data[i] == doctest::Approx(flat.data[i]).epsilon(1e-12));
    CHECK(blurred.data.size() == img.data.size());
}
