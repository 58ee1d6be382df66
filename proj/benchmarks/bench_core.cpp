#include <benchmark/benchmark.h>

#include "c4/augment.hpp"
#include "c4/cascade.hpp"
#include "c4/dataset.hpp"
#include "c4/static_estimators.hpp"

using namespace c4;

namespace {

TensorPtr random_batch(int n, int size, Rng& rng) {
    auto t = Tensor::create({n, 3, size, size});
    for (double& v : t->values) v = rng.uniform(0.05, 1.0);
    return t;
}

void BM_Conv2dForward(benchmark::State& state) {
    Rng rng(1);
    auto input = random_batch(1, static_cast<int>(state.range(0)), rng);
    auto weight = Tensor::create({8, 3, 3, 3});
    auto bias = Tensor::create({8});
    for (double& v : weight->values) v = rng.uniform(-0.1, 0.1);
    for (auto _ : state) {
        Tape tape;
        auto out = conv2d(tape, input, weight, bias, 2, 1);
        benchmark::DoNotOptimize(out->values.data());
    }
}
BENCHMARK(BM_Conv2dForward)->Arg(32)->Arg(64)->Arg(128);

void BM_Conv2dBackward(benchmark::State& state) {
    Rng rng(2);
    auto input = random_batch(1, static_cast<int>(state.range(0)), rng);
    auto weight = Tensor::create({8, 3, 3, 3});
    auto bias = Tensor::create({8});
    for (double& v : weight->values) v = rng.uniform(-0.1, 0.1);
    weight->set_requires_grad(true);
    bias->set_requires_grad(true);
    for (auto _ : state) {
        Tape tape;
        auto out = conv2d(tape, input, weight, bias, 2, 1);
        auto loss = sum_all(tape, out);
        weight->zero_grad();
        bias->zero_grad();
        tape.backward(loss);
        benchmark::DoNotOptimize(weight->grad.data());
    }
}
BENCHMARK(BM_Conv2dBackward)->Arg(32)->Arg(64);

void BM_CascadeForward(benchmark::State& state) {
    Rng rng(3);
    auto model = make_cascade(StageNetConfig::desk_default(),
                              static_cast<int>(state.range(0)), rng);
    auto input = random_batch(1, 64, rng);
    for (auto _ : state) {
        Tape tape;
        Rng drop(0);
        auto out = cascade_forward(tape, model, input, false, drop);
        benchmark::DoNotOptimize(out.cumulative_estimates.back()->values.data());
    }
}
BENCHMARK(BM_CascadeForward)->Arg(1)->Arg(3);

void BM_StaticEstimator(benchmark::State& state) {
    Rng rng(4);
    MondrianSpec spec;
    spec.size = 128;
    auto [img, truth] = generate_mondrian(spec, rng);
    for (auto _ : state) {
        Illuminant e = estimate_static(img, gray_edge_1());
        benchmark::DoNotOptimize(e);
    }
}
BENCHMARK(BM_StaticEstimator);

void BM_MondrianGeneration(benchmark::State& state) {
    Rng rng(5);
    MondrianSpec spec;
    spec.size = static_cast<int>(state.range(0));
    for (auto _ : state) {
        auto scene = generate_mondrian(spec, rng);
        benchmark::DoNotOptimize(scene.first.data.data());
    }
}
BENCHMARK(BM_MondrianGeneration)->Arg(64)->Arg(256);

void BM_AugmentSample(benchmark::State& state) {
    Rng rng(6);
    MondrianSpec spec;
    spec.size = 128;
    auto [img, truth] = generate_mondrian(spec, rng);
    AugmentConfig cfg;
    for (auto _ : state) {
        auto out = augment_sample(img, truth, cfg, rng);
        benchmark::DoNotOptimize(out.first.data.data());
    }
}
BENCHMARK(BM_AugmentSample);

} // namespace

BENCHMARK_MAIN();
