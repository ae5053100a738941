#include <benchmark/benchmark.h>

#include "factorizenet/quantize.hpp"
#include "factorizenet/rng.hpp"

using namespace fznet;

static void QuantizeRoundTrip(benchmark::State& state) {
    Rng rng(10);
    Tensor t({static_cast<int>(state.range(0))});
    for (auto& v : t.data) v = rng.uniform(-4.0f, 4.0f);
    for (auto _ : state) {
        Tensor back = dequantize(quantize_affine(t, {-4.0f, 4.0f}));
        benchmark::DoNotOptimize(back.data.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(QuantizeRoundTrip)->Range(1 << 10, 1 << 20);

static void FakeQuantize(benchmark::State& state) {
    Rng rng(11);
    Tensor t({static_cast<int>(state.range(0))});
    for (auto& v : t.data) v = rng.uniform(-4.0f, 4.0f);
    for (auto _ : state) {
        Tensor q = fake_quantize(t, {-4.0f, 4.0f});
        benchmark::DoNotOptimize(q.data.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(FakeQuantize)->Range(1 << 10, 1 << 20);

static void PercentileRange(benchmark::State& state) {
    Rng rng(12);
    Tensor t({static_cast<int>(state.range(0))});
    for (auto& v : t.data) v = static_cast<float>(rng.normal());
    for (auto _ : state) {
        Range r = range_percentile(t, 1.0, 99.0);
        benchmark::DoNotOptimize(r);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(PercentileRange)->Range(1 << 12, 1 << 20);

static void FoldBatchNorm(benchmark::State& state) {
    Rng rng(13);
    Tensor w({128, 64, 3, 3});
    for (auto& v : w.data) v = rng.uniform(-0.5f, 0.5f);
    Tensor b({128}), gamma({128}), beta({128}), mean({128}), var({128});
    gamma.fill(1.2f);
    var.fill(0.8f);
    for (auto _ : state) {
        auto folded = fold_batchnorm(w, b, gamma, beta, mean, var, 1e-3);
        benchmark::DoNotOptimize(folded.first.data.data());
    }
}
BENCHMARK(FoldBatchNorm);
