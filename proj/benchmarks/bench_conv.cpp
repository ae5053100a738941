#include <benchmark/benchmark.h>

#include "factorizenet/arch.hpp"
#include "factorizenet/ops.hpp"
#include "factorizenet/rng.hpp"

using namespace fznet;

namespace {

LayerParams make_conv(int c_in, int c_out, int groups, Rng& rng) {
    LayerParams p;
    p.kind = LayerKind::Conv2D;
    p.weights = glorot_uniform_init(9 * c_in / groups, 9 * c_out / groups,
                                    {c_out, c_in / groups, 3, 3}, rng);
    p.bias = Tensor({c_out});
    p.groups = groups;
    p.padding = 1;
    return p;
}

Tensor make_input(int c, int hw, Rng& rng) {
    Tensor x({4, c, hw, hw});
    for (auto& v : x.data) v = rng.uniform(0.0f, 1.0f);
    return x;
}

}  // namespace

// Factorization sweep: same geometry, growing f. Throughput should rise
// roughly with f as the MAC count falls.
static void ConvForwardGrouped(benchmark::State& state) {
    const int groups = static_cast<int>(state.range(0));
    Rng rng(1);
    const LayerParams p = make_conv(64, 64, groups, rng);
    const Tensor x = make_input(64, 32, rng);
    for (auto _ : state) {
        Tensor y = conv2d_forward(x, p);
        benchmark::DoNotOptimize(y.data.data());
    }
    ConvSpec spec{3, 32, 32, 64, 64, groups, 1, false};
    state.SetItemsProcessed(state.iterations() * 4 * static_cast<std::int64_t>(layer_macs(spec)));
}
BENCHMARK(ConvForwardGrouped)->Arg(1)->Arg(2)->Arg(4)->Arg(16)->Arg(64);

static void ConvBackwardGrouped(benchmark::State& state) {
    const int groups = static_cast<int>(state.range(0));
    Rng rng(2);
    const LayerParams p = make_conv(64, 64, groups, rng);
    const Tensor x = make_input(64, 32, rng);
    const Tensor up = make_input(64, 32, rng);
    for (auto _ : state) {
        ConvGradsT<float> g = conv2d_backward(x, p, up);
        benchmark::DoNotOptimize(g.d_weights.data.data());
    }
}
BENCHMARK(ConvBackwardGrouped)->Arg(1)->Arg(4)->Arg(64);

static void BatchNormTrainForward(benchmark::State& state) {
    Rng rng(3);
    LayerParams p;
    p.kind = LayerKind::BatchNorm;
    p.bn_gamma = Tensor({64});
    p.bn_gamma.fill(1.0f);
    p.bn_beta = Tensor({64});
    p.bn_running_mean = Tensor({64});
    p.bn_running_var = Tensor({64});
    p.bn_running_var.fill(1.0f);
    const Tensor x = make_input(64, 32, rng);
    for (auto _ : state) {
        BatchNormCacheT<float> cache;
        Tensor y = batchnorm_forward(x, p, BnMode::Train, &cache);
        benchmark::DoNotOptimize(y.data.data());
    }
    state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(x.numel()) * 4);
}
BENCHMARK(BatchNormTrainForward);

BENCHMARK_MAIN();
