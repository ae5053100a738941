#include <doctest.h>

#include <cmath>

#include "factorizenet/ops.hpp"
#include "oracles.hpp"
#include "testutil.hpp"

using namespace fznet;
using testutil::rand_tensor;

TEST_SUITE_BEGIN("layers");

namespace {

LayerParams bn_params(int c, float gamma = 1.0f, float beta = 0.0f) {
    LayerParams p;
    p.kind = LayerKind::BatchNorm;
    p.bn_gamma = Tensor({c});
    p.bn_gamma.fill(gamma);
    p.bn_beta = Tensor({c});
    p.bn_beta.fill(beta);
    p.bn_running_mean = Tensor({c});
    p.bn_running_var = Tensor({c});
    p.bn_running_var.fill(1.0f);
    return p;
}

}  // namespace

TEST_CASE("batchnorm infer with identity stats is (nearly) the identity") {
    Rng rng(21);
    const Tensor x = rand_tensor<float>({2, 3, 4, 4}, rng);
    LayerParams p = bn_params(3);
    p.epsilon = 1e-9;
    const Tensor y = batchnorm_forward(x, p, BnMode::Infer);
    CHECK(testutil::max_abs_diff(x, y) < 1e-6);
}

TEST_CASE("batchnorm train normalizes to mean beta, std |gamma|") {
    Rng rng(22);
    const Tensor x = rand_tensor<float>({4, 2, 5, 5}, rng, -3.0f, 2.0f);
    LayerParams p = bn_params(2, /*gamma=*/1.5f, /*beta=*/0.25f);
    BatchNormCacheT<float> cache;
    const Tensor y = batchnorm_forward(x, p, BnMode::Train, &cache);

    for (int c = 0; c < 2; ++c) {
        double sum = 0, sq = 0;
        int count = 0;
        for (int n = 0; n < 4; ++n)
            for (int h = 0; h < 5; ++h)
                for (int w = 0; w < 5; ++w) {
                    sum += y.at(n, c, h, w);
                    ++count;
                }
        const double mean = sum / count;
        for (int n = 0; n < 4; ++n)
            for (int h = 0; h < 5; ++h)
                for (int w = 0; w < 5; ++w) sq += (y.at(n, c, h, w) - mean) * (y.at(n, c, h, w) - mean);
        const double stddev = std::sqrt(sq / count);
        CHECK(mean == doctest::Approx(0.25).epsilon(1e-4));
        // eps in the denominator shrinks the std slightly below |gamma|
        CHECK(stddev == doctest::Approx(1.5).epsilon(2e-3));
    }
}

TEST_CASE("batchnorm train matches the two-pass oracle") {
    Rng rng(23);
    const Tensor x = rand_tensor<float>({4, 8, 4, 4}, rng, -2.0f, 2.0f);
    LayerParams p = bn_params(8);
    for (auto& g : p.bn_gamma.data) g = rng.uniform(0.5f, 1.5f);
    for (auto& b : p.bn_beta.data) b = rng.uniform(-0.5f, 0.5f);
    BatchNormCacheT<float> cache;
    const Tensor got = batchnorm_forward(x, p, BnMode::Train, &cache);
    const Tensor want = oracle::batchnorm_train(x, p.bn_gamma, p.bn_beta, p.epsilon);
    CHECK(testutil::max_abs_diff(got, want) < 1e-5);
}

TEST_CASE("batchnorm running-stat EMA update") {
    Rng rng(24);
    const Tensor x = rand_tensor<float>({8, 2, 4, 4}, rng, 1.0f, 3.0f);
    LayerParams p = bn_params(2);
    BatchNormCacheT<float> cache;
    (void)batchnorm_forward(x, p, BnMode::Train, &cache);
    update_running_stats(p, cache);
    for (int c = 0; c < 2; ++c) {
        CHECK(p.bn_running_mean.data[c] ==
              doctest::Approx(0.99f * 0.0f + 0.01f * cache.mean.data[c]));
        CHECK(p.bn_running_var.data[c] ==
              doctest::Approx(0.99f * 1.0f + 0.01f * cache.var.data[c]));
    }
}

TEST_CASE("batchnorm rejects negative running variance") {
    Rng rng(25);
    const Tensor x = rand_tensor<float>({1, 2, 2, 2}, rng);
    LayerParams p = bn_params(2);
    p.bn_running_var.data[1] = -0.5f;
    CHECK_THROWS_AS(batchnorm_forward(x, p, BnMode::Infer), ShapeError);
}

TEST_CASE("relu") {
    Tensor x({1, 2}, {-1.0f, 2.0f});
    const Tensor y = relu_forward(x);
    CHECK(y.data[0] == 0.0f);
    CHECK(y.data[1] == 2.0f);
}

TEST_CASE("maxpool 2x2 stride 2 on [[1,2],[3,4]] picks 4") {
    Tensor x({1, 1, 2, 2}, {1.0f, 2.0f, 3.0f, 4.0f});
    const Tensor y = maxpool2d_forward<float>(x, 2, 2);
    CHECK(y.shape == std::vector<int>({1, 1, 1, 1}));
    CHECK(y.data[0] == 4.0f);
}

TEST_CASE("maxpool backward routes gradient to the argmax") {
    Tensor x({1, 1, 2, 2}, {1.0f, 2.0f, 3.0f, 4.0f});
    MaxPoolCache cache;
    (void)maxpool2d_forward(x, 2, 2, &cache);
    Tensor up({1, 1, 1, 1}, {5.0f});
    const Tensor dx = maxpool2d_backward<float>(x.shape, cache, up);
    CHECK(dx.data[0] == 0.0f);
    CHECK(dx.data[3] == 5.0f);
}

TEST_CASE("dense flattens NCHW input") {
    Tensor x({2, 2, 1, 2}, {1, 2, 3, 4, 5, 6, 7, 8});
    LayerParams p;
    p.kind = LayerKind::Dense;
    p.weights = Tensor({1, 4}, {1.0f, 1.0f, 1.0f, 1.0f});
    p.bias = Tensor({1}, {0.5f});
    const Tensor y = dense_forward(x, p);
    CHECK(y.shape == std::vector<int>({2, 1}));
    CHECK(y.at(0, 0) == doctest::Approx(10.5f));
    CHECK(y.at(1, 0) == doctest::Approx(26.5f));
}

TEST_CASE("softmax of uniform logits: probs 0.1, loss ln 10") {
    Tensor logits({3, 10});
    logits.fill(0.7f);
    const std::vector<int> labels = {0, 5, 9};
    const auto r = softmax_crossentropy(logits, labels);
    for (const float p : r.probs.data) CHECK(p == doctest::Approx(0.1f));
    CHECK(r.loss == doctest::Approx(std::log(10.0)).epsilon(1e-6));
}

TEST_CASE("softmax is shift-stable for large logits") {
    Tensor logits({1, 3}, {1000.0f, 1001.0f, 999.0f});
    const Tensor p = softmax(logits);
    CHECK(p.all_finite());
    CHECK(p.at(0, 1) > p.at(0, 0));
    float sum = 0;
    for (const float v : p.data) sum += v;
    CHECK(sum == doctest::Approx(1.0f));
}

TEST_CASE("label out of range is rejected") {
    Tensor logits({1, 3});
    CHECK_THROWS_AS(softmax_crossentropy(logits, {3}), ShapeError);
    CHECK_THROWS_AS(softmax_crossentropy(logits, {-1}), ShapeError);
}

TEST_SUITE_END();
