#include <doctest.h>

#include "gradcheck.hpp"
#include "testutil.hpp"

using namespace fznet;

TEST_SUITE_BEGIN("grad");

TEST_CASE("grouped conv backward matches finite differences (check mode)") {
    Rng rng(1001);
    for (const int groups : {1, 2, 4}) {
        const gradcheck::Result r = gradcheck::conv(groups, rng);
        CAPTURE(groups);
        CHECK(r.entries > 0);
        CHECK(r.max_rel_err < 1e-6);
    }
}

TEST_CASE("depthwise conv (f = C_in) backward matches finite differences") {
    Rng rng(1002);
    const gradcheck::Result r = gradcheck::conv(4, rng);  // C_in is 4 in the fixture
    CHECK(r.max_rel_err < 1e-6);
}

TEST_CASE("conv backward at spec h = 1e-6") {
    Rng rng(1003);
    const gradcheck::Result r = gradcheck::conv(2, rng, 1e-6);
    CHECK(r.max_rel_err < 1e-6);
}

TEST_CASE("conv backward, 32-bit mode with h = 1e-3") {
    // float path sanity: same layer checked coarsely in production precision
    Rng rng(1004);
    const int c_in = 4, c_out = 4, hw = 4;
    Tensor x = testutil::rand_tensor<float>({1, c_in, hw, hw}, rng, 0.5f, 1.5f);
    LayerParams p;
    p.kind = LayerKind::Conv2D;
    p.weights = testutil::rand_tensor<float>({c_out, 2, 3, 3}, rng, 0.1f, 1.1f);
    p.bias = testutil::rand_tensor<float>({c_out}, rng, 0.1f, 1.1f);
    p.groups = 2;
    p.padding = 1;
    Tensor readout = testutil::rand_tensor<float>({1, c_out, hw, hw}, rng, 0.5f, 1.5f);

    const auto loss = [&]() {
        const Tensor out = conv2d_forward(x, p);
        double acc = 0;
        for (std::size_t i = 0; i < out.numel(); ++i) acc += out.data[i] * readout.data[i];
        return acc;
    };
    const ConvGradsT<float> g = conv2d_backward(x, p, readout);
    const float h = 1e-3f;
    double max_rel = 0;
    for (std::size_t i = 0; i < p.weights.numel(); ++i) {
        const float saved = p.weights.data[i];
        p.weights.data[i] = saved + h;
        const double lp = loss();
        p.weights.data[i] = saved - h;
        const double lm = loss();
        p.weights.data[i] = saved;
        const double fd = (lp - lm) / (2.0 * h);
        const double an = g.d_weights.data[i];
        if (std::abs(an) < 1e-4) continue;
        max_rel = std::max(max_rel, std::abs(an - fd) / std::max(std::abs(an), std::abs(fd)));
    }
    CHECK(max_rel < 1e-2);
}

TEST_CASE("batchnorm train-mode backward matches finite differences") {
    Rng rng(1005);
    const gradcheck::Result r = gradcheck::batchnorm_train(rng);
    CHECK(r.entries > 0);
    CHECK(r.max_rel_err < 1e-6);
}

TEST_CASE("relu backward matches finite differences") {
    Rng rng(1006);
    CHECK(gradcheck::relu(rng).max_rel_err < 1e-6);
}

TEST_CASE("maxpool backward matches finite differences") {
    Rng rng(1007);
    CHECK(gradcheck::maxpool(rng).max_rel_err < 1e-6);
}

TEST_CASE("dense backward matches finite differences") {
    Rng rng(1008);
    CHECK(gradcheck::dense(rng).max_rel_err < 1e-6);
}

TEST_CASE("softmax cross-entropy backward matches finite differences") {
    Rng rng(1009);
    CHECK(gradcheck::softmax_crossentropy(rng).max_rel_err < 1e-6);
}

TEST_SUITE_END();
