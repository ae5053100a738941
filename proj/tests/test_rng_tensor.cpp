#include <doctest.h>

#include "factorizenet/ops.hpp"
#include "factorizenet/rng.hpp"
#include "factorizenet/tensor.hpp"

using namespace fznet;

TEST_SUITE_BEGIN("rng_tensor");

TEST_CASE("mt19937 stream is the standard one") {
    // The C++ standard pins mt19937's output; this anchors cross-platform
    // reproducibility of every stream we derive from it.
    Rng r(5489);  // mt19937 default seed
    CHECK(r.next_u32() == 3499211612u);
}

TEST_CASE("same seed, same stream") {
    Rng a(123), b(123);
    for (int i = 0; i < 100; ++i) CHECK(a.uniform01() == b.uniform01());
}

TEST_CASE("uniform stays in bounds, uniform_int below n") {
    Rng r(7);
    for (int i = 0; i < 1000; ++i) {
        const float v = r.uniform(-2.0f, 3.0f);
        CHECK(v >= -2.0f);
        CHECK(v < 3.0f);
        CHECK(r.uniform_int(17) < 17u);
    }
}

TEST_CASE("shuffle is a permutation") {
    Rng r(99);
    std::vector<int> v(50);
    for (int i = 0; i < 50; ++i) v[i] = i;
    r.shuffle(v);
    std::vector<int> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < 50; ++i) CHECK(sorted[i] == i);
}

TEST_CASE("derive_seed is label-stable and decorrelated") {
    CHECK(derive_seed(1, "a") == derive_seed(1, "a"));
    CHECK(derive_seed(1, "a") != derive_seed(1, "b"));
    CHECK(derive_seed(1, "a") != derive_seed(2, "a"));
}

TEST_CASE("tensor shape/data mismatch is rejected") {
    CHECK_THROWS_AS(Tensor({2, 2}, {1.0f, 2.0f, 3.0f}), ShapeError);
    CHECK_THROWS_AS(Tensor({0, 2}), ShapeError);
    CHECK_THROWS_AS(Tensor({1, 2, 3, 4, 5}), ShapeError);
}

TEST_CASE("tensor indexing is row-major") {
    Tensor t({2, 3}, {0, 1, 2, 3, 4, 5});
    CHECK(t.at(1, 2) == 5.0f);
    Tensor u({1, 2, 2, 2}, {0, 1, 2, 3, 4, 5, 6, 7});
    CHECK(u.at(0, 1, 1, 0) == 6.0f);
}

TEST_CASE("glorot uniform: bound for fan 3+3 is exactly 1") {
    Rng rng(11);
    const Tensor t = glorot_uniform_init(3, 3, {100}, rng);
    for (const float v : t.data) {
        CHECK(v >= -1.0f);
        CHECK(v <= 1.0f);
    }
}

TEST_CASE("glorot uniform: same seed twice gives identical tensors") {
    Rng a(5), b(5);
    const Tensor ta = glorot_uniform_init(8, 8, {4, 4}, a);
    const Tensor tb = glorot_uniform_init(8, 8, {4, 4}, b);
    CHECK(ta.data == tb.data);
}

TEST_CASE("glorot uniform: empirical variance matches the uniform law") {
    // Var of U(-L, L) is L^2/3 = 2 / (fan_in + fan_out).
    Rng rng(2024);
    const int fan = 48;
    const Tensor t = glorot_uniform_init(fan, fan, {100000}, rng);
    double mean = 0;
    for (const float v : t.data) mean += v;
    mean /= static_cast<double>(t.numel());
    double var = 0;
    for (const float v : t.data) var += (v - mean) * (v - mean);
    var /= static_cast<double>(t.numel());
    const double expected = 2.0 / (fan + fan);
    CHECK(var == doctest::Approx(expected).epsilon(0.05));
}

TEST_CASE("glorot uniform: invalid fans rejected") {
    Rng rng(1);
    CHECK_THROWS_AS(glorot_uniform_init(0, 3, {4}, rng), ConfigError);
}

TEST_SUITE_END();
