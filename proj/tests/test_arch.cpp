#include <doctest.h>

#include "factorizenet/arch.hpp"
#include "oracles.hpp"
#include "testutil.hpp"

using namespace fznet;

TEST_SUITE_BEGIN("arch");

namespace {

std::vector<const LayerDesc*> gconvs(const NetworkPlan& plan) {
    std::vector<const LayerDesc*> out;
    for (const LayerDesc& d : plan.layers) {
        if (d.is_conv() && d.role == LayerRole::GroupConv) out.push_back(&d);
    }
    return out;
}

}  // namespace

TEST_CASE("layer_macs: frozen reference values") {
    // 3x3, 32x32 output, 64->64, f=1: 9 * 1024 * 4096
    ConvSpec s{3, 32, 32, 64, 64, 1, 1, false};
    CHECK(layer_macs(s) == 37748736ull);

    // f=2 is exactly half (Eq. 2 vs Eq. 1)
    s.groups = 2;
    CHECK(layer_macs(s) == 18874368ull);

    // 1x1 pointwise, 4x4 output, 2->3
    ConvSpec pw{1, 4, 4, 2, 3, 1, 1, false};
    CHECK(layer_macs(pw) == 96ull);
}

TEST_CASE("layer_macs matches the loop-nest multiply counter") {
    // pad=0 so every counted multiply is actually executed
    struct Case { int c_in, c_out, hw, k, groups; };
    for (const Case c : {Case{4, 8, 8, 3, 1}, Case{4, 8, 8, 3, 2}, Case{8, 8, 6, 3, 8},
                         Case{6, 12, 5, 1, 3}}) {
        const int out_hw = c.hw - c.k + 1;
        ConvSpec spec{c.k, out_hw, out_hw, c.c_in, c.c_out, c.groups, 1, false};
        CHECK(layer_macs(spec) ==
              oracle::conv2d_mac_count(c.c_in, c.c_out, c.hw, c.hw, c.k, c.groups, 1, 0));
    }
}

TEST_CASE("macs(f) * f == macs(1) for every divisor f") {
    ConvSpec base{3, 16, 16, 32, 64, 1, 1, false};
    const std::uint64_t m1 = layer_macs(base);
    for (const int f : {2, 4, 8, 16, 32}) {
        ConvSpec s = base;
        s.groups = f;
        CHECK(layer_macs(s) * static_cast<std::uint64_t>(f) == m1);
    }
}

TEST_CASE("conv spec divisibility violations are configuration errors") {
    CHECK_THROWS_AS(layer_macs(ConvSpec{3, 8, 8, 32, 64, 3, 1, false}), ConfigError);
    CHECK_THROWS_AS(layer_macs(ConvSpec{3, 8, 8, 4, 64, 8, 1, false}), ConfigError);
}

TEST_CASE("default-config conv MAC totals, ordered as on the MAC axis") {
    const MacroArchConfig cfg;
    const auto total = [&](const FactorizationScheme& s) {
        return network_macs(plan_network(cfg, s));
    };
    // frozen from an independent per-layer walk of the macroarchitecture
    CHECK(total(FactorizationScheme::regular()) == 190513152ull);
    CHECK(total(FactorizationScheme::uniform(2)) == 107675648ull);
    CHECK(total(FactorizationScheme::reverse_pyramid(2)) == 81723392ull);
    CHECK(total(FactorizationScheme::uniform(4)) == 65208320ull);
    CHECK(total(FactorizationScheme::reverse_pyramid(4)) == 52232192ull);
    CHECK(total(FactorizationScheme::uniform(8)) == 43974656ull);
    CHECK(total(FactorizationScheme::uniform(16)) == 33357824ull);
    CHECK(total(FactorizationScheme::depthwise()) == 24584192ull);

    // strictly decreasing along that ordering
    const std::vector<std::uint64_t> seq = {
        total(FactorizationScheme::regular()),        total(FactorizationScheme::uniform(2)),
        total(FactorizationScheme::reverse_pyramid(2)), total(FactorizationScheme::uniform(4)),
        total(FactorizationScheme::reverse_pyramid(4)), total(FactorizationScheme::uniform(8)),
        total(FactorizationScheme::uniform(16)),      total(FactorizationScheme::depthwise())};
    for (std::size_t i = 1; i < seq.size(); ++i) CHECK(seq[i] < seq[i - 1]);
}

TEST_CASE("network_macs: single-conv plan equals its layer_macs; doubling f shrinks totals") {
    const MacroArchConfig cfg = testutil::tiny_arch();
    NetworkPlan single;
    LayerDesc d;
    d.kind = LayerKind::Conv2D;
    d.name = "only";
    d.kernel = 3;
    d.out_h = d.out_w = 8;
    d.in_channels = 4;
    d.out_channels = 8;
    d.groups = 2;
    single.layers.push_back(d);
    CHECK(network_macs(single) == layer_macs(conv_spec(d)));

    std::uint64_t prev = network_macs(plan_network(cfg, FactorizationScheme::regular()));
    for (const int f : {1, 2, 4, 8}) {
        const std::uint64_t cur = network_macs(plan_network(cfg, FactorizationScheme::uniform(f)));
        if (f > 1) CHECK(cur < prev);
        prev = cur;
    }
}

TEST_CASE("uniform(1) has regular shapes plus pointwise blocks") {
    const MacroArchConfig cfg;
    const NetworkPlan u1 = plan_network(cfg, FactorizationScheme::uniform(1));
    const NetworkPlan reg = plan_network(cfg, FactorizationScheme::regular());
    for (const LayerDesc* d : gconvs(u1)) CHECK(d->groups == 1);
    CHECK(u1.layers.size() > reg.layers.size());
    int pointwise = 0;
    for (const LayerDesc& d : u1.layers)
        if (d.role == LayerRole::Pointwise) ++pointwise;
    CHECK(pointwise == 6);  // 3 stages x 2 blocks
    for (const LayerDesc& d : reg.layers) CHECK(d.role != LayerRole::Pointwise);
}

TEST_CASE("reverse pyramid keeps channels-per-group constant") {
    const MacroArchConfig cfg;  // widths 64/128/256
    const NetworkPlan plan = plan_network(cfg, FactorizationScheme::reverse_pyramid(2));
    std::vector<int> fs;
    for (const LayerDesc* d : gconvs(plan)) {
        CHECK(d->in_channels / d->groups == 32);  // 64 / f_init
        fs.push_back(d->groups);
    }
    CHECK(fs == std::vector<int>({2, 2, 2, 4, 4, 8}));
}

TEST_CASE("reverse pyramid at f_init = stage_widths[0] is the depthwise plan") {
    for (const MacroArchConfig& cfg :
         {MacroArchConfig{}, testutil::tiny_arch(16, 8, {8, 16}, 3, {32, 2})}) {
        const NetworkPlan rp =
            plan_network(cfg, FactorizationScheme::reverse_pyramid(cfg.stage_widths[0]));
        const NetworkPlan dws = plan_network(cfg, FactorizationScheme::depthwise());
        REQUIRE(rp.layers.size() == dws.layers.size());
        for (std::size_t i = 0; i < rp.layers.size(); ++i) {
            const LayerDesc &a = rp.layers[i], &b = dws.layers[i];
            CHECK(a.kind == b.kind);
            CHECK(a.in_channels == b.in_channels);
            CHECK(a.out_channels == b.out_channels);
            CHECK(a.kernel == b.kernel);
            CHECK(a.groups == b.groups);
            CHECK(a.out_h == b.out_h);
        }
        for (const LayerDesc* d : gconvs(rp)) CHECK(d->groups == d->in_channels);
    }
}

TEST_CASE("first conv layer has f = 1 under every scheme") {
    const MacroArchConfig cfg;
    for (const auto& s : {FactorizationScheme::regular(), FactorizationScheme::uniform(8),
                          FactorizationScheme::reverse_pyramid(4), FactorizationScheme::depthwise()}) {
        const NetworkPlan plan = plan_network(cfg, s);
        for (const LayerDesc& d : plan.layers) {
            if (d.is_conv()) {
                CHECK(d.groups == 1);
                CHECK(d.role == LayerRole::Stem);
                break;
            }
        }
    }
}

TEST_CASE("group conv blocks follow the GroupConv-BN-ReLU-Pointwise-BN-ReLU pattern") {
    const NetworkPlan plan = plan_network(MacroArchConfig{}, FactorizationScheme::uniform(4));
    for (std::size_t i = 0; i < plan.layers.size(); ++i) {
        if (plan.layers[i].role != LayerRole::GroupConv) continue;
        REQUIRE(i + 5 < plan.layers.size());
        CHECK(plan.layers[i].has_pointwise_follower);
        CHECK(plan.layers[i + 1].kind == LayerKind::BatchNorm);
        CHECK(plan.layers[i + 2].kind == LayerKind::ReLU);
        CHECK(plan.layers[i + 3].role == LayerRole::Pointwise);
        CHECK(plan.layers[i + 3].kernel == 1);
        CHECK(plan.layers[i + 4].kind == LayerKind::BatchNorm);
        CHECK(plan.layers[i + 5].kind == LayerKind::ReLU);
    }
}

TEST_CASE("progressions") {
    const auto u = progression(ProgressionKind::UniformDoubling, false);
    REQUIRE(u.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(u[i].variant == FactorizationScheme::Variant::Uniform);
        CHECK(u[i].rate == 2 << i);
    }
    const auto rp = progression(ProgressionKind::ReversePyramidDoubling, false);
    REQUIRE(rp.size() == 2);
    CHECK(rp[0].rate == 2);
    CHECK(rp[1].rate == 4);

    const auto full = progression(ProgressionKind::UniformDoubling, true);
    REQUIRE(full.size() == 6);
    CHECK(full.front().variant == FactorizationScheme::Variant::Regular);
    CHECK(full.back().variant == FactorizationScheme::Variant::DepthwiseSeparable);
    CHECK(full.front().label() == "Regular_Conv");
    CHECK(full.back().label() == "DWS_Conv");
}

TEST_CASE("scheme parsing and labels") {
    CHECK(FactorizationScheme::parse("uniform:2").label() == "FactorizeNet-f2");
    CHECK(FactorizationScheme::parse("revpyr:4").label() == "FactorizeNet-finit4");
    CHECK(FactorizationScheme::parse("regular").label() == "Regular_Conv");
    CHECK(FactorizationScheme::parse("dws").label() == "DWS_Conv");
    CHECK(FactorizationScheme::parse("uniform:16").to_string() == "uniform:16");
    CHECK_THROWS_AS(FactorizationScheme::parse("uniform:"), ConfigError);
    CHECK_THROWS_AS(FactorizationScheme::parse("uniform:0"), ConfigError);
    CHECK_THROWS_AS(FactorizationScheme::parse("wat"), ConfigError);
}

TEST_CASE("config validation") {
    MacroArchConfig bad;
    bad.stage_widths = {64, 96};
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    MacroArchConfig stem;
    stem.stem_channels = 32;
    CHECK_THROWS_AS(stem.validate(), ConfigError);

    // f = 3 does not divide the 64-wide layers
    CHECK_THROWS_AS(plan_network(MacroArchConfig{}, FactorizationScheme::uniform(3)), ConfigError);
}

TEST_CASE("build_network initializes weights within the Glorot bound") {
    Rng rng(7);
    const Network net = build_network(testutil::tiny_arch(), FactorizationScheme::uniform(2), rng);
    for (std::size_t i = 0; i < net.plan.layers.size(); ++i) {
        const LayerDesc& d = net.plan.layers[i];
        if (!d.is_conv()) continue;
        const double fan_in = d.kernel * d.kernel * d.in_channels / d.groups;
        const double fan_out = d.kernel * d.kernel * d.out_channels / d.groups;
        const double limit = std::sqrt(6.0 / (fan_in + fan_out));
        for (const float v : net.params[i].weights.data) {
            CHECK(std::abs(v) <= limit + 1e-6);
        }
    }
}

TEST_SUITE_END();
