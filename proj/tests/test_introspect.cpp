#include <doctest.h>

#include <fstream>

#include "factorizenet/arch.hpp"
#include "factorizenet/introspect.hpp"
#include "testutil.hpp"

using namespace fznet;
using testutil::rand_tensor;

TEST_SUITE_BEGIN("introspect");

TEST_CASE("channel_ranges: constant channel has a point range") {
    Tensor t({1, 2, 2, 2});
    for (int h = 0; h < 2; ++h)
        for (int w = 0; w < 2; ++w) {
            t.at(0, 0, h, w) = 5.0f;
            t.at(0, 1, h, w) = static_cast<float>(h + w);
        }
    const auto r = channel_ranges(t, 1);
    REQUIRE(r.size() == 2);
    CHECK(r[0].lo == 5.0f);
    CHECK(r[0].hi == 5.0f);
    CHECK(r[1].lo == 0.0f);
    CHECK(r[1].hi == 2.0f);
}

TEST_CASE("tensor range decomposes into channel ranges") {
    Rng rng(31);
    const Tensor t = rand_tensor<float>({3, 5, 4, 4}, rng, -2.0f, 3.0f);
    const auto rs = channel_ranges(t, 1);
    const Range whole = range_minmax(t);
    float lo = rs[0].lo, hi = rs[0].hi;
    for (const Range& r : rs) {
        lo = std::min(lo, r.lo);
        hi = std::max(hi, r.hi);
        CHECK(r.lo >= whole.lo);
        CHECK(r.hi <= whole.hi);
    }
    CHECK(lo == whole.lo);
    CHECK(hi == whole.hi);
}

TEST_CASE("channel_ranges on weights matches a flatten-and-scan oracle") {
    Rng rng(32);
    const Tensor w = rand_tensor<float>({8, 4, 3, 3}, rng);
    const auto rs = channel_ranges(w, 0);
    REQUIRE(rs.size() == 8);
    const std::size_t per_ch = 4 * 3 * 3;
    for (int o = 0; o < 8; ++o) {
        float lo = w.data[static_cast<std::size_t>(o) * per_ch];
        float hi = lo;
        for (std::size_t i = 0; i < per_ch; ++i) {
            const float v = w.data[static_cast<std::size_t>(o) * per_ch + i];
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        CHECK(rs[static_cast<std::size_t>(o)].lo == lo);
        CHECK(rs[static_cast<std::size_t>(o)].hi == hi);
    }
    CHECK_THROWS_AS(channel_ranges(w, 4), ShapeError);
}

TEST_CASE("average precision of the hand-computed 2-channel example is 0.625") {
    // channel ranges (0,1) and (0,4); tensor range (0,4): (0.25 + 1.0) / 2
    Tensor t({1, 2, 1, 2});
    t.at(0, 0, 0, 0) = 0.0f;
    t.at(0, 0, 0, 1) = 1.0f;
    t.at(0, 1, 0, 0) = 0.0f;
    t.at(0, 1, 0, 1) = 4.0f;
    CHECK(average_precision(t, 1) == 0.625);
}

TEST_CASE("average precision is 1 for full-range channels and single channels") {
    Rng rng(33);
    Tensor t({1, 3, 1, 2});
    for (int c = 0; c < 3; ++c) {
        t.at(0, c, 0, 0) = -1.0f;
        t.at(0, c, 0, 1) = 1.0f;
    }
    CHECK(average_precision(t, 1) == 1.0);

    const Tensor single = rand_tensor<float>({1, 1, 4, 4}, rng);
    CHECK(average_precision(single, 1) == 1.0);
}

TEST_CASE("average precision of a constant tensor is the degenerate 1.0") {
    Tensor t({1, 2, 2, 2});
    t.fill(7.0f);
    bool degenerate = false;
    const double v = avg_precision_from_ranges(channel_ranges(t, 1), range_minmax(t), &degenerate);
    CHECK(v == 1.0);
    CHECK(degenerate);
}

TEST_CASE("average precision is invariant under global affine maps") {
    Rng rng(34);
    const Tensor t = rand_tensor<float>({2, 4, 3, 3}, rng);
    const double base = average_precision(t, 1);
    for (const float a : {2.0f, -3.0f, 0.25f}) {
        Tensor u = t;
        for (auto& v : u.data) v = a * v + 1.5f;
        CHECK(average_precision(u, 1) == doctest::Approx(base).epsilon(1e-5));
    }
}

namespace {

Network trained_ish_net(Rng& rng) {
    Network net = build_network(testutil::tiny_arch(8, 4, {4, 8}, 1, {8, 2}),
                                FactorizationScheme::uniform(2), rng);
    // nudge running stats away from the init defaults
    for (auto& p : net.params) {
        if (p.bn_running_var.numel()) {
            for (auto& v : p.bn_running_var.data) v = rng.uniform(0.5f, 1.5f);
            for (auto& m : p.bn_running_mean.data) m = rng.uniform(-0.2f, 0.2f);
        }
    }
    return net;
}

}  // namespace

TEST_CASE("layer report: three series per conv/dense layer, depth ordered") {
    Rng rng(35);
    const Network net = trained_ish_net(rng);
    Rng data_rng(36);
    const Tensor calib = rand_tensor<float>({12, 3, 8, 8}, data_rng, 0.0f, 1.0f);
    const auto report = collect_layer_report(net, calib);

    const auto convs = net.plan.conv_dense_indices();
    REQUIRE(report.size() == 3 * convs.size());
    for (std::size_t i = 0; i < convs.size(); ++i) {
        CHECK(report[3 * i].kind == StatsKind::Weights);
        CHECK(report[3 * i + 1].kind == StatsKind::BnFoldWeights);
        CHECK(report[3 * i + 2].kind == StatsKind::Activations);
        CHECK(report[3 * i].layer_name == net.plan.layers[static_cast<std::size_t>(convs[i])].name);
        CHECK(report[3 * i].layer_name == report[3 * i + 1].layer_name);
    }

    for (const LayerStats& s : report) {
        CHECK(s.avg_precision >= 0.0);
        CHECK(s.avg_precision <= 1.0);
        for (const Range& r : s.channel_ranges) {
            CHECK(r.lo >= s.tensor_range.lo);
            CHECK(r.hi <= s.tensor_range.hi);
        }
    }

    // dense layers carry no BN: their fold series repeats the weights
    const LayerStats& fc_fold = report[report.size() - 2];
    CHECK(fc_fold.no_bn);
    CHECK(fc_fold.tensor_range.lo == report[report.size() - 3].tensor_range.lo);
}

TEST_CASE("identity-scale BN makes weights and BN-fold weights agree") {
    Rng rng(37);
    Network net = build_network(testutil::tiny_arch(8, 4, {4}, 1, {2}),
                                FactorizationScheme::regular(), rng);
    for (auto& p : net.params) {
        if (p.bn_running_var.numel()) {
            p.bn_gamma.fill(1.0f);
            p.bn_running_mean.fill(0.0f);
            // var + eps == 1 within float rounding
            p.bn_running_var.fill(1.0f - static_cast<float>(p.epsilon));
        }
    }
    Rng data_rng(38);
    const Tensor calib = rand_tensor<float>({6, 3, 8, 8}, data_rng, 0.0f, 1.0f);
    const auto report = collect_layer_report(net, calib);
    for (std::size_t i = 0; i + 2 < report.size(); i += 3) {
        if (report[i + 1].no_bn) continue;
        CHECK(report[i].tensor_range.lo ==
              doctest::Approx(report[i + 1].tensor_range.lo).epsilon(1e-5));
        CHECK(report[i].tensor_range.hi ==
              doctest::Approx(report[i + 1].tensor_range.hi).epsilon(1e-5));
    }
}

TEST_CASE("activation stats do not depend on sample order") {
    Rng rng(39);
    const Network net = trained_ish_net(rng);
    Rng data_rng(40);
    const Tensor calib = rand_tensor<float>({10, 3, 8, 8}, data_rng, 0.0f, 1.0f);

    Tensor reversed(calib.shape);
    const std::size_t img = calib.numel() / 10;
    for (int i = 0; i < 10; ++i) {
        std::copy(calib.ptr() + static_cast<std::size_t>(i) * img,
                  calib.ptr() + static_cast<std::size_t>(i + 1) * img,
                  reversed.ptr() + static_cast<std::size_t>(9 - i) * img);
    }
    const auto a = collect_layer_report(net, calib);
    const auto b = collect_layer_report(net, reversed);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].tensor_range.lo == b[i].tensor_range.lo);
        CHECK(a[i].tensor_range.hi == b[i].tensor_range.hi);
        CHECK(a[i].avg_precision == b[i].avg_precision);
    }
}

TEST_CASE("narrower clip percentiles never widen activation ranges") {
    Rng rng(41);
    const Network net = trained_ish_net(rng);
    Rng data_rng(42);
    const Tensor calib = rand_tensor<float>({16, 3, 8, 8}, data_rng, 0.0f, 1.0f);
    const auto wide = collect_layer_report(net, calib, 0.0, 100.0);
    const auto clipped = collect_layer_report(net, calib, 1.0, 99.0);
    const auto narrow = collect_layer_report(net, calib, 5.0, 95.0);
    for (std::size_t i = 0; i < wide.size(); ++i) {
        if (wide[i].kind != StatsKind::Activations) continue;
        CHECK(clipped[i].tensor_range.lo >= wide[i].tensor_range.lo);
        CHECK(clipped[i].tensor_range.hi <= wide[i].tensor_range.hi);
        CHECK(narrow[i].tensor_range.lo >= clipped[i].tensor_range.lo);
        CHECK(narrow[i].tensor_range.hi <= clipped[i].tensor_range.hi);
    }
}

TEST_CASE("layer stats CSV and JSON emission") {
    Rng rng(43);
    const Network net = trained_ish_net(rng);
    Rng data_rng(44);
    const Tensor calib = rand_tensor<float>({6, 3, 8, 8}, data_rng, 0.0f, 1.0f);
    const auto report = collect_layer_report(net, calib);

    testutil::TempDir tmp("introspect");
    write_layer_stats_csv(report, tmp.str() + "/layerwise.csv");
    write_layer_stats_json(report, tmp.str() + "/layerwise.json");

    std::ifstream is(tmp.str() + "/layerwise.csv");
    std::string header;
    std::getline(is, header);
    CHECK(header == "name,kind,min,max,avg_precision");
    int rows = 0;
    for (std::string line; std::getline(is, line);) {
        if (!line.empty()) ++rows;
    }
    CHECK(rows == static_cast<int>(report.size()));
    CHECK(!testutil::read_file(tmp.path() / "layerwise.json").empty());
}

TEST_SUITE_END();
