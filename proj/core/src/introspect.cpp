#include "factorizenet/introspect.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

#include <json.hpp>

namespace fznet {

const char* stats_kind_name(StatsKind k) {
    switch (k) {
        case StatsKind::Weights: return "weights";
        case StatsKind::BnFoldWeights: return "bn_fold_weights";
        case StatsKind::Activations: return "activations";
    }
    return "?";
}

std::vector<Range> channel_ranges(const Tensor& t, int channel_axis) {
    if (channel_axis < 0 || channel_axis >= t.rank())
        throw ShapeError("channel_ranges: axis out of range for " + shape_str(t.shape));
    if (t.numel() == 0) throw ShapeError("channel_ranges: empty tensor");

    const int channels = t.dim(channel_axis);
    // Row-major: index = outer * (channels * inner) + c * inner + i
    std::size_t inner = 1;
    for (int a = channel_axis + 1; a < t.rank(); ++a) inner *= static_cast<std::size_t>(t.dim(a));
    const std::size_t outer = t.numel() / (inner * static_cast<std::size_t>(channels));

    std::vector<Range> out(static_cast<std::size_t>(channels));
    for (int c = 0; c < channels; ++c) {
        float lo = 0, hi = 0;
        bool first = true;
        for (std::size_t o = 0; o < outer; ++o) {
            const float* p = t.ptr() + (o * channels + static_cast<std::size_t>(c)) * inner;
            for (std::size_t i = 0; i < inner; ++i) {
                if (first) {
                    lo = hi = p[i];
                    first = false;
                } else {
                    lo = std::min(lo, p[i]);
                    hi = std::max(hi, p[i]);
                }
            }
        }
        out[static_cast<std::size_t>(c)] = {lo, hi};
    }
    return out;
}

double avg_precision_from_ranges(const std::vector<Range>& channels, Range tensor,
                                 bool* degenerate) {
    const double tensor_width = static_cast<double>(tensor.width());
    if (degenerate) *degenerate = tensor_width <= 0.0;
    if (tensor_width <= 0.0) return 1.0;
    double acc = 0;
    for (const Range& r : channels) acc += static_cast<double>(r.width()) / tensor_width;
    return acc / static_cast<double>(channels.size());
}

double average_precision(const Tensor& t, int channel_axis) {
    return avg_precision_from_ranges(channel_ranges(t, channel_axis), range_minmax(t), nullptr);
}

namespace {

LayerStats weight_stats(const std::string& name, StatsKind kind, const Tensor& w, bool no_bn) {
    LayerStats s;
    s.layer_name = name;
    s.kind = kind;
    s.channel_axis = 0;  // output-channel axis for conv and dense weights
    s.tensor_range = range_minmax(w);
    s.channel_ranges = channel_ranges(w, 0);
    s.avg_precision = avg_precision_from_ranges(s.channel_ranges, s.tensor_range, &s.degenerate);
    s.no_bn = no_bn;
    return s;
}

}  // namespace

std::vector<LayerStats> collect_layer_report(const Network& net, const CalibrationRecord& record,
                                             const Tensor& calib_inputs) {
    return collect_layer_report(net, calib_inputs, record.lo_pct, record.hi_pct);
}

std::vector<LayerStats> collect_layer_report(const Network& net, const Tensor& calib_inputs,
                                             double lo_pct, double hi_pct, int batch_size) {
    if (calib_inputs.rank() != 4 || calib_inputs.dim(0) < 1)
        throw ShapeError("collect_layer_report: need [N,C,H,W] calibration inputs");
    const auto sites = quant_sites(net.plan);
    for (const QuantSite& s : sites) {
        if (s.bn_idx >= 0 && net.params[s.bn_idx].bn_running_mean.numel() == 0)
            throw ConfigError("collect_layer_report: BatchNorm running stats missing at layer " +
                              net.plan.layers[s.bn_idx].name);
    }

    // Pooled per-channel activation buffers per site. Channel axis is C for
    // rank-4 activations and the feature axis for dense outputs.
    std::vector<std::vector<std::vector<float>>> act(sites.size());
    const int n = calib_inputs.dim(0);
    const int c_in = calib_inputs.dim(1), h_in = calib_inputs.dim(2), w_in = calib_inputs.dim(3);
    const std::size_t img = static_cast<std::size_t>(c_in) * h_in * w_in;

    for (int start = 0; start < n; start += batch_size) {
        const int count = std::min(batch_size, n - start);
        Tensor batch({count, c_in, h_in, w_in});
        std::copy(calib_inputs.ptr() + static_cast<std::size_t>(start) * img,
                  calib_inputs.ptr() + static_cast<std::size_t>(start + count) * img, batch.ptr());
        const std::vector<Tensor> outs = net.forward_all(batch, BnMode::Infer);
        for (std::size_t si = 0; si < sites.size(); ++si) {
            const Tensor& a = outs[static_cast<std::size_t>(sites[si].act_idx)];
            const int channels = a.dim(1);
            if (act[si].empty()) act[si].resize(static_cast<std::size_t>(channels));
            const std::size_t inner = a.numel() / (static_cast<std::size_t>(a.dim(0)) * channels);
            for (int bi = 0; bi < a.dim(0); ++bi) {
                for (int ch = 0; ch < channels; ++ch) {
                    const float* p =
                        a.ptr() + (static_cast<std::size_t>(bi) * channels + ch) * inner;
                    auto& buf = act[si][static_cast<std::size_t>(ch)];
                    buf.insert(buf.end(), p, p + inner);
                }
            }
        }
    }

    std::vector<LayerStats> report;
    for (std::size_t si = 0; si < sites.size(); ++si) {
        const QuantSite& site = sites[si];
        const LayerDesc& d = net.plan.layers[site.layer_idx];
        const LayerParams& p = net.params[site.layer_idx];

        report.push_back(weight_stats(d.name, StatsKind::Weights, p.weights, false));

        if (site.bn_idx >= 0) {
            const LayerParams& bn = net.params[site.bn_idx];
            const auto [w_fold, b_fold] =
                fold_batchnorm(p.weights, p.bias, bn.bn_gamma, bn.bn_beta, bn.bn_running_mean,
                               bn.bn_running_var, bn.epsilon);
            report.push_back(weight_stats(d.name, StatsKind::BnFoldWeights, w_fold, false));
        } else {
            report.push_back(weight_stats(d.name, StatsKind::BnFoldWeights, p.weights, true));
        }

        LayerStats a;
        a.layer_name = d.name;
        a.kind = StatsKind::Activations;
        a.channel_axis = 1;
        // Tensor percentile over the pooled population; channel percentiles per
        // channel. Clipped channel ranges are intersected with the tensor range
        // so containment (and precision <= 1) holds even when a channel's tail
        // sits outside the pooled clip points.
        std::vector<float> pooled;
        for (auto& ch : act[si]) {
            pooled.insert(pooled.end(), ch.begin(), ch.end());
        }
        std::sort(pooled.begin(), pooled.end());
        a.tensor_range = {static_cast<float>(percentile_of_sorted(pooled, lo_pct)),
                          static_cast<float>(percentile_of_sorted(pooled, hi_pct))};
        for (auto& ch : act[si]) {
            std::sort(ch.begin(), ch.end());
            Range r = {static_cast<float>(percentile_of_sorted(ch, lo_pct)),
                       static_cast<float>(percentile_of_sorted(ch, hi_pct))};
            r.lo = std::max(r.lo, a.tensor_range.lo);
            r.hi = std::min(r.hi, a.tensor_range.hi);
            if (r.lo > r.hi) r = {r.lo, r.lo};  // channel entirely outside the clip window
            a.channel_ranges.push_back(r);
        }
        a.avg_precision = avg_precision_from_ranges(a.channel_ranges, a.tensor_range, &a.degenerate);
        report.push_back(std::move(a));
    }
    return report;
}

namespace {

std::string fmt_float(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 9);
    return std::string(buf, res.ptr);
}

}  // namespace

void write_layer_stats_csv(const std::vector<LayerStats>& stats, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw DataError("cannot write layer stats to " + path);
    os << "name,kind,min,max,avg_precision\n";
    for (const LayerStats& s : stats) {
        os << s.layer_name << ',' << stats_kind_name(s.kind) << ',' << fmt_float(s.tensor_range.lo)
           << ',' << fmt_float(s.tensor_range.hi) << ',' << fmt_float(s.avg_precision) << '\n';
    }
}

void write_layer_stats_json(const std::vector<LayerStats>& stats, const std::string& path) {
    nlohmann::json arr = nlohmann::json::array();
    for (const LayerStats& s : stats) {
        nlohmann::json j;
        j["name"] = s.layer_name;
        j["kind"] = stats_kind_name(s.kind);
        j["min"] = s.tensor_range.lo;
        j["max"] = s.tensor_range.hi;
        j["avg_precision"] = s.avg_precision;
        j["channel_axis"] = s.channel_axis;
        j["degenerate"] = s.degenerate;
        if (s.kind == StatsKind::BnFoldWeights) j["no_bn"] = s.no_bn;
        nlohmann::json ch = nlohmann::json::array();
        for (const Range& r : s.channel_ranges) ch.push_back({r.lo, r.hi});
        j["channel_ranges"] = ch;
        arr.push_back(j);
    }
    std::ofstream os(path);
    if (!os) throw DataError("cannot write layer stats to " + path);
    os << arr.dump(2) << '\n';
}

}  // namespace fznet
