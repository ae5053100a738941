#include "factorizenet/quantize.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

namespace fznet {

Range range_minmax(const Tensor& t) {
    if (t.numel() == 0) throw ShapeError("range_minmax: empty tensor");
    float lo = t.data[0], hi = t.data[0];
    for (const float v : t.data) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return {lo, hi};
}

double percentile_of_sorted(const std::vector<float>& sorted, double pct) {
    if (sorted.empty()) throw ShapeError("percentile: empty population");
    if (sorted.size() == 1) return sorted[0];
    const double rank = pct / 100.0 * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(rank);
    if (lo + 1 >= sorted.size()) return sorted.back();
    const double frac = rank - static_cast<double>(lo);
    return static_cast<double>(sorted[lo]) * (1.0 - frac) + static_cast<double>(sorted[lo + 1]) * frac;
}

Range range_percentile(const Tensor& samples, double lo_pct, double hi_pct) {
    if (samples.numel() == 0) throw ShapeError("range_percentile: empty tensor");
    if (!(0.0 <= lo_pct && lo_pct < hi_pct && hi_pct <= 100.0))
        throw ConfigError("range_percentile: need 0 <= lo < hi <= 100");
    std::vector<float> sorted = samples.data;
    std::sort(sorted.begin(), sorted.end());
    return {static_cast<float>(percentile_of_sorted(sorted, lo_pct)),
            static_cast<float>(percentile_of_sorted(sorted, hi_pct))};
}

QuantParams choose_qparams(Range r, int bits) {
    if (r.lo > r.hi) throw ShapeError("quantize: range min > max");
    const double qmax = static_cast<double>((1u << bits) - 1u);
    // Extend so 0 is inside, then round the zero point to an integer. The
    // scale is kept and the range edges move to the nudged grid.
    const double lo = std::min(0.0, static_cast<double>(r.lo));
    const double hi = std::max(0.0, static_cast<double>(r.hi));
    QuantParams qp;
    qp.bits = bits;
    if (hi == lo) {  // all-zero population
        qp.scale = 1.0f;
        qp.zero_point = 0;
        return qp;
    }
    const double scale = (hi - lo) / qmax;
    double zp = -lo / scale;
    zp = std::min(qmax, std::max(0.0, std::round(zp)));
    qp.scale = static_cast<float>(scale);
    qp.zero_point = static_cast<int>(zp);
    return qp;
}

namespace {

inline float fake_quantize_value(float v, float scale, int zero_point, int qmax) {
    const float q = std::round(v / scale) + static_cast<float>(zero_point);
    const float qc = std::min(static_cast<float>(qmax), std::max(0.0f, q));
    return scale * (qc - static_cast<float>(zero_point));
}

}  // namespace

QuantizedTensor quantize_affine(const Tensor& t, Range range) {
    const QuantParams qp = choose_qparams(range, 8);
    QuantizedTensor q;
    q.shape = t.shape;
    q.qp = qp;
    q.payload.resize(t.numel());
    for (std::size_t i = 0; i < t.numel(); ++i) {
        const float r = std::round(t.data[i] / qp.scale) + static_cast<float>(qp.zero_point);
        q.payload[i] = static_cast<std::uint8_t>(std::min(255.0f, std::max(0.0f, r)));
    }
    return q;
}

Tensor dequantize(const QuantizedTensor& q) {
    Tensor t(q.shape);
    for (std::size_t i = 0; i < t.numel(); ++i) {
        t.data[i] = q.qp.scale * (static_cast<int>(q.payload[i]) - q.qp.zero_point);
    }
    return t;
}

Tensor fake_quantize(const Tensor& t, Range range, int bits) {
    const QuantParams qp = choose_qparams(range, bits);
    const int qmax = (1 << bits) - 1;
    Tensor out(t.shape);
    for (std::size_t i = 0; i < t.numel(); ++i) {
        out.data[i] = fake_quantize_value(t.data[i], qp.scale, qp.zero_point, qmax);
    }
    return out;
}

std::pair<Tensor, Tensor> fold_batchnorm(const Tensor& w, const Tensor& b, const Tensor& gamma,
                                         const Tensor& beta, const Tensor& mean, const Tensor& var,
                                         double eps) {
    const int c_out = w.dim(0);
    const std::size_t per_ch = w.numel() / static_cast<std::size_t>(c_out);
    if (gamma.numel() != static_cast<std::size_t>(c_out) || beta.numel() != gamma.numel() ||
        mean.numel() != gamma.numel() || var.numel() != gamma.numel() ||
        b.numel() != gamma.numel()) {
        throw ShapeError("fold_batchnorm: per-channel parameter length != C_out");
    }
    for (const float v : var.data) {
        if (v < 0.0f) throw ShapeError("fold_batchnorm: negative variance");
    }
    Tensor w_fold(w.shape), b_fold(b.shape);
    for (int o = 0; o < c_out; ++o) {
        const float mult = gamma.data[o] / std::sqrt(var.data[o] + static_cast<float>(eps));
        const float* src = w.ptr() + static_cast<std::size_t>(o) * per_ch;
        float* dst = w_fold.ptr() + static_cast<std::size_t>(o) * per_ch;
        for (std::size_t i = 0; i < per_ch; ++i) dst[i] = src[i] * mult;
        b_fold.data[o] = beta.data[o] + (b.data[o] - mean.data[o]) * mult;
    }
    return {std::move(w_fold), std::move(b_fold)};
}

namespace {

// Collects, for every activation site, all observed values (pooled over
// calibration samples). Percentiles need the full population; min/max and
// pooled buffers are order-independent by construction.
struct SiteCapture {
    std::vector<std::string> names;              // site order = depth order, "input" first
    std::vector<std::vector<float>> values;      // pooled
};

SiteCapture capture_activations(const Network& net, const Tensor& calib_inputs, int batch_size) {
    const auto sites = quant_sites(net.plan);
    SiteCapture cap;
    cap.names.push_back("input");
    for (const QuantSite& s : sites) cap.names.push_back(net.plan.layers[s.layer_idx].name);
    cap.values.resize(cap.names.size());

    const int n = calib_inputs.dim(0);
    const int c = calib_inputs.dim(1), h = calib_inputs.dim(2), w = calib_inputs.dim(3);
    const std::size_t img = static_cast<std::size_t>(c) * h * w;
    for (int start = 0; start < n; start += batch_size) {
        const int count = std::min(batch_size, n - start);
        Tensor batch({count, c, h, w});
        std::copy(calib_inputs.ptr() + static_cast<std::size_t>(start) * img,
                  calib_inputs.ptr() + static_cast<std::size_t>(start + count) * img, batch.ptr());
        auto& input_buf = cap.values[0];
        input_buf.insert(input_buf.end(), batch.data.begin(), batch.data.end());

        const std::vector<Tensor> outs = net.forward_all(batch, BnMode::Infer);
        for (std::size_t si = 0; si < sites.size(); ++si) {
            const Tensor& act = outs[static_cast<std::size_t>(sites[si].act_idx)];
            auto& buf = cap.values[si + 1];
            buf.insert(buf.end(), act.data.begin(), act.data.end());
        }
    }
    return cap;
}

}  // namespace

CalibrationRecord calibrate(const Network& net, const Tensor& calib_inputs, double lo_pct,
                            double hi_pct, int batch_size) {
    if (calib_inputs.rank() != 4 || calib_inputs.dim(0) < 1)
        throw ShapeError("calibrate: need at least one [N,C,H,W] sample");
    CalibrationRecord rec;
    rec.lo_pct = lo_pct;
    rec.hi_pct = hi_pct;
    rec.num_samples = calib_inputs.dim(0);

    SiteCapture cap = capture_activations(net, calib_inputs, batch_size);
    const auto sites = quant_sites(net.plan);

    for (std::size_t i = 0; i < cap.values.size(); ++i) {
        std::sort(cap.values[i].begin(), cap.values[i].end());
    }
    rec.input = {static_cast<float>(percentile_of_sorted(cap.values[0], lo_pct)),
                 static_cast<float>(percentile_of_sorted(cap.values[0], hi_pct))};

    for (std::size_t si = 0; si < sites.size(); ++si) {
        const QuantSite& s = sites[si];
        const LayerDesc& d = net.plan.layers[s.layer_idx];
        const LayerParams& p = net.params[s.layer_idx];
        LayerRanges lr;
        lr.activation = {static_cast<float>(percentile_of_sorted(cap.values[si + 1], lo_pct)),
                         static_cast<float>(percentile_of_sorted(cap.values[si + 1], hi_pct))};
        lr.weights = range_minmax(p.weights);
        lr.has_bn = s.bn_idx >= 0;
        if (lr.has_bn) {
            const LayerParams& bn = net.params[s.bn_idx];
            const auto [w_fold, b_fold] =
                fold_batchnorm(p.weights, p.bias, bn.bn_gamma, bn.bn_beta, bn.bn_running_mean,
                               bn.bn_running_var, bn.epsilon);
            lr.bn_fold_weights = range_minmax(w_fold);
        } else {
            lr.bn_fold_weights = lr.weights;
        }
        rec.layers[d.name] = lr;
    }
    return rec;
}

void CalibrationRecord::save_json(const std::string& path) const {
    nlohmann::json j;
    j["lo_pct"] = lo_pct;
    j["hi_pct"] = hi_pct;
    j["num_samples"] = num_samples;
    j["input"] = {input.lo, input.hi};
    nlohmann::json jl;
    for (const auto& [name, lr] : layers) {
        jl[name] = {
            {"activation", {lr.activation.lo, lr.activation.hi}},
            {"weights", {lr.weights.lo, lr.weights.hi}},
            {"bn_fold_weights", {lr.bn_fold_weights.lo, lr.bn_fold_weights.hi}},
            {"has_bn", lr.has_bn},
        };
    }
    j["layers"] = jl;
    std::ofstream os(path);
    if (!os) throw DataError("cannot write calibration record to " + path);
    os << j.dump(2) << '\n';
}

CalibrationRecord CalibrationRecord::load_json(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw DataError("cannot read calibration record from " + path);
    nlohmann::json j;
    is >> j;
    CalibrationRecord rec;
    rec.lo_pct = j.at("lo_pct").get<double>();
    rec.hi_pct = j.at("hi_pct").get<double>();
    rec.num_samples = j.at("num_samples").get<int>();
    rec.input = {j.at("input")[0].get<float>(), j.at("input")[1].get<float>()};
    for (const auto& [name, jl] : j.at("layers").items()) {
        LayerRanges lr;
        lr.activation = {jl.at("activation")[0].get<float>(), jl.at("activation")[1].get<float>()};
        lr.weights = {jl.at("weights")[0].get<float>(), jl.at("weights")[1].get<float>()};
        lr.bn_fold_weights = {jl.at("bn_fold_weights")[0].get<float>(),
                              jl.at("bn_fold_weights")[1].get<float>()};
        lr.has_bn = jl.at("has_bn").get<bool>();
        rec.layers[name] = lr;
    }
    return rec;
}

FoldedNetwork::FoldedNetwork(const Network& net) { build(net, nullptr); }

FoldedNetwork::FoldedNetwork(const Network& net, const CalibrationRecord& record,
                             QuantSimOptions opts)
    : simulate_(true), opts_(opts) {
    build(net, &record);
}

void FoldedNetwork::build(const Network& net, const CalibrationRecord* record) {
    const auto sites = quant_sites(net.plan);
    if (record) input_range_ = record->input;

    std::vector<int> bn_of(net.plan.layers.size(), -1);   // conv idx -> its BN
    std::vector<int> act_of(net.plan.layers.size(), -1);  // layer idx -> act site owner
    for (const QuantSite& s : sites) {
        bn_of[s.layer_idx] = s.bn_idx;
        // BN layers vanish after folding; their activation site moves onto the conv.
        const int attach = net.plan.layers[s.act_idx].kind == LayerKind::BatchNorm ? s.layer_idx
                                                                                   : s.act_idx;
        act_of[attach] = s.layer_idx;
    }

    for (std::size_t i = 0; i < net.plan.layers.size(); ++i) {
        const LayerDesc& d = net.plan.layers[i];
        if (d.kind == LayerKind::BatchNorm) continue;  // folded away
        Step step;
        step.desc = d;
        if (d.is_conv_or_dense()) {
            const LayerParams& p = net.params[i];
            step.folded = p;
            if (bn_of[i] >= 0) {
                const LayerParams& bn = net.params[bn_of[i]];
                auto [w_fold, b_fold] =
                    fold_batchnorm(p.weights, p.bias, bn.bn_gamma, bn.bn_beta, bn.bn_running_mean,
                                   bn.bn_running_var, bn.epsilon);
                step.folded.weights = std::move(w_fold);
                step.folded.bias = std::move(b_fold);
            }
            if (record) {
                const auto it = record->layers.find(d.name);
                if (it == record->layers.end())
                    throw ConfigError("calibration record is missing layer \"" + d.name + "\"");
                const bool quantize_weights =
                    d.kind != LayerKind::Dense || opts_.quantize_dense;
                if (quantize_weights) {
                    step.folded.weights =
                        fake_quantize(step.folded.weights, range_minmax(step.folded.weights), opts_.bits);
                }
            }
        }
        if (record && act_of[i] >= 0) {
            const std::string& owner = net.plan.layers[act_of[i]].name;
            const LayerDesc& od = net.plan.layers[act_of[i]];
            const bool quantize_act = od.kind != LayerKind::Dense || opts_.quantize_dense;
            if (quantize_act) {
                step.quantize_act = true;
                step.act_range = record->layers.at(owner).activation;
            }
        }
        steps_.push_back(std::move(step));
    }
}

Tensor FoldedNetwork::forward_logits(const Tensor& x) const {
    Tensor cur = x;
    if (simulate_) cur = fake_quantize(cur, input_range_, opts_.bits);
    for (const Step& s : steps_) {
        switch (s.desc.kind) {
            case LayerKind::Conv2D: cur = conv2d_forward(cur, s.folded); break;
            case LayerKind::Dense: cur = dense_forward(cur, s.folded); break;
            case LayerKind::ReLU: cur = relu_forward(cur); break;
            case LayerKind::MaxPool2D:
                cur = maxpool2d_forward<float>(cur, s.desc.pool_window, s.desc.pool_stride);
                break;
            case LayerKind::BatchNorm:
            case LayerKind::SoftmaxOutput:
                break;
        }
        if (s.quantize_act) cur = fake_quantize(cur, s.act_range, opts_.bits);
    }
    return cur;
}

Tensor FoldedNetwork::forward_probs(const Tensor& x) const { return softmax(forward_logits(x)); }

Tensor quantized_inference(const Network& net, const CalibrationRecord& record, const Tensor& x,
                           QuantSimOptions opts) {
    return FoldedNetwork(net, record, opts).forward_probs(x);
}

double qmse(const Tensor& fp32_out, const Tensor& q_out) {
    if (!fp32_out.same_shape(q_out)) throw ShapeError("qmse: shape mismatch");
    double acc = 0;
    for (std::size_t i = 0; i < fp32_out.numel(); ++i) {
        const double d = static_cast<double>(fp32_out.data[i]) - static_cast<double>(q_out.data[i]);
        acc += d * d;
    }
    return acc / static_cast<double>(fp32_out.numel());
}

double qce(const Tensor& fp32_probs, const Tensor& q_probs) {
    if (!fp32_probs.same_shape(q_probs)) throw ShapeError("qce: shape mismatch");
    if (fp32_probs.rank() != 2) throw ShapeError("qce: probs must be [N, classes]");
    const int n = fp32_probs.dim(0), classes = fp32_probs.dim(1);
    double acc = 0;
    for (int i = 0; i < n; ++i) {
        for (int c = 0; c < classes; ++c) {
            acc -= static_cast<double>(fp32_probs.at(i, c)) *
                   std::log(static_cast<double>(q_probs.at(i, c)) + 1e-12);
        }
    }
    return acc / static_cast<double>(n);
}

double relative_degradation(double acc_fp32, double acc_q) {
    if (acc_fp32 <= 0.0) throw ShapeError("relative_degradation: fp32 accuracy must be > 0");
    return (acc_fp32 - acc_q) / acc_fp32;
}

}  // namespace fznet
