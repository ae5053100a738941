#include "factorizenet/sweep.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "factorizenet/checkpoint.hpp"
#include "factorizenet/quantize.hpp"
#include "factorizenet/train.hpp"

namespace fznet {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string fmt_float(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 9);
    return std::string(buf, res.ptr);
}

std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// Canonical description of everything that shapes a configuration's result.
std::string config_fingerprint(const MacroArchConfig& arch, const FactorizationScheme& scheme,
                               const TrainConfig& train) {
    json j;
    j["scheme"] = scheme.to_string();
    j["arch"] = {{"input_shape", arch.input_shape},
                 {"stem_channels", arch.stem_channels},
                 {"stage_widths", arch.stage_widths},
                 {"blocks_per_stage", arch.blocks_per_stage},
                 {"dense_widths", arch.dense_widths}};
    j["train"] = {{"epochs", train.epochs},
                  {"batch_size", train.batch_size},
                  {"base_lr", train.base_lr},
                  {"momentum", train.momentum},
                  {"lr_drop_epochs", train.lr_drop_epochs},
                  {"lr_drop_factor", train.lr_drop_factor},
                  {"augment",
                   {{"shift_fraction", train.augment.shift_fraction},
                    {"zoom_range", train.augment.zoom_range},
                    {"h_flip", train.augment.h_flip},
                    {"v_flip", train.augment.v_flip},
                    {"rotation_degrees", train.augment.rotation_degrees}}}};
    return j.dump();
}

std::vector<int> sample_indices(int population, int count, Rng& rng) {
    std::vector<int> idx(static_cast<std::size_t>(population));
    for (int i = 0; i < population; ++i) idx[static_cast<std::size_t>(i)] = i;
    rng.shuffle(idx);
    idx.resize(static_cast<std::size_t>(std::min(count, population)));
    return idx;
}

SweepConfigResult run_one(const MacroArchConfig& arch, const FactorizationScheme& scheme,
                          const TrainConfig& base_train, const Cifar10& data,
                          const std::string& out_dir, const SweepOptions& opts) {
    SweepConfigResult row;
    row.label = scheme.label();
    row.scheme = scheme.to_string();
    const std::uint64_t fp_hash = fnv1a64(config_fingerprint(arch, scheme, base_train));
    row.config_hash = hash_hex(fp_hash);
    row.seed = mix_seed(base_train.seed ^ fp_hash);

    const fs::path cfg_dir = fs::path(out_dir) / row.label;
    fs::create_directories(cfg_dir);

    TrainConfig train_cfg = base_train;
    train_cfg.seed = row.seed;

    Rng init_rng(derive_seed(row.seed, "init"));
    Network net = build_network(arch, scheme, init_rng);
    row.macs = network_macs(net.plan);

    const History hist = train(net, data.train, train_cfg, &data.test);
    row.history_path = (fs::path(row.label) / "history.csv").string();
    hist.save_csv((cfg_dir / "history.csv").string());

    row.checkpoint_path = (fs::path(row.label) / "checkpoint").string();
    save_checkpoint(net, (cfg_dir / "checkpoint").string());

    Rng calib_rng(derive_seed(row.seed, "calib"));
    const std::vector<int> calib_idx =
        sample_indices(data.train.size(), opts.calib_samples, calib_rng);
    const Tensor calib_inputs = gather_images(data.train, calib_idx);
    const CalibrationRecord record = calibrate(net, calib_inputs, opts.lo_pct, opts.hi_pct);
    record.save_json((cfg_dir / "calibration.json").string());

    row.acc_fp32 = evaluate(net, data.test);
    const Tensor fp32_probs = infer_probs(net, data.test);

    QuantSimOptions qopts;
    qopts.quantize_dense = opts.quantize_dense;
    const FoldedNetwork qnet(net, record, qopts);
    const int classes = net.num_classes();
    Tensor q_probs({data.test.size(), classes});
    int correct = 0;
    for (int start = 0; start < data.test.size(); start += 256) {
        const int count = std::min(256, data.test.size() - start);
        std::vector<int> idx(static_cast<std::size_t>(count));
        for (int i = 0; i < count; ++i) idx[static_cast<std::size_t>(i)] = start + i;
        const Tensor probs = qnet.forward_probs(gather_images(data.test, idx));
        std::copy(probs.data.begin(), probs.data.end(),
                  q_probs.ptr() + static_cast<std::size_t>(start) * classes);
        for (int i = 0; i < count; ++i) {
            int best = 0;
            for (int c = 1; c < classes; ++c) {
                if (probs.at(i, c) > probs.at(i, best)) best = c;
            }
            if (best == data.test.labels[static_cast<std::size_t>(start + i)]) ++correct;
        }
    }
    row.acc_q = static_cast<double>(correct) / data.test.size();
    row.qmse = qmse(fp32_probs, q_probs);
    row.qce = qce(fp32_probs, q_probs);
    row.rel_degradation = relative_degradation(row.acc_fp32, row.acc_q);

    row.layerwise = collect_layer_report(net, record, calib_inputs);
    write_layer_stats_csv(row.layerwise, (cfg_dir / "layerwise.csv").string());
    write_layer_stats_json(row.layerwise, (cfg_dir / "layerwise.json").string());
    return row;
}

}  // namespace

bool SweepReport::any_failed() const {
    return std::any_of(rows.begin(), rows.end(),
                       [](const SweepConfigResult& r) { return r.failed; });
}

SweepReport run_sweep(const MacroArchConfig& arch, const std::vector<FactorizationScheme>& schemes,
                      const TrainConfig& train_cfg, const Cifar10& data,
                      const std::string& out_dir, const SweepOptions& opts) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec || !fs::is_directory(out_dir)) {
        throw DataError("cannot create sweep output directory: " + out_dir);
    }

    SweepReport report;
    for (const FactorizationScheme& scheme : schemes) {
        try {
            report.rows.push_back(run_one(arch, scheme, train_cfg, data, out_dir, opts));
        } catch (const std::exception& e) {
            SweepConfigResult row;
            row.label = scheme.label();
            row.scheme = scheme.to_string();
            row.failed = true;
            row.error = e.what();
            report.rows.push_back(std::move(row));
        }
    }
    return report;
}

void emit_report(const SweepReport& report, const std::string& format, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    if (format == "csv") {
        std::ofstream os(fs::path(out_dir) / "summary.csv");
        if (!os) throw DataError("cannot write summary.csv under " + out_dir);
        os << "label,macs,acc_fp32,acc_q,qmse,qce,rel_drop,status\n";
        for (const SweepConfigResult& r : report.rows) {
            if (r.failed) {
                os << r.label << ",,,,,,," << "failed\n";
            } else {
                os << r.label << ',' << r.macs << ',' << fmt_float(r.acc_fp32) << ','
                   << fmt_float(r.acc_q) << ',' << fmt_float(r.qmse) << ',' << fmt_float(r.qce)
                   << ',' << fmt_float(r.rel_degradation) << ",ok\n";
            }
        }
    } else if (format == "json") {
        json rows = json::array();
        for (const SweepConfigResult& r : report.rows) {
            json j;
            j["label"] = r.label;
            j["scheme"] = r.scheme;
            j["failed"] = r.failed;
            if (r.failed) {
                j["error"] = r.error;
            } else {
                j["macs"] = r.macs;
                j["acc_fp32"] = r.acc_fp32;
                j["acc_q"] = r.acc_q;
                j["qmse"] = r.qmse;
                j["qce"] = r.qce;
                j["rel_drop"] = r.rel_degradation;
                j["seed"] = r.seed;
                j["config_hash"] = r.config_hash;
                j["history"] = r.history_path;
                j["checkpoint"] = r.checkpoint_path;
                json lw = json::array();
                for (const LayerStats& s : r.layerwise) {
                    json e;
                    e["name"] = s.layer_name;
                    e["kind"] = stats_kind_name(s.kind);
                    e["min"] = s.tensor_range.lo;
                    e["max"] = s.tensor_range.hi;
                    e["avg_precision"] = s.avg_precision;
                    lw.push_back(e);
                }
                j["layerwise"] = lw;
            }
            rows.push_back(j);
        }
        std::ofstream os(fs::path(out_dir) / "report.json");
        if (!os) throw DataError("cannot write report.json under " + out_dir);
        os << json{{"configs", rows}}.dump(2) << '\n';
    } else {
        throw ConfigError("unknown report format: " + format + " (expected csv or json)");
    }
}

}  // namespace fznet
