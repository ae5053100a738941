#include "factorizenet/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "factorizenet/checkpoint.hpp"
#include "factorizenet/sweep.hpp"
#include "factorizenet/train.hpp"

namespace fznet {

namespace {

namespace fs = std::filesystem;

struct CommonArgs {
    std::string config_path;
    std::string scheme = "regular";
    std::string data_dir;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int epochs = 0;
    bool epochs_set = false;
    int calib_samples = 1024;
    std::string clip_pct = "1,99";
    std::string format = "csv";
};

void add_common_flags(CLI::App* cmd, CommonArgs& a, bool with_data, bool with_out) {
    cmd->add_option("--config", a.config_path, "JSON config file (arch + train sections)");
    if (with_data) cmd->add_option("--data", a.data_dir, "dataset directory (CIFAR-10 binary batches)");
    if (with_out) cmd->add_option("--out", a.out_dir, "output directory");
    cmd->add_option("--seed", a.seed, "master RNG seed")->each([&a](const std::string&) { a.seed_set = true; });
    cmd->add_option("--epochs", a.epochs, "override training epochs")
        ->each([&a](const std::string&) { a.epochs_set = true; });
    cmd->add_option("--calib-samples", a.calib_samples, "calibration sample count")
        ->default_val(1024);
    cmd->add_option("--clip-pct", a.clip_pct, "activation clip percentiles, e.g. 1,99")
        ->default_val("1,99");
    cmd->add_option("--format", a.format, "report format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}))
        ->default_val("csv");
}

ToolConfig resolve_config(const CommonArgs& a) {
    ToolConfig cfg = a.config_path.empty() ? ToolConfig{} : load_config(a.config_path);
    if (a.seed_set) cfg.train.seed = a.seed;
    if (a.epochs_set) {
        cfg.train.epochs = a.epochs;
        // keep only the drops that still land inside the shortened run
        std::vector<int> drops;
        for (const int e : cfg.train.lr_drop_epochs) {
            if (e < a.epochs) drops.push_back(e);
        }
        cfg.train.lr_drop_epochs = drops;
    }
    cfg.arch.validate();
    cfg.train.validate();
    return cfg;
}

std::pair<double, double> parse_clip_pct(const std::string& s) {
    const auto comma = s.find(',');
    if (comma == std::string::npos) throw ConfigError("--clip-pct expects \"lo,hi\"");
    try {
        const double lo = std::stod(s.substr(0, comma));
        const double hi = std::stod(s.substr(comma + 1));
        if (!(0.0 <= lo && lo < hi && hi <= 100.0)) throw ConfigError("");
        return {lo, hi};
    } catch (const std::exception&) {
        throw ConfigError("--clip-pct expects \"lo,hi\" with 0 <= lo < hi <= 100");
    }
}

std::vector<FactorizationScheme> parse_scheme_list(const std::string& s) {
    std::vector<FactorizationScheme> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        const std::size_t comma = s.find(',', pos);
        const std::string tok =
            s.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        if (!tok.empty()) out.push_back(FactorizationScheme::parse(tok));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (out.empty()) throw ConfigError("empty --scheme list");
    return out;
}

void require_dir_arg(const std::string& value, const std::string& flag) {
    if (value.empty()) throw ConfigError("missing required flag " + flag);
}

int cmd_macs(const CommonArgs& a) {
    const ToolConfig cfg = resolve_config(a);
    const FactorizationScheme scheme = FactorizationScheme::parse(a.scheme);
    const NetworkPlan plan = plan_network(cfg.arch, scheme);

    std::printf("%-16s %3s %5s %5s %6s %6s %5s %14s\n", "layer", "K", "H", "W", "C_in", "C_out",
                "f", "MACs");
    for (const LayerDesc& d : plan.layers) {
        if (!d.is_conv()) continue;
        const ConvSpec spec = conv_spec(d);
        std::printf("%-16s %3d %5d %5d %6d %6d %5d %14llu\n", d.name.c_str(), spec.kernel,
                    spec.out_h, spec.out_w, spec.in_channels, spec.out_channels, spec.groups,
                    static_cast<unsigned long long>(layer_macs(spec)));
    }
    std::printf("%-16s %*s %14llu\n", "total(conv)", 40, "",
                static_cast<unsigned long long>(network_macs(plan)));
    return 0;
}

int cmd_train(const CommonArgs& a) {
    require_dir_arg(a.data_dir, "--data");
    require_dir_arg(a.out_dir, "--out");
    const ToolConfig cfg = resolve_config(a);
    const FactorizationScheme scheme = FactorizationScheme::parse(a.scheme);
    const Cifar10 data = load_cifar10(a.data_dir);

    Rng init_rng(derive_seed(cfg.train.seed, "init"));
    Network net = build_network(cfg.arch, scheme, init_rng);
    std::fprintf(stderr, "training %s: %llu conv MACs, %zu parameters\n", scheme.label().c_str(),
                 static_cast<unsigned long long>(network_macs(net.plan)), net.parameter_count());

    const History hist = train(net, data.train, cfg.train, &data.test);
    fs::create_directories(a.out_dir);
    hist.save_csv((fs::path(a.out_dir) / "history.csv").string());
    save_checkpoint(net, (fs::path(a.out_dir) / "checkpoint").string());

    const double acc = evaluate(net, data.test);
    std::printf("final test accuracy: %.4f\n", acc);
    return 0;
}

int cmd_quantize(const CommonArgs& a, const std::string& checkpoint_dir) {
    require_dir_arg(checkpoint_dir, "--checkpoint");
    require_dir_arg(a.data_dir, "--data");
    require_dir_arg(a.out_dir, "--out");
    const auto [lo_pct, hi_pct] = parse_clip_pct(a.clip_pct);
    const Network net = load_checkpoint(checkpoint_dir);
    const Cifar10 data = load_cifar10(a.data_dir);
    const std::uint64_t seed = a.seed_set ? a.seed : 42;

    Rng calib_rng(derive_seed(seed, "calib"));
    std::vector<int> idx(static_cast<std::size_t>(data.train.size()));
    for (int i = 0; i < data.train.size(); ++i) idx[static_cast<std::size_t>(i)] = i;
    calib_rng.shuffle(idx);
    idx.resize(static_cast<std::size_t>(std::min(a.calib_samples, data.train.size())));
    const Tensor calib_inputs = gather_images(data.train, idx);

    const CalibrationRecord record = calibrate(net, calib_inputs, lo_pct, hi_pct);
    fs::create_directories(a.out_dir);
    record.save_json((fs::path(a.out_dir) / "calibration.json").string());

    const double acc_fp32 = evaluate(net, data.test);
    const Tensor fp32_probs = infer_probs(net, data.test);
    const FoldedNetwork qnet(net, record);
    Tensor q_probs({data.test.size(), net.num_classes()});
    int correct = 0;
    const int classes = net.num_classes();
    for (int start = 0; start < data.test.size(); start += 256) {
        const int count = std::min(256, data.test.size() - start);
        std::vector<int> bidx(static_cast<std::size_t>(count));
        for (int i = 0; i < count; ++i) bidx[static_cast<std::size_t>(i)] = start + i;
        const Tensor probs = qnet.forward_probs(gather_images(data.test, bidx));
        std::copy(probs.data.begin(), probs.data.end(),
                  q_probs.ptr() + static_cast<std::size_t>(start) * classes);
        for (int i = 0; i < count; ++i) {
            int best = 0;
            for (int c = 1; c < classes; ++c)
                if (probs.at(i, c) > probs.at(i, best)) best = c;
            if (best == data.test.labels[static_cast<std::size_t>(start + i)]) ++correct;
        }
    }
    const double acc_q = static_cast<double>(correct) / data.test.size();
    const double mse = qmse(fp32_probs, q_probs);
    const double ce = qce(fp32_probs, q_probs);
    const double rel = relative_degradation(acc_fp32, acc_q);

    nlohmann::json j{{"acc_fp32", acc_fp32}, {"acc_q", acc_q},        {"qmse", mse},
                     {"qce", ce},           {"rel_degradation", rel}, {"calib_samples", static_cast<int>(idx.size())}};
    std::ofstream os(fs::path(a.out_dir) / "quant_metrics.json");
    os << j.dump(2) << '\n';
    std::printf("acc_fp32=%.4f acc_q=%.4f qmse=%.6g qce=%.6g rel_drop=%.4f\n", acc_fp32, acc_q,
                mse, ce, rel);
    return 0;
}

int cmd_analyze(const CommonArgs& a, const std::string& checkpoint_dir) {
    require_dir_arg(checkpoint_dir, "--checkpoint");
    require_dir_arg(a.data_dir, "--data");
    require_dir_arg(a.out_dir, "--out");
    const auto [lo_pct, hi_pct] = parse_clip_pct(a.clip_pct);
    const Network net = load_checkpoint(checkpoint_dir);
    const Cifar10 data = load_cifar10(a.data_dir);
    const std::uint64_t seed = a.seed_set ? a.seed : 42;

    Rng calib_rng(derive_seed(seed, "calib"));
    std::vector<int> idx(static_cast<std::size_t>(data.train.size()));
    for (int i = 0; i < data.train.size(); ++i) idx[static_cast<std::size_t>(i)] = i;
    calib_rng.shuffle(idx);
    idx.resize(static_cast<std::size_t>(std::min(a.calib_samples, data.train.size())));

    const std::vector<LayerStats> stats =
        collect_layer_report(net, gather_images(data.train, idx), lo_pct, hi_pct);
    fs::create_directories(a.out_dir);
    write_layer_stats_csv(stats, (fs::path(a.out_dir) / "layerwise.csv").string());
    if (a.format == "json") {
        write_layer_stats_json(stats, (fs::path(a.out_dir) / "layerwise.json").string());
    }
    std::printf("wrote %zu layer stat rows for %s\n", stats.size(),
                net.plan.scheme_label.c_str());
    return 0;
}

int cmd_sweep(const CommonArgs& a) {
    require_dir_arg(a.data_dir, "--data");
    require_dir_arg(a.out_dir, "--out");
    const ToolConfig cfg = resolve_config(a);
    const auto [lo_pct, hi_pct] = parse_clip_pct(a.clip_pct);
    const std::vector<FactorizationScheme> schemes = parse_scheme_list(a.scheme);
    const Cifar10 data = load_cifar10(a.data_dir);

    SweepOptions opts;
    opts.calib_samples = a.calib_samples;
    opts.lo_pct = lo_pct;
    opts.hi_pct = hi_pct;

    const SweepReport report = run_sweep(cfg.arch, schemes, cfg.train, data, a.out_dir, opts);
    emit_report(report, a.format, a.out_dir);
    if (a.format != "json") emit_report(report, "json", a.out_dir);

    for (const SweepConfigResult& r : report.rows) {
        if (r.failed) {
            std::printf("%-24s FAILED: %s\n", r.label.c_str(), r.error.c_str());
        } else {
            std::printf("%-24s macs=%llu acc_fp32=%.4f acc_q=%.4f rel_drop=%.4f\n",
                        r.label.c_str(), static_cast<unsigned long long>(r.macs), r.acc_fp32,
                        r.acc_q, r.rel_degradation);
        }
    }
    return report.any_failed() ? 1 : 0;
}

int cmd_synth_data(const std::string& out_dir, int train_n, int test_n, int classes,
                   std::uint64_t seed) {
    fs::create_directories(out_dir);
    const Dataset train = make_synthetic_dataset(train_n, classes, seed, "train");
    const Dataset test = make_synthetic_dataset(test_n, classes, seed + 1, "test");
    write_cifar10_batch((fs::path(out_dir) / "data_batch_1.bin").string(), train);
    write_cifar10_batch((fs::path(out_dir) / "test_batch.bin").string(), test);
    std::printf("wrote %d train / %d test synthetic records (%d classes) to %s\n", train_n, test_n,
                classes, out_dir.c_str());
    return 0;
}

}  // namespace

int cli_main(const std::vector<std::string>& args) {
    CLI::App app{"FactorizeNet: depth-factorized CNN training and quantization analysis"};
    app.require_subcommand(1);

    CommonArgs macs_args, train_args, sweep_args, quant_args, analyze_args;
    std::string quant_checkpoint, analyze_checkpoint;

    CLI::App* macs = app.add_subcommand("macs", "print the per-layer MAC table for a scheme");
    macs->add_option("--scheme", macs_args.scheme, "regular | uniform:F | revpyr:F | dws");
    add_common_flags(macs, macs_args, false, false);

    CLI::App* train_cmd = app.add_subcommand("train", "train one configuration");
    train_cmd->add_option("--scheme", train_args.scheme, "regular | uniform:F | revpyr:F | dws");
    add_common_flags(train_cmd, train_args, true, true);

    CLI::App* sweep = app.add_subcommand("sweep", "train and analyze a progression of schemes");
    sweep->add_option("--scheme", sweep_args.scheme,
                      "comma-separated scheme list, e.g. regular,uniform:2,uniform:4,dws");
    add_common_flags(sweep, sweep_args, true, true);

    CLI::App* quant = app.add_subcommand("quantize", "calibrate a checkpoint and run quint8 eval");
    quant->add_option("--checkpoint", quant_checkpoint, "checkpoint directory");
    add_common_flags(quant, quant_args, true, true);

    CLI::App* analyze = app.add_subcommand("analyze", "layerwise range/precision report");
    analyze->add_option("--checkpoint", analyze_checkpoint, "checkpoint directory");
    add_common_flags(analyze, analyze_args, true, true);

    std::string synth_out;
    int synth_train = 2000, synth_test = 400, synth_classes = 2;
    std::uint64_t synth_seed = 7;
    CLI::App* synth = app.add_subcommand(
        "synth-data", "generate a synthetic dataset in the CIFAR-10 binary format");
    synth->add_option("--out", synth_out, "output directory")->required();
    synth->add_option("--train", synth_train, "train record count");
    synth->add_option("--test", synth_test, "test record count");
    synth->add_option("--classes", synth_classes, "class count (2..10)");
    synth->add_option("--seed", synth_seed, "generator seed");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (macs->parsed()) return cmd_macs(macs_args);
        if (train_cmd->parsed()) return cmd_train(train_args);
        if (sweep->parsed()) return cmd_sweep(sweep_args);
        if (quant->parsed()) return cmd_quantize(quant_args, quant_checkpoint);
        if (analyze->parsed()) return cmd_analyze(analyze_args, analyze_checkpoint);
        if (synth->parsed())
            return cmd_synth_data(synth_out, synth_train, synth_test, synth_classes, synth_seed);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}

}  // namespace fznet
