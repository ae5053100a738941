#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "factorizenet/arch.hpp"
#include "factorizenet/config.hpp"
#include "factorizenet/dataset.hpp"
#include "factorizenet/introspect.hpp"

namespace fznet {

/// One trained-and-analyzed configuration of a sweep.
struct SweepConfigResult {
    std::string label;   // Regular_Conv / FactorizeNet-f{j} / FactorizeNet-finit{k} / DWS_Conv
    std::string scheme;  // canonical scheme string
    std::uint64_t macs = 0;  // conv layers only
    double acc_fp32 = 0, acc_q = 0;
    double qmse = 0, qce = 0, rel_degradation = 0;
    std::vector<LayerStats> layerwise;
    std::string history_path, checkpoint_path;  // relative to the sweep out dir
    std::uint64_t seed = 0;
    std::string config_hash;
    bool failed = false;
    std::string error;
};

struct SweepReport {
    std::vector<SweepConfigResult> rows;
    bool any_failed() const;
};

struct SweepOptions {
    int calib_samples = 1024;
    double lo_pct = 1.0, hi_pct = 99.0;
    bool quantize_dense = true;
};

/// Walks a progression end-to-end: for each scheme build -> train ->
/// checkpoint -> calibrate -> fp32/quint8 evaluation -> QMSE/QCE ->
/// layerwise stats, writing per-config artifacts under out_dir/<label>/.
/// A crashed configuration is recorded as failed and the sweep continues.
/// Per-config seeds are derived from train_cfg.seed and the config hash, so
/// adding a configuration never perturbs the others.
SweepReport run_sweep(const MacroArchConfig& arch, const std::vector<FactorizationScheme>& schemes,
                      const TrainConfig& train_cfg, const Cifar10& data,
                      const std::string& out_dir, const SweepOptions& opts = {});

/// summary.csv (one config per row) for "csv"; full-detail report.json for
/// "json". Per-config layerwise files are written in both cases.
void emit_report(const SweepReport& report, const std::string& format, const std::string& out_dir);

}  // namespace fznet
