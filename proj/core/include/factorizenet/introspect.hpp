#pragma once

#include <string>
#include <vector>

#include "factorizenet/quantize.hpp"

namespace fznet {

enum class StatsKind { Weights, BnFoldWeights, Activations };

const char* stats_kind_name(StatsKind k);

/// Distribution summary of one tensor series at one layer: whole-tensor
/// dynamic range, per-channel ranges and the mean channel-to-tensor range
/// ratio (average channel precision).
struct LayerStats {
    std::string layer_name;
    StatsKind kind = StatsKind::Weights;
    Range tensor_range;
    std::vector<Range> channel_ranges;
    double avg_precision = 1.0;
    int channel_axis = 0;
    bool degenerate = false;  // zero tensor-range width
    bool no_bn = false;       // BnFoldWeights row that just repeats Weights
};

/// Exact per-channel min/max over all other axes.
std::vector<Range> channel_ranges(const Tensor& t, int channel_axis);

/// Mean over channels of (channel range width) / (tensor range width).
/// A zero tensor width means every channel is identical and the per-tensor
/// encoding is perfectly representative: defined as 1.0.
double average_precision(const Tensor& t, int channel_axis);

double avg_precision_from_ranges(const std::vector<Range>& channels, Range tensor,
                                 bool* degenerate = nullptr);

/// Per-layer distribution report in depth order: for every conv/dense layer,
/// three LayerStats (weights, BN-folded weights, percentile-clipped
/// activations at the block's ReLU output). Activation clipping uses the
/// record's percentiles; channel percentiles are computed per channel and
/// the tensor percentile over the pooled population.
std::vector<LayerStats> collect_layer_report(const Network& net, const CalibrationRecord& record,
                                             const Tensor& calib_inputs);

std::vector<LayerStats> collect_layer_report(const Network& net, const Tensor& calib_inputs,
                                             double lo_pct = 1.0, double hi_pct = 99.0,
                                             int batch_size = 64);

/// One row per layer x kind: name, kind, min, max, avg_precision.
void write_layer_stats_csv(const std::vector<LayerStats>& stats, const std::string& path);

/// Full detail including per-channel ranges.
void write_layer_stats_json(const std::vector<LayerStats>& stats, const std::string& path);

}  // namespace fznet
