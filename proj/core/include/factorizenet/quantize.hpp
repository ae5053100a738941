#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "factorizenet/network.hpp"

namespace fznet {

struct Range {
    float lo = 0.0f;
    float hi = 0.0f;
    float width() const { return hi - lo; }
};

/// Affine quantization encoding: real = scale * (q - zero_point).
struct QuantParams {
    float scale = 1.0f;
    int zero_point = 0;
    int bits = 8;
};

struct QuantizedTensor {
    std::vector<int> shape;
    std::vector<std::uint8_t> payload;
    QuantParams qp;
};

/// Exact min/max of the value population.
Range range_minmax(const Tensor& t);

/// Percentiles of the flattened value population with linear interpolation
/// between order statistics (rank = pct/100 * (n-1)).
Range range_percentile(const Tensor& samples, double lo_pct = 1.0, double hi_pct = 99.0);
double percentile_of_sorted(const std::vector<float>& sorted, double pct);

/// Affine parameters for a range. The range is first extended to contain 0
/// and then nudged so the zero point is integral: 0.0 is always exactly
/// representable (zero padding and ReLU zeros quantize losslessly).
QuantParams choose_qparams(Range r, int bits = 8);

QuantizedTensor quantize_affine(const Tensor& t, Range range);
Tensor dequantize(const QuantizedTensor& q);

/// quantize->dequantize round trip in fp32 arithmetic; `bits` > 8 is the
/// widened diagnostic mode.
Tensor fake_quantize(const Tensor& t, Range range, int bits = 8);

/// Folds BatchNorm inference statistics into conv/dense parameters:
///   w_fold[o,...] = w[o,...] * gamma[o] / sqrt(var[o] + eps)
///   b_fold[o]     = beta[o] + (b[o] - mean[o]) * gamma[o] / sqrt(var[o] + eps)
std::pair<Tensor, Tensor> fold_batchnorm(const Tensor& w, const Tensor& b, const Tensor& gamma,
                                         const Tensor& beta, const Tensor& mean, const Tensor& var,
                                         double eps);

struct LayerRanges {
    Range activation;       // percentile-clipped, observed on calibration data
    Range weights;          // exact min/max
    Range bn_fold_weights;  // exact min/max of the folded weights
    bool has_bn = false;
};

struct CalibrationRecord {
    std::map<std::string, LayerRanges> layers;  // keyed by conv/dense layer name
    Range input;                                // network input site
    double lo_pct = 1.0, hi_pct = 99.0;
    int num_samples = 0;

    void save_json(const std::string& path) const;
    static CalibrationRecord load_json(const std::string& path);
};

/// Observes fp32 infer-mode activations over a calibration batch and records
/// per-layer ranges: percentile-clipped for activations, exact min/max for
/// weights and BN-folded weights. Results do not depend on sample order.
CalibrationRecord calibrate(const Network& net, const Tensor& calib_inputs, double lo_pct = 1.0,
                            double hi_pct = 99.0, int batch_size = 64);

struct QuantSimOptions {
    int bits = 8;               // >8 widens the simulated integer grid (diagnostic)
    bool quantize_dense = true; // switch for leaving the classifier in fp32
};

/// Inference path with BatchNorm folded into the preceding conv/dense layer.
/// With a CalibrationRecord it simulates quint8 execution: weights quantized
/// per-tensor by min/max, every activation site re-quantized with its
/// calibrated range; arithmetic stays fp32 (noise model only).
class FoldedNetwork {
public:
    explicit FoldedNetwork(const Network& net);
    FoldedNetwork(const Network& net, const CalibrationRecord& record, QuantSimOptions opts = {});

    Tensor forward_logits(const Tensor& x) const;
    Tensor forward_probs(const Tensor& x) const;

private:
    struct Step {
        LayerDesc desc;
        LayerParams folded;
        bool quantize_act = false;
        Range act_range;
    };
    std::vector<Step> steps_;
    bool simulate_ = false;
    QuantSimOptions opts_;
    Range input_range_;

    void build(const Network& net, const CalibrationRecord* record);
};

/// One-shot simulated quint8 inference: softmax probabilities for `x`.
Tensor quantized_inference(const Network& net, const CalibrationRecord& record, const Tensor& x,
                           QuantSimOptions opts = {});

/// Mean squared elementwise difference between fp32 and dequantized outputs.
double qmse(const Tensor& fp32_out, const Tensor& q_out);

/// Mean over samples of the cross entropy -sum_c p_fp32(c) * ln(p_q(c) + 1e-12),
/// with the fp32 distribution as the reference.
double qce(const Tensor& fp32_probs, const Tensor& q_probs);

/// (acc_fp32 - acc_q) / acc_fp32
double relative_degradation(double acc_fp32, double acc_q);

}  // namespace fznet
