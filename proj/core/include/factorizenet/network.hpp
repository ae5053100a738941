#pragma once

#include <optional>
#include <string>
#include <vector>

#include "factorizenet/ops.hpp"

namespace fznet {

enum class LayerRole { Stem, GroupConv, Pointwise, Bn, Relu, Pool, Dense, Output };

const char* layer_role_name(LayerRole r);
LayerRole layer_role_from_name(const std::string& s);

/// One entry of a NetworkPlan: everything needed to materialize the layer's
/// parameters and to account its cost, but no parameter values.
struct LayerDesc {
    LayerKind kind = LayerKind::Conv2D;
    LayerRole role = LayerRole::Stem;
    std::string name;

    int in_channels = 0, out_channels = 0;
    int kernel = 1, groups = 1, stride = 1, padding = 0;
    int out_h = 0, out_w = 0;  // spatial dims of this layer's output
    int fan_in = 0, fan_out = 0;
    int pool_window = 2, pool_stride = 2;
    double epsilon = 1e-3;
    bool has_pointwise_follower = false;  // group convs inside separable blocks

    bool is_conv() const { return kind == LayerKind::Conv2D; }
    bool is_conv_or_dense() const { return kind == LayerKind::Conv2D || kind == LayerKind::Dense; }
};

struct NetworkPlan {
    std::string scheme_label;
    std::vector<LayerDesc> layers;

    /// Indices of the quantizable (conv/dense) layers, in depth order.
    std::vector<int> conv_dense_indices() const;
};

/// For each conv/dense layer: the following BatchNorm (if any) and the layer
/// whose output is that block's activation site (the ReLU when present, else
/// the last layer of the triple — the raw logits for the classifier head).
struct QuantSite {
    int layer_idx = -1;
    int bn_idx = -1;
    int act_idx = -1;
};

std::vector<QuantSite> quant_sites(const NetworkPlan& plan);

/// Activations recorded by a train-mode forward pass, consumed by backward().
struct ForwardCache {
    std::vector<Tensor> inputs;                     // input of each layer
    std::vector<BatchNormCacheT<float>> bn;         // per-layer, valid for BatchNorm layers
    std::vector<MaxPoolCache> pool;                 // per-layer, valid for MaxPool2D layers
    Tensor logits;
};

struct LayerGrads {
    Tensor d_weights, d_bias;   // conv / dense
    Tensor d_gamma, d_beta;     // batchnorm
    bool present = false;
};

/// A plan plus its parameters. Forward/backward iterate the fixed layer
/// sequence; there is no general autodiff graph.
struct Network {
    NetworkPlan plan;
    std::vector<LayerParams> params;  // parallel to plan.layers

    int num_classes() const;
    std::size_t parameter_count() const;

    /// Runs the layer stack and returns the logits. `mode` selects BatchNorm
    /// statistics. Pass a cache to enable backward(); train mode requires it.
    Tensor forward(const Tensor& x, BnMode mode, ForwardCache* cache = nullptr) const;

    /// Per-layer parameter gradients for the cached forward pass.
    std::vector<LayerGrads> backward(const ForwardCache& cache, const Tensor& d_logits) const;

    /// Folds the cached batch statistics into the BatchNorm running stats.
    void apply_bn_updates(const ForwardCache& cache);

    /// Output of every layer on `x` (infer mode), for activation capture and
    /// divergence diagnostics.
    std::vector<Tensor> forward_all(const Tensor& x, BnMode mode) const;
};

/// Materializes zero/identity parameters for a plan (weights left for init).
std::vector<LayerParams> make_params(const NetworkPlan& plan);

}  // namespace fznet
