#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "factorizenet/network.hpp"
#include "factorizenet/rng.hpp"

namespace fznet {

/// Cost-accounting view of one convolution layer. H and W are the layer's
/// OUTPUT spatial dims; `groups` is the factorization rate f.
struct ConvSpec {
    int kernel = 1;
    int out_h = 0, out_w = 0;
    int in_channels = 0, out_channels = 0;
    int groups = 1;
    int stride = 1;
    bool has_pointwise_follower = false;

    void validate() const;
};

ConvSpec conv_spec(const LayerDesc& d);

/// MACs of one convolution: K*K*H*W*(C_in/f)*(C_out/f)*f. Rate f divides the
/// count by exactly f relative to the f=1 layer of the same geometry.
std::uint64_t layer_macs(const ConvSpec& spec);

/// Sum of layer_macs over every convolution in the plan (stem, group convs
/// and pointwise convs). Dense layers are excluded.
std::uint64_t network_macs(const NetworkPlan& plan);

/// Where on the factorization spectrum a network sits.
struct FactorizationScheme {
    enum class Variant { Regular, Uniform, ReversePyramid, DepthwiseSeparable };
    Variant variant = Variant::Regular;
    int rate = 1;  // Uniform: f; ReversePyramid: f_init; unused otherwise

    static FactorizationScheme regular() { return {Variant::Regular, 1}; }
    static FactorizationScheme uniform(int f) { return {Variant::Uniform, f}; }
    static FactorizationScheme reverse_pyramid(int f_init) { return {Variant::ReversePyramid, f_init}; }
    static FactorizationScheme depthwise() { return {Variant::DepthwiseSeparable, 0}; }

    /// Parses "regular", "uniform:F", "revpyr:F" or "dws".
    static FactorizationScheme parse(const std::string& s);

    /// Report label: Regular_Conv, FactorizeNet-f{j}, FactorizeNet-finit{k}, DWS_Conv.
    std::string label() const;
    /// Canonical parseable form ("uniform:4", ...).
    std::string to_string() const;
};

/// Macroarchitecture knobs. Stage widths must double stage to stage and the
/// stem width must equal the first stage width.
struct MacroArchConfig {
    std::vector<int> input_shape{3, 32, 32};  // [C, H, W]
    int stem_channels = 64;
    std::vector<int> stage_widths{64, 128, 256};
    int blocks_per_stage = 2;
    std::vector<int> dense_widths{512, 10};

    void validate() const;
};

/// Lays out the layer sequence for a scheme: stem Conv-BN-ReLU, then per
/// stage `blocks_per_stage` blocks followed by a 2x2 max-pool, then the
/// dense classifier. Regular blocks are Conv-BN-ReLU; factorized blocks are
/// GroupConv-BN-ReLU-PointwiseConv-BN-ReLU with channel doubling carried by
/// the pointwise conv of each stage's first block.
NetworkPlan plan_network(const MacroArchConfig& cfg, const FactorizationScheme& scheme);

/// plan_network plus Glorot-uniform initialized parameters.
Network build_network(const MacroArchConfig& cfg, const FactorizationScheme& scheme, Rng& rng);

enum class ProgressionKind { UniformDoubling, ReversePyramidDoubling };

/// The two stock progressions: uniform f = 2,4,8,16 and reverse-pyramid
/// f_init = 2,4, optionally bracketed by the Regular and DWS endpoints.
std::vector<FactorizationScheme> progression(ProgressionKind kind, bool include_endpoints);

}  // namespace fznet
