#include "factorizenet/arch.hpp"

#include <algorithm>

namespace fznet {

void ConvSpec::validate() const {
    if (groups < 1 || groups > in_channels)
        throw ConfigError("conv spec: groups must be in [1, C_in], got f=" + std::to_string(groups) +
                          ", C_in=" + std::to_string(in_channels));
    if (in_channels % groups != 0 || out_channels % groups != 0)
        throw ConfigError("conv spec: f=" + std::to_string(groups) + " must divide C_in=" +
                          std::to_string(in_channels) + " and C_out=" + std::to_string(out_channels));
    if (kernel < 1 || out_h < 1 || out_w < 1 || in_channels < 1 || out_channels < 1)
        throw ConfigError("conv spec: all dimensions must be >= 1");
}

ConvSpec conv_spec(const LayerDesc& d) {
    ConvSpec s;
    s.kernel = d.kernel;
    s.out_h = d.out_h;
    s.out_w = d.out_w;
    s.in_channels = d.in_channels;
    s.out_channels = d.out_channels;
    s.groups = d.groups;
    s.stride = d.stride;
    s.has_pointwise_follower = d.has_pointwise_follower;
    return s;
}

std::uint64_t layer_macs(const ConvSpec& spec) {
    spec.validate();
    const std::uint64_t k = static_cast<std::uint64_t>(spec.kernel);
    return k * k * static_cast<std::uint64_t>(spec.out_h) * static_cast<std::uint64_t>(spec.out_w) *
           (static_cast<std::uint64_t>(spec.in_channels) / spec.groups) *
           (static_cast<std::uint64_t>(spec.out_channels) / spec.groups) *
           static_cast<std::uint64_t>(spec.groups);
}

std::uint64_t network_macs(const NetworkPlan& plan) {
    std::uint64_t total = 0;
    for (const LayerDesc& d : plan.layers) {
        if (d.is_conv()) total += layer_macs(conv_spec(d));
    }
    return total;
}

FactorizationScheme FactorizationScheme::parse(const std::string& s) {
    const auto rate_of = [&](std::size_t prefix_len) {
        const std::string num = s.substr(prefix_len);
        std::size_t used = 0;
        int v = 0;
        try {
            v = std::stoi(num, &used);
        } catch (const std::exception&) {
            throw ConfigError("invalid scheme string: \"" + s + "\"");
        }
        if (used != num.size() || v < 1) throw ConfigError("invalid scheme rate in: \"" + s + "\"");
        return v;
    };
    if (s == "regular") return regular();
    if (s == "dws") return depthwise();
    if (s.rfind("uniform:", 0) == 0) return uniform(rate_of(8));
    if (s.rfind("revpyr:", 0) == 0) return reverse_pyramid(rate_of(7));
    throw ConfigError("invalid scheme string: \"" + s +
                      "\" (expected regular | uniform:F | revpyr:F | dws)");
}

std::string FactorizationScheme::label() const {
    switch (variant) {
        case Variant::Regular: return "Regular_Conv";
        case Variant::Uniform: return "FactorizeNet-f" + std::to_string(rate);
        case Variant::ReversePyramid: return "FactorizeNet-finit" + std::to_string(rate);
        case Variant::DepthwiseSeparable: return "DWS_Conv";
    }
    return "?";
}

std::string FactorizationScheme::to_string() const {
    switch (variant) {
        case Variant::Regular: return "regular";
        case Variant::Uniform: return "uniform:" + std::to_string(rate);
        case Variant::ReversePyramid: return "revpyr:" + std::to_string(rate);
        case Variant::DepthwiseSeparable: return "dws";
    }
    return "?";
}

void MacroArchConfig::validate() const {
    if (input_shape.size() != 3 || input_shape[0] < 1 || input_shape[1] < 1 || input_shape[2] < 1)
        throw ConfigError("input_shape must be [C, H, W] with positive dims");
    if (stage_widths.empty()) throw ConfigError("stage_widths must be non-empty");
    for (std::size_t i = 1; i < stage_widths.size(); ++i) {
        if (stage_widths[i] != 2 * stage_widths[i - 1])
            throw ConfigError("stage_widths must double stage to stage");
    }
    if (stem_channels != stage_widths[0])
        throw ConfigError("stem_channels must equal stage_widths[0]");
    if (blocks_per_stage < 1) throw ConfigError("blocks_per_stage must be >= 1");
    if (dense_widths.empty()) throw ConfigError("dense_widths must be non-empty");
    for (const int w : dense_widths) {
        if (w < 1) throw ConfigError("dense widths must be >= 1");
    }
}

namespace {

// Factorization rate of a group conv with the given input depth.
int rate_for(const FactorizationScheme& scheme, const MacroArchConfig& cfg, int c_in) {
    switch (scheme.variant) {
        case FactorizationScheme::Variant::Regular:
            return 1;
        case FactorizationScheme::Variant::Uniform:
            if (c_in % scheme.rate != 0)
                throw ConfigError("uniform rate f=" + std::to_string(scheme.rate) +
                                  " does not divide layer width " + std::to_string(c_in));
            return scheme.rate;
        case FactorizationScheme::Variant::ReversePyramid: {
            // f doubles whenever the input depth doubles: the channels-per-group
            // count stage_widths[0]/f_init is held constant across the network.
            const int base = cfg.stage_widths[0];
            if (base % scheme.rate != 0)
                throw ConfigError("reverse-pyramid f_init=" + std::to_string(scheme.rate) +
                                  " does not divide the base stage width " + std::to_string(base));
            const int per_group = base / scheme.rate;
            if (c_in % per_group != 0)
                throw ConfigError("reverse-pyramid group size " + std::to_string(per_group) +
                                  " does not divide layer width " + std::to_string(c_in));
            return c_in / per_group;
        }
        case FactorizationScheme::Variant::DepthwiseSeparable:
            return c_in;
    }
    return 1;
}

struct PlanBuilder {
    NetworkPlan plan;
    int channels, height, width;

    void conv(LayerRole role, const std::string& name, int c_out, int kernel, int groups,
              bool pointwise_follows) {
        LayerDesc d;
        d.kind = LayerKind::Conv2D;
        d.role = role;
        d.name = name;
        d.in_channels = channels;
        d.out_channels = c_out;
        d.kernel = kernel;
        d.groups = groups;
        d.stride = 1;
        d.padding = (kernel - 1) / 2;  // "same" padding at stride 1
        d.out_h = height;
        d.out_w = width;
        d.has_pointwise_follower = pointwise_follows;
        conv_spec(d).validate();
        plan.layers.push_back(d);
        channels = c_out;
    }

    void bn_relu(const std::string& base) {
        LayerDesc bn;
        bn.kind = LayerKind::BatchNorm;
        bn.role = LayerRole::Bn;
        bn.name = base + "_bn";
        bn.in_channels = bn.out_channels = channels;
        bn.out_h = height;
        bn.out_w = width;
        plan.layers.push_back(bn);

        LayerDesc relu;
        relu.kind = LayerKind::ReLU;
        relu.role = LayerRole::Relu;
        relu.name = base + "_relu";
        relu.in_channels = relu.out_channels = channels;
        relu.out_h = height;
        relu.out_w = width;
        plan.layers.push_back(relu);
    }

    void pool(const std::string& name) {
        if (height < 2 || width < 2)
            throw ConfigError("input too small: no room for the 2x2 pool after " + name);
        LayerDesc d;
        d.kind = LayerKind::MaxPool2D;
        d.role = LayerRole::Pool;
        d.name = name;
        d.in_channels = d.out_channels = channels;
        height /= 2;
        width /= 2;
        d.out_h = height;
        d.out_w = width;
        plan.layers.push_back(d);
    }

    void dense(const std::string& name, int fan_in, int fan_out) {
        LayerDesc d;
        d.kind = LayerKind::Dense;
        d.role = LayerRole::Dense;
        d.name = name;
        d.fan_in = fan_in;
        d.fan_out = fan_out;
        d.in_channels = fan_in;
        d.out_channels = fan_out;
        d.out_h = d.out_w = 1;
        plan.layers.push_back(d);
    }
};

}  // namespace

NetworkPlan plan_network(const MacroArchConfig& cfg, const FactorizationScheme& scheme) {
    cfg.validate();
    if (scheme.variant == FactorizationScheme::Variant::Uniform ||
        scheme.variant == FactorizationScheme::Variant::ReversePyramid) {
        if (scheme.rate < 1) throw ConfigError("scheme rate must be >= 1");
    }

    PlanBuilder b;
    b.channels = cfg.input_shape[0];
    b.height = cfg.input_shape[1];
    b.width = cfg.input_shape[2];
    b.plan.scheme_label = scheme.label();

    // The very first convolution stays fixed at f=1 under every scheme.
    b.conv(LayerRole::Stem, "stem", cfg.stem_channels, 3, 1, false);
    b.bn_relu("stem");

    const bool factorized = scheme.variant != FactorizationScheme::Variant::Regular;
    for (std::size_t s = 0; s < cfg.stage_widths.size(); ++s) {
        const int width_s = cfg.stage_widths[s];
        for (int blk = 0; blk < cfg.blocks_per_stage; ++blk) {
            const std::string base = "s" + std::to_string(s) + "_b" + std::to_string(blk);
            if (!factorized) {
                // Plain Conv-BN-ReLU; the first block of a stage widens.
                b.conv(LayerRole::GroupConv, base + "_conv", width_s, 3, 1, false);
                b.bn_relu(base + "_conv");
            } else {
                // GroupConv keeps the channel count; the pointwise conv of the
                // stage's first block carries the doubling.
                const int f = rate_for(scheme, cfg, b.channels);
                b.conv(LayerRole::GroupConv, base + "_gconv", b.channels, 3, f, true);
                b.bn_relu(base + "_gconv");
                b.conv(LayerRole::Pointwise, base + "_pw", width_s, 1, 1, false);
                b.bn_relu(base + "_pw");
            }
        }
        b.pool("pool" + std::to_string(s));
    }

    int fan_in = b.channels * b.height * b.width;
    for (std::size_t i = 0; i < cfg.dense_widths.size(); ++i) {
        const std::string name = "fc" + std::to_string(i);
        b.dense(name, fan_in, cfg.dense_widths[i]);
        if (i + 1 < cfg.dense_widths.size()) {
            LayerDesc relu;
            relu.kind = LayerKind::ReLU;
            relu.role = LayerRole::Relu;
            relu.name = name + "_relu";
            relu.in_channels = relu.out_channels = cfg.dense_widths[i];
            relu.out_h = relu.out_w = 1;
            b.plan.layers.push_back(relu);
        }
        fan_in = cfg.dense_widths[i];
    }

    LayerDesc out;
    out.kind = LayerKind::SoftmaxOutput;
    out.role = LayerRole::Output;
    out.name = "output";
    out.in_channels = out.out_channels = cfg.dense_widths.back();
    out.out_h = out.out_w = 1;
    b.plan.layers.push_back(out);

    return b.plan;
}

Network build_network(const MacroArchConfig& cfg, const FactorizationScheme& scheme, Rng& rng) {
    Network net;
    net.plan = plan_network(cfg, scheme);
    net.params = make_params(net.plan);
    for (std::size_t i = 0; i < net.plan.layers.size(); ++i) {
        const LayerDesc& d = net.plan.layers[i];
        if (d.kind == LayerKind::Conv2D) {
            const int fan_in = d.kernel * d.kernel * d.in_channels / d.groups;
            const int fan_out = d.kernel * d.kernel * d.out_channels / d.groups;
            net.params[i].weights = glorot_uniform_init(fan_in, fan_out, net.params[i].weights.shape, rng);
        } else if (d.kind == LayerKind::Dense) {
            net.params[i].weights = glorot_uniform_init(d.fan_in, d.fan_out, net.params[i].weights.shape, rng);
        }
    }
    return net;
}

std::vector<FactorizationScheme> progression(ProgressionKind kind, bool include_endpoints) {
    std::vector<FactorizationScheme> seq;
    if (include_endpoints) seq.push_back(FactorizationScheme::regular());
    if (kind == ProgressionKind::UniformDoubling) {
        for (const int f : {2, 4, 8, 16}) seq.push_back(FactorizationScheme::uniform(f));
    } else {
        for (const int f : {2, 4}) seq.push_back(FactorizationScheme::reverse_pyramid(f));
    }
    if (include_endpoints) seq.push_back(FactorizationScheme::depthwise());
    return seq;
}

}  // namespace fznet
