#include "factorizenet/network.hpp"

#include <algorithm>

namespace fznet {

const char* layer_role_name(LayerRole r) {
    switch (r) {
        case LayerRole::Stem: return "stem";
        case LayerRole::GroupConv: return "group_conv";
        case LayerRole::Pointwise: return "pointwise";
        case LayerRole::Bn: return "bn";
        case LayerRole::Relu: return "relu";
        case LayerRole::Pool: return "pool";
        case LayerRole::Dense: return "dense";
        case LayerRole::Output: return "output";
    }
    return "?";
}

LayerRole layer_role_from_name(const std::string& s) {
    for (const LayerRole r : {LayerRole::Stem, LayerRole::GroupConv, LayerRole::Pointwise,
                              LayerRole::Bn, LayerRole::Relu, LayerRole::Pool, LayerRole::Dense,
                              LayerRole::Output}) {
        if (s == layer_role_name(r)) return r;
    }
    throw ConfigError("unknown layer role: " + s);
}

std::vector<int> NetworkPlan::conv_dense_indices() const {
    std::vector<int> idx;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        if (layers[i].is_conv_or_dense()) idx.push_back(static_cast<int>(i));
    }
    return idx;
}

std::vector<QuantSite> quant_sites(const NetworkPlan& plan) {
    std::vector<QuantSite> sites;
    const auto& ls = plan.layers;
    for (int i = 0; i < static_cast<int>(ls.size()); ++i) {
        if (!ls[i].is_conv_or_dense()) continue;
        QuantSite s;
        s.layer_idx = i;
        int j = i + 1;
        if (j < static_cast<int>(ls.size()) && ls[j].kind == LayerKind::BatchNorm) {
            s.bn_idx = j;
            ++j;
        }
        if (j < static_cast<int>(ls.size()) && ls[j].kind == LayerKind::ReLU) {
            s.act_idx = j;
        } else {
            s.act_idx = (s.bn_idx >= 0) ? s.bn_idx : i;
        }
        sites.push_back(s);
    }
    return sites;
}

int Network::num_classes() const {
    for (auto it = plan.layers.rbegin(); it != plan.layers.rend(); ++it) {
        if (it->kind == LayerKind::Dense) return it->fan_out;
    }
    throw ConfigError("network has no dense layer");
}

std::size_t Network::parameter_count() const {
    std::size_t n = 0;
    for (const auto& p : params) {
        n += p.weights.numel() + p.bias.numel() + p.bn_gamma.numel() + p.bn_beta.numel();
    }
    return n;
}

Tensor Network::forward(const Tensor& x, BnMode mode, ForwardCache* cache) const {
    if (mode == BnMode::Train && cache == nullptr) {
        throw ConfigError("train-mode forward requires a cache");
    }
    if (cache) {
        cache->inputs.assign(plan.layers.size(), Tensor());
        cache->bn.assign(plan.layers.size(), BatchNormCacheT<float>());
        cache->pool.assign(plan.layers.size(), MaxPoolCache());
    }
    Tensor cur = x;
    for (std::size_t i = 0; i < plan.layers.size(); ++i) {
        const LayerDesc& d = plan.layers[i];
        if (cache) cache->inputs[i] = cur;
        switch (d.kind) {
            case LayerKind::Conv2D:
                cur = conv2d_forward(cur, params[i]);
                break;
            case LayerKind::BatchNorm:
                cur = batchnorm_forward(cur, params[i], mode, cache ? &cache->bn[i] : nullptr);
                break;
            case LayerKind::ReLU:
                cur = relu_forward(cur);
                break;
            case LayerKind::MaxPool2D:
                cur = maxpool2d_forward(cur, d.pool_window, d.pool_stride,
                                        cache ? &cache->pool[i] : nullptr);
                break;
            case LayerKind::Dense:
                cur = dense_forward(cur, params[i]);
                break;
            case LayerKind::SoftmaxOutput:
                break;  // loss/probs are computed by the caller on the logits
        }
    }
    if (cache) cache->logits = cur;
    return cur;
}

std::vector<Tensor> Network::forward_all(const Tensor& x, BnMode mode) const {
    std::vector<Tensor> outs;
    outs.reserve(plan.layers.size());
    Tensor cur = x;
    for (std::size_t i = 0; i < plan.layers.size(); ++i) {
        const LayerDesc& d = plan.layers[i];
        switch (d.kind) {
            case LayerKind::Conv2D: cur = conv2d_forward(cur, params[i]); break;
            case LayerKind::BatchNorm: cur = batchnorm_forward(cur, params[i], mode); break;
            case LayerKind::ReLU: cur = relu_forward(cur); break;
            case LayerKind::MaxPool2D: cur = maxpool2d_forward<float>(cur, d.pool_window, d.pool_stride); break;
            case LayerKind::Dense: cur = dense_forward(cur, params[i]); break;
            case LayerKind::SoftmaxOutput: break;
        }
        outs.push_back(cur);
    }
    return outs;
}

std::vector<LayerGrads> Network::backward(const ForwardCache& cache, const Tensor& d_logits) const {
    std::vector<LayerGrads> grads(plan.layers.size());
    Tensor up = d_logits;
    for (int i = static_cast<int>(plan.layers.size()) - 1; i >= 0; --i) {
        const LayerDesc& d = plan.layers[i];
        const Tensor& input = cache.inputs[i];
        switch (d.kind) {
            case LayerKind::Conv2D: {
                ConvGradsT<float> g = conv2d_backward(input, params[i], up);
                grads[i].d_weights = std::move(g.d_weights);
                grads[i].d_bias = std::move(g.d_bias);
                grads[i].present = true;
                up = std::move(g.d_input);
                break;
            }
            case LayerKind::BatchNorm: {
                BatchNormGradsT<float> g = batchnorm_backward(input, params[i], cache.bn[i], up);
                grads[i].d_gamma = std::move(g.d_gamma);
                grads[i].d_beta = std::move(g.d_beta);
                grads[i].present = true;
                up = std::move(g.d_input);
                break;
            }
            case LayerKind::ReLU:
                up = relu_backward(input, up);
                break;
            case LayerKind::MaxPool2D:
                up = maxpool2d_backward<float>(input.shape, cache.pool[i], up);
                break;
            case LayerKind::Dense: {
                DenseGradsT<float> g = dense_backward(input, params[i], up);
                grads[i].d_weights = std::move(g.d_weights);
                grads[i].d_bias = std::move(g.d_bias);
                grads[i].present = true;
                up = std::move(g.d_input);
                break;
            }
            case LayerKind::SoftmaxOutput:
                break;
        }
    }
    return grads;
}

void Network::apply_bn_updates(const ForwardCache& cache) {
    for (std::size_t i = 0; i < plan.layers.size(); ++i) {
        if (plan.layers[i].kind == LayerKind::BatchNorm) {
            update_running_stats(params[i], cache.bn[i]);
        }
    }
}

std::vector<LayerParams> make_params(const NetworkPlan& plan) {
    std::vector<LayerParams> out(plan.layers.size());
    for (std::size_t i = 0; i < plan.layers.size(); ++i) {
        const LayerDesc& d = plan.layers[i];
        LayerParams& p = out[i];
        p.kind = d.kind;
        switch (d.kind) {
            case LayerKind::Conv2D:
                p.weights = Tensor({d.out_channels, d.in_channels / d.groups, d.kernel, d.kernel});
                p.bias = Tensor({d.out_channels});
                p.groups = d.groups;
                p.stride = d.stride;
                p.padding = d.padding;
                break;
            case LayerKind::BatchNorm:
                p.bn_gamma = Tensor({d.out_channels});
                p.bn_gamma.fill(1.0f);
                p.bn_beta = Tensor({d.out_channels});
                p.bn_running_mean = Tensor({d.out_channels});
                p.bn_running_var = Tensor({d.out_channels});
                p.bn_running_var.fill(1.0f);
                p.epsilon = d.epsilon;
                break;
            case LayerKind::Dense:
                p.weights = Tensor({d.fan_out, d.fan_in});
                p.bias = Tensor({d.fan_out});
                break;
            case LayerKind::MaxPool2D:
                p.pool_window = d.pool_window;
                p.pool_stride = d.pool_stride;
                break;
            case LayerKind::ReLU:
            case LayerKind::SoftmaxOutput:
                break;
        }
    }
    return out;
}

}  // namespace fznet
