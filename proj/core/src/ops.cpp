#include "factorizenet/ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

namespace fznet {

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond) throw ShapeError(msg);
}

int conv_out_dim(int in, int pad, int kernel, int stride) {
    return (in + 2 * pad - kernel) / stride + 1;
}

template <class T>
void check_conv_args(const TensorT<T>& x, const LayerParamsT<T>& p) {
    require(x.rank() == 4, "conv2d: input must be [N,C,H,W], got " + shape_str(x.shape));
    require(p.weights.rank() == 4,
            "conv2d: weights must be [C_out,C_in/groups,K,K], got " + shape_str(p.weights.shape));
    const int c_in = x.dim(1);
    const int c_out = p.weights.dim(0);
    const int g = p.groups;
    if (g < 1 || c_in % g != 0 || c_out % g != 0) {
        throw ConfigError("conv2d: groups=" + std::to_string(g) + " must divide C_in=" +
                          std::to_string(c_in) + " and C_out=" + std::to_string(c_out));
    }
    require(p.weights.dim(1) == c_in / g,
            "conv2d: weight channel dim " + std::to_string(p.weights.dim(1)) +
                " != C_in/groups = " + std::to_string(c_in / g));
    require(p.weights.dim(2) == p.weights.dim(3), "conv2d: only square kernels are supported");
    require(p.bias.numel() == static_cast<std::size_t>(c_out),
            "conv2d: bias length " + std::to_string(p.bias.numel()) + " != C_out");
    const int k = p.weights.dim(2);
    require(conv_out_dim(x.dim(2), p.padding, k, p.stride) >= 1 &&
                conv_out_dim(x.dim(3), p.padding, k, p.stride) >= 1,
            "conv2d: output would be empty for input " + shape_str(x.shape));
}

}  // namespace

const char* layer_kind_name(LayerKind k) {
    switch (k) {
        case LayerKind::Conv2D: return "Conv2D";
        case LayerKind::BatchNorm: return "BatchNorm";
        case LayerKind::ReLU: return "ReLU";
        case LayerKind::MaxPool2D: return "MaxPool2D";
        case LayerKind::Dense: return "Dense";
        case LayerKind::SoftmaxOutput: return "SoftmaxOutput";
    }
    return "?";
}

template <class T>
TensorT<T> conv2d_forward(const TensorT<T>& x, const LayerParamsT<T>& p) {
    check_conv_args(x, p);
    const int n_batch = x.dim(0), c_in = x.dim(1), h_in = x.dim(2), w_in = x.dim(3);
    const int c_out = p.weights.dim(0), k = p.weights.dim(2);
    const int g = p.groups, cg_in = c_in / g, cg_out = c_out / g;
    const int stride = p.stride, pad = p.padding;
    const int h_out = conv_out_dim(h_in, pad, k, stride);
    const int w_out = conv_out_dim(w_in, pad, k, stride);

    TensorT<T> out({n_batch, c_out, h_out, w_out});
    const T* xp = x.ptr();
    const T* wp = p.weights.ptr();
    T* op = out.ptr();

    for (int n = 0; n < n_batch; ++n) {
        for (int oc = 0; oc < c_out; ++oc) {
            const int grp = oc / cg_out;
            T* out_ch = op + (static_cast<std::size_t>(n) * c_out + oc) * h_out * w_out;
            std::fill(out_ch, out_ch + static_cast<std::size_t>(h_out) * w_out, p.bias.data[oc]);
            for (int icg = 0; icg < cg_in; ++icg) {
                const int ic = grp * cg_in + icg;
                const T* in_ch = xp + (static_cast<std::size_t>(n) * c_in + ic) * h_in * w_in;
                const T* w_ch = wp + ((static_cast<std::size_t>(oc) * cg_in + icg)) * k * k;
                for (int kh = 0; kh < k; ++kh) {
                    for (int kw = 0; kw < k; ++kw) {
                        const T wv = w_ch[kh * k + kw];
                        for (int oh = 0; oh < h_out; ++oh) {
                            const int ih = oh * stride - pad + kh;
                            if (ih < 0 || ih >= h_in) continue;
                            const T* in_row = in_ch + static_cast<std::size_t>(ih) * w_in;
                            T* out_row = out_ch + static_cast<std::size_t>(oh) * w_out;
                            for (int ow = 0; ow < w_out; ++ow) {
                                const int iw = ow * stride - pad + kw;
                                if (iw < 0 || iw >= w_in) continue;
                                out_row[ow] += wv * in_row[iw];
                            }
                        }
                    }
                }
            }
        }
    }
    return out;
}

template <class T>
ConvGradsT<T> conv2d_backward(const TensorT<T>& x, const LayerParamsT<T>& p,
                              const TensorT<T>& upstream) {
    check_conv_args(x, p);
    const int n_batch = x.dim(0), c_in = x.dim(1), h_in = x.dim(2), w_in = x.dim(3);
    const int c_out = p.weights.dim(0), k = p.weights.dim(2);
    const int g = p.groups, cg_in = c_in / g, cg_out = c_out / g;
    const int stride = p.stride, pad = p.padding;
    const int h_out = conv_out_dim(h_in, pad, k, stride);
    const int w_out = conv_out_dim(w_in, pad, k, stride);
    require(upstream.shape == std::vector<int>({n_batch, c_out, h_out, w_out}),
            "conv2d_backward: upstream shape " + shape_str(upstream.shape) +
                " does not match forward output [" + std::to_string(n_batch) + ", " +
                std::to_string(c_out) + ", " + std::to_string(h_out) + ", " +
                std::to_string(w_out) + "]");

    ConvGradsT<T> grads;
    grads.d_weights = TensorT<T>(p.weights.shape);
    grads.d_bias = TensorT<T>(p.bias.shape);
    grads.d_input = TensorT<T>(x.shape);

    const T* xp = x.ptr();
    const T* wp = p.weights.ptr();
    const T* up = upstream.ptr();
    T* dw = grads.d_weights.ptr();
    T* db = grads.d_bias.ptr();
    T* dx = grads.d_input.ptr();

    for (int n = 0; n < n_batch; ++n) {
        for (int oc = 0; oc < c_out; ++oc) {
            const int grp = oc / cg_out;
            const T* up_ch = up + (static_cast<std::size_t>(n) * c_out + oc) * h_out * w_out;
            T acc_b = 0;
            for (std::size_t i = 0; i < static_cast<std::size_t>(h_out) * w_out; ++i) acc_b += up_ch[i];
            db[oc] += acc_b;
            for (int icg = 0; icg < cg_in; ++icg) {
                const int ic = grp * cg_in + icg;
                const T* in_ch = xp + (static_cast<std::size_t>(n) * c_in + ic) * h_in * w_in;
                T* dx_ch = dx + (static_cast<std::size_t>(n) * c_in + ic) * h_in * w_in;
                const T* w_ch = wp + (static_cast<std::size_t>(oc) * cg_in + icg) * k * k;
                T* dw_ch = dw + (static_cast<std::size_t>(oc) * cg_in + icg) * k * k;
                for (int kh = 0; kh < k; ++kh) {
                    for (int kw = 0; kw < k; ++kw) {
                        const T wv = w_ch[kh * k + kw];
                        T acc_w = 0;
                        for (int oh = 0; oh < h_out; ++oh) {
                            const int ih = oh * stride - pad + kh;
                            if (ih < 0 || ih >= h_in) continue;
                            const T* in_row = in_ch + static_cast<std::size_t>(ih) * w_in;
                            T* dx_row = dx_ch + static_cast<std::size_t>(ih) * w_in;
                            const T* up_row = up_ch + static_cast<std::size_t>(oh) * w_out;
                            for (int ow = 0; ow < w_out; ++ow) {
                                const int iw = ow * stride - pad + kw;
                                if (iw < 0 || iw >= w_in) continue;
                                acc_w += up_row[ow] * in_row[iw];
                                dx_row[iw] += up_row[ow] * wv;
                            }
                        }
                        dw_ch[kh * k + kw] += acc_w;
                    }
                }
            }
        }
    }
    return grads;
}

template <class T>
TensorT<T> batchnorm_forward(const TensorT<T>& x, const LayerParamsT<T>& p, BnMode mode,
                             BatchNormCacheT<T>* cache) {
    require(x.rank() == 4, "batchnorm: input must be [N,C,H,W], got " + shape_str(x.shape));
    const int c = x.dim(1);
    require(p.bn_gamma.numel() == static_cast<std::size_t>(c) &&
                p.bn_beta.numel() == static_cast<std::size_t>(c),
            "batchnorm: gamma/beta length does not match C=" + std::to_string(c));
    if (p.epsilon <= 0) throw ConfigError("batchnorm: epsilon must be > 0");

    const int n_batch = x.dim(0), h = x.dim(2), w = x.dim(3);
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    const std::size_t per_ch = static_cast<std::size_t>(n_batch) * plane;

    TensorT<T> mean({c}), var({c});
    if (mode == BnMode::Train) {
        for (int ch = 0; ch < c; ++ch) {
            T acc = 0;
            for (int n = 0; n < n_batch; ++n) {
                const T* px = x.ptr() + (static_cast<std::size_t>(n) * c + ch) * plane;
                for (std::size_t i = 0; i < plane; ++i) acc += px[i];
            }
            const T mu = acc / static_cast<T>(per_ch);
            T acc2 = 0;
            for (int n = 0; n < n_batch; ++n) {
                const T* px = x.ptr() + (static_cast<std::size_t>(n) * c + ch) * plane;
                for (std::size_t i = 0; i < plane; ++i) {
                    const T d = px[i] - mu;
                    acc2 += d * d;
                }
            }
            mean.data[ch] = mu;
            var.data[ch] = acc2 / static_cast<T>(per_ch);
        }
        if (cache) {
            cache->mean = mean;
            cache->var = var;
        }
    } else {
        require(p.bn_running_mean.numel() == static_cast<std::size_t>(c) &&
                    p.bn_running_var.numel() == static_cast<std::size_t>(c),
                "batchnorm: running stats not populated");
        mean = p.bn_running_mean;
        var = p.bn_running_var;
    }
    for (int ch = 0; ch < c; ++ch) {
        if (var.data[ch] < 0) throw ShapeError("batchnorm: negative variance");
    }

    TensorT<T> out(x.shape);
    for (int ch = 0; ch < c; ++ch) {
        const T inv_std = T(1) / std::sqrt(var.data[ch] + static_cast<T>(p.epsilon));
        const T gamma = p.bn_gamma.data[ch], beta = p.bn_beta.data[ch], mu = mean.data[ch];
        for (int n = 0; n < n_batch; ++n) {
            const T* px = x.ptr() + (static_cast<std::size_t>(n) * c + ch) * plane;
            T* po = out.ptr() + (static_cast<std::size_t>(n) * c + ch) * plane;
            for (std::size_t i = 0; i < plane; ++i) po[i] = gamma * (px[i] - mu) * inv_std + beta;
        }
    }
    return out;
}

template <class T>
BatchNormGradsT<T> batchnorm_backward(const TensorT<T>& x, const LayerParamsT<T>& p,
                                      const BatchNormCacheT<T>& cache, const TensorT<T>& upstream) {
    require(x.same_shape(upstream), "batchnorm_backward: upstream shape mismatch");
    const int n_batch = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    const T m = static_cast<T>(static_cast<std::size_t>(n_batch) * plane);

    BatchNormGradsT<T> g;
    g.d_gamma = TensorT<T>({c});
    g.d_beta = TensorT<T>({c});
    g.d_input = TensorT<T>(x.shape);

    for (int ch = 0; ch < c; ++ch) {
        const T mu = cache.mean.data[ch];
        const T inv_std = T(1) / std::sqrt(cache.var.data[ch] + static_cast<T>(p.epsilon));
        const T gamma = p.bn_gamma.data[ch];

        T sum_dy = 0, sum_dy_xhat = 0;
        for (int n = 0; n < n_batch; ++n) {
            const T* px = x.ptr() + (static_cast<std::size_t>(n) * c + ch) * plane;
            const T* pu = upstream.ptr() + (static_cast<std::size_t>(n) * c + ch) * plane;
            for (std::size_t i = 0; i < plane; ++i) {
                sum_dy += pu[i];
                sum_dy_xhat += pu[i] * (px[i] - mu) * inv_std;
            }
        }
        g.d_gamma.data[ch] = sum_dy_xhat;
        g.d_beta.data[ch] = sum_dy;

        const T k1 = sum_dy / m;
        const T k2 = sum_dy_xhat / m;
        for (int n = 0; n < n_batch; ++n) {
            const T* px = x.ptr() + (static_cast<std::size_t>(n) * c + ch) * plane;
            const T* pu = upstream.ptr() + (static_cast<std::size_t>(n) * c + ch) * plane;
            T* pd = g.d_input.ptr() + (static_cast<std::size_t>(n) * c + ch) * plane;
            for (std::size_t i = 0; i < plane; ++i) {
                const T xhat = (px[i] - mu) * inv_std;
                pd[i] = gamma * inv_std * (pu[i] - k1 - xhat * k2);
            }
        }
    }
    return g;
}

template <class T>
void update_running_stats(LayerParamsT<T>& p, const BatchNormCacheT<T>& cache) {
    const T mom = static_cast<T>(p.bn_momentum);
    for (std::size_t i = 0; i < p.bn_running_mean.numel(); ++i) {
        p.bn_running_mean.data[i] = mom * p.bn_running_mean.data[i] + (T(1) - mom) * cache.mean.data[i];
        p.bn_running_var.data[i] = mom * p.bn_running_var.data[i] + (T(1) - mom) * cache.var.data[i];
    }
}

template <class T>
TensorT<T> relu_forward(const TensorT<T>& x) {
    TensorT<T> out(x.shape);
    for (std::size_t i = 0; i < x.numel(); ++i) out.data[i] = x.data[i] > T(0) ? x.data[i] : T(0);
    return out;
}

template <class T>
TensorT<T> relu_backward(const TensorT<T>& x, const TensorT<T>& upstream) {
    require(x.same_shape(upstream), "relu_backward: upstream shape mismatch");
    TensorT<T> out(x.shape);
    for (std::size_t i = 0; i < x.numel(); ++i) out.data[i] = x.data[i] > T(0) ? upstream.data[i] : T(0);
    return out;
}

template <class T>
TensorT<T> maxpool2d_forward(const TensorT<T>& x, int window, int stride, MaxPoolCache* cache) {
    require(x.rank() == 4, "maxpool2d: input must be [N,C,H,W], got " + shape_str(x.shape));
    require(window >= 1 && stride >= 1, "maxpool2d: window/stride must be >= 1");
    const int n_batch = x.dim(0), c = x.dim(1), h_in = x.dim(2), w_in = x.dim(3);
    require(h_in >= window && w_in >= window, "maxpool2d: input smaller than window");
    const int h_out = (h_in - window) / stride + 1;
    const int w_out = (w_in - window) / stride + 1;

    TensorT<T> out({n_batch, c, h_out, w_out});
    if (cache) {
        cache->out_shape = out.shape;
        cache->argmax.assign(out.numel(), 0);
    }
    std::size_t oi = 0;
    for (int n = 0; n < n_batch; ++n) {
        for (int ch = 0; ch < c; ++ch) {
            const T* in_ch = x.ptr() + (static_cast<std::size_t>(n) * c + ch) * h_in * w_in;
            const std::size_t ch_base = (static_cast<std::size_t>(n) * c + ch) * h_in * w_in;
            for (int oh = 0; oh < h_out; ++oh) {
                for (int ow = 0; ow < w_out; ++ow, ++oi) {
                    T best = in_ch[static_cast<std::size_t>(oh * stride) * w_in + ow * stride];
                    std::size_t best_idx = static_cast<std::size_t>(oh * stride) * w_in + ow * stride;
                    for (int kh = 0; kh < window; ++kh) {
                        for (int kw = 0; kw < window; ++kw) {
                            const std::size_t idx =
                                static_cast<std::size_t>(oh * stride + kh) * w_in + ow * stride + kw;
                            if (in_ch[idx] > best) {  // first max wins on ties
                                best = in_ch[idx];
                                best_idx = idx;
                            }
                        }
                    }
                    out.data[oi] = best;
                    if (cache) cache->argmax[oi] = ch_base + best_idx;
                }
            }
        }
    }
    return out;
}

template <class T>
TensorT<T> maxpool2d_backward(const std::vector<int>& input_shape, const MaxPoolCache& cache,
                              const TensorT<T>& upstream) {
    require(upstream.shape == cache.out_shape, "maxpool2d_backward: upstream shape mismatch");
    TensorT<T> dx(input_shape);
    for (std::size_t i = 0; i < upstream.numel(); ++i) dx.data[cache.argmax[i]] += upstream.data[i];
    return dx;
}

template <class T>
TensorT<T> dense_forward(const TensorT<T>& x, const LayerParamsT<T>& p) {
    require(p.weights.rank() == 2, "dense: weights must be [fan_out, fan_in]");
    const int fan_out = p.weights.dim(0), fan_in = p.weights.dim(1);
    const int n_batch = x.dim(0);
    require(x.numel() == static_cast<std::size_t>(n_batch) * fan_in,
            "dense: input " + shape_str(x.shape) + " does not flatten to [N, " +
                std::to_string(fan_in) + "]");
    require(p.bias.numel() == static_cast<std::size_t>(fan_out), "dense: bias length != fan_out");

    TensorT<T> out({n_batch, fan_out});
    for (int n = 0; n < n_batch; ++n) {
        const T* px = x.ptr() + static_cast<std::size_t>(n) * fan_in;
        T* po = out.ptr() + static_cast<std::size_t>(n) * fan_out;
        for (int o = 0; o < fan_out; ++o) {
            const T* pw = p.weights.ptr() + static_cast<std::size_t>(o) * fan_in;
            T acc = p.bias.data[o];
            for (int i = 0; i < fan_in; ++i) acc += pw[i] * px[i];
            po[o] = acc;
        }
    }
    return out;
}

template <class T>
DenseGradsT<T> dense_backward(const TensorT<T>& x, const LayerParamsT<T>& p,
                              const TensorT<T>& upstream) {
    const int fan_out = p.weights.dim(0), fan_in = p.weights.dim(1);
    const int n_batch = x.dim(0);
    require(upstream.shape == std::vector<int>({n_batch, fan_out}),
            "dense_backward: upstream shape mismatch");

    DenseGradsT<T> g;
    g.d_weights = TensorT<T>(p.weights.shape);
    g.d_bias = TensorT<T>(p.bias.shape);
    g.d_input = TensorT<T>(x.shape);

    for (int n = 0; n < n_batch; ++n) {
        const T* px = x.ptr() + static_cast<std::size_t>(n) * fan_in;
        const T* pu = upstream.ptr() + static_cast<std::size_t>(n) * fan_out;
        T* pdx = g.d_input.ptr() + static_cast<std::size_t>(n) * fan_in;
        for (int o = 0; o < fan_out; ++o) {
            const T u = pu[o];
            const T* pw = p.weights.ptr() + static_cast<std::size_t>(o) * fan_in;
            T* pdw = g.d_weights.ptr() + static_cast<std::size_t>(o) * fan_in;
            g.d_bias.data[o] += u;
            for (int i = 0; i < fan_in; ++i) {
                pdw[i] += u * px[i];
                pdx[i] += u * pw[i];
            }
        }
    }
    return g;
}

template <class T>
TensorT<T> softmax(const TensorT<T>& logits) {
    require(logits.rank() == 2, "softmax: logits must be [N, classes]");
    const int n_batch = logits.dim(0), classes = logits.dim(1);
    TensorT<T> probs(logits.shape);
    for (int n = 0; n < n_batch; ++n) {
        const T* pl = logits.ptr() + static_cast<std::size_t>(n) * classes;
        T* pp = probs.ptr() + static_cast<std::size_t>(n) * classes;
        T mx = pl[0];
        for (int c = 1; c < classes; ++c) mx = std::max(mx, pl[c]);
        T sum = 0;
        for (int c = 0; c < classes; ++c) {
            pp[c] = std::exp(pl[c] - mx);
            sum += pp[c];
        }
        for (int c = 0; c < classes; ++c) pp[c] /= sum;
    }
    return probs;
}

template <class T>
SoftmaxResultT<T> softmax_crossentropy(const TensorT<T>& logits, const std::vector<int>& labels) {
    require(logits.rank() == 2, "softmax_crossentropy: logits must be [N, classes]");
    const int n_batch = logits.dim(0), classes = logits.dim(1);
    require(labels.size() == static_cast<std::size_t>(n_batch),
            "softmax_crossentropy: label count != batch size");
    for (const int l : labels) {
        if (l < 0 || l >= classes)
            throw ShapeError("softmax_crossentropy: label " + std::to_string(l) +
                             " out of range [0, " + std::to_string(classes) + ")");
    }

    SoftmaxResultT<T> r;
    r.probs = softmax(logits);
    double loss = 0;
    for (int n = 0; n < n_batch; ++n) {
        const T* pl = logits.ptr() + static_cast<std::size_t>(n) * classes;
        T mx = pl[0];
        for (int c = 1; c < classes; ++c) mx = std::max(mx, pl[c]);
        // log-sum-exp form avoids log(probs) underflow
        T lse = 0;
        for (int c = 0; c < classes; ++c) lse += std::exp(pl[c] - mx);
        loss += static_cast<double>(std::log(lse)) - static_cast<double>(pl[labels[n]] - mx);
    }
    r.loss = loss / n_batch;
    return r;
}

template <class T>
TensorT<T> softmax_crossentropy_backward(const TensorT<T>& probs, const std::vector<int>& labels) {
    const int n_batch = probs.dim(0), classes = probs.dim(1);
    TensorT<T> d(probs.shape);
    const T inv_n = T(1) / static_cast<T>(n_batch);
    for (int n = 0; n < n_batch; ++n) {
        for (int c = 0; c < classes; ++c) {
            const T onehot = (labels[n] == c) ? T(1) : T(0);
            d.at(n, c) = (probs.at(n, c) - onehot) * inv_n;
        }
    }
    return d;
}

Tensor glorot_uniform_init(int fan_in, int fan_out, std::vector<int> shape, Rng& rng) {
    if (fan_in < 1 || fan_out < 1) throw ConfigError("glorot_uniform_init: fans must be >= 1");
    const float limit = std::sqrt(6.0f / static_cast<float>(fan_in + fan_out));
    Tensor t(std::move(shape));
    for (std::size_t i = 0; i < t.numel(); ++i) t.data[i] = rng.uniform(-limit, limit);
    return t;
}

template TensorT<float> conv2d_forward<float>(const TensorT<float>&, const LayerParamsT<float>&);
template TensorT<double> conv2d_forward<double>(const TensorT<double>&, const LayerParamsT<double>&);
template ConvGradsT<float> conv2d_backward<float>(const TensorT<float>&, const LayerParamsT<float>&, const TensorT<float>&);
template ConvGradsT<double> conv2d_backward<double>(const TensorT<double>&, const LayerParamsT<double>&, const TensorT<double>&);
template TensorT<float> batchnorm_forward<float>(const TensorT<float>&, const LayerParamsT<float>&, BnMode, BatchNormCacheT<float>*);
template TensorT<double> batchnorm_forward<double>(const TensorT<double>&, const LayerParamsT<double>&, BnMode, BatchNormCacheT<double>*);
template BatchNormGradsT<float> batchnorm_backward<float>(const TensorT<float>&, const LayerParamsT<float>&, const BatchNormCacheT<float>&, const TensorT<float>&);
template BatchNormGradsT<double> batchnorm_backward<double>(const TensorT<double>&, const LayerParamsT<double>&, const BatchNormCacheT<double>&, const TensorT<double>&);
template void update_running_stats<float>(LayerParamsT<float>&, const BatchNormCacheT<float>&);
template void update_running_stats<double>(LayerParamsT<double>&, const BatchNormCacheT<double>&);
template TensorT<float> relu_forward<float>(const TensorT<float>&);
template TensorT<double> relu_forward<double>(const TensorT<double>&);
template TensorT<float> relu_backward<float>(const TensorT<float>&, const TensorT<float>&);
template TensorT<double> relu_backward<double>(const TensorT<double>&, const TensorT<double>&);
template TensorT<float> maxpool2d_forward<float>(const TensorT<float>&, int, int, MaxPoolCache*);
template TensorT<double> maxpool2d_forward<double>(const TensorT<double>&, int, int, MaxPoolCache*);
template TensorT<float> maxpool2d_backward<float>(const std::vector<int>&, const MaxPoolCache&, const TensorT<float>&);
template TensorT<double> maxpool2d_backward<double>(const std::vector<int>&, const MaxPoolCache&, const TensorT<double>&);
template TensorT<float> dense_forward<float>(const TensorT<float>&, const LayerParamsT<float>&);
template TensorT<double> dense_forward<double>(const TensorT<double>&, const LayerParamsT<double>&);
template DenseGradsT<float> dense_backward<float>(const TensorT<float>&, const LayerParamsT<float>&, const TensorT<float>&);
template DenseGradsT<double> dense_backward<double>(const TensorT<double>&, const LayerParamsT<double>&, const TensorT<double>&);
template SoftmaxResultT<float> softmax_crossentropy<float>(const TensorT<float>&, const std::vector<int>&);
template SoftmaxResultT<double> softmax_crossentropy<double>(const TensorT<double>&, const std::vector<int>&);
template TensorT<float> softmax_crossentropy_backward<float>(const TensorT<float>&, const std::vector<int>&);
template TensorT<double> softmax_crossentropy_backward<double>(const TensorT<double>&, const std::vector<int>&);
template TensorT<float> softmax<float>(const TensorT<float>&);
template TensorT<double> softmax<double>(const TensorT<double>&);

}  // namespace fznet
