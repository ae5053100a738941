#pragma once

#include <vector>

#include "factorizenet/rng.hpp"
#include "factorizenet/tensor.hpp"

namespace fznet {

enum class LayerKind { Conv2D, BatchNorm, ReLU, MaxPool2D, Dense, SoftmaxOutput };

const char* layer_kind_name(LayerKind k);

/// Parameter bundle for one layer. Which fields are meaningful depends on
/// `kind`; unused tensors stay empty.
template <class T>
struct LayerParamsT {
    LayerKind kind = LayerKind::Conv2D;

    TensorT<T> weights;  // Conv2D: [C_out, C_in/groups, K, K]; Dense: [fan_out, fan_in]
    TensorT<T> bias;     // [C_out] / [fan_out]

    // BatchNorm, all [C]
    TensorT<T> bn_gamma, bn_beta, bn_running_mean, bn_running_var;

    int groups = 1;   // Conv2D factorization rate f
    int stride = 1;
    int padding = 0;
    int pool_window = 2;
    int pool_stride = 2;
    double epsilon = 1e-3;     // BatchNorm denominator guard
    double bn_momentum = 0.99; // running-stat EMA decay
};

using LayerParams = LayerParamsT<float>;

template <class T>
struct ConvGradsT {
    TensorT<T> d_weights, d_bias, d_input;
};

template <class T>
struct DenseGradsT {
    TensorT<T> d_weights, d_bias, d_input;
};

template <class T>
struct BatchNormGradsT {
    TensorT<T> d_gamma, d_beta, d_input;
};

/// Per-channel batch statistics captured by a train-mode BatchNorm forward.
/// Running-stat updates are a separate explicit step (update_running_stats)
/// so the forward itself stays a pure function.
template <class T>
struct BatchNormCacheT {
    TensorT<T> mean, var;  // biased (population) variance over (N, H, W)
};

/// Flat argmax indices recorded by maxpool for the backward routing.
struct MaxPoolCache {
    std::vector<int> out_shape;
    std::vector<std::size_t> argmax;  // per output element, index into the input
};

enum class BnMode { Train, Infer };

// Grouped 2D cross-correlation. Output channel o belongs to group
// g = o / (C_out/groups) and sees input channels [g*C_in/groups, (g+1)*C_in/groups).
template <class T>
TensorT<T> conv2d_forward(const TensorT<T>& x, const LayerParamsT<T>& p);

template <class T>
ConvGradsT<T> conv2d_backward(const TensorT<T>& x, const LayerParamsT<T>& p,
                              const TensorT<T>& upstream);

// Train mode normalizes by per-channel batch statistics (cache required);
// infer mode uses the stored running statistics.
template <class T>
TensorT<T> batchnorm_forward(const TensorT<T>& x, const LayerParamsT<T>& p, BnMode mode,
                             BatchNormCacheT<T>* cache = nullptr);

template <class T>
BatchNormGradsT<T> batchnorm_backward(const TensorT<T>& x, const LayerParamsT<T>& p,
                                      const BatchNormCacheT<T>& cache, const TensorT<T>& upstream);

template <class T>
void update_running_stats(LayerParamsT<T>& p, const BatchNormCacheT<T>& cache);

template <class T>
TensorT<T> relu_forward(const TensorT<T>& x);

template <class T>
TensorT<T> relu_backward(const TensorT<T>& x, const TensorT<T>& upstream);

template <class T>
TensorT<T> maxpool2d_forward(const TensorT<T>& x, int window, int stride,
                             MaxPoolCache* cache = nullptr);

template <class T>
TensorT<T> maxpool2d_backward(const std::vector<int>& input_shape, const MaxPoolCache& cache,
                              const TensorT<T>& upstream);

// Affine map on the flattened input: x is reshaped to [N, fan_in] first.
template <class T>
TensorT<T> dense_forward(const TensorT<T>& x, const LayerParamsT<T>& p);

template <class T>
DenseGradsT<T> dense_backward(const TensorT<T>& x, const LayerParamsT<T>& p,
                              const TensorT<T>& upstream);

template <class T>
struct SoftmaxResultT {
    double loss = 0.0;  // mean negative log-likelihood
    TensorT<T> probs;   // [N, classes]
};

// Numerically stabilized softmax (row max subtracted) with mean NLL loss.
template <class T>
SoftmaxResultT<T> softmax_crossentropy(const TensorT<T>& logits, const std::vector<int>& labels);

// d(loss)/d(logits) = (probs - onehot) / N
template <class T>
TensorT<T> softmax_crossentropy_backward(const TensorT<T>& probs, const std::vector<int>& labels);

template <class T>
TensorT<T> softmax(const TensorT<T>& logits);

/// Values i.i.d. uniform on [-L, L], L = sqrt(6 / (fan_in + fan_out)).
/// For Conv2D pass fan_in = K*K*C_in/groups, fan_out = K*K*C_out/groups.
Tensor glorot_uniform_init(int fan_in, int fan_out, std::vector<int> shape, Rng& rng);

// Production (float) and gradient-check (double) instantiations live in ops.cpp.
extern template TensorT<float> conv2d_forward<float>(const TensorT<float>&, const LayerParamsT<float>&);
extern template TensorT<double> conv2d_forward<double>(const TensorT<double>&, const LayerParamsT<double>&);
extern template ConvGradsT<float> conv2d_backward<float>(const TensorT<float>&, const LayerParamsT<float>&, const TensorT<float>&);
extern template ConvGradsT<double> conv2d_backward<double>(const TensorT<double>&, const LayerParamsT<double>&, const TensorT<double>&);
extern template TensorT<float> batchnorm_forward<float>(const TensorT<float>&, const LayerParamsT<float>&, BnMode, BatchNormCacheT<float>*);
extern template TensorT<double> batchnorm_forward<double>(const TensorT<double>&, const LayerParamsT<double>&, BnMode, BatchNormCacheT<double>*);
extern template BatchNormGradsT<float> batchnorm_backward<float>(const TensorT<float>&, const LayerParamsT<float>&, const BatchNormCacheT<float>&, const TensorT<float>&);
extern template BatchNormGradsT<double> batchnorm_backward<double>(const TensorT<double>&, const LayerParamsT<double>&, const BatchNormCacheT<double>&, const TensorT<double>&);
extern template void update_running_stats<float>(LayerParamsT<float>&, const BatchNormCacheT<float>&);
extern template void update_running_stats<double>(LayerParamsT<double>&, const BatchNormCacheT<double>&);
extern template TensorT<float> relu_forward<float>(const TensorT<float>&);
extern template TensorT<double> relu_forward<double>(const TensorT<double>&);
extern template TensorT<float> relu_backward<float>(const TensorT<float>&, const TensorT<float>&);
extern template TensorT<double> relu_backward<double>(const TensorT<double>&, const TensorT<double>&);
extern template TensorT<float> maxpool2d_forward<float>(const TensorT<float>&, int, int, MaxPoolCache*);
extern template TensorT<double> maxpool2d_forward<double>(const TensorT<double>&, int, int, MaxPoolCache*);
extern template TensorT<float> maxpool2d_backward<float>(const std::vector<int>&, const MaxPoolCache&, const TensorT<float>&);
extern template TensorT<double> maxpool2d_backward<double>(const std::vector<int>&, const MaxPoolCache&, const TensorT<double>&);
extern template TensorT<float> dense_forward<float>(const TensorT<float>&, const LayerParamsT<float>&);
extern template TensorT<double> dense_forward<double>(const TensorT<double>&, const LayerParamsT<double>&);
extern template DenseGradsT<float> dense_backward<float>(const TensorT<float>&, const LayerParamsT<float>&, const TensorT<float>&);
extern template DenseGradsT<double> dense_backward<double>(const TensorT<double>&, const LayerParamsT<double>&, const TensorT<double>&);
extern template SoftmaxResultT<float> softmax_crossentropy<float>(const TensorT<float>&, const std::vector<int>&);
extern template SoftmaxResultT<double> softmax_crossentropy<double>(const TensorT<double>&, const std::vector<int>&);
extern template TensorT<float> softmax_crossentropy_backward<float>(const TensorT<float>&, const std::vector<int>&);
extern template TensorT<double> softmax_crossentropy_backward<double>(const TensorT<double>&, const std::vector<int>&);
extern template TensorT<float> softmax<float>(const TensorT<float>&);
extern template TensorT<double> softmax<double>(const TensorT<double>&);

}  // namespace fznet
