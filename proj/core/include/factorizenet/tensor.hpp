#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "factorizenet/errors.hpp"

namespace fznet {

std::string shape_str(const std::vector<int>& shape);

/// Dense row-major tensor of rank 1..4 holding real values.
/// Activations use the [N, C, H, W] layout. The float instantiation is the
/// production type; the double one exists for the gradient-check mode.
template <class T>
struct TensorT {
    std::vector<int> shape;
    std::vector<T> data;
    std::string name;

    TensorT() = default;

    explicit TensorT(std::vector<int> s) : shape(std::move(s)) {
        validate_shape();
        data.assign(numel_of(shape), T(0));
    }

    TensorT(std::vector<int> s, std::vector<T> d) : shape(std::move(s)), data(std::move(d)) {
        validate_shape();
        if (data.size() != numel_of(shape)) {
            throw ShapeError("tensor data size " + std::to_string(data.size()) +
                             " does not match shape " + shape_str(shape));
        }
    }

    static std::size_t numel_of(const std::vector<int>& s) {
        std::size_t n = 1;
        for (const int d : s) n *= static_cast<std::size_t>(d);
        return n;
    }

    std::size_t numel() const { return data.size(); }
    int rank() const { return static_cast<int>(shape.size()); }
    int dim(int i) const { return shape[static_cast<std::size_t>(i)]; }
    bool same_shape(const TensorT& o) const { return shape == o.shape; }

    T* ptr() { return data.data(); }
    const T* ptr() const { return data.data(); }

    // rank-4 [n, c, h, w]
    T& at(int n, int c, int h, int w) {
        return data[((static_cast<std::size_t>(n) * shape[1] + c) * shape[2] + h) * shape[3] + w];
    }
    const T& at(int n, int c, int h, int w) const {
        return data[((static_cast<std::size_t>(n) * shape[1] + c) * shape[2] + h) * shape[3] + w];
    }
    // rank-2 [r, c]
    T& at(int r, int c) { return data[static_cast<std::size_t>(r) * shape[1] + c]; }
    const T& at(int r, int c) const { return data[static_cast<std::size_t>(r) * shape[1] + c]; }
    // rank-1
    T& at(int i) { return data[static_cast<std::size_t>(i)]; }
    const T& at(int i) const { return data[static_cast<std::size_t>(i)]; }

    void fill(T v) { std::fill(data.begin(), data.end(), v); }

    bool all_finite() const {
        for (const T v : data) {
            if (!std::isfinite(v)) return false;
        }
        return true;
    }

    TensorT named(std::string n) const {
        TensorT t = *this;
        t.name = std::move(n);
        return t;
    }

private:
    void validate_shape() const {
        if (shape.empty() || shape.size() > 4) {
            throw ShapeError("tensor rank must be 1..4, got shape " + shape_str(shape));
        }
        for (const int d : shape) {
            if (d < 1) throw ShapeError("tensor dimensions must be >= 1, got " + shape_str(shape));
        }
    }
};

using Tensor = TensorT<float>;
using TensorD = TensorT<double>;

template <class To, class From>
TensorT<To> tensor_cast(const TensorT<From>& t) {
    TensorT<To> out(t.shape);
    for (std::size_t i = 0; i < t.data.size(); ++i) out.data[i] = static_cast<To>(t.data[i]);
    out.name = t.name;
    return out;
}

}  // namespace fznet
