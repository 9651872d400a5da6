#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <stdexcept>
#include <string>
#include <vector>

#include "srnn/activation.hpp"
#include "srnn/linalg.hpp"
#include "srnn/rng.hpp"
#include "srnn/tensor.hpp"

// Classifier-tail blocks: global average pooling, a fully connected layer,
// and softmax cross-entropy with its gradient.

namespace srnn {

template <std::floating_point T>
std::vector<T> global_avg_pool(const Image<T>& x) {
    std::vector<T> y(static_cast<std::size_t>(x.channels()), T(0));
    for (int j = 0; j < x.height(); ++j)
        for (int k = 0; k < x.width(); ++k)
            for (int c = 0; c < x.channels(); ++c) y[static_cast<std::size_t>(c)] += x.at(j, k, c);
    const T scale = T(1) / (static_cast<T>(x.height()) * static_cast<T>(x.width()));
    for (T& v : y) v *= scale;
    return y;
}

template <std::floating_point T>
Image<T> global_avg_pool_backward(int h, int w, std::span<const T> d_y) {
    Image<T> d_x(h, w, static_cast<int>(d_y.size()));
    const T scale = T(1) / (static_cast<T>(h) * static_cast<T>(w));
    for (int j = 0; j < h; ++j)
        for (int k = 0; k < w; ++k)
            for (std::size_t c = 0; c < d_y.size(); ++c)
                d_x.at(j, k, static_cast<int>(c)) = d_y[c] * scale;
    return d_x;
}

template <std::floating_point T>
struct DenseParams {
    int in_features = 0;
    int out_features = 0;
    Matrix<T> w;       // out x in
    std::vector<T> b;  // out
};

template <std::floating_point T>
DenseParams<T> make_dense(int in_features, int out_features) {
    if (in_features < 1 || out_features < 1)
        throw std::invalid_argument("make_dense: feature counts must be >= 1");
    DenseParams<T> p;
    p.in_features = in_features;
    p.out_features = out_features;
    p.w = Matrix<T>(out_features, in_features);
    p.b.assign(static_cast<std::size_t>(out_features), T(0));
    return p;
}

template <std::floating_point T>
void init_dense(DenseParams<T>& p, Rng& rng) {
    const double s = 1.0 / std::sqrt(static_cast<double>(p.in_features));
    rng.fill_uniform(p.w.data, -s, s);
}

template <std::floating_point T>
std::vector<T> dense_forward(const DenseParams<T>& p, std::span<const T> x) {
    if (static_cast<int>(x.size()) != p.in_features)
        throw std::invalid_argument("dense_forward: input size " + std::to_string(x.size()) +
                                    " != " + std::to_string(p.in_features));
    std::vector<T> y(static_cast<std::size_t>(p.out_features), T(0));
    matvec_add(p.w, x, std::span<T>(y));
    bias_add(std::span<T>(y), std::span<const T>(p.b));
    return y;
}

template <std::floating_point T>
struct DenseGrads {
    Matrix<T> w;
    std::vector<T> b;
    std::vector<T> input;
};

template <std::floating_point T>
DenseGrads<T> dense_backward(const DenseParams<T>& p, std::span<const T> x,
                             std::span<const T> d_y) {
    if (static_cast<int>(x.size()) != p.in_features ||
        static_cast<int>(d_y.size()) != p.out_features)
        throw std::invalid_argument("dense_backward: shape mismatch");
    DenseGrads<T> g;
    g.w = Matrix<T>(p.out_features, p.in_features);
    g.b.assign(d_y.begin(), d_y.end());
    g.input.assign(static_cast<std::size_t>(p.in_features), T(0));
    outer_add(g.w, d_y, x);
    matTvec_add(p.w, d_y, std::span<T>(g.input));
    return g;
}

template <std::floating_point T>
struct SoftmaxResult {
    T loss = 0;
    std::vector<T> probs;
    std::vector<T> d_logits;  // probs - one_hot(label)
};

// Log-sum-exp stabilized. `label` is the 0-based target class.
template <std::floating_point T>
SoftmaxResult<T> softmax_cross_entropy(std::span<const T> logits, int label) {
    if (label < 0 || label >= static_cast<int>(logits.size()))
        throw std::out_of_range("softmax_cross_entropy: label " + std::to_string(label) +
                                " outside 0.." + std::to_string(logits.size() - 1));
    const T m = *std::max_element(logits.begin(), logits.end());
    T sum = 0;
    SoftmaxResult<T> r;
    r.probs.resize(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) {
        r.probs[i] = std::exp(logits[i] - m);
        sum += r.probs[i];
    }
    for (T& p : r.probs) p /= sum;
    r.loss = std::log(sum) + m - logits[static_cast<std::size_t>(label)];
    r.d_logits = r.probs;
    r.d_logits[static_cast<std::size_t>(label)] -= T(1);
    return r;
}

}  // namespace srnn
