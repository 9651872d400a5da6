#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstring>
#include <stdexcept>
#include <string>
#include <vector>

#include "srnn/activation.hpp"
#include "srnn/linalg.hpp"
#include "srnn/rng.hpp"
#include "srnn/tensor.hpp"

// 2D convolution with zero-padded "same" geometry: out = ceil(in / stride)
// per spatial dim. Every kernel tap is multiplied, padding zeros included,
// so the empirical MAC counter matches the closed-form cost exactly.

namespace srnn {

template <std::floating_point T>
struct Conv2dParams {
    int in_channels = 0;
    int out_channels = 0;
    int k = 1;
    int stride = 1;
    bool has_bias = true;
    Activation act = Activation::Identity;
    Matrix<T> w;       // out_channels x (k*k*in_channels); column (kj*k + kk)*C_in + c
    std::vector<T> b;  // out_channels; applied only when has_bias
};

template <std::floating_point T>
Conv2dParams<T> make_conv2d(int in_ch, int out_ch, int k, int stride,
                            Activation act = Activation::Identity, bool has_bias = true) {
    if (in_ch < 1 || out_ch < 1 || k < 1 || stride < 1)
        throw std::invalid_argument("make_conv2d: channels, kernel and stride must be >= 1");
    Conv2dParams<T> p;
    p.in_channels = in_ch;
    p.out_channels = out_ch;
    p.k = k;
    p.stride = stride;
    p.has_bias = has_bias;
    p.act = act;
    p.w = Matrix<T>(out_ch, k * k * in_ch);
    p.b.assign(static_cast<std::size_t>(out_ch), T(0));
    return p;
}

template <std::floating_point T>
void init_conv2d(Conv2dParams<T>& p, Rng& rng) {
    const double s = 1.0 / std::sqrt(static_cast<double>(p.in_channels) * p.k * p.k);
    rng.fill_uniform(p.w.data, -s, s);
}

inline int conv_out_extent(int in, int stride) { return (in + stride - 1) / stride; }

namespace detail {

// Copies the k x k window centered for "same" output geometry into `patch`
// (zeros where the window leaves the image). Layout matches the weight
// matrix columns: taps in row-major kernel order, channels innermost.
template <std::floating_point T>
void extract_patch(const Image<T>& x, int k, int stride, int pad_j, int pad_k, int jo, int ko,
                   T* patch) {
    const int ci = x.channels();
    for (int kj = 0; kj < k; ++kj) {
        const int j = jo * stride - pad_j + kj;
        for (int kk = 0; kk < k; ++kk) {
            const int kcol = ko * stride - pad_k + kk;
            T* dst = patch + (static_cast<std::size_t>(kj) * k + kk) * ci;
            if (j < 0 || j >= x.height() || kcol < 0 || kcol >= x.width())
                std::fill(dst, dst + ci, T(0));
            else
                std::copy_n(&x.at(j, kcol, 0), ci, dst);
        }
    }
}

inline int same_pad_begin(int in, int out, int k, int stride) {
    const int total = std::max((out - 1) * stride + k - in, 0);
    return total / 2;
}

}  // namespace detail

template <std::floating_point T>
struct Conv2dCache {
    Image<T> input;
    Image<T> preact;
    Image<T> output;
};

template <std::floating_point T>
struct Conv2dGrads {
    Matrix<T> w;
    std::vector<T> b;
    Image<T> input;
};

template <std::floating_point T>
struct Conv2dResult {
    Image<T> output;
    Conv2dCache<T> cache;
};

template <std::floating_point T>
Conv2dResult<T> conv2d(const Conv2dParams<T>& p, const Image<T>& x) {
    if (x.channels() != p.in_channels)
        throw std::invalid_argument("conv2d: input channels " + std::to_string(x.channels()) +
                                    " != layer input channels " +
                                    std::to_string(p.in_channels));
    const int oh = conv_out_extent(x.height(), p.stride);
    const int ow = conv_out_extent(x.width(), p.stride);
    const int pad_j = detail::same_pad_begin(x.height(), oh, p.k, p.stride);
    const int pad_k = detail::same_pad_begin(x.width(), ow, p.k, p.stride);
    Image<T> preact(oh, ow, p.out_channels);
    Image<T> output(oh, ow, p.out_channels);
    std::vector<T> patch(static_cast<std::size_t>(p.k) * p.k * p.in_channels);
    for (int jo = 0; jo < oh; ++jo) {
        for (int ko = 0; ko < ow; ++ko) {
            detail::extract_patch(x, p.k, p.stride, pad_j, pad_k, jo, ko, patch.data());
            T* a = &preact.at(jo, ko, 0);
            matvec_add(p.w, std::span<const T>(patch),
                       std::span<T>(a, static_cast<std::size_t>(p.out_channels)));
            if (p.has_bias)
                bias_add(std::span<T>(a, static_cast<std::size_t>(p.out_channels)),
                         std::span<const T>(p.b));
            for (int c = 0; c < p.out_channels; ++c)
                output.at(jo, ko, c) = apply_activation(p.act, a[c]);
        }
    }
    Conv2dResult<T> r;
    r.output = output;
    r.cache = Conv2dCache<T>{x, std::move(preact), std::move(output)};
    return r;
}

template <std::floating_point T>
Conv2dGrads<T> conv2d_backward(const Conv2dParams<T>& p, const Conv2dCache<T>& cache,
                               const Image<T>& d_output) {
    if (cache.input.channels() != p.in_channels ||
        cache.output.channels() != p.out_channels)
        throw std::invalid_argument("conv2d_backward: cache does not match params");
    if (!d_output.same_shape(cache.output))
        throw std::invalid_argument("conv2d_backward: d_output " + d_output.shape_str() +
                                    " != cached output " + cache.output.shape_str());
    const Image<T>& x = cache.input;
    const int oh = cache.output.height(), ow = cache.output.width();
    const int pad_j = detail::same_pad_begin(x.height(), oh, p.k, p.stride);
    const int pad_k = detail::same_pad_begin(x.width(), ow, p.k, p.stride);

    Conv2dGrads<T> g;
    g.w = Matrix<T>(p.w.rows, p.w.cols);
    g.b.assign(static_cast<std::size_t>(p.out_channels), T(0));
    g.input = Image<T>(x.height(), x.width(), x.channels());

    const int ci = p.in_channels, co = p.out_channels;
    std::vector<T> patch(static_cast<std::size_t>(p.k) * p.k * ci);
    std::vector<T> delta(static_cast<std::size_t>(co));
    std::vector<T> d_patch(patch.size());
    for (int jo = 0; jo < oh; ++jo) {
        for (int ko = 0; ko < ow; ++ko) {
            for (int c = 0; c < co; ++c)
                delta[static_cast<std::size_t>(c)] =
                    d_output.at(jo, ko, c) * act_deriv_cached(p.act, cache.preact.at(jo, ko, c),
                                                              cache.output.at(jo, ko, c));
            detail::extract_patch(x, p.k, p.stride, pad_j, pad_k, jo, ko, patch.data());
            outer_add(g.w, std::span<const T>(delta), std::span<const T>(patch));
            if (p.has_bias) vec_add(std::span<T>(g.b), std::span<const T>(delta));
            std::fill(d_patch.begin(), d_patch.end(), T(0));
            matTvec_add(p.w, std::span<const T>(delta), std::span<T>(d_patch));
            for (int kj = 0; kj < p.k; ++kj) {
                const int j = jo * p.stride - pad_j + kj;
                if (j < 0 || j >= x.height()) continue;
                for (int kk = 0; kk < p.k; ++kk) {
                    const int kcol = ko * p.stride - pad_k + kk;
                    if (kcol < 0 || kcol >= x.width()) continue;
                    const T* src = d_patch.data() + (static_cast<std::size_t>(kj) * p.k + kk) * ci;
                    T* dst = &g.input.at(j, kcol, 0);
                    for (int c = 0; c < ci; ++c) dst[c] += src[c];
                }
            }
        }
    }
    return g;
}

}  // namespace srnn
