#pragma once

#include <cmath>

#include "srnn/activation.hpp"
#include "srnn/linalg.hpp"
#include "srnn/rng.hpp"
#include "srnn/tensor.hpp"

// Full 2-dimensional recurrence and its depthwise-separable variant.
//   rnn2d:  h_jk = act(W_ih x_jk + W_hk h_{j,k-1} + W_hj h_{j-1,k}
//                      + W_jk h_{j-1,k-1} + b)          single bias
//   ds_rnn: h_jk = act(W_ih.x_jk + W_a.h_{j,k-1} + W_b.h_{j-1,k} + b)
//           per channel, then y_jk = P h_jk             1x1 projection
// Out-of-range neighbor states are zero vectors. Evaluation is raster
// order, j outer, k inner.

namespace srnn {

template <std::floating_point T>
struct Rnn2dCell {
    int in_channels = 0;
    int out_channels = 0;
    Matrix<T> w_ih;       // out x in
    Matrix<T> w_hk;       // out x out, left neighbor
    Matrix<T> w_hj;       // out x out, top neighbor
    Matrix<T> w_jk;       // out x out, top-left neighbor
    std::vector<T> b;     // out
    Activation act = Activation::Tanh;
};

template <std::floating_point T>
Rnn2dCell<T> make_rnn2d_cell(int in_ch, int out_ch, Activation act = Activation::Tanh) {
    Rnn2dCell<T> cell;
    cell.in_channels = in_ch;
    cell.out_channels = out_ch;
    cell.w_ih = Matrix<T>(out_ch, in_ch);
    cell.w_hk = Matrix<T>(out_ch, out_ch);
    cell.w_hj = Matrix<T>(out_ch, out_ch);
    cell.w_jk = Matrix<T>(out_ch, out_ch);
    cell.b.assign(static_cast<std::size_t>(out_ch), T(0));
    cell.act = act;
    return cell;
}

template <std::floating_point T>
void init_rnn2d_cell(Rnn2dCell<T>& cell, Rng& rng) {
    const double si = 1.0 / std::sqrt(static_cast<double>(cell.in_channels));
    const double sh = 1.0 / std::sqrt(static_cast<double>(cell.out_channels));
    rng.fill_uniform(cell.w_ih.data, -si, si);
    rng.fill_uniform(cell.w_hk.data, -sh, sh);
    rng.fill_uniform(cell.w_hj.data, -sh, sh);
    rng.fill_uniform(cell.w_jk.data, -sh, sh);
}

// Elementwise recurrence weights, one scalar per input channel; `pointwise`
// is the 1x1 kernel projecting C_in to C_out. The diagonal neighbor term is
// off by default and enabled by has_diag.
template <std::floating_point T>
struct DsRnnParams {
    int in_channels = 0;
    int out_channels = 0;
    std::vector<T> w_ih;   // C_in
    std::vector<T> w_a;    // C_in, left neighbor
    std::vector<T> w_b;    // C_in, top neighbor
    std::vector<T> w_c;    // C_in, diagonal neighbor; used only when has_diag
    std::vector<T> b;      // C_in
    Matrix<T> pointwise;   // C_out x C_in
    bool has_diag = false;
    Activation act = Activation::Tanh;
};

template <std::floating_point T>
DsRnnParams<T> make_ds_rnn_params(int in_ch, int out_ch, Activation act = Activation::Tanh,
                                  bool has_diag = false) {
    DsRnnParams<T> p;
    p.in_channels = in_ch;
    p.out_channels = out_ch;
    p.w_ih.assign(static_cast<std::size_t>(in_ch), T(0));
    p.w_a.assign(static_cast<std::size_t>(in_ch), T(0));
    p.w_b.assign(static_cast<std::size_t>(in_ch), T(0));
    p.w_c.assign(static_cast<std::size_t>(in_ch), T(0));
    p.b.assign(static_cast<std::size_t>(in_ch), T(0));
    p.pointwise = Matrix<T>(out_ch, in_ch);
    p.has_diag = has_diag;
    p.act = act;
    return p;
}

template <std::floating_point T>
void init_ds_rnn_params(DsRnnParams<T>& p, Rng& rng) {
    rng.fill_uniform(p.w_ih, -1.0, 1.0);
    rng.fill_uniform(p.w_a, -0.7, 0.7);
    rng.fill_uniform(p.w_b, -0.7, 0.7);
    if (p.has_diag) rng.fill_uniform(p.w_c, -0.7, 0.7);
    const double sp = 1.0 / std::sqrt(static_cast<double>(p.in_channels));
    rng.fill_uniform(p.pointwise.data, -sp, sp);
}

template <std::floating_point T>
struct Rnn2dCache {
    Image<T> input;
    Image<T> preact;
    Image<T> hidden;
};

template <std::floating_point T>
struct Rnn2dGrads {
    Matrix<T> w_ih, w_hk, w_hj, w_jk;
    std::vector<T> b;
    Image<T> input;
};

template <std::floating_point T>
struct Rnn2dResult {
    Image<T> output;
    Rnn2dCache<T> cache;
};

template <std::floating_point T>
Rnn2dResult<T> rnn2d(const Rnn2dCell<T>& cell, const Image<T>& x) {
    if (x.channels() != cell.in_channels)
        throw std::invalid_argument("rnn2d: input channels " + std::to_string(x.channels()) +
                                    " != cell input channels " +
                                    std::to_string(cell.in_channels));
    const int h = x.height(), w = x.width(), co = cell.out_channels;
    Image<T> preact(h, w, co);
    Image<T> hidden(h, w, co);
    // bias is accumulated directly after the input term so that zeroing the
    // recurrent weights reproduces the 1D scan's addition order exactly
    for (int j = 0; j < h; ++j) {
        for (int k = 0; k < w; ++k) {
            T* a = &preact.at(j, k, 0);
            std::fill(a, a + co, T(0));
            const std::span<T> acc(a, static_cast<std::size_t>(co));
            matvec_add(cell.w_ih, std::span<const T>(&x.at(j, k, 0),
                                                     static_cast<std::size_t>(x.channels())),
                       acc);
            bias_add(acc, std::span<const T>(cell.b));
            if (k > 0)
                matvec_add(cell.w_hk, std::span<const T>(&hidden.at(j, k - 1, 0),
                                                         static_cast<std::size_t>(co)), acc);
            if (j > 0)
                matvec_add(cell.w_hj, std::span<const T>(&hidden.at(j - 1, k, 0),
                                                         static_cast<std::size_t>(co)), acc);
            if (j > 0 && k > 0)
                matvec_add(cell.w_jk, std::span<const T>(&hidden.at(j - 1, k - 1, 0),
                                                         static_cast<std::size_t>(co)), acc);
            for (int c = 0; c < co; ++c) hidden.at(j, k, c) = apply_activation(cell.act, a[c]);
        }
    }
    Rnn2dResult<T> r;
    r.output = hidden;
    r.cache = Rnn2dCache<T>{x, std::move(preact), std::move(hidden)};
    return r;
}

template <std::floating_point T>
Rnn2dGrads<T> rnn2d_backward(const Rnn2dCell<T>& cell, const Rnn2dCache<T>& cache,
                             const Image<T>& d_output) {
    if (cache.input.channels() != cell.in_channels ||
        cache.hidden.channels() != cell.out_channels)
        throw std::invalid_argument("rnn2d_backward: cache does not match cell");
    if (!d_output.same_shape(cache.hidden))
        throw std::invalid_argument("rnn2d_backward: d_output " + d_output.shape_str() +
                                    " != cached output " + cache.hidden.shape_str());
    const int h = cache.input.height(), w = cache.input.width();
    const int ci = cell.in_channels, co = cell.out_channels;
    Rnn2dGrads<T> g;
    g.w_ih = Matrix<T>(co, ci);
    g.w_hk = Matrix<T>(co, co);
    g.w_hj = Matrix<T>(co, co);
    g.w_jk = Matrix<T>(co, co);
    g.b.assign(static_cast<std::size_t>(co), T(0));
    g.input = Image<T>(h, w, ci);

    Image<T> delta(h, w, co);  // dL/d(preact)
    std::vector<T> dh(static_cast<std::size_t>(co));
    for (int j = h - 1; j >= 0; --j) {
        for (int k = w - 1; k >= 0; --k) {
            for (int c = 0; c < co; ++c) dh[c] = d_output.at(j, k, c);
            if (k + 1 < w)
                matTvec_add(cell.w_hk, std::span<const T>(&delta.at(j, k + 1, 0),
                                                          static_cast<std::size_t>(co)),
                            std::span<T>(dh));
            if (j + 1 < h)
                matTvec_add(cell.w_hj, std::span<const T>(&delta.at(j + 1, k, 0),
                                                          static_cast<std::size_t>(co)),
                            std::span<T>(dh));
            if (j + 1 < h && k + 1 < w)
                matTvec_add(cell.w_jk, std::span<const T>(&delta.at(j + 1, k + 1, 0),
                                                          static_cast<std::size_t>(co)),
                            std::span<T>(dh));
            for (int c = 0; c < co; ++c) {
                const T pre = cache.preact.at(j, k, c);
                const T post = cache.hidden.at(j, k, c);
                T deriv;
                switch (cell.act) {
                    case Activation::Tanh: deriv = T(1) - post * post; break;
                    case Activation::Identity: deriv = T(1); break;
                    case Activation::Relu: deriv = pre > T(0) ? T(1) : T(0); break;
                    default: deriv = T(1);
                }
                delta.at(j, k, c) = dh[c] * deriv;
            }
            const std::span<const T> d(&delta.at(j, k, 0), static_cast<std::size_t>(co));
            outer_add(g.w_ih, d, std::span<const T>(&cache.input.at(j, k, 0),
                                                    static_cast<std::size_t>(ci)));
            if (k > 0)
                outer_add(g.w_hk, d, std::span<const T>(&cache.hidden.at(j, k - 1, 0),
                                                        static_cast<std::size_t>(co)));
            if (j > 0)
                outer_add(g.w_hj, d, std::span<const T>(&cache.hidden.at(j - 1, k, 0),
                                                        static_cast<std::size_t>(co)));
            if (j > 0 && k > 0)
                outer_add(g.w_jk, d, std::span<const T>(&cache.hidden.at(j - 1, k - 1, 0),
                                                        static_cast<std::size_t>(co)));
            vec_add(std::span<T>(g.b), d);
            matTvec_add(cell.w_ih, d,
                        std::span<T>(&g.input.at(j, k, 0), static_cast<std::size_t>(ci)));
        }
    }
    return g;
}

template <std::floating_point T>
struct DsRnnCache {
    Image<T> input;
    Image<T> preact;   // H x W x C_in
    Image<T> hidden;   // H x W x C_in
    Image<T> output;   // H x W x C_out
};

template <std::floating_point T>
struct DsRnnGrads {
    std::vector<T> w_ih, w_a, w_b, w_c, b;
    Matrix<T> pointwise;
    Image<T> input;
};

template <std::floating_point T>
struct DsRnnResult {
    Image<T> output;
    DsRnnCache<T> cache;
};

template <std::floating_point T>
DsRnnResult<T> ds_rnn(const DsRnnParams<T>& p, const Image<T>& x) {
    if (x.channels() != p.in_channels)
        throw std::invalid_argument("ds_rnn: input channels " + std::to_string(x.channels()) +
                                    " != cell input channels " + std::to_string(p.in_channels));
    const int h = x.height(), w = x.width(), ci = p.in_channels, co = p.out_channels;
    Image<T> preact(h, w, ci);
    Image<T> hidden(h, w, ci);
    Image<T> output(h, w, co);
    for (int j = 0; j < h; ++j) {
        for (int k = 0; k < w; ++k) {
            for (int c = 0; c < ci; ++c) {
                T a = p.w_ih[c] * x.at(j, k, c) + p.b[c];
                if (k > 0) a += p.w_a[c] * hidden.at(j, k - 1, c);
                if (j > 0) a += p.w_b[c] * hidden.at(j - 1, k, c);
                if (p.has_diag && j > 0 && k > 0) a += p.w_c[c] * hidden.at(j - 1, k - 1, c);
                preact.at(j, k, c) = a;
                hidden.at(j, k, c) = apply_activation(p.act, a);
            }
            T* y = &output.at(j, k, 0);
            std::fill(y, y + co, T(0));
            matvec_add(p.pointwise,
                       std::span<const T>(&hidden.at(j, k, 0), static_cast<std::size_t>(ci)),
                       std::span<T>(y, static_cast<std::size_t>(co)));
        }
    }
    DsRnnResult<T> r;
    r.output = output;
    r.cache = DsRnnCache<T>{x, std::move(preact), std::move(hidden), std::move(output)};
    return r;
}

template <std::floating_point T>
DsRnnGrads<T> ds_rnn_backward(const DsRnnParams<T>& p, const DsRnnCache<T>& cache,
                              const Image<T>& d_output) {
    if (cache.input.channels() != p.in_channels || cache.output.channels() != p.out_channels)
        throw std::invalid_argument("ds_rnn_backward: cache does not match params");
    if (!d_output.same_shape(cache.output))
        throw std::invalid_argument("ds_rnn_backward: d_output " + d_output.shape_str() +
                                    " != cached output " + cache.output.shape_str());
    const int h = cache.input.height(), w = cache.input.width();
    const int ci = p.in_channels, co = p.out_channels;
    DsRnnGrads<T> g;
    g.w_ih.assign(static_cast<std::size_t>(ci), T(0));
    g.w_a.assign(static_cast<std::size_t>(ci), T(0));
    g.w_b.assign(static_cast<std::size_t>(ci), T(0));
    g.w_c.assign(static_cast<std::size_t>(ci), T(0));
    g.b.assign(static_cast<std::size_t>(ci), T(0));
    g.pointwise = Matrix<T>(co, ci);
    g.input = Image<T>(h, w, ci);

    // projection first: dP and the per-position hidden gradient
    Image<T> dh_ext(h, w, ci);
    for (int j = 0; j < h; ++j) {
        for (int k = 0; k < w; ++k) {
            const std::span<const T> dy(&d_output.at(j, k, 0), static_cast<std::size_t>(co));
            outer_add(g.pointwise, dy,
                      std::span<const T>(&cache.hidden.at(j, k, 0),
                                         static_cast<std::size_t>(ci)));
            matTvec_add(p.pointwise, dy,
                        std::span<T>(&dh_ext.at(j, k, 0), static_cast<std::size_t>(ci)));
        }
    }

    Image<T> delta(h, w, ci);  // dL/d(preact), per channel
    for (int j = h - 1; j >= 0; --j) {
        for (int k = w - 1; k >= 0; --k) {
            for (int c = 0; c < ci; ++c) {
                T d = dh_ext.at(j, k, c);
                if (k + 1 < w) d += p.w_a[c] * delta.at(j, k + 1, c);
                if (j + 1 < h) d += p.w_b[c] * delta.at(j + 1, k, c);
                if (p.has_diag && j + 1 < h && k + 1 < w)
                    d += p.w_c[c] * delta.at(j + 1, k + 1, c);
                const T pre = cache.preact.at(j, k, c);
                const T post = cache.hidden.at(j, k, c);
                T deriv;
                switch (p.act) {
                    case Activation::Tanh: deriv = T(1) - post * post; break;
                    case Activation::Identity: deriv = T(1); break;
                    case Activation::Relu: deriv = pre > T(0) ? T(1) : T(0); break;
                    default: deriv = T(1);
                }
                const T dl = d * deriv;
                delta.at(j, k, c) = dl;
                g.w_ih[c] += dl * cache.input.at(j, k, c);
                if (k > 0) g.w_a[c] += dl * cache.hidden.at(j, k - 1, c);
                if (j > 0) g.w_b[c] += dl * cache.hidden.at(j - 1, k, c);
                if (p.has_diag && j > 0 && k > 0) g.w_c[c] += dl * cache.hidden.at(j - 1, k - 1, c);
                g.b[c] += dl;
                g.input.at(j, k, c) = p.w_ih[c] * dl;
            }
        }
    }
    return g;
}

}  // namespace srnn
