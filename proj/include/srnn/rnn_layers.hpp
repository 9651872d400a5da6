#pragma once

#include <algorithm>

#include "srnn/parallel.hpp"
#include "srnn/rnn_cell.hpp"
#include "srnn/tensor.hpp"

// The layer zoo: 1D RNN scan, row-wise RNN, SRNN, WS-BiRNN and SWS-BiRNN,
// each as a forward producing a replayable cache and an exact analytic
// backward (reverse accumulation through the recurrence).
//
// Conventions: h_0 = 0 for every scan; rows are scanned left to right,
// columns top to bottom; the bidirectional merge is an elementwise sum.

namespace srnn {

namespace detail {

// One left-to-right scan of `len` steps. x is len*C_in contiguous; preact
// and hidden are len*C_out and are fully overwritten.
template <std::floating_point T>
void scan_sequence(const RnnCell<T>& cell, const T* x, int len, T* preact, T* hidden) {
    const int ci = cell.in_channels;
    const int co = cell.out_channels;
    const std::vector<T> h0(static_cast<std::size_t>(co), T(0));
    const T* h_prev = h0.data();
    for (int t = 0; t < len; ++t) {
        T* a = preact + static_cast<std::size_t>(t) * co;
        std::fill(a, a + co, T(0));
        matvec_add(cell.w_ih, std::span<const T>(x + static_cast<std::size_t>(t) * ci,
                                                 static_cast<std::size_t>(ci)),
                   std::span<T>(a, static_cast<std::size_t>(co)));
        bias_add(std::span<T>(a, static_cast<std::size_t>(co)), std::span<const T>(cell.b_ih));
        matvec_add(cell.w_hh, std::span<const T>(h_prev, static_cast<std::size_t>(co)),
                   std::span<T>(a, static_cast<std::size_t>(co)));
        bias_add(std::span<T>(a, static_cast<std::size_t>(co)), std::span<const T>(cell.b_hh));
        T* h = hidden + static_cast<std::size_t>(t) * co;
        for (int c = 0; c < co; ++c) h[c] = apply_activation(cell.act, a[c]);
        h_prev = h;
    }
}

// Reverse accumulation through one scan. Accumulates parameter gradients
// into g and input gradients into d_x (caller zeroes d_x).
template <std::floating_point T>
void scan_sequence_backward(const RnnCell<T>& cell, const T* x, int len, const T* preact,
                            const T* hidden, const T* d_out, CellGrads<T>& g, T* d_x) {
    const int ci = cell.in_channels;
    const int co = cell.out_channels;
    const std::vector<T> h0(static_cast<std::size_t>(co), T(0));
    std::vector<T> dh(static_cast<std::size_t>(co));
    std::vector<T> delta(static_cast<std::size_t>(co));
    std::vector<T> delta_next(static_cast<std::size_t>(co), T(0));
    for (int t = len - 1; t >= 0; --t) {
        const T* a = preact + static_cast<std::size_t>(t) * co;
        const T* h = hidden + static_cast<std::size_t>(t) * co;
        for (int c = 0; c < co; ++c) dh[c] = d_out[static_cast<std::size_t>(t) * co + c];
        if (t < len - 1) {
            // dL/dh_t += W_hh^T dL/da_{t+1}
            matTvec_add(cell.w_hh, std::span<const T>(delta_next), std::span<T>(dh));
        }
        for (int c = 0; c < co; ++c) delta[c] = dh[c] * act_deriv_cached(cell.act, a[c], h[c]);

        const std::span<const T> x_t(x + static_cast<std::size_t>(t) * ci,
                                     static_cast<std::size_t>(ci));
        const T* h_prev = t > 0 ? hidden + static_cast<std::size_t>(t - 1) * co : h0.data();
        outer_add(g.w_ih, std::span<const T>(delta), x_t);
        outer_add(g.w_hh, std::span<const T>(delta),
                  std::span<const T>(h_prev, static_cast<std::size_t>(co)));
        vec_add(std::span<T>(g.b_ih), std::span<const T>(delta));
        vec_add(std::span<T>(g.b_hh), std::span<const T>(delta));
        matTvec_add(cell.w_ih, std::span<const T>(delta),
                    std::span<T>(d_x + static_cast<std::size_t>(t) * ci,
                                 static_cast<std::size_t>(ci)));
        delta_next = delta;
    }
}

template <std::floating_point T>
void check_in_channels(const RnnCell<T>& cell, int got, const char* who) {
    if (got != cell.in_channels)
        throw std::invalid_argument(std::string(who) + ": input channels " + std::to_string(got) +
                                    " != cell input channels " +
                                    std::to_string(cell.in_channels));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// caches: hold every intermediate needed to run backward without
// recomputation; replaying the forward from cache.input reproduces the
// recorded hidden states bitwise.

template <std::floating_point T>
struct SeqCache {
    Seq<T> input;
    Seq<T> preact;
    Seq<T> hidden;  // == forward output
};

template <std::floating_point T>
struct RowsCache {
    Image<T> input;
    Image<T> preact;
    Image<T> hidden;
};

template <std::floating_point T>
struct SrnnCache {
    RowsCache<T> row_pass;
    RowsCache<T> col_pass;  // on the transposed intermediate
};

template <std::floating_point T>
struct WsBirnnCache {
    RowsCache<T> forward_pass;
    RowsCache<T> backward_pass;  // on the flipped input
};

template <std::floating_point T>
struct SwsBirnnCache {
    WsBirnnCache<T> row_pass;
    WsBirnnCache<T> col_pass;
};

template <std::floating_point T>
struct SeqGrads {
    CellGrads<T> cell;
    Seq<T> input;
};

template <std::floating_point T>
struct RowsGrads {
    CellGrads<T> cell;
    Image<T> input;
};

template <std::floating_point T>
struct SrnnGrads {
    CellGrads<T> row_cell;
    CellGrads<T> col_cell;
    Image<T> input;
};

// ---------------------------------------------------------------------------
// rnn_seq: the 1D scan

template <std::floating_point T>
struct SeqResult {
    Seq<T> output;
    SeqCache<T> cache;
};

template <std::floating_point T>
SeqResult<T> rnn_seq(const RnnCell<T>& cell, const Seq<T>& x) {
    detail::check_in_channels(cell, x.channels(), "rnn_seq");
    Seq<T> preact(x.length(), cell.out_channels);
    Seq<T> hidden(x.length(), cell.out_channels);
    detail::scan_sequence(cell, x.data().data(), x.length(), preact.data().data(),
                          hidden.data().data());
    SeqResult<T> r;
    r.output = hidden;
    r.cache = SeqCache<T>{x, std::move(preact), std::move(hidden)};
    return r;
}

template <std::floating_point T>
SeqGrads<T> rnn_seq_backward(const RnnCell<T>& cell, const SeqCache<T>& cache,
                             const Seq<T>& d_output) {
    if (cache.input.channels() != cell.in_channels ||
        cache.hidden.channels() != cell.out_channels)
        throw std::invalid_argument("rnn_seq_backward: cache does not match cell");
    if (d_output.length() != cache.hidden.length() ||
        d_output.channels() != cache.hidden.channels())
        throw std::invalid_argument("rnn_seq_backward: d_output shape mismatch");
    SeqGrads<T> g{zero_grads(cell), Seq<T>(cache.input.length(), cache.input.channels())};
    detail::scan_sequence_backward(cell, cache.input.data().data(), cache.input.length(),
                                   cache.preact.data().data(), cache.hidden.data().data(),
                                   d_output.data().data(), g.cell, g.input.data().data());
    return g;
}

// ---------------------------------------------------------------------------
// rnn_rows: the 1D scan applied independently to every row, same weights
// for every row

template <std::floating_point T>
struct RowsResult {
    Image<T> output;
    RowsCache<T> cache;
};

template <std::floating_point T>
RowsResult<T> rnn_rows(const RnnCell<T>& cell, const Image<T>& x) {
    detail::check_in_channels(cell, x.channels(), "rnn_rows");
    Image<T> preact(x.height(), x.width(), cell.out_channels);
    Image<T> hidden(x.height(), x.width(), cell.out_channels);
    parallel_for(x.height(), [&](int j) {
        detail::scan_sequence(cell, x.row(j).data(), x.width(), preact.row(j).data(),
                              hidden.row(j).data());
    });
    RowsResult<T> r;
    r.output = hidden;
    r.cache = RowsCache<T>{x, std::move(preact), std::move(hidden)};
    return r;
}

template <std::floating_point T>
RowsGrads<T> rnn_rows_backward(const RnnCell<T>& cell, const RowsCache<T>& cache,
                               const Image<T>& d_output) {
    if (cache.input.channels() != cell.in_channels ||
        cache.hidden.channels() != cell.out_channels)
        throw std::invalid_argument("rnn_rows_backward: cache does not match cell");
    if (!d_output.same_shape(cache.hidden))
        throw std::invalid_argument("rnn_rows_backward: d_output " + d_output.shape_str() +
                                    " != cached output " + cache.hidden.shape_str());
    RowsGrads<T> g{zero_grads(cell),
                   Image<T>(cache.input.height(), cache.input.width(), cache.input.channels())};
    // serial: parameter gradients accumulate across rows in row order
    for (int j = 0; j < cache.input.height(); ++j) {
        detail::scan_sequence_backward(cell, cache.input.row(j).data(), cache.input.width(),
                                       cache.preact.row(j).data(), cache.hidden.row(j).data(),
                                       d_output.row(j).data(), g.cell, g.input.row(j).data());
    }
    return g;
}

// ---------------------------------------------------------------------------
// srnn: rows pass, transpose, columns pass, transpose back

template <std::floating_point T>
struct SrnnResult {
    Image<T> output;
    SrnnCache<T> cache;
};

template <std::floating_point T>
SrnnResult<T> srnn(const SrnnParams<T>& params, const Image<T>& x) {
    validate_srnn_params(params, "srnn");
    detail::check_in_channels(params.row_cell, x.channels(), "srnn");
    RowsResult<T> rows = rnn_rows(params.row_cell, x);
    RowsResult<T> cols = rnn_rows(params.col_cell, transpose_hw(rows.output));
    SrnnResult<T> r;
    r.output = transpose_hw(cols.output);
    r.cache = SrnnCache<T>{std::move(rows.cache), std::move(cols.cache)};
    return r;
}

template <std::floating_point T>
SrnnGrads<T> srnn_backward(const SrnnParams<T>& params, const SrnnCache<T>& cache,
                           const Image<T>& d_output) {
    RowsGrads<T> g_col =
        rnn_rows_backward(params.col_cell, cache.col_pass, transpose_hw(d_output));
    RowsGrads<T> g_row =
        rnn_rows_backward(params.row_cell, cache.row_pass, transpose_hw(g_col.input));
    return SrnnGrads<T>{std::move(g_row.cell), std::move(g_col.cell), std::move(g_row.input)};
}

// ---------------------------------------------------------------------------
// ws_birnn_rows: forward scan plus flipped backward scan, same cell for
// both directions, merged by elementwise sum

template <std::floating_point T>
struct WsBirnnResult {
    Image<T> output;
    WsBirnnCache<T> cache;
};

template <std::floating_point T>
WsBirnnResult<T> ws_birnn_rows(const RnnCell<T>& cell, const Image<T>& x) {
    detail::check_in_channels(cell, x.channels(), "ws_birnn_rows");
    RowsResult<T> fwd = rnn_rows(cell, x);
    RowsResult<T> bwd = rnn_rows(cell, flip_w(x));
    WsBirnnResult<T> r;
    r.output = add(fwd.output, flip_w(bwd.output));
    r.cache = WsBirnnCache<T>{std::move(fwd.cache), std::move(bwd.cache)};
    return r;
}

template <std::floating_point T>
RowsGrads<T> ws_birnn_rows_backward(const RnnCell<T>& cell, const WsBirnnCache<T>& cache,
                                    const Image<T>& d_output) {
    RowsGrads<T> gf = rnn_rows_backward(cell, cache.forward_pass, d_output);
    RowsGrads<T> gb = rnn_rows_backward(cell, cache.backward_pass, flip_w(d_output));
    accumulate(gf.cell, gb.cell);  // shared cell: both directions contribute
    return RowsGrads<T>{std::move(gf.cell), add(gf.input, flip_w(gb.input))};
}

// ---------------------------------------------------------------------------
// sws_birnn: separable composition of two row-wise WS-BiRNN passes

template <std::floating_point T>
struct SwsBirnnResult {
    Image<T> output;
    SwsBirnnCache<T> cache;
};

template <std::floating_point T>
SwsBirnnResult<T> sws_birnn(const SrnnParams<T>& params, const Image<T>& x) {
    validate_srnn_params(params, "sws_birnn");
    detail::check_in_channels(params.row_cell, x.channels(), "sws_birnn");
    WsBirnnResult<T> rows = ws_birnn_rows(params.row_cell, x);
    WsBirnnResult<T> cols = ws_birnn_rows(params.col_cell, transpose_hw(rows.output));
    SwsBirnnResult<T> r;
    r.output = transpose_hw(cols.output);
    r.cache = SwsBirnnCache<T>{std::move(rows.cache), std::move(cols.cache)};
    return r;
}

template <std::floating_point T>
SrnnGrads<T> sws_birnn_backward(const SrnnParams<T>& params, const SwsBirnnCache<T>& cache,
                                const Image<T>& d_output) {
    RowsGrads<T> g_col =
        ws_birnn_rows_backward(params.col_cell, cache.col_pass, transpose_hw(d_output));
    RowsGrads<T> g_row =
        ws_birnn_rows_backward(params.row_cell, cache.row_pass, transpose_hw(g_col.input));
    return SrnnGrads<T>{std::move(g_row.cell), std::move(g_col.cell), std::move(g_row.input)};
}

}  // namespace srnn
