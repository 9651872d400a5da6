#pragma once

#include <cmath>

#include "srnn/activation.hpp"
#include "srnn/linalg.hpp"
#include "srnn/rng.hpp"

namespace srnn {

// One recurrent cell: h_t = act(W_ih x_t + b_ih + W_hh h_{t-1} + b_hh).
// The two bias vectors are held separately, not pre-summed.
template <std::floating_point T>
struct RnnCell {
    int in_channels = 0;
    int out_channels = 0;
    Matrix<T> w_ih;         // out x in
    Matrix<T> w_hh;         // out x out
    std::vector<T> b_ih;    // out
    std::vector<T> b_hh;    // out
    Activation act = Activation::Tanh;
};

template <std::floating_point T>
RnnCell<T> make_rnn_cell(int in_channels, int out_channels, Activation act = Activation::Tanh) {
    RnnCell<T> cell;
    cell.in_channels = in_channels;
    cell.out_channels = out_channels;
    cell.w_ih = Matrix<T>(out_channels, in_channels);
    cell.w_hh = Matrix<T>(out_channels, out_channels);
    cell.b_ih.assign(static_cast<std::size_t>(out_channels), T(0));
    cell.b_hh.assign(static_cast<std::size_t>(out_channels), T(0));
    cell.act = act;
    return cell;
}

// W_ih uniform in +-1/sqrt(C_in), W_hh uniform in +-1/sqrt(C_out), biases
// zero; keeps the recurrent spectral radius small enough for toy training.
template <std::floating_point T>
void init_rnn_cell(RnnCell<T>& cell, Rng& rng) {
    const double si = 1.0 / std::sqrt(static_cast<double>(cell.in_channels));
    const double sh = 1.0 / std::sqrt(static_cast<double>(cell.out_channels));
    rng.fill_uniform(cell.w_ih.data, -si, si);
    rng.fill_uniform(cell.w_hh.data, -sh, sh);
}

// 1x1 cell with the given scalar weights; the hand-verifiable configuration
// behind the impulse presets and the worked examples.
template <std::floating_point T>
RnnCell<T> scalar_cell(T w_ih, T w_hh, Activation act = Activation::Identity) {
    RnnCell<T> cell = make_rnn_cell<T>(1, 1, act);
    cell.w_ih(0, 0) = w_ih;
    cell.w_hh(0, 0) = w_hh;
    return cell;
}

template <std::floating_point T>
void validate_cell(const RnnCell<T>& cell, const char* who) {
    const bool ok = cell.w_ih.rows == cell.out_channels && cell.w_ih.cols == cell.in_channels &&
                    cell.w_hh.rows == cell.out_channels && cell.w_hh.cols == cell.out_channels &&
                    static_cast<int>(cell.b_ih.size()) == cell.out_channels &&
                    static_cast<int>(cell.b_hh.size()) == cell.out_channels;
    if (!ok) throw std::invalid_argument(std::string(who) + ": inconsistent cell dimensions");
}

// Row cell C_in -> C_mid, column cell C_mid -> C_out; the two cells have
// independent weights.
template <std::floating_point T>
struct SrnnParams {
    RnnCell<T> row_cell;
    RnnCell<T> col_cell;

    int in_channels() const { return row_cell.in_channels; }
    int mid_channels() const { return row_cell.out_channels; }
    int out_channels() const { return col_cell.out_channels; }
};

template <std::floating_point T>
SrnnParams<T> make_srnn_params(int in_ch, int mid_ch, int out_ch,
                               Activation act = Activation::Tanh) {
    return SrnnParams<T>{make_rnn_cell<T>(in_ch, mid_ch, act),
                         make_rnn_cell<T>(mid_ch, out_ch, act)};
}

template <std::floating_point T>
void validate_srnn_params(const SrnnParams<T>& p, const char* who) {
    validate_cell(p.row_cell, who);
    validate_cell(p.col_cell, who);
    if (p.row_cell.out_channels != p.col_cell.in_channels)
        throw std::invalid_argument(std::string(who) + ": row cell out_channels " +
                                    std::to_string(p.row_cell.out_channels) +
                                    " != col cell in_channels " +
                                    std::to_string(p.col_cell.in_channels));
}

// Gradients shaped exactly like the cell parameters they differentiate.
template <std::floating_point T>
struct CellGrads {
    Matrix<T> w_ih;
    Matrix<T> w_hh;
    std::vector<T> b_ih;
    std::vector<T> b_hh;
};

template <std::floating_point T>
CellGrads<T> zero_grads(const RnnCell<T>& cell) {
    CellGrads<T> g;
    g.w_ih = Matrix<T>(cell.out_channels, cell.in_channels);
    g.w_hh = Matrix<T>(cell.out_channels, cell.out_channels);
    g.b_ih.assign(static_cast<std::size_t>(cell.out_channels), T(0));
    g.b_hh.assign(static_cast<std::size_t>(cell.out_channels), T(0));
    return g;
}

template <std::floating_point T>
void accumulate(CellGrads<T>& into, const CellGrads<T>& from) {
    for (std::size_t i = 0; i < into.w_ih.data.size(); ++i) into.w_ih.data[i] += from.w_ih.data[i];
    for (std::size_t i = 0; i < into.w_hh.data.size(); ++i) into.w_hh.data[i] += from.w_hh.data[i];
    for (std::size_t i = 0; i < into.b_ih.size(); ++i) into.b_ih[i] += from.b_ih[i];
    for (std::size_t i = 0; i < into.b_hh.size(); ++i) into.b_hh[i] += from.b_hh[i];
}

}  // namespace srnn
