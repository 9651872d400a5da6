#pragma once

#include <vector>

#include "srnn/rnn2d.hpp"
#include "srnn/rnn_cell.hpp"
#include "srnn/rnn_layers.hpp"

// Flat scalar enumeration of every parameter container, in a fixed order
// shared between a params struct and its gradient struct. Finite
// differencing and SGD both drive off these pointer lists.

namespace srnn {

template <std::floating_point T>
void collect_ptrs(Matrix<T>& m, std::vector<T*>& out) {
    for (auto& v : m.data) out.push_back(&v);
}

template <std::floating_point T>
void collect_ptrs(std::vector<T>& v, std::vector<T*>& out) {
    for (auto& x : v) out.push_back(&x);
}

template <std::floating_point T>
void collect_ptrs(RnnCell<T>& c, std::vector<T*>& out) {
    collect_ptrs(c.w_ih, out);
    collect_ptrs(c.w_hh, out);
    collect_ptrs(c.b_ih, out);
    collect_ptrs(c.b_hh, out);
}

template <std::floating_point T>
void collect_ptrs(CellGrads<T>& g, std::vector<T*>& out) {
    collect_ptrs(g.w_ih, out);
    collect_ptrs(g.w_hh, out);
    collect_ptrs(g.b_ih, out);
    collect_ptrs(g.b_hh, out);
}

template <std::floating_point T>
void collect_ptrs(SrnnParams<T>& p, std::vector<T*>& out) {
    collect_ptrs(p.row_cell, out);
    collect_ptrs(p.col_cell, out);
}

template <std::floating_point T>
void collect_ptrs(SrnnGrads<T>& g, std::vector<T*>& out) {
    collect_ptrs(g.row_cell, out);
    collect_ptrs(g.col_cell, out);
}

template <std::floating_point T>
void collect_ptrs(Rnn2dCell<T>& c, std::vector<T*>& out) {
    collect_ptrs(c.w_ih, out);
    collect_ptrs(c.w_hk, out);
    collect_ptrs(c.w_hj, out);
    collect_ptrs(c.w_jk, out);
    collect_ptrs(c.b, out);
}

template <std::floating_point T>
void collect_ptrs(Rnn2dGrads<T>& g, std::vector<T*>& out) {
    collect_ptrs(g.w_ih, out);
    collect_ptrs(g.w_hk, out);
    collect_ptrs(g.w_hj, out);
    collect_ptrs(g.w_jk, out);
    collect_ptrs(g.b, out);
}

template <std::floating_point T>
void collect_ptrs(DsRnnParams<T>& p, std::vector<T*>& out) {
    collect_ptrs(p.w_ih, out);
    collect_ptrs(p.w_a, out);
    collect_ptrs(p.w_b, out);
    if (p.has_diag) collect_ptrs(p.w_c, out);
    collect_ptrs(p.b, out);
    collect_ptrs(p.pointwise, out);
}

template <std::floating_point T>
void collect_ptrs(DsRnnGrads<T>& g, std::vector<T*>& out, bool has_diag) {
    collect_ptrs(g.w_ih, out);
    collect_ptrs(g.w_a, out);
    collect_ptrs(g.w_b, out);
    if (has_diag) collect_ptrs(g.w_c, out);
    collect_ptrs(g.b, out);
    collect_ptrs(g.pointwise, out);
}

}  // namespace srnn
