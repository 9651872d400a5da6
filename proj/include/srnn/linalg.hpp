#pragma once

#include <concepts>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace srnn {

// Scalar multiply/accumulate counter for the empirical cost oracle.
// Conventions: every scalar multiply in a forward pass counts as one MAC,
// applying one bias element counts as one MAC; activations and the
// bidirectional merge additions do not count. Disabled outside a Scope.
namespace maccount {

inline thread_local std::int64_t g_count = 0;
inline thread_local bool g_enabled = false;

inline void add(std::int64_t n) {
    if (g_enabled) g_count += n;
}

class Scope {
public:
    Scope() : prev_count_(g_count), prev_enabled_(g_enabled) {
        g_count = 0;
        g_enabled = true;
    }
    ~Scope() {
        g_count = prev_count_;
        g_enabled = prev_enabled_;
    }
    Scope(const Scope&) = delete;
    Scope& operator=(const Scope&) = delete;

    std::int64_t macs() const { return g_count; }

private:
    std::int64_t prev_count_;
    bool prev_enabled_;
};

}  // namespace maccount

// Small dense row-major matrix. Sizes here are desk-scale; plain loops keep
// results bitwise reproducible under any thread schedule.
template <std::floating_point T>
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<T> data;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, T(0)) {}
    Matrix(int r, int c, std::vector<T> d) : rows(r), cols(c), data(std::move(d)) {
        if (data.size() != static_cast<std::size_t>(r) * c)
            throw std::invalid_argument("matrix data size mismatch");
    }

    T& operator()(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
    const T& operator()(int r, int c) const {
        return data[static_cast<std::size_t>(r) * cols + c];
    }

    friend bool operator==(const Matrix& a, const Matrix& b) {
        return a.rows == b.rows && a.cols == b.cols && a.data == b.data;
    }
};

// out += M x
template <std::floating_point T>
void matvec_add(const Matrix<T>& m, std::span<const T> x, std::span<T> out) {
    for (int r = 0; r < m.rows; ++r) {
        T acc = 0;
        const T* row = m.data.data() + static_cast<std::size_t>(r) * m.cols;
        for (int c = 0; c < m.cols; ++c) acc += row[c] * x[c];
        out[r] += acc;
    }
    maccount::add(static_cast<std::int64_t>(m.rows) * m.cols);
}

// out += M^T y  (backward helper, not counted)
template <std::floating_point T>
void matTvec_add(const Matrix<T>& m, std::span<const T> y, std::span<T> out) {
    for (int r = 0; r < m.rows; ++r) {
        const T yr = y[r];
        const T* row = m.data.data() + static_cast<std::size_t>(r) * m.cols;
        for (int c = 0; c < m.cols; ++c) out[c] += row[c] * yr;
    }
}

// M += y x^T  (gradient accumulation, not counted)
template <std::floating_point T>
void outer_add(Matrix<T>& m, std::span<const T> y, std::span<const T> x) {
    for (int r = 0; r < m.rows; ++r) {
        T* row = m.data.data() + static_cast<std::size_t>(r) * m.cols;
        const T yr = y[r];
        for (int c = 0; c < m.cols; ++c) row[c] += yr * x[c];
    }
}

// out += b, one MAC per bias element
template <std::floating_point T>
void bias_add(std::span<T> out, std::span<const T> b) {
    for (std::size_t i = 0; i < b.size(); ++i) out[i] += b[i];
    maccount::add(static_cast<std::int64_t>(b.size()));
}

template <std::floating_point T>
void vec_add(std::span<T> out, std::span<const T> b) {
    for (std::size_t i = 0; i < b.size(); ++i) out[i] += b[i];
}

}  // namespace srnn
