#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

// Independent gradient oracle: central finite differences over full forward
// passes. Knows nothing about any backward implementation.

namespace srnn {

// d(loss)/d(theta) for every scalar reachable through `thetas`, via
// (loss(t+step) - loss(t-step)) / (2 step). `loss` re-reads the scalars on
// every call. Throws if a probe produces a non-finite loss.
template <std::floating_point T, typename LossFn>
std::vector<T> finite_diff(const std::vector<T*>& thetas, LossFn&& loss, T step) {
    if (!(step > T(0))) throw std::invalid_argument("finite_diff: step must be > 0");
    std::vector<T> grads(thetas.size());
    for (std::size_t i = 0; i < thetas.size(); ++i) {
        T& theta = *thetas[i];
        const T saved = theta;
        theta = saved + step;
        const T up = loss();
        theta = saved - step;
        const T down = loss();
        theta = saved;
        if (!std::isfinite(up) || !std::isfinite(down))
            throw std::runtime_error("finite_diff: non-finite loss while probing parameter " +
                                     std::to_string(i));
        grads[i] = (up - down) / (T(2) * step);
    }
    return grads;
}

// Relative error with a unit floor: tiny gradients are compared on an
// absolute scale, large ones relatively.
template <std::floating_point T>
T grad_rel_err(T analytic, T numeric) {
    const T denom = std::max(T(1), std::max(std::abs(analytic), std::abs(numeric)));
    return std::abs(analytic - numeric) / denom;
}

template <std::floating_point T>
struct GradCompare {
    T max_rel_err = 0;
    std::size_t worst_index = 0;
    T worst_analytic = 0;
    T worst_numeric = 0;
};

template <std::floating_point T>
GradCompare<T> compare_grads(const std::vector<T>& analytic, const std::vector<T>& numeric) {
    if (analytic.size() != numeric.size())
        throw std::invalid_argument("compare_grads: size mismatch");
    GradCompare<T> r;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
        const T e = grad_rel_err(analytic[i], numeric[i]);
        if (e > r.max_rel_err) {
            r.max_rel_err = e;
            r.worst_index = i;
            r.worst_analytic = analytic[i];
            r.worst_numeric = numeric[i];
        }
    }
    return r;
}

}  // namespace srnn
