#pragma once

#include <cmath>
#include <concepts>
#include <stdexcept>
#include <string>

namespace srnn {

enum class Activation { Tanh, Identity, Relu };

inline const char* activation_name(Activation a) {
    switch (a) {
        case Activation::Tanh: return "tanh";
        case Activation::Identity: return "identity";
        case Activation::Relu: return "relu";
    }
    return "?";
}

inline Activation parse_activation(const std::string& s) {
    if (s == "tanh") return Activation::Tanh;
    if (s == "identity") return Activation::Identity;
    if (s == "relu") return Activation::Relu;
    throw std::invalid_argument("unknown activation '" + s + "' (tanh|identity|relu)");
}

template <std::floating_point T>
T apply_activation(Activation a, T x) {
    switch (a) {
        case Activation::Tanh: return std::tanh(x);
        case Activation::Identity: return x;
        case Activation::Relu: return x > T(0) ? x : T(0);
    }
    return x;
}

// Derivative using cached forward values: tanh' from the post-activation,
// relu' from the pre-activation sign.
template <std::floating_point T>
T act_deriv_cached(Activation a, T pre, T post) {
    switch (a) {
        case Activation::Tanh: return T(1) - post * post;
        case Activation::Identity: return T(1);
        case Activation::Relu: return pre > T(0) ? T(1) : T(0);
    }
    return T(1);
}

// Derivative in terms of the pre-activation value.
template <std::floating_point T>
T activation_deriv(Activation a, T pre) {
    switch (a) {
        case Activation::Tanh: {
            const T t = std::tanh(pre);
            return T(1) - t * t;
        }
        case Activation::Identity: return T(1);
        case Activation::Relu: return pre > T(0) ? T(1) : T(0);
    }
    return T(1);
}

}  // namespace srnn
