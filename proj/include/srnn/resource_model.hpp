#pragma once

#include <cstdint>
#include <stdexcept>

// Closed-form parameter and MAC accounting for SRNN / SWS-BiRNN and Conv2D
// layers. All counts are exact integers; ratios are the only floating-point
// results.

namespace srnn {

struct RnnLayerSpec {
    std::int64_t c_in = 1;
    std::int64_t c_mid = 1;
    std::int64_t c_out = 1;
    bool bidirectional = false;
    std::int64_t h = 1;
    std::int64_t w = 1;
};

struct Conv2dSpec {
    std::int64_t c_in = 1;
    std::int64_t c_out = 1;
    std::int64_t k = 1;
    bool has_bias = true;
    std::int64_t h = 1;
    std::int64_t w = 1;
};

struct LayerCost {
    std::int64_t parameters = 0;
    std::int64_t macs = 0;
};

// C_in*C_mid + C_mid^2 + 2 C_mid + C_mid*C_out + C_out^2 + 2 C_out.
// Weight sharing makes the bidirectional variant cost the same parameters.
inline std::int64_t srnn_param_count(const RnnLayerSpec& s) {
    return s.c_in * s.c_mid + s.c_mid * s.c_mid + 2 * s.c_mid + s.c_mid * s.c_out +
           s.c_out * s.c_out + 2 * s.c_out;
}

inline std::int64_t conv2d_param_count(const Conv2dSpec& s) {
    return s.c_in * s.c_out * s.k * s.k + (s.has_bias ? s.c_out : 0);
}

// Large-C parameter ratio SWS-BiRNN / Conv2D: 4 / k^2.
inline double param_ratio_asymptotic(std::int64_t k) {
    if (k < 1) throw std::invalid_argument("param_ratio_asymptotic: k must be >= 1");
    return 4.0 / static_cast<double>(k * k);
}

// (k^2 C_in C_out + C_out) * H * W; the bias term only when has_bias.
inline std::int64_t conv2d_mac_count(const Conv2dSpec& s) {
    return (s.k * s.k * s.c_in * s.c_out + (s.has_bias ? s.c_out : 0)) * s.h * s.w;
}

// The per-position cost equals the parameter count, so this is params * H * W;
// the weight-shared bidirectional variant doubles it.
inline std::int64_t srnn_mac_count(const RnnLayerSpec& s) {
    const std::int64_t uni = srnn_param_count(s) * s.h * s.w;
    return s.bidirectional ? 2 * uni : uni;
}

// MAC ratio SRNN / Conv2D at C_in = C_mid = C_out = C: (4C + 4)/(k^2 C + 1).
inline double mac_ratio(std::int64_t c, std::int64_t k) {
    if (c < 1 || k < 1) throw std::invalid_argument("mac_ratio: C and k must be >= 1");
    const std::int64_t num = 4 * c + 4;
    const std::int64_t den = k * k * c + 1;
    return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace srnn
