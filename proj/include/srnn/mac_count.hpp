#pragma once

#include "srnn/conv2d.hpp"
#include "srnn/rnn_layers.hpp"

// Empirical MAC counts: run a real forward pass over a zero image with the
// multiply counter armed. Used as the independent oracle for the closed-form
// cost model.

namespace srnn {

inline std::int64_t count_macs_srnn_empirical(int c_in, int c_mid, int c_out, int h, int w,
                                              bool bidirectional) {
    const SrnnParams<double> p = make_srnn_params<double>(c_in, c_mid, c_out, Activation::Tanh);
    const Image<double> x(h, w, c_in);
    maccount::Scope scope;
    if (bidirectional)
        (void)sws_birnn(p, x);
    else
        (void)srnn(p, x);
    return scope.macs();
}

// Stride 1, so output positions == input positions.
inline std::int64_t count_macs_conv2d_empirical(int c_in, int c_out, int k, int h, int w,
                                                bool has_bias) {
    const Conv2dParams<double> p =
        make_conv2d<double>(c_in, c_out, k, 1, Activation::Identity, has_bias);
    const Image<double> x(h, w, c_in);
    maccount::Scope scope;
    (void)conv2d(p, x);
    return scope.macs();
}

}  // namespace srnn
