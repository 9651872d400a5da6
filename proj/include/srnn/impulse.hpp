#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "srnn/rnn2d.hpp"
#include "srnn/rnn_layers.hpp"

// Impulse-response probing: drop unit spikes on a zero canvas, run a layer
// forward, and reduce the output to one channel (L2 across channels) so it
// can be imaged. Includes the hand-checkable scalar parameter presets.

namespace srnn {

struct ImpulsePoint {
    int j = 0;
    int k = 0;
    int channel = 0;
};

template <std::floating_point T>
Image<T> make_impulse_input(int h, int w, int c, std::span<const ImpulsePoint> points) {
    Image<T> x(h, w, c);
    for (const ImpulsePoint& p : points) {
        if (p.j < 0 || p.j >= h || p.k < 0 || p.k >= w)
            throw std::out_of_range("impulse position (" + std::to_string(p.j) + "," +
                                    std::to_string(p.k) + ") outside " + std::to_string(h) +
                                    "x" + std::to_string(w) + " canvas");
        if (p.channel < 0 || p.channel >= c)
            throw std::out_of_range("impulse channel " + std::to_string(p.channel) +
                                    " outside 0.." + std::to_string(c - 1));
        x.at(p.j, p.k, p.channel) = T(1);
    }
    return x;
}

// H x W x C -> H x W x 1; single-channel input passes through unchanged.
template <std::floating_point T>
Image<T> reduce_l2(const Image<T>& x) {
    if (x.channels() == 1) return x;
    Image<T> out(x.height(), x.width(), 1);
    for (int j = 0; j < x.height(); ++j)
        for (int k = 0; k < x.width(); ++k) {
            T s = 0;
            for (int c = 0; c < x.channels(); ++c) {
                const T v = x.at(j, k, c);
                s += v * v;
            }
            out.at(j, k, 0) = std::sqrt(s);
        }
    return out;
}

template <std::floating_point T>
std::vector<double> field_of(const Image<T>& single_channel) {
    if (single_channel.channels() != 1)
        throw std::invalid_argument("field_of wants a single-channel image, got " +
                                    single_channel.shape_str());
    std::vector<double> v(single_channel.data().begin(), single_channel.data().end());
    return v;
}

template <std::floating_point T>
Image<T> impulse_response_rnn_rows(const RnnCell<T>& cell, int h, int w,
                                   std::span<const ImpulsePoint> points) {
    return reduce_l2(rnn_rows(cell, make_impulse_input<T>(h, w, cell.in_channels, points)).output);
}

template <std::floating_point T>
Image<T> impulse_response_ws_birnn_rows(const RnnCell<T>& cell, int h, int w,
                                        std::span<const ImpulsePoint> points) {
    return reduce_l2(
        ws_birnn_rows(cell, make_impulse_input<T>(h, w, cell.in_channels, points)).output);
}

template <std::floating_point T>
Image<T> impulse_response_srnn(const SrnnParams<T>& params, int h, int w,
                               std::span<const ImpulsePoint> points) {
    return reduce_l2(
        srnn(params, make_impulse_input<T>(h, w, params.in_channels(), points)).output);
}

template <std::floating_point T>
Image<T> impulse_response_sws_birnn(const SrnnParams<T>& params, int h, int w,
                                    std::span<const ImpulsePoint> points) {
    return reduce_l2(
        sws_birnn(params, make_impulse_input<T>(h, w, params.in_channels(), points)).output);
}

template <std::floating_point T>
Image<T> impulse_response_rnn2d(const Rnn2dCell<T>& cell, int h, int w,
                                std::span<const ImpulsePoint> points) {
    return reduce_l2(rnn2d(cell, make_impulse_input<T>(h, w, cell.in_channels, points)).output);
}

template <std::floating_point T>
Image<T> impulse_response_ds_rnn(const DsRnnParams<T>& params, int h, int w,
                                 std::span<const ImpulsePoint> points) {
    return reduce_l2(
        ds_rnn(params, make_impulse_input<T>(h, w, params.in_channels, points)).output);
}

// --------------------------------------------------------------------------
// scalar presets: 1-channel, zero-bias, identity-activation configurations
// whose responses can be verified by hand recurrence

// one-sided geometric decay by 1/2 behind the scan front
template <std::floating_point T>
RnnCell<T> decay_half_cell() {
    return scalar_cell<T>(T(1), T(0.5), Activation::Identity);
}

// pass-through: unit input weight, no recurrence
template <std::floating_point T>
RnnCell<T> identity_cell() {
    return scalar_cell<T>(T(1), T(0), Activation::Identity);
}

template <std::floating_point T>
SrnnParams<T> decay_half_srnn() {
    return SrnnParams<T>{decay_half_cell<T>(), decay_half_cell<T>()};
}

template <std::floating_point T>
SrnnParams<T> identity_srnn() {
    return SrnnParams<T>{identity_cell<T>(), identity_cell<T>()};
}

template <std::floating_point T>
Rnn2dCell<T> decay_half_rnn2d() {
    Rnn2dCell<T> cell = make_rnn2d_cell<T>(1, 1, Activation::Identity);
    cell.w_ih(0, 0) = T(1);
    cell.w_hk(0, 0) = T(0.5);
    cell.w_hj(0, 0) = T(0.5);
    return cell;
}

template <std::floating_point T>
Rnn2dCell<T> identity_rnn2d() {
    Rnn2dCell<T> cell = make_rnn2d_cell<T>(1, 1, Activation::Identity);
    cell.w_ih(0, 0) = T(1);
    return cell;
}

template <std::floating_point T>
DsRnnParams<T> decay_half_ds_rnn() {
    DsRnnParams<T> p = make_ds_rnn_params<T>(1, 1, Activation::Identity);
    p.w_ih[0] = T(1);
    p.w_a[0] = T(0.5);
    p.w_b[0] = T(0.5);
    p.pointwise(0, 0) = T(1);
    return p;
}

template <std::floating_point T>
DsRnnParams<T> identity_ds_rnn() {
    DsRnnParams<T> p = make_ds_rnn_params<T>(1, 1, Activation::Identity);
    p.w_ih[0] = T(1);
    p.pointwise(0, 0) = T(1);
    return p;
}

}  // namespace srnn
