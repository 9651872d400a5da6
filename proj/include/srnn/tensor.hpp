#pragma once

#include <cmath>
#include <concepts>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace srnn {

enum class Precision { Single, Double };

template <std::floating_point T>
constexpr Precision precision_of() {
    return sizeof(T) == sizeof(float) ? Precision::Single : Precision::Double;
}

namespace detail {

inline void check_positive(int v, const char* name) {
    if (v <= 0) {
        throw std::invalid_argument(std::string(name) + " must be positive, got " +
                                    std::to_string(v));
    }
}

template <std::floating_point T>
void check_finite(const std::vector<T>& data, const char* what) {
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (!std::isfinite(data[i])) {
            throw std::invalid_argument(std::string(what) + ": non-finite value at element " +
                                        std::to_string(i));
        }
    }
}

}  // namespace detail

// Dense H x W x C activation map, row-major (H, then W, then C): a row
// (fixed j) is the contiguous scan unit. Value type; treat as immutable
// once filled and share freely across threads.
template <std::floating_point T>
class Image {
public:
    using scalar_type = T;

    Image() = default;

    Image(int height, int width, int channels)
        : height_(height), width_(width), channels_(channels) {
        detail::check_positive(height, "height");
        detail::check_positive(width, "width");
        detail::check_positive(channels, "channels");
        data_.assign(static_cast<std::size_t>(height) * width * channels, T(0));
    }

    Image(int height, int width, int channels, std::vector<T> data)
        : height_(height), width_(width), channels_(channels), data_(std::move(data)) {
        detail::check_positive(height, "height");
        detail::check_positive(width, "width");
        detail::check_positive(channels, "channels");
        const std::size_t expect = static_cast<std::size_t>(height) * width * channels;
        if (data_.size() != expect) {
            throw std::invalid_argument("image data length " + std::to_string(data_.size()) +
                                        " != H*W*C = " + std::to_string(expect));
        }
        detail::check_finite(data_, "image");
    }

    int height() const { return height_; }
    int width() const { return width_; }
    int channels() const { return channels_; }
    std::size_t size() const { return data_.size(); }
    static constexpr Precision precision() { return precision_of<T>(); }

    // 0-based indexing
    T& at(int j, int k, int c) { return data_[index(j, k, c)]; }
    const T& at(int j, int k, int c) const { return data_[index(j, k, c)]; }

    // Row j as a contiguous W*C block.
    std::span<T> row(int j) {
        return {data_.data() + static_cast<std::size_t>(j) * width_ * channels_,
                static_cast<std::size_t>(width_) * channels_};
    }
    std::span<const T> row(int j) const {
        return {data_.data() + static_cast<std::size_t>(j) * width_ * channels_,
                static_cast<std::size_t>(width_) * channels_};
    }

    std::vector<T>& data() { return data_; }
    const std::vector<T>& data() const { return data_; }

    bool same_shape(const Image& o) const {
        return height_ == o.height_ && width_ == o.width_ && channels_ == o.channels_;
    }

    std::string shape_str() const {
        return std::to_string(height_) + "x" + std::to_string(width_) + "x" +
               std::to_string(channels_);
    }

    friend bool operator==(const Image& a, const Image& b) {
        return a.height_ == b.height_ && a.width_ == b.width_ && a.channels_ == b.channels_ &&
               a.data_ == b.data_;
    }

private:
    std::size_t index(int j, int k, int c) const {
        return (static_cast<std::size_t>(j) * width_ + k) * channels_ + c;
    }

    int height_ = 0;
    int width_ = 0;
    int channels_ = 0;
    std::vector<T> data_;
};

// 1D sequence of feature vectors, L x C row-major.
template <std::floating_point T>
class Seq {
public:
    using scalar_type = T;

    Seq() = default;

    Seq(int length, int channels) : length_(length), channels_(channels) {
        detail::check_positive(length, "length");
        detail::check_positive(channels, "channels");
        data_.assign(static_cast<std::size_t>(length) * channels, T(0));
    }

    Seq(int length, int channels, std::vector<T> data)
        : length_(length), channels_(channels), data_(std::move(data)) {
        detail::check_positive(length, "length");
        detail::check_positive(channels, "channels");
        const std::size_t expect = static_cast<std::size_t>(length) * channels;
        if (data_.size() != expect) {
            throw std::invalid_argument("sequence data length " + std::to_string(data_.size()) +
                                        " != L*C = " + std::to_string(expect));
        }
        detail::check_finite(data_, "sequence");
    }

    int length() const { return length_; }
    int channels() const { return channels_; }
    std::size_t size() const { return data_.size(); }
    static constexpr Precision precision() { return precision_of<T>(); }

    T& at(int t, int c) { return data_[static_cast<std::size_t>(t) * channels_ + c]; }
    const T& at(int t, int c) const { return data_[static_cast<std::size_t>(t) * channels_ + c]; }

    std::span<T> step(int t) {
        return {data_.data() + static_cast<std::size_t>(t) * channels_,
                static_cast<std::size_t>(channels_)};
    }
    std::span<const T> step(int t) const {
        return {data_.data() + static_cast<std::size_t>(t) * channels_,
                static_cast<std::size_t>(channels_)};
    }

    std::vector<T>& data() { return data_; }
    const std::vector<T>& data() const { return data_; }

    friend bool operator==(const Seq& a, const Seq& b) {
        return a.length_ == b.length_ && a.channels_ == b.channels_ && a.data_ == b.data_;
    }

private:
    int length_ = 0;
    int channels_ = 0;
    std::vector<T> data_;
};

// result[j,k,c] = x[k,j,c]; swaps the height and width dimensions.
template <std::floating_point T>
Image<T> transpose_hw(const Image<T>& x) {
    Image<T> out(x.width(), x.height(), x.channels());
    const int ch = x.channels();
    for (int j = 0; j < x.height(); ++j) {
        for (int k = 0; k < x.width(); ++k) {
            const T* src = &x.at(j, k, 0);
            T* dst = &out.at(k, j, 0);
            for (int c = 0; c < ch; ++c) dst[c] = src[c];
        }
    }
    return out;
}

// result[j,k,c] = x[j, W-1-k, c]; reverses every row.
template <std::floating_point T>
Image<T> flip_w(const Image<T>& x) {
    Image<T> out(x.height(), x.width(), x.channels());
    const int ch = x.channels();
    for (int j = 0; j < x.height(); ++j) {
        for (int k = 0; k < x.width(); ++k) {
            const T* src = &x.at(j, x.width() - 1 - k, 0);
            T* dst = &out.at(j, k, 0);
            for (int c = 0; c < ch; ++c) dst[c] = src[c];
        }
    }
    return out;
}

template <std::floating_point T>
Image<T> add(const Image<T>& a, const Image<T>& b) {
    if (!a.same_shape(b)) {
        throw std::invalid_argument("elementwise add: shape mismatch " + a.shape_str() + " vs " +
                                    b.shape_str());
    }
    Image<T> out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] += b.data()[i];
    return out;
}

}  // namespace srnn
