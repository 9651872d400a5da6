#pragma once

#include <algorithm>
#include <concepts>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "srnn/rng.hpp"
#include "srnn/tensor.hpp"

// Datasets for the toy classifier: a deterministic synthetic bar generator
// and a loader for CIFAR-style binary files.

namespace srnn {

template <std::floating_point T>
struct LabeledImage {
    Image<T> image;
    int label = 0;
};

// n 16x16x1 images, strictly alternating labels (so any prefix is near
// balanced): class 0 draws one horizontal bar, class 1 one vertical bar,
// with random position, thickness 1..3, contrast in [0.5, 1), and additive
// Gaussian noise (sigma 0.1). One RNG consumed in fixed order, so the same
// seed reproduces the dataset bitwise.
template <std::floating_point T>
std::vector<LabeledImage<T>> make_synthetic_dataset(int n, std::uint64_t seed) {
    if (n < 2) throw std::invalid_argument("make_synthetic_dataset: need n >= 2");
    constexpr int kSide = 16;
    Rng rng(seed);
    std::vector<LabeledImage<T>> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        LabeledImage<T> ex;
        ex.label = i % 2;
        ex.image = Image<T>(kSide, kSide, 1);
        const int pos = 1 + rng.uniform_int(kSide - 2);
        const int thickness = 1 + rng.uniform_int(3);
        const double contrast = rng.uniform(0.5, 1.0);
        for (int t = 0; t < thickness; ++t) {
            const int line = std::min(pos + t, kSide - 1);
            for (int u = 0; u < kSide; ++u) {
                if (ex.label == 0)
                    ex.image.at(line, u, 0) = static_cast<T>(contrast);
                else
                    ex.image.at(u, line, 0) = static_cast<T>(contrast);
            }
        }
        for (T& v : ex.image.data()) v += static_cast<T>(0.1 * rng.normal());
        out.push_back(std::move(ex));
    }
    return out;
}

enum class CifarVariant { Cifar10, Cifar100 };

inline const char* cifar_variant_name(CifarVariant v) {
    return v == CifarVariant::Cifar10 ? "cifar10" : "cifar100";
}

// CIFAR binary records: 1 label byte (CIFAR-10) or coarse+fine label bytes
// (CIFAR-100; the fine label is kept), then 3072 pixel bytes as three
// 1024-byte planes (R, G, B), each a row-major 32x32 grid. Pixels are
// scaled to [0, 1]; output images are 32x32x3 with channels interleaved.
// `limit` < 0 loads everything.
template <std::floating_point T>
std::vector<LabeledImage<T>> load_cifar(const std::string& path, CifarVariant variant,
                                        std::int64_t limit = -1) {
    const std::size_t label_bytes = variant == CifarVariant::Cifar10 ? 1 : 2;
    const int max_label = variant == CifarVariant::Cifar10 ? 10 : 100;
    const std::size_t record = label_bytes + 3072;

    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open CIFAR file '" + path + "'");
    std::vector<char> bytes((std::istreambuf_iterator<char>(is)),
                            std::istreambuf_iterator<char>());
    if (bytes.size() % record != 0)
        throw std::runtime_error("'" + path + "': size " + std::to_string(bytes.size()) +
                                 " is not a multiple of the " + std::to_string(record) +
                                 "-byte record (" + cifar_variant_name(variant) + ")");
    std::size_t count = bytes.size() / record;
    if (limit >= 0) count = std::min(count, static_cast<std::size_t>(limit));

    std::vector<LabeledImage<T>> out;
    out.reserve(count);
    for (std::size_t r = 0; r < count; ++r) {
        const unsigned char* p =
            reinterpret_cast<const unsigned char*>(bytes.data()) + r * record;
        LabeledImage<T> ex;
        ex.label = static_cast<int>(p[label_bytes - 1]);  // fine label for CIFAR-100
        if (ex.label >= max_label)
            throw std::runtime_error("'" + path + "': record " + std::to_string(r) + " label " +
                                     std::to_string(ex.label) + " out of range for " +
                                     cifar_variant_name(variant));
        ex.image = Image<T>(32, 32, 3);
        const unsigned char* pix = p + label_bytes;
        for (int c = 0; c < 3; ++c)
            for (int j = 0; j < 32; ++j)
                for (int k = 0; k < 32; ++k)
                    ex.image.at(j, k, c) =
                        static_cast<T>(pix[(c * 32 + j) * 32 + k]) / static_cast<T>(255);
        out.push_back(std::move(ex));
    }
    return out;
}

// Serializes one record in the matching binary layout; `labels` is {fine}
// for CIFAR-10 and {coarse, fine} for CIFAR-100. Pixels are quantized with
// round-to-nearest from [0, 1].
template <std::floating_point T>
void write_cifar_record(std::ostream& os, CifarVariant variant, const std::vector<int>& labels,
                        const Image<T>& img) {
    const std::size_t label_bytes = variant == CifarVariant::Cifar10 ? 1 : 2;
    if (labels.size() != label_bytes)
        throw std::invalid_argument("write_cifar_record: wrong label count");
    if (img.height() != 32 || img.width() != 32 || img.channels() != 3)
        throw std::invalid_argument("write_cifar_record: image must be 32x32x3, got " +
                                    img.shape_str());
    for (int l : labels) os.put(static_cast<char>(static_cast<unsigned char>(l)));
    for (int c = 0; c < 3; ++c)
        for (int j = 0; j < 32; ++j)
            for (int k = 0; k < 32; ++k) {
                const double v = std::clamp(static_cast<double>(img.at(j, k, c)), 0.0, 1.0);
                os.put(static_cast<char>(static_cast<unsigned char>(v * 255.0 + 0.5)));
            }
}

}  // namespace srnn
