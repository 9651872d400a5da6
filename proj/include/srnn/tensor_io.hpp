#pragma once

#include <array>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "srnn/tensor.hpp"

// IMGT tensor files. Two encodings selected by magic:
//   text:   first line "IMGT-TEXT H W C", then H*W*C whitespace-separated
//           decimal floats in row-major order.
//   binary: 8-byte magic "IMGTBIN1", three 32-bit LE unsigned ints H W C,
//           then H*W*C 32-bit LE IEEE-754 floats, row-major.

namespace srnn {

enum class ImgtEncoding { Text, Binary };

inline constexpr char kImgtBinaryMagic[8] = {'I', 'M', 'G', 'T', 'B', 'I', 'N', '1'};
inline constexpr const char* kImgtTextMagic = "IMGT-TEXT";

class ImgtError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::uint32_t read_u32_le(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline void write_u32_le(std::ostream& os, std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                                static_cast<unsigned char>((v >> 8) & 0xff),
                                static_cast<unsigned char>((v >> 16) & 0xff),
                                static_cast<unsigned char>((v >> 24) & 0xff)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

inline float read_f32_le(const unsigned char* p) {
    const std::uint32_t bits = read_u32_le(p);
    float f;
    std::memcpy(&f, &bits, 4);
    return f;
}

inline void write_f32_le(std::ostream& os, float f) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    write_u32_le(os, bits);
}

}  // namespace detail

template <std::floating_point T>
void save_tensor(const Image<T>& x, const std::string& path,
                 ImgtEncoding enc = ImgtEncoding::Binary) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ImgtError("cannot open '" + path + "' for writing");
    if (enc == ImgtEncoding::Binary) {
        os.write(kImgtBinaryMagic, 8);
        detail::write_u32_le(os, static_cast<std::uint32_t>(x.height()));
        detail::write_u32_le(os, static_cast<std::uint32_t>(x.width()));
        detail::write_u32_le(os, static_cast<std::uint32_t>(x.channels()));
        for (const T v : x.data()) detail::write_f32_le(os, static_cast<float>(v));
    } else {
        os << kImgtTextMagic << ' ' << x.height() << ' ' << x.width() << ' ' << x.channels()
           << '\n';
        os << std::setprecision(std::numeric_limits<T>::max_digits10);
        std::size_t col = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            os << x.data()[i];
            col = (col + 1) % static_cast<std::size_t>(x.width() * x.channels());
            os << (col == 0 ? '\n' : ' ');
        }
    }
    if (!os) throw ImgtError("write failure on '" + path + "'");
}

template <std::floating_point T>
Image<T> load_tensor(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ImgtError("cannot open '" + path + "'");
    std::array<char, 8> magic{};
    is.read(magic.data(), 8);
    if (is.gcount() < 8) throw ImgtError(path + ": truncated header at byte 0 (no magic)");

    if (std::memcmp(magic.data(), kImgtBinaryMagic, 8) == 0) {
        unsigned char dims[12];
        is.read(reinterpret_cast<char*>(dims), 12);
        if (is.gcount() < 12)
            throw ImgtError(path + ": truncated binary header at byte " +
                            std::to_string(8 + is.gcount()));
        const std::uint32_t h = detail::read_u32_le(dims);
        const std::uint32_t w = detail::read_u32_le(dims + 4);
        const std::uint32_t c = detail::read_u32_le(dims + 8);
        if (h == 0 || w == 0 || c == 0)
            throw ImgtError(path + ": zero dimension in binary header (H=" + std::to_string(h) +
                            " W=" + std::to_string(w) + " C=" + std::to_string(c) + ")");
        const std::size_t n = static_cast<std::size_t>(h) * w * c;
        std::vector<T> values(n);
        std::vector<unsigned char> buf(n * 4);
        is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
        if (static_cast<std::size_t>(is.gcount()) != buf.size())
            throw ImgtError(path + ": element count mismatch, payload ends at byte " +
                            std::to_string(20 + is.gcount()) + " but header needs " +
                            std::to_string(n) + " floats");
        // exactly n elements: trailing bytes are a count mismatch too
        char extra;
        if (is.read(&extra, 1))
            throw ImgtError(path + ": element count mismatch, trailing data at byte " +
                            std::to_string(20 + buf.size()));
        for (std::size_t i = 0; i < n; ++i) {
            const float f = detail::read_f32_le(buf.data() + i * 4);
            if (!std::isfinite(f))
                throw ImgtError(path + ": non-finite value at element " + std::to_string(i) +
                                " (byte " + std::to_string(20 + i * 4) + ")");
            values[i] = static_cast<T>(f);
        }
        return Image<T>(static_cast<int>(h), static_cast<int>(w), static_cast<int>(c),
                        std::move(values));
    }

    // text encoding
    is.clear();
    is.seekg(0);
    std::string line;
    if (!std::getline(is, line)) throw ImgtError(path + ": empty file");
    std::istringstream header(line);
    std::string tag;
    long long h = 0, w = 0, c = 0;
    if (!(header >> tag) || tag != kImgtTextMagic)
        throw ImgtError(path + ": malformed header at line 1, expected '" +
                        std::string(kImgtTextMagic) + "'");
    if (!(header >> h >> w >> c) || h <= 0 || w <= 0 || c <= 0)
        throw ImgtError(path + ": malformed header at line 1, bad dimensions");
    const std::size_t n = static_cast<std::size_t>(h) * w * c;
    std::vector<T> values;
    values.reserve(n);
    long double v;
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        std::istringstream ls(line);
        while (ls >> v) {
            if (values.size() == n)
                throw ImgtError(path + ": element count mismatch at line " +
                                std::to_string(line_no) + ", more than " + std::to_string(n) +
                                " values");
            if (!std::isfinite(static_cast<double>(v)))
                throw ImgtError(path + ": non-finite value at line " + std::to_string(line_no));
            values.push_back(static_cast<T>(v));
        }
        if (!ls.eof()) {
            throw ImgtError(path + ": unparsable value at line " + std::to_string(line_no));
        }
    }
    if (values.size() != n)
        throw ImgtError(path + ": element count mismatch, got " + std::to_string(values.size()) +
                        " values but header advertises " + std::to_string(n));
    return Image<T>(static_cast<int>(h), static_cast<int>(w), static_cast<int>(c),
                    std::move(values));
}

}  // namespace srnn
