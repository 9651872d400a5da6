#include "srnn/pgm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace srnn {

namespace {

constexpr int kFloatDigits = std::numeric_limits<double>::max_digits10;

void check_grid(const std::vector<double>& values, std::int64_t h, std::int64_t w) {
    if (h < 1 || w < 1) throw PgmError("image dimensions must be positive");
    if (static_cast<std::int64_t>(values.size()) != h * w)
        throw PgmError("value count " + std::to_string(values.size()) + " does not match " +
                       std::to_string(h) + "x" + std::to_string(w));
    for (double v : values)
        if (!std::isfinite(v)) throw PgmError("non-finite value in image data");
}

}  // namespace

PgmNorm write_pgm_with_sidecar(const std::string& path, const std::vector<double>& values,
                               std::int64_t h, std::int64_t w) {
    check_grid(values, h, w);
    PgmNorm norm;
    norm.lo = *std::min_element(values.begin(), values.end());
    norm.hi = *std::max_element(values.begin(), values.end());
    const double span = norm.hi - norm.lo;

    std::ofstream os(path, std::ios::binary);
    if (!os) throw PgmError("cannot open '" + path + "' for writing");
    os << "P5\n" << w << " " << h << "\n255\n";
    for (double v : values) {
        int q = 0;
        if (span > 0.0) q = static_cast<int>(std::lround((v - norm.lo) / span * 255.0));
        q = std::clamp(q, 0, 255);
        os.put(static_cast<char>(static_cast<unsigned char>(q)));
    }
    if (!os) throw PgmError("write failure on '" + path + "'");
    os.close();

    const std::string sidecar = path + ".norm.txt";
    std::ofstream ss(sidecar);
    if (!ss) throw PgmError("cannot open '" + sidecar + "' for writing");
    ss.precision(kFloatDigits);
    ss << "min " << norm.lo << "\n" << "max " << norm.hi << "\n";
    if (!ss) throw PgmError("write failure on '" + sidecar + "'");
    return norm;
}

PgmImage read_pgm(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw PgmError("cannot open '" + path + "'");

    // header tokens with '#' comments stripped; the raster starts after the
    // single whitespace byte that terminates maxval
    const auto next_token = [&is, &path]() {
        std::string tok;
        int c;
        while ((c = is.get()) != EOF) {
            if (c == '#') {
                while ((c = is.get()) != EOF && c != '\n') {}
            } else if (!std::isspace(c)) {
                break;
            }
        }
        while (c != EOF && !std::isspace(c)) {
            tok.push_back(static_cast<char>(c));
            c = is.get();
        }
        if (tok.empty()) throw PgmError("'" + path + "': truncated header");
        return tok;
    };

    if (next_token() != "P5") throw PgmError("'" + path + "': not a P5 file");
    PgmImage img;
    try {
        img.w = std::stoll(next_token());
        img.h = std::stoll(next_token());
        const long long maxval = std::stoll(next_token());
        if (maxval < 1 || maxval > 255)
            throw PgmError("'" + path + "': unsupported maxval " + std::to_string(maxval));
    } catch (const PgmError&) {
        throw;
    } catch (...) {
        throw PgmError("'" + path + "': malformed header");
    }
    if (img.w < 1 || img.h < 1) throw PgmError("'" + path + "': bad dimensions");

    img.pixels.resize(static_cast<std::size_t>(img.w * img.h));
    is.read(reinterpret_cast<char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
    if (is.gcount() != static_cast<std::streamsize>(img.pixels.size()))
        throw PgmError("'" + path + "': truncated raster");
    return img;
}

PgmNorm read_pgm_sidecar(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw PgmError("cannot open '" + path + "'");
    PgmNorm norm;
    std::string key;
    bool have_min = false, have_max = false;
    double v;
    while (is >> key >> v) {
        if (key == "min") {
            norm.lo = v;
            have_min = true;
        } else if (key == "max") {
            norm.hi = v;
            have_max = true;
        } else {
            throw PgmError("'" + path + "': unknown sidecar key '" + key + "'");
        }
    }
    if (!have_min || !have_max) throw PgmError("'" + path + "': missing min/max entries");
    return norm;
}

void write_csv_grid(const std::string& path, const std::vector<double>& values, std::int64_t h,
                    std::int64_t w) {
    check_grid(values, h, w);
    std::ofstream os(path);
    if (!os) throw PgmError("cannot open '" + path + "' for writing");
    os.precision(kFloatDigits);
    for (std::int64_t j = 0; j < h; ++j) {
        for (std::int64_t k = 0; k < w; ++k) {
            if (k) os << ',';
            os << values[static_cast<std::size_t>(j * w + k)];
        }
        os << '\n';
    }
    if (!os) throw PgmError("write failure on '" + path + "'");
}

}  // namespace srnn
