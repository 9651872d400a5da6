#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

// 8-bit binary PGM (P5) output for response maps, plus a raw CSV dump and a
// sidecar text file holding the min/max used for quantization, so the image
// stays quantitatively recoverable.

namespace srnn {

class PgmError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct PgmNorm {
    double lo = 0.0;
    double hi = 0.0;
};

struct PgmImage {
    std::int64_t h = 0;
    std::int64_t w = 0;
    std::vector<std::uint8_t> pixels;  // row-major
};

// Min-max normalizes `values` (row-major h x w) to 0..255 and writes a P5
// file; a constant field maps to all-zero. The constants land in
// `path + ".norm.txt"` as `min <v>` / `max <v>` lines. Returns them too.
PgmNorm write_pgm_with_sidecar(const std::string& path, const std::vector<double>& values,
                               std::int64_t h, std::int64_t w);

// Strict-enough P5 reader for round-trip checks: handles '#' comments and
// arbitrary header whitespace, requires maxval <= 255.
PgmImage read_pgm(const std::string& path);

PgmNorm read_pgm_sidecar(const std::string& path);  // pass the .norm.txt path

// Raw unnormalized values, one CSV line per image row.
void write_csv_grid(const std::string& path, const std::vector<double>& values, std::int64_t h,
                    std::int64_t w);

}  // namespace srnn
