#pragma once

#include <cmath>
#include <concepts>
#include <cstdint>
#include <random>
#include <vector>

namespace srnn {

// mt19937 is fully specified by the standard; the distribution transforms in
// <random> are not, so the few we need are spelled out here. Same seed, same
// stream of values, on any platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(static_cast<std::uint32_t>(seed)) {
        // decorrelate nearby seeds
        engine_.discard(7);
    }

    std::uint32_t next_u32() { return engine_(); }

    // uniform in [0, 1)
    double uniform() { return engine_() * (1.0 / 4294967296.0); }

    // uniform in [lo, hi)
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [0, n)
    int uniform_int(int n) { return static_cast<int>(uniform() * n); }

    // standard normal via Box-Muller (one value per call, cached pair)
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    template <std::floating_point T>
    void fill_uniform(std::vector<T>& v, double lo, double hi) {
        for (auto& x : v) x = static_cast<T>(uniform(lo, hi));
    }

    // in-place Fisher-Yates; std::shuffle leaves the draw sequence unspecified
    template <typename Vec>
    void shuffle(Vec& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(uniform_int(static_cast<int>(i)));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace srnn
