// SPDX-License-Identifier: Apache-2.0
//
// rbp -- resonant-beam positioning simulator
// Counter-free splitmix64 generator plus Box-Muller sampling. Implemented
// here rather than with std distributions so that seeded experiments are
// bit-identical across standard libraries.

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>

namespace rbp {

/// One splitmix64 mixing step.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Stable per-trial seed: master mixed with the sweep point index and the
/// trial index, each through its own splitmix64 round.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t sweep_index,
                                 std::uint64_t trial_index) {
    std::uint64_t s = master;
    s ^= splitmix64(sweep_index += 0xA0761D6478BD642FULL);
    std::uint64_t t = s;
    t ^= splitmix64(trial_index += 0xE7037ED1A0B428DBULL);
    std::uint64_t u = t;
    return splitmix64(u);
}

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() { return splitmix64(state_); }

    /// Uniform in [0, 1) with 53-bit resolution.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller.
    double next_gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = next_double();
        while (u1 <= 0.0) u1 = next_double();
        const double u2 = next_double();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    /// Circular complex normal with E|z|^2 = 1.
    std::complex<double> next_complex_gaussian() {
        const double re = next_gaussian();
        const double im = next_gaussian();
        return {re * M_SQRT1_2, im * M_SQRT1_2};
    }

  private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace rbp
