#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "pmb/common.hpp"

namespace pmb {

/// Seeded generator whose output is fixed across platforms.
///
/// std::mt19937_64's sequence is pinned by the C++ standard; the standard
/// distributions are not, so the real-valued draws below are derived from
/// the raw 64-bit output by hand.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1].
    double uniform_open0() { return 1.0 - uniform(); }

    /// Standard normal (Box-Muller, one value per call).
    double normal() {
        const double u1 = uniform_open0();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    /// Uniform point on the unit sphere in R^n.
    Vector unit_sphere(std::size_t n) {
        Vector v(n);
        double nn = 0.0;
        do {
            for (double& c : v) c = normal();
            nn = norm(v);
        } while (!(nn > 0.0));
        for (double& c : v) c /= nn;
        return v;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace pmb
