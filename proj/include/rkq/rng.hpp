#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>

namespace rkq {

// SplitMix64: the fixed RNG algorithm for this library. The engine is a
// 64-bit counter advanced by the golden-ratio increment with an
// xorshift-multiply output mix (Steele, Lea & Flood 2014). Every uniform
// deviate is a pure function of (seed, counter), so streams are
// bit-identical across platforms and sub-streams can be split by index.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform on [0,1) with 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform on (0,1], safe as a log/ratio argument.
    double uniform_pos() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

private:
    std::uint64_t state_;
};

// Derives an independent sub-seed from (master, tag, index). Two mixing
// rounds decorrelate seeds that differ in a single bit.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag, std::uint64_t index) {
    auto mix = [](std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    };
    std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (tag + 1);
    z = mix(z) + 0xD1B54A32D192ED03ULL * (index + 1);
    return mix(z);
}

// Seed-domain tags, one per independent consumer of a master seed.
namespace seed_tag {
inline constexpr std::uint64_t design = 0x01;
inline constexpr std::uint64_t mcmc = 0x02;
inline constexpr std::uint64_t mixture = 0x03;
inline constexpr std::uint64_t prior_mc = 0x04;
inline constexpr std::uint64_t repetition = 0x05;
inline constexpr std::uint64_t sequential_point = 0x06;
}  // namespace seed_tag

// Standard normal via Box-Muller; consumes exactly two uniforms.
inline double draw_normal(SplitMix64& rng) {
    double u1 = rng.uniform_pos();
    double u2 = rng.uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// Gamma(shape, 1) via Marsaglia-Tsang squeeze; shape < 1 handled by the
// boosting identity G(a) = G(a+1) * U^{1/a}.
inline double draw_gamma(SplitMix64& rng, double shape) {
    if (!(shape > 0.0)) throw std::invalid_argument("draw_gamma: shape must be positive");
    if (shape < 1.0) {
        double u = rng.uniform_pos();
        return draw_gamma(rng, shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x = draw_normal(rng);
        double t = 1.0 + c * x;
        if (t <= 0.0) continue;
        double v = t * t * t;
        double u = rng.uniform_pos();
        double x2 = x * x;
        if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
        if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
    }
}

inline double draw_chi_squared(SplitMix64& rng, double dof) {
    return 2.0 * draw_gamma(rng, 0.5 * dof);
}

// Standard Student-t via the normal / sqrt(chi^2_nu / nu) representation.
inline double draw_student_t(SplitMix64& rng, double nu) {
    double z = draw_normal(rng);
    double c = draw_chi_squared(rng, nu);
    return z / std::sqrt(c / nu);
}

// Inverse-gamma(shape, scale): scale / Gamma(shape, 1).
inline double draw_inverse_gamma(SplitMix64& rng, double shape, double scale) {
    return scale / draw_gamma(rng, shape);
}

}  // namespace rkq
