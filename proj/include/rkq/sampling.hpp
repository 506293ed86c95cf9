#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "rkq/measure.hpp"
#include "rkq/rng.hpp"

namespace rkq {

enum class ProposalFamily { GaussianInflated, StudentInflated, TargetBaseline };

// Randomized design generator: the target measure itself (baseline) or the
// n-dependent inflated families. The inflation enters as a variance-like
// factor: Gaussian designs use variance (log n) * base, Student designs use
// squared scale n^{2 alpha / (d (alpha + nu + d/2))} * base, d = 1.
struct Proposal {
    ProposalFamily family = ProposalFamily::TargetBaseline;
    Measure target = Measure::gaussian(0.0, 1.0);
    double alpha = 1.5;               // Sobolev smoothness in the inflation exponent
    bool include_alpha_factor = false;  // Gaussian case: variance = (alpha log n) vs (log n)

    static Proposal baseline(Measure target) {
        Proposal p;
        p.family = ProposalFamily::TargetBaseline;
        p.target = target;
        return p;
    }

    static Proposal gaussian_inflated(Measure target, double alpha, bool include_alpha_factor = false) {
        if (target.variant != MeasureVariant::Gaussian)
            throw std::invalid_argument("Proposal: gaussian_inflated requires a Gaussian target");
        require_alpha(alpha);
        Proposal p;
        p.family = ProposalFamily::GaussianInflated;
        p.target = target;
        p.alpha = alpha;
        p.include_alpha_factor = include_alpha_factor;
        return p;
    }

    static Proposal student_inflated(Measure target, double alpha) {
        if (target.variant != MeasureVariant::StudentT)
            throw std::invalid_argument("Proposal: student_inflated requires a Student-t target");
        require_alpha(alpha);
        Proposal p;
        p.family = ProposalFamily::StudentInflated;
        p.target = target;
        p.alpha = alpha;
        return p;
    }

    static void require_alpha(double alpha) {
        if (!(alpha > 0.5)) throw std::invalid_argument("Proposal: alpha must exceed d/2 = 1/2");
    }

    // base variance-like scale of the target family
    double base_scale() const {
        if (target.variant == MeasureVariant::Gaussian) return target.variance;
        return target.scale * target.scale;
    }
};

// tau exponent: 1/d for the Gaussian target, (nu + d/2)/(d (alpha + nu + d/2))
// for the Student-t target, d = 1.
struct RateTarget {
    double tau = 1.0;
    double error_exponent = 0.0;     // -alpha tau
    double variance_exponent = 0.0;  // -2 alpha tau
};

inline RateTarget rate_target(const Proposal& p) {
    RateTarget r;
    if (p.target.variant == MeasureVariant::Gaussian) {
        r.tau = 1.0;
    } else {
        const double nu_half = p.target.nu + 0.5;
        r.tau = nu_half / (p.alpha + nu_half);
    }
    r.error_exponent = -p.alpha * r.tau;
    r.variance_exponent = 2.0 * r.error_exponent;
    return r;
}

// Variance-like scale of Q_n (or Q_i in the sequential scheme).
inline double proposal_scale(const Proposal& p, std::size_t n) {
    if (n < 2) throw std::invalid_argument("proposal_scale: need n >= 2 so that log n > 0");
    switch (p.family) {
        case ProposalFamily::TargetBaseline:
            return p.base_scale();
        case ProposalFamily::GaussianInflated: {
            double factor = std::log(static_cast<double>(n));
            if (p.include_alpha_factor) factor *= p.alpha;
            return p.base_scale() * factor;
        }
        case ProposalFamily::StudentInflated: {
            const double exponent = 2.0 * p.alpha / (p.alpha + p.target.nu + 0.5);
            return p.base_scale() * std::pow(static_cast<double>(n), exponent);
        }
    }
    return p.base_scale();  // unreachable
}

namespace detail {

inline double draw_scaled(const Proposal& p, double scale, SplitMix64& rng) {
    const double s = std::sqrt(scale / p.base_scale());
    if (p.target.variant == MeasureVariant::Gaussian)
        return p.target.mean + std::sqrt(p.target.variance) * s * draw_normal(rng);
    return p.target.scale * s * draw_student_t(rng, p.target.nu);
}

}  // namespace detail

// n i.i.d. points from Q_n at the batch scale; scale uses max(n, 2).
inline std::vector<double> draw_iid(const Proposal& p, std::size_t n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("draw_iid: need n >= 1");
    const double scale = proposal_scale(p, std::max<std::size_t>(n, 2));
    SplitMix64 rng(derive_seed(seed, seed_tag::design, 0));
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = detail::draw_scaled(p, scale, rng);
    return out;
}

// Independent points x_i ~ Q_i with per-index scales s(i), i = 1..n. Each
// point draws from its own counter-derived stream, so extending n keeps
// the prefix unchanged.
inline std::vector<double> draw_sequential(const Proposal& p, std::size_t n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("draw_sequential: need n >= 1");
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double scale = proposal_scale(p, std::max<std::size_t>(i + 1, 2));
        SplitMix64 rng(derive_seed(seed, seed_tag::sequential_point, i));
        out[i] = detail::draw_scaled(p, scale, rng);
    }
    return out;
}

// Effective-domain radius R_n used by the fill-distance analysis:
// sqrt(log n) for Gaussian targets (sqrt(alpha log n) when the alpha factor
// is kept in the inflation), n^{alpha/(d(alpha+nu+d/2))} for Student-t.
inline double effective_radius(const Proposal& p, std::size_t n) {
    const double nn = static_cast<double>(std::max<std::size_t>(n, 2));
    if (p.target.variant == MeasureVariant::Gaussian) {
        double factor = p.include_alpha_factor ? p.alpha : 1.0;
        return std::sqrt(factor * std::log(nn));
    }
    return std::pow(nn, p.alpha / (p.alpha + p.target.nu + 0.5));
}

}  // namespace rkq
