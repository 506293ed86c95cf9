#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "rkq/rng.hpp"

namespace rkq {

enum class MeasureVariant { Gaussian, StudentT };

// One-dimensional integration measure: Gaussian(mean, variance) or a
// scaled Student-t with nu degrees of freedom (variate = scale * t_nu).
struct Measure {
    MeasureVariant variant = MeasureVariant::Gaussian;
    double mean = 0.0;      // Gaussian only
    double variance = 1.0;  // Gaussian only
    double nu = 1.0;        // Student only
    double scale = 1.0;     // Student only

    static Measure gaussian(double mean, double variance) {
        if (!(variance > 0.0) || !std::isfinite(variance) || !std::isfinite(mean))
            throw std::invalid_argument("Measure: gaussian variance must be positive and finite");
        Measure m;
        m.variant = MeasureVariant::Gaussian;
        m.mean = mean;
        m.variance = variance;
        return m;
    }

    static Measure student_t(double nu, double scale) {
        if (!(nu > 0.0) || !(scale > 0.0))
            throw std::invalid_argument("Measure: student-t nu and scale must be positive");
        Measure m;
        m.variant = MeasureVariant::StudentT;
        m.nu = nu;
        m.scale = scale;
        return m;
    }

    bool is_standard_gaussian() const {
        return variant == MeasureVariant::Gaussian && mean == 0.0 && variance == 1.0;
    }

    // Characteristic width used for truncation intervals and sanity checks.
    double spread() const {
        if (variant == MeasureVariant::Gaussian) return std::sqrt(variance);
        return nu > 2.0 ? scale * std::sqrt(nu / (nu - 2.0)) : scale;
    }

    double center() const { return variant == MeasureVariant::Gaussian ? mean : 0.0; }
};

// log of the standard t_nu normalization Gamma((nu+1)/2) / (sqrt(nu pi) Gamma(nu/2)).
inline double student_t_log_norm(double nu) {
    return std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) - 0.5 * std::log(nu * std::numbers::pi);
}

// Density of the standard (unit-scale) t_nu at x.
inline double student_t_pdf(double nu, double x) {
    double logpdf = student_t_log_norm(nu) - 0.5 * (nu + 1.0) * std::log1p(x * x / nu);
    return std::exp(logpdf);
}

inline double gaussian_pdf(double mean, double variance, double x) {
    double z = (x - mean);
    return std::exp(-0.5 * z * z / variance) / std::sqrt(2.0 * std::numbers::pi * variance);
}

inline double density(const Measure& m, double x) {
    if (!std::isfinite(x)) throw std::invalid_argument("density: non-finite input");
    if (m.variant == MeasureVariant::Gaussian) return gaussian_pdf(m.mean, m.variance, x);
    return student_t_pdf(m.nu, x / m.scale) / m.scale;
}

// Half-width c such that the measure mass outside [center - c, center + c]
// is below tol. Gaussian uses the Mills-ratio bound, Student-t the
// polynomial tail bound of its density envelope.
inline double tail_halfwidth(const Measure& m, double tol) {
    if (!(tol > 0.0) || tol >= 1.0) throw std::invalid_argument("tail_halfwidth: tol in (0,1) required");
    if (m.variant == MeasureVariant::Gaussian) {
        // 2(1 - Phi(c)) <= exp(-c^2/2) for c >= 1
        double c = std::sqrt(2.0 * std::log(1.0 / tol));
        return std::sqrt(m.variance) * std::max(c, 1.0);
    }
    // standard t_nu: pdf(x) <= c2 |x|^{-nu-1} with c2 = C_nu nu^{(nu+1)/2},
    // hence the two-sided mass beyond c is at most 2 c2 c^{-nu} / nu.
    double c2 = std::exp(student_t_log_norm(m.nu) + 0.5 * (m.nu + 1.0) * std::log(m.nu));
    double c = std::pow(2.0 * c2 / (tol * m.nu), 1.0 / m.nu);
    return m.scale * std::max(c, std::sqrt(m.nu) + 1.0);
}

inline double draw(const Measure& m, SplitMix64& rng) {
    if (m.variant == MeasureVariant::Gaussian) return m.mean + std::sqrt(m.variance) * draw_normal(rng);
    return m.scale * draw_student_t(rng, m.nu);
}

}  // namespace rkq
