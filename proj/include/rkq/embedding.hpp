#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>

#include "rkq/errors.hpp"
#include "rkq/kernel.hpp"
#include "rkq/measure.hpp"
#include "rkq/quadrature.hpp"
#include "rkq/rng.hpp"
#include "rkq/special.hpp"

namespace rkq {

namespace detail {

// Distance at which the kernel correlation falls below tol.
inline double kernel_reach(const Kernel& k, double tol) {
    if (k.variant == KernelVariant::RBF) return k.ell * std::sqrt(2.0 * std::log(1.0 / tol));
    // Matern-3/2: solve (1 + a) e^{-a} = tol; two rounds of a = log((1+a)/tol)
    double a = std::log(1.0 / tol);
    a = std::log((1.0 + a) / tol);
    a = std::log((1.0 + a) / tol);
    return k.ell * a / std::numbers::sqrt3;
}

inline bool closed_form_supported(const Kernel&, const Measure& m) { return m.is_standard_gaussian(); }

// exp(-x^2/2) * I0(beta) with I0(beta) = sqrt(pi/2) exp(beta^2/2) erfc(beta/sqrt2),
// combined so that neither factor overflows for any (x, beta) pair that
// arises from beta = sqrt(3)/ell -+ x.
inline double damped_i0(double x, double beta) {
    const double root_half_pi = std::sqrt(0.5 * std::numbers::pi);
    if (beta >= 0.0) return root_half_pi * std::exp(-0.5 * x * x) * erfcx(beta / std::numbers::sqrt2);
    // erfc(beta/sqrt2) = 2 - erfc(-beta/sqrt2); exponent (beta^2 - x^2)/2 is
    // always negative on this branch
    return root_half_pi * (2.0 * std::exp(0.5 * (beta * beta - x * x)) -
                           std::exp(-0.5 * x * x) * erfcx(-beta / std::numbers::sqrt2));
}

}  // namespace detail

// m_Pi(x) for the closed-form pairs {RBF, Matern32} x Gaussian(0,1).
inline double kernel_mean_closed(const Kernel& k, const Measure& m, double x) {
    if (!detail::closed_form_supported(k, m))
        throw UnsupportedPairError("kernel_mean_closed: closed form requires the standard Gaussian measure");
    const double ell2 = k.ell * k.ell;
    if (k.variant == KernelVariant::RBF)
        return k.sigma_f2 * std::sqrt(ell2 / (ell2 + 1.0)) * std::exp(-0.5 * x * x / (ell2 + 1.0));
    const double c = std::numbers::sqrt3 / k.ell;
    const double beta_minus = c - x;
    const double beta_plus = c + x;
    const double g_minus = detail::damped_i0(x, beta_minus);
    const double g_plus = detail::damped_i0(x, beta_plus);
    const double bracket = 2.0 * c * std::exp(-0.5 * x * x) + (1.0 - c * beta_minus) * g_minus +
                           (1.0 - c * beta_plus) * g_plus;
    return k.sigma_f2 * bracket / std::sqrt(2.0 * std::numbers::pi);
}

// Pi x Pi (k), the prior variance of the integral, for the closed-form pairs.
inline double initial_error_closed(const Kernel& k, const Measure& m) {
    if (!detail::closed_form_supported(k, m))
        throw UnsupportedPairError("initial_error_closed: closed form requires the standard Gaussian measure");
    const double ell2 = k.ell * k.ell;
    if (k.variant == KernelVariant::RBF) return k.sigma_f2 * std::sqrt(ell2 / (ell2 + 2.0));
    const double c = std::numbers::sqrt3 / k.ell;
    const double j0 = std::sqrt(std::numbers::pi) * erfcx(c);
    const double j1 = 2.0 - 2.0 * c * j0;
    return k.sigma_f2 * (j0 + c * j1) / std::sqrt(std::numbers::pi);
}

// m_Pi(x) by adaptive quadrature of k(x, .) against the measure density over
// a truncated interval whose discarded tail mass is below rel_tol / 10.
inline double kernel_mean_numeric(const Kernel& k, const Measure& m, double x, double rel_tol) {
    if (!(rel_tol >= 1e-12 && rel_tol <= 1e-3))
        throw std::invalid_argument("kernel_mean_numeric: rel_tol must lie in [1e-12, 1e-3]");
    const double c = m.center();
    const double half = tail_halfwidth(m, rel_tol / 20.0);
    const double reach = detail::kernel_reach(k, rel_tol);
    const double lo = std::min(c - half, x - reach);
    const double hi = std::max(c + half, x + reach);
    std::vector<double> cuts{x - reach, x, x + reach, c};
    auto integrand = [&](double y) { return kernel_eval_dist(k, std::abs(x - y)) * density(m, y); };
    return integrate(integrand, lo, hi, rel_tol, 0.0, std::move(cuts)).value;
}

// Pi x Pi (k) by nested adaptive quadrature: the outer pass integrates the
// numeric kernel mean against the measure, the inner tolerance is tightened
// one order below the outer one.
inline double initial_error_nested(const Kernel& k, const Measure& m, double rel_tol) {
    const double inner_tol = std::max(rel_tol / 10.0, 1e-12);
    const double c = m.center();
    const double half = tail_halfwidth(m, rel_tol / 20.0);
    auto outer = [&](double x) { return kernel_mean_numeric(k, m, x, inner_tol) * density(m, x); };
    return integrate(outer, c - half, c + half, rel_tol, 0.0, {c}).value;
}

struct MonteCarloEstimate {
    double value = 0.0;
    double standard_error = 0.0;
    std::size_t samples = 0;
};

// Monte Carlo estimate of Pi x Pi (k) from i.i.d. pairs (x_i, y_i) ~ m x m.
inline MonteCarloEstimate initial_error_mc(const Kernel& k, const Measure& m, std::size_t n_samples,
                                           std::uint64_t seed) {
    if (n_samples < 10000) throw std::invalid_argument("initial_error_mc: need at least 1e4 samples");
    SplitMix64 rng(derive_seed(seed, seed_tag::prior_mc, 0));
    CompensatedSum sum, sumsq;
    for (std::size_t i = 0; i < n_samples; ++i) {
        double x = draw(m, rng);
        double y = draw(m, rng);
        double v = kernel_eval_dist(k, std::abs(x - y));
        sum.add(v);
        sumsq.add(v * v);
    }
    const double n = static_cast<double>(n_samples);
    const double mean = sum.value() / n;
    const double var = std::max(0.0, sumsq.value() / n - mean * mean);
    return {mean, std::sqrt(var / n), n_samples};
}

// g(x) = f(x) t_nu_target(x) / t_nu_proposal(x); requires the proposal to
// have the heavier tail so the ratio decays.
inline std::function<double(double)> change_of_measure(std::function<double(double)> f, double nu_target,
                                                       double nu_proposal) {
    if (!(nu_target > nu_proposal) || !(nu_proposal > 0.0))
        throw std::invalid_argument("change_of_measure: need nu_target > nu_proposal > 0");
    const double log_norm_ratio = student_t_log_norm(nu_target) - student_t_log_norm(nu_proposal);
    return [f = std::move(f), nu_target, nu_proposal, log_norm_ratio](double x) {
        double log_ratio = log_norm_ratio - 0.5 * (nu_target + 1.0) * std::log1p(x * x / nu_target) +
                           0.5 * (nu_proposal + 1.0) * std::log1p(x * x / nu_proposal);
        return f(x) * std::exp(log_ratio);
    };
}

enum class EmbeddingMode { ClosedForm, Numeric };

// Kernel mean embedding of a measure: mean function m_Pi and the prior
// integral variance Pi x Pi (k). Closed form where available, otherwise
// per-point quadrature with a Monte Carlo prior variance.
struct Embedding {
    Kernel kernel;
    Measure measure;
    EmbeddingMode mode = EmbeddingMode::ClosedForm;
    double rel_tol = 1e-10;
    double prior_integral_variance = 0.0;
    double prior_variance_stderr = 0.0;

    double mean(double x) const {
        return mode == EmbeddingMode::ClosedForm ? kernel_mean_closed(kernel, measure, x)
                                                 : kernel_mean_numeric(kernel, measure, x, rel_tol);
    }
};

inline Embedding make_embedding_closed(const Kernel& k, const Measure& m) {
    Embedding e;
    e.kernel = k;
    e.measure = m;
    e.mode = EmbeddingMode::ClosedForm;
    e.prior_integral_variance = initial_error_closed(k, m);
    return e;
}

enum class PriorVarianceMethod { NestedQuadrature, MonteCarlo };

inline Embedding make_embedding_numeric(const Kernel& k, const Measure& m, double rel_tol,
                                        PriorVarianceMethod method = PriorVarianceMethod::NestedQuadrature,
                                        std::size_t mc_samples = 1000000, std::uint64_t seed = 0) {
    Embedding e;
    e.kernel = k;
    e.measure = m;
    e.mode = EmbeddingMode::Numeric;
    e.rel_tol = rel_tol;
    if (method == PriorVarianceMethod::NestedQuadrature) {
        e.prior_integral_variance = initial_error_nested(k, m, std::min(rel_tol, 1e-8));
        e.prior_variance_stderr = 0.0;
    } else {
        MonteCarloEstimate est = initial_error_mc(k, m, mc_samples, seed);
        e.prior_integral_variance = est.value;
        e.prior_variance_stderr = est.standard_error;
    }
    return e;
}

}  // namespace rkq
