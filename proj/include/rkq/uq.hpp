#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rkq/rng.hpp"
#include "rkq/special.hpp"

namespace rkq {

// Posterior (mean, variance) pairs from R independent design draws.
struct RepetitionSet {
    std::vector<std::pair<double, double>> components;  // (mean_i, var_i)
    std::size_t design_size = 0;
    std::string config_id;

    void validate() const {
        if (components.empty()) throw std::invalid_argument("RepetitionSet: need at least one repetition");
        for (const auto& [m, v] : components)
            if (v < 0.0 || !std::isfinite(m) || !std::isfinite(v))
                throw std::invalid_argument("RepetitionSet: invalid component");
    }
};

struct TotalVarianceReport {
    double grand_mean = 0.0;
    double within = 0.0;   // mean of conditional variances
    double between = 0.0;  // 1/R sum (mean_i - grand_mean)^2
    double total = 0.0;
};

// Law-of-total-variance estimator with the population-style 1/R second
// moment. Compensated summation keeps the 1e-11-scale variances exact.
inline TotalVarianceReport total_variance(const RepetitionSet& reps) {
    reps.validate();
    const double r = static_cast<double>(reps.components.size());
    CompensatedSum mean_sum, var_sum;
    for (const auto& [m, v] : reps.components) {
        mean_sum.add(m);
        var_sum.add(v);
    }
    TotalVarianceReport rep;
    rep.grand_mean = mean_sum.value() / r;
    rep.within = var_sum.value() / r;
    CompensatedSum sq_sum;
    for (const auto& [m, v] : reps.components) {
        double d = m - rep.grand_mean;
        sq_sum.add(d * d);
    }
    rep.between = sq_sum.value() / r;
    rep.total = rep.within + rep.between;
    return rep;
}

// Empirical quantiles of the Gaussian mixture sum_i N(mean_i, var_i)/R via
// S standard-normal draws per component. Quantile convention: linear
// interpolation between order statistics at rank p (m-1).
inline std::vector<double> mixture_quantiles(const RepetitionSet& reps, std::size_t s_draws,
                                             std::span<const double> probs, std::uint64_t seed) {
    reps.validate();
    if (s_draws < 100) throw std::invalid_argument("mixture_quantiles: need S >= 100");
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (!(probs[i] > 0.0 && probs[i] < 1.0))
            throw std::invalid_argument("mixture_quantiles: probs must lie in (0,1)");
        if (i > 0 && probs[i] < probs[i - 1])
            throw std::invalid_argument("mixture_quantiles: probs must be sorted");
    }
    SplitMix64 rng(derive_seed(seed, seed_tag::mixture, 0));
    std::vector<double> draws;
    draws.reserve(reps.components.size() * s_draws);
    for (const auto& [m, v] : reps.components) {
        const double sd = std::sqrt(v);
        for (std::size_t s = 0; s < s_draws; ++s) draws.push_back(m + sd * draw_normal(rng));
    }
    std::sort(draws.begin(), draws.end());
    std::vector<double> out;
    out.reserve(probs.size());
    const double m = static_cast<double>(draws.size());
    for (double p : probs) {
        double rank = p * (m - 1.0);
        auto lo = static_cast<std::size_t>(rank);
        double frac = rank - static_cast<double>(lo);
        double q = lo + 1 < draws.size() ? draws[lo] * (1.0 - frac) + draws[lo + 1] * frac : draws[lo];
        out.push_back(q);
    }
    return out;
}

struct VarianceBoundCheck {
    double ratio = 0.0;  // total / within
    double bound = 0.0;  // C_check (1 + ||f||^2)
    bool within_bound = false;
};

// Diagnostic for the total-variance bound: flags whether total/within stays
// below C_check (1 + f_norm_bound^2). Not an assertion of the constant.
inline VarianceBoundCheck variance_bound_check(const RepetitionSet& reps, double f_norm_bound,
                                               double c_check = 10.0) {
    TotalVarianceReport rep = total_variance(reps);
    if (!(rep.within > 0.0)) throw std::invalid_argument("variance_bound_check: within-variance is zero");
    VarianceBoundCheck out;
    out.ratio = rep.total / rep.within;
    out.bound = c_check * (1.0 + f_norm_bound * f_norm_bound);
    out.within_bound = out.ratio <= out.bound;
    return out;
}

}  // namespace rkq
