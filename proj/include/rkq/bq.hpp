#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "rkq/embedding.hpp"
#include "rkq/errors.hpp"
#include "rkq/kernel.hpp"

namespace rkq {

// Design points with their function evaluations and a short provenance tag
// naming the sampler and seed that produced them.
struct Design {
    std::vector<double> points;
    std::vector<double> values;
    std::string provenance;

    void validate() const {
        if (points.size() != values.size()) throw std::invalid_argument("Design: points/values length mismatch");
        for (double p : points)
            if (!std::isfinite(p)) throw std::invalid_argument("Design: non-finite point");
        for (double v : values)
            if (!std::isfinite(v)) throw std::invalid_argument("Design: non-finite value");
    }
};

struct QuadraturePosterior {
    double mean = 0.0;
    double variance = 0.0;
    std::vector<double> weights;
    std::size_t n = 0;
    double prior_variance = 0.0;
};

// Raw negative variance below this threshold signals a kernel/embedding
// mismatch rather than roundoff; within [threshold, 0) we clamp to zero.
inline constexpr double kVarianceClampThreshold = -1e-8;

struct ClampCounter {
    static std::atomic<std::uint64_t>& count() {
        static std::atomic<std::uint64_t> c{0};
        return c;
    }
};

// Posterior of the integral given exact evaluations at the design:
// mean = m^T K^{-1} f, variance = PiPi(k) - m^T K^{-1} m, via one Cholesky.
inline QuadraturePosterior bq_posterior(const Kernel& k, const Embedding& emb, const Design& d,
                                        double nugget = kDefaultNugget) {
    d.validate();
    QuadraturePosterior post;
    post.n = d.points.size();
    post.prior_variance = emb.prior_integral_variance;
    if (post.n == 0) {
        post.mean = 0.0;
        post.variance = post.prior_variance;
        return post;
    }
    GramSystem gram(k, PointSet::from_1d(d.points), nugget);
    std::vector<double> m(post.n);
    for (std::size_t i = 0; i < post.n; ++i) m[i] = emb.mean(d.points[i]);

    // variance through the half solve: m^T K^{-1} m = || L^{-1} m ||^2
    std::vector<double> z = gram.half_solve(m);
    double explained = 0.0;
    for (double v : z) explained += v * v;
    double raw = post.prior_variance - explained;
    // a Monte Carlo prior variance widens the consistency threshold by its
    // sampling error
    const double threshold = kVarianceClampThreshold - 8.0 * emb.prior_variance_stderr;
    if (raw < threshold) throw NumericalConsistencyError(raw);
    if (raw < 0.0 && ClampCounter::count().fetch_add(1) == 0)
        std::fputs("rkq: clamped a slightly negative posterior variance to zero\n", stderr);
    post.variance = std::max(raw, 0.0);

    post.weights = gram.solve(m);
    double mean = 0.0;
    for (std::size_t i = 0; i < post.n; ++i) mean += post.weights[i] * d.values[i];
    post.mean = mean;
    return post;
}

inline double worst_case_error(const QuadraturePosterior& p) { return std::sqrt(p.variance); }

// Alternative variance route PiPi(k) - 2 w^T m + w^T K w; a self-check
// exposed as an operation so tests and diagnostics share it.
inline double variance_crosscheck(const Kernel& k, const Embedding& emb, const Design& d,
                                  double nugget = kDefaultNugget) {
    d.validate();
    const std::size_t n = d.points.size();
    if (n == 0) return emb.prior_integral_variance;
    GramSystem gram(k, PointSet::from_1d(d.points), nugget);
    std::vector<double> m(n);
    for (std::size_t i = 0; i < n; ++i) m[i] = emb.mean(d.points[i]);
    std::vector<double> w = gram.solve(m);
    std::vector<double> kw = gram.multiply(w);
    double wm = 0.0, wkw = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        wm += w[i] * m[i];
        wkw += w[i] * kw[i];
    }
    return emb.prior_integral_variance - 2.0 * wm + wkw;
}

}  // namespace rkq
