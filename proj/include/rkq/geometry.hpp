#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace rkq {

struct FillReport {
    std::size_t n = 0;
    double radius = 0.0;
    double fill = 0.0;
};

// Exact 1-d fill distance sup_{x in [-R,R]} min_j |x - x_j|. Candidate
// maximizers are the interval endpoints and the midpoints of consecutive
// sorted points (clamped into the interval); points outside [-R,R] still
// act as centers.
inline double fill_distance_1d(std::span<const double> points, double radius) {
    if (!(radius > 0.0)) throw std::invalid_argument("fill_distance_1d: radius must be positive");
    if (points.empty()) throw std::invalid_argument("fill_distance_1d: empty point set has unbounded fill");
    std::vector<double> xs(points.begin(), points.end());
    std::sort(xs.begin(), xs.end());

    auto nearest_dist = [&xs](double x) {
        auto it = std::lower_bound(xs.begin(), xs.end(), x);
        double d = std::numeric_limits<double>::infinity();
        if (it != xs.end()) d = std::min(d, std::abs(*it - x));
        if (it != xs.begin()) d = std::min(d, std::abs(*std::prev(it) - x));
        return d;
    };
    double h = nearest_dist(-radius);
    h = std::max(h, nearest_dist(radius));
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        double mid = 0.5 * (xs[i] + xs[i + 1]);
        double x = std::clamp(mid, -radius, radius);
        if (x < xs[i] || x > xs[i + 1]) continue;  // clamped outside the gap
        h = std::max(h, std::min(x - xs[i], xs[i + 1] - x));
    }
    return h;
}

inline FillReport fill_report(std::span<const double> points, double radius) {
    return {points.size(), radius, fill_distance_1d(points, radius)};
}

// Fraction of points within one Mahalanobis unit: #{i : x_i^2 / scale <= 1} / n.
inline double mahalanobis_fraction(std::span<const double> points, double scale) {
    if (points.empty()) throw std::invalid_argument("mahalanobis_fraction: empty point set");
    if (!(scale > 0.0)) throw std::invalid_argument("mahalanobis_fraction: scale must be positive");
    std::size_t count = 0;
    for (double x : points)
        if (x * x / scale <= 1.0) ++count;
    return static_cast<double>(count) / static_cast<double>(points.size());
}

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    std::vector<std::pair<double, double>> pairs;  // (n, value)
};

// OLS in log-log space on (n, value) pairs; the slope is the empirical
// convergence exponent.
inline RateFit rate_fit(std::span<const std::pair<double, double>> pairs) {
    if (pairs.size() < 3) throw std::invalid_argument("rate_fit: need at least 3 pairs");
    double prev_n = 0.0;
    for (const auto& [n, v] : pairs) {
        if (!(n > prev_n)) throw std::invalid_argument("rate_fit: n must be strictly increasing");
        if (!(v > 0.0)) throw std::invalid_argument("rate_fit: values must be positive");
        prev_n = n;
    }
    const double m = static_cast<double>(pairs.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const auto& [n, v] : pairs) {
        double x = std::log(n), y = std::log(v);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
    }
    RateFit fit;
    const double cov = sxy - sx * sy / m;
    const double var_x = sxx - sx * sx / m;
    const double var_y = syy - sy * sy / m;
    fit.slope = cov / var_x;
    fit.intercept = (sy - fit.slope * sx) / m;
    fit.r_squared = var_y > 0.0 ? (cov * cov) / (var_x * var_y) : 1.0;
    fit.pairs.assign(pairs.begin(), pairs.end());
    return fit;
}

}  // namespace rkq
