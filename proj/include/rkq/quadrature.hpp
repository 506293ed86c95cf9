#pragma once

#include <algorithm>
#include <cmath>
#include <queue>
#include <vector>

#include "rkq/errors.hpp"

namespace rkq {

namespace detail {

// 15-point Kronrod extension of 7-point Gauss on [-1,1].
struct GK15 {
    static constexpr double nodes[8] = {
        0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
        0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
        0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
        0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
    static constexpr double wk[8] = {
        0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
        0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
        0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
        0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
    static constexpr double wg[4] = {
        0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
        0.381830050505118944950369775488975, 0.417959183673469387755102040816327};
};

template <typename F>
inline void gk15_panel(const F& f, double a, double b, double& value, double& error) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double resk = GK15::wk[7] * fc;
    double resg = GK15::wg[3] * fc;
    for (int i = 0; i < 7; ++i) {
        const double dx = h * GK15::nodes[i];
        const double fsum = f(c - dx) + f(c + dx);
        resk += GK15::wk[i] * fsum;
        if (i % 2 == 1) resg += GK15::wg[i / 2] * fsum;
    }
    value = resk * h;
    const double diff = std::abs(resk - resg) * h;
    // QUADPACK-style sharpened estimate of the Kronrod error
    error = diff * std::min(1.0, std::pow(200.0 * diff / std::max(std::abs(value), 1e-300), 1.5));
    if (!std::isfinite(error)) error = diff;
}

}  // namespace detail

struct QuadratureResult {
    double value = 0.0;
    double error_bound = 0.0;
    int evaluations = 0;
};

// Globally adaptive Gauss-Kronrod integration on [a, b]: repeatedly bisects
// the interval with the largest error estimate until the summed bound drops
// below rel_tol * |integral| + abs_tol. Interior breakpoints seed the
// initial subdivision so that a peak far from the interval midpoint is
// sampled before adaptivity starts. Throws AccuracyError carrying the best
// estimate when the subdivision budget runs out.
template <typename F>
QuadratureResult integrate(const F& f, double a, double b, double rel_tol, double abs_tol = 0.0,
                           std::vector<double> breakpoints = {}, int max_intervals = 4096) {
    struct Panel {
        double a, b, value, error;
        bool operator<(const Panel& o) const { return error < o.error; }
    };
    if (!(a < b)) throw std::invalid_argument("integrate: need a < b");

    std::priority_queue<Panel> heap;
    int evals = 0;
    auto push = [&](double lo, double hi) {
        Panel p{lo, hi, 0.0, 0.0};
        detail::gk15_panel(f, lo, hi, p.value, p.error);
        evals += 15;
        heap.push(p);
        return p;
    };

    breakpoints.push_back(a);
    breakpoints.push_back(b);
    std::sort(breakpoints.begin(), breakpoints.end());
    std::vector<double> cuts;
    for (double c : breakpoints)
        if (c >= a && c <= b && (cuts.empty() || c > cuts.back())) cuts.push_back(c);
    // halve each seed segment, and keep halving the widest until 8 panels exist
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        double mid = 0.5 * (cuts[i] + cuts[i + 1]);
        push(cuts[i], mid);
        push(mid, cuts[i + 1]);
    }
    while (heap.size() < 8) {
        std::vector<Panel> all;
        while (!heap.empty()) {
            all.push_back(heap.top());
            heap.pop();
        }
        auto widest = std::max_element(all.begin(), all.end(),
                                       [](const Panel& x, const Panel& y) { return x.b - x.a < y.b - y.a; });
        double lo = widest->a, hi = widest->b;
        all.erase(widest);
        for (const Panel& p : all) heap.push(p);
        push(lo, 0.5 * (lo + hi));
        push(0.5 * (lo + hi), hi);
    }

    auto totals = [&heap]() {
        std::priority_queue<Panel> copy = heap;
        double sum = 0.0, err = 0.0;
        while (!copy.empty()) {
            sum += copy.top().value;
            err += copy.top().error;
            copy.pop();
        }
        return std::pair{sum, err};
    };

    const double abs_floor = std::max(abs_tol, 1e-300);
    double total, total_err;
    std::tie(total, total_err) = totals();
    int count = static_cast<int>(heap.size());
    int since_refresh = 0;
    while (total_err > std::max(rel_tol * std::abs(total), abs_floor) && count < max_intervals) {
        Panel top = heap.top();
        heap.pop();
        const double mid = 0.5 * (top.a + top.b);
        if (mid <= top.a || mid >= top.b) {  // at floating-point resolution
            heap.push(top);
            break;
        }
        total -= top.value;
        total_err -= top.error;
        Panel left = push(top.a, mid);
        Panel right = push(mid, top.b);
        total += left.value + right.value;
        total_err += left.error + right.error;
        ++count;
        // incremental bookkeeping accumulates rounding drift; refresh periodically
        if (++since_refresh >= 32 || total_err <= std::max(rel_tol * std::abs(total), abs_floor)) {
            std::tie(total, total_err) = totals();
            since_refresh = 0;
        }
    }

    std::tie(total, total_err) = totals();
    if (total_err > std::max(rel_tol * std::abs(total), abs_floor) && count >= max_intervals)
        throw AccuracyError(total, total_err);
    return {total, total_err, evals};
}

}  // namespace rkq
