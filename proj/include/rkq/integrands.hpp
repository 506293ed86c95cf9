#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>

#include "rkq/embedding.hpp"
#include "rkq/measure.hpp"
#include "rkq/quadrature.hpp"

namespace rkq {

// Benchmark integrands with known (or independently computed) integrals.
//  F1:         sqrt(3) e^{-x^2} + sin(2 pi x)/(1+x^2)   against N(0,1)
//  F2:         1 + sin(2 pi x)                          against t_5
//  F2Changed:  F2(x) t_5(x)/t_4.49(x)                   against t_4.49
enum class IntegrandId { F1, F2, F2Changed };

inline constexpr double kChangeOfMeasureNu = 5.0;
// nu - d/2 - eps with nu = 5, d = 1, eps = 0.01
inline constexpr double kChangeOfMeasureNuProposal = 4.49;

struct Integrand {
    IntegrandId id = IntegrandId::F1;
    std::function<double(double)> eval;
    Measure target_measure = Measure::gaussian(0.0, 1.0);
};

inline double evaluate_f1(double x) {
    return std::numbers::sqrt3 * std::exp(-x * x) + std::sin(2.0 * std::numbers::pi * x) / (1.0 + x * x);
}

inline double evaluate_f2(double x) { return 1.0 + std::sin(2.0 * std::numbers::pi * x); }

inline Integrand make_integrand(IntegrandId id) {
    Integrand f;
    f.id = id;
    switch (id) {
        case IntegrandId::F1:
            f.eval = evaluate_f1;
            f.target_measure = Measure::gaussian(0.0, 1.0);
            break;
        case IntegrandId::F2:
            f.eval = evaluate_f2;
            f.target_measure = Measure::student_t(kChangeOfMeasureNu, 1.0);
            break;
        case IntegrandId::F2Changed:
            f.eval = change_of_measure(evaluate_f2, kChangeOfMeasureNu, kChangeOfMeasureNuProposal);
            f.target_measure = Measure::student_t(kChangeOfMeasureNuProposal, 1.0);
            break;
    }
    return f;
}

inline double evaluate(const Integrand& f, double x) {
    if (!std::isfinite(x)) throw std::invalid_argument("evaluate: non-finite input");
    return f.eval(x);
}

namespace detail {

// F1's ground truth is computed once by quadrature rather than trusted from
// hand algebra; the tail cut keeps the discarded mass below 1e-14.
inline double f1_true_integral() {
    static const double value = [] {
        Measure g = Measure::gaussian(0.0, 1.0);
        auto integrand = [&g](double x) { return evaluate_f1(x) * density(g, x); };
        double half = tail_halfwidth(g, 1e-15);
        return integrate(integrand, -half, half, 1e-12, 0.0, {0.0}).value;
    }();
    return value;
}

}  // namespace detail

// Ground-truth integral of the integrand against its target measure. F2 and
// F2Changed integrate to exactly 1 (sin is odd under the symmetric t
// densities and the change of measure preserves the value).
inline double true_integral(const Integrand& f) {
    switch (f.id) {
        case IntegrandId::F1:
            return detail::f1_true_integral();
        case IntegrandId::F2:
        case IntegrandId::F2Changed:
            return 1.0;
    }
    throw std::logic_error("true_integral: unknown integrand");
}

}  // namespace rkq
