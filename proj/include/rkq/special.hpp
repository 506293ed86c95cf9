#pragma once

#include <cmath>
#include <numbers>

namespace rkq {

// Scaled complementary error function erfcx(x) = exp(x^2) erfc(x).
// For moderate x the direct product is exact to within the rounding of
// x*x; past the erfc underflow region the asymptotic expansion takes over.
inline double erfcx(double x) {
    if (x < 0.0) return 2.0 * std::exp(x * x) - erfcx(-x);
    if (x < 26.0) return std::exp(x * x) * std::erfc(x);
    // erfcx(x) ~ (1/(x sqrt(pi))) * sum_k (-1)^k (2k-1)!! / (2x^2)^k
    const double inv2x2 = 1.0 / (2.0 * x * x);
    double term = 1.0, sum = 1.0;
    for (int k = 1; k <= 6; ++k) {
        term *= -(2.0 * k - 1.0) * inv2x2;
        sum += term;
    }
    return sum * std::numbers::inv_sqrtpi / x;
}

// Kahan-Neumaier compensated accumulator for sums whose terms span many
// orders of magnitude.
class CompensatedSum {
public:
    void add(double v) {
        double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v))
            comp_ += (sum_ - t) + v;
        else
            comp_ += (v - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

}  // namespace rkq
