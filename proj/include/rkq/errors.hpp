#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rkq {

// Cholesky pivot loss; carries the index of the offending pivot.
class FactorizationError : public std::runtime_error {
public:
    FactorizationError(std::size_t pivot, double value)
        : std::runtime_error("cholesky factorization failed at pivot " + std::to_string(pivot) +
                             " (value " + std::to_string(value) + ")"),
          pivot_(pivot),
          value_(value) {}
    std::size_t pivot() const noexcept { return pivot_; }
    double pivot_value() const noexcept { return value_; }

private:
    std::size_t pivot_;
    double value_;
};

// Adaptive quadrature ran out of subdivisions; carries the best estimate
// and the error bound it reached.
class AccuracyError : public std::runtime_error {
public:
    AccuracyError(double estimate, double error_bound)
        : std::runtime_error("quadrature did not reach the requested tolerance (estimate " +
                             std::to_string(estimate) + ", bound " + std::to_string(error_bound) + ")"),
          estimate_(estimate),
          error_bound_(error_bound) {}
    double estimate() const noexcept { return estimate_; }
    double error_bound() const noexcept { return error_bound_; }

private:
    double estimate_;
    double error_bound_;
};

// (kernel, measure) pair without a closed-form embedding.
class UnsupportedPairError : public std::invalid_argument {
public:
    explicit UnsupportedPairError(const std::string& what)
        : std::invalid_argument(what + "; use the numeric embedding instead") {}
};

// Raw posterior variance fell below the -1e-8 consistency threshold.
class NumericalConsistencyError : public std::runtime_error {
public:
    explicit NumericalConsistencyError(double raw_variance)
        : std::runtime_error("posterior variance " + std::to_string(raw_variance) +
                             " is negative beyond tolerance; embedding and kernel disagree"),
          raw_variance_(raw_variance) {}
    double raw_variance() const noexcept { return raw_variance_; }

private:
    double raw_variance_;
};

}  // namespace rkq
