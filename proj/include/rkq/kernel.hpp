#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "rkq/errors.hpp"

namespace rkq {

enum class KernelVariant { RBF, Matern32 };

// Stationary covariance function: amplitude sigma_f2, lengthscale ell.
struct Kernel {
    KernelVariant variant = KernelVariant::RBF;
    double sigma_f2 = 1.0;
    double ell = 1.0;

    static Kernel rbf(double sigma_f2, double ell) { return make(KernelVariant::RBF, sigma_f2, ell); }
    static Kernel matern32(double sigma_f2, double ell) { return make(KernelVariant::Matern32, sigma_f2, ell); }

    static Kernel make(KernelVariant v, double sigma_f2, double ell) {
        if (!(sigma_f2 > 0.0) || !std::isfinite(sigma_f2))
            throw std::invalid_argument("Kernel: sigma_f2 must be positive and finite");
        if (!(ell > 0.0) || !std::isfinite(ell))
            throw std::invalid_argument("Kernel: ell must be positive and finite");
        return Kernel{v, sigma_f2, ell};
    }
};

// Correlation at distance r, i.e. k(r) / sigma_f2.
inline double kernel_correlation(const Kernel& k, double r) {
    switch (k.variant) {
        case KernelVariant::RBF: {
            double z = r / k.ell;
            return std::exp(-0.5 * z * z);
        }
        case KernelVariant::Matern32: {
            double a = std::numbers::sqrt3 * r / k.ell;
            return (1.0 + a) * std::exp(-a);
        }
    }
    return 0.0;  // unreachable
}

inline double kernel_eval_dist(const Kernel& k, double r) { return k.sigma_f2 * kernel_correlation(k, r); }

inline double kernel_eval(const Kernel& k, std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("kernel_eval: dimension mismatch");
    double r2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i]) || !std::isfinite(y[i]))
            throw std::invalid_argument("kernel_eval: non-finite input");
        double d = x[i] - y[i];
        r2 += d * d;
    }
    return kernel_eval_dist(k, std::sqrt(r2));
}

inline double kernel_eval(const Kernel& k, double x, double y) {
    if (!std::isfinite(x) || !std::isfinite(y)) throw std::invalid_argument("kernel_eval: non-finite input");
    return kernel_eval_dist(k, std::abs(x - y));
}

// n points in R^d stored row-contiguously.
class PointSet {
public:
    PointSet() = default;
    PointSet(std::vector<double> data, std::size_t dim) : data_(std::move(data)), dim_(dim) {
        if (dim_ == 0 || data_.size() % dim_ != 0)
            throw std::invalid_argument("PointSet: data size not divisible by dimension");
    }
    static PointSet from_1d(std::vector<double> xs) { return PointSet(std::move(xs), 1); }

    std::size_t size() const { return dim_ ? data_.size() / dim_ : 0; }
    std::size_t dim() const { return dim_; }
    std::span<const double> operator[](std::size_t i) const { return {data_.data() + i * dim_, dim_}; }

private:
    std::vector<double> data_;
    std::size_t dim_ = 1;
};

inline constexpr double kDefaultNugget = 1e-8;

// Gram matrix K_ij = k(x_i, x_j) + nugget * 1{i=j} together with its lower
// Cholesky factor. Row-major dense storage; factorization is unpivoted and
// failure is reported, not repaired.
class GramSystem {
public:
    GramSystem(const Kernel& k, PointSet points, double nugget) : points_(std::move(points)), nugget_(nugget) {
        if (points_.size() == 0) throw std::invalid_argument("GramSystem: need at least one point");
        if (nugget_ < 0.0) throw std::invalid_argument("GramSystem: nugget must be non-negative");
        n_ = points_.size();
        matrix_.resize(n_ * n_);
        for (std::size_t i = 0; i < n_; ++i) {
            matrix_[i * n_ + i] = k.sigma_f2 + nugget_;
            for (std::size_t j = 0; j < i; ++j) {
                double v = kernel_eval(k, points_[i], points_[j]);
                matrix_[i * n_ + j] = v;
                matrix_[j * n_ + i] = v;
            }
        }
        factorize();
    }

    std::size_t size() const { return n_; }
    double nugget() const { return nugget_; }
    const PointSet& points() const { return points_; }
    double matrix_at(std::size_t i, std::size_t j) const { return matrix_[i * n_ + j]; }
    double factor_at(std::size_t i, std::size_t j) const { return factor_[i * n_ + j]; }

    // K^{-1} rhs via the two triangular solves.
    std::vector<double> solve(std::span<const double> rhs) const {
        if (rhs.size() != n_) throw std::invalid_argument("spd_solve: rhs length mismatch");
        std::vector<double> y(rhs.begin(), rhs.end());
        for (std::size_t i = 0; i < n_; ++i) {
            double s = y[i];
            const double* Li = factor_.data() + i * n_;
            for (std::size_t j = 0; j < i; ++j) s -= Li[j] * y[j];
            y[i] = s / Li[i];
        }
        for (std::size_t i = n_; i-- > 0;) {
            double s = y[i];
            for (std::size_t j = i + 1; j < n_; ++j) s -= factor_[j * n_ + i] * y[j];
            y[i] = s / factor_[i * n_ + i];
        }
        return y;
    }

    // L^{-1} rhs only; ||L^{-1} rhs||^2 = rhs^T K^{-1} rhs.
    std::vector<double> half_solve(std::span<const double> rhs) const {
        if (rhs.size() != n_) throw std::invalid_argument("half_solve: rhs length mismatch");
        std::vector<double> y(rhs.begin(), rhs.end());
        for (std::size_t i = 0; i < n_; ++i) {
            double s = y[i];
            const double* Li = factor_.data() + i * n_;
            for (std::size_t j = 0; j < i; ++j) s -= Li[j] * y[j];
            y[i] = s / Li[i];
        }
        return y;
    }

    std::vector<double> multiply(std::span<const double> v) const {
        if (v.size() != n_) throw std::invalid_argument("multiply: length mismatch");
        std::vector<double> out(n_, 0.0);
        for (std::size_t i = 0; i < n_; ++i) {
            const double* row = matrix_.data() + i * n_;
            double s = 0.0;
            for (std::size_t j = 0; j < n_; ++j) s += row[j] * v[j];
            out[i] = s;
        }
        return out;
    }

    double log_det() const {
        double s = 0.0;
        for (std::size_t i = 0; i < n_; ++i) s += std::log(factor_[i * n_ + i]);
        return 2.0 * s;
    }

private:
    void factorize() {
        factor_.assign(n_ * n_, 0.0);
        for (std::size_t i = 0; i < n_; ++i) {
            double* Li = factor_.data() + i * n_;
            for (std::size_t j = 0; j <= i; ++j) {
                const double* Lj = factor_.data() + j * n_;
                double s = matrix_[i * n_ + j];
                for (std::size_t p = 0; p < j; ++p) s -= Li[p] * Lj[p];
                if (i == j) {
                    if (!(s > 0.0)) throw FactorizationError(j, s);
                    Li[j] = std::sqrt(s);
                } else {
                    Li[j] = s / Lj[j];
                }
            }
        }
    }

    PointSet points_;
    double nugget_ = 0.0;
    std::size_t n_ = 0;
    std::vector<double> matrix_;
    std::vector<double> factor_;
};

inline GramSystem gram_matrix(const Kernel& k, const PointSet& points, double nugget = kDefaultNugget) {
    return GramSystem(k, points, nugget);
}

inline GramSystem gram_matrix(const Kernel& k, std::vector<double> points_1d, double nugget = kDefaultNugget) {
    return GramSystem(k, PointSet::from_1d(std::move(points_1d)), nugget);
}

inline std::vector<double> spd_solve(const GramSystem& g, std::span<const double> rhs) { return g.solve(rhs); }

inline double log_det(const GramSystem& g) { return g.log_det(); }

}  // namespace rkq
