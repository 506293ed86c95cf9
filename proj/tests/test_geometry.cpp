#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "rkq/geometry.hpp"
#include "rkq/rng.hpp"

using namespace rkq;

namespace {

// brute-force grid scan, only trusted up to one grid spacing
double fill_by_grid(const std::vector<double>& pts, double radius, std::size_t grid = 1000000) {
    double h = 0.0;
    for (std::size_t g = 0; g <= grid; ++g) {
        double x = -radius + 2.0 * radius * static_cast<double>(g) / static_cast<double>(grid);
        double best = std::numeric_limits<double>::infinity();
        for (double p : pts) best = std::min(best, std::abs(x - p));
        h = std::max(h, best);
    }
    return h;
}

}  // namespace

TEST_CASE("fill_distance_1d closed cases") {
    CHECK(fill_distance_1d(std::vector<double>{0.0}, 1.0) == Catch::Approx(1.0));
    CHECK(fill_distance_1d(std::vector<double>{-1.0, 0.0, 1.0}, 1.0) == Catch::Approx(0.5));
    // points outside the interval still act as centers; with both centers
    // outside, the farthest interior location is the clamped midpoint
    CHECK(fill_distance_1d(std::vector<double>{-1.2}, 1.0) == Catch::Approx(2.2));
    CHECK(fill_distance_1d(std::vector<double>{-3.0, 3.0}, 1.0) == Catch::Approx(3.0));
    CHECK_THROWS_AS(fill_distance_1d(std::vector<double>{}, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(fill_distance_1d(std::vector<double>{0.0}, 0.0), std::invalid_argument);
}

TEST_CASE("fill_distance_1d agrees with the dense grid scan") {
    SplitMix64 rng(71);
    for (int trial = 0; trial < 6; ++trial) {
        std::size_t n = 5 + (rng.next_u64() % 200);
        double radius = 0.5 + 2.0 * rng.uniform();
        std::vector<double> pts(n);
        for (auto& p : pts) p = 2.5 * (2.0 * rng.uniform() - 1.0);
        double exact = fill_distance_1d(pts, radius);
        std::size_t grid = 200000;
        double scan = fill_by_grid(pts, radius, grid);
        CHECK(std::abs(exact - scan) <= 2.0 * radius / static_cast<double>(grid) + 1e-12);
        CHECK(exact >= scan - 1e-12);  // the scan can only undershoot
        CHECK(exact <= 2.0 * radius);
    }
}

TEST_CASE("uniform points fill the interval at the expected scale") {
    SplitMix64 rng(5);
    std::vector<double> pts(10000);
    for (auto& p : pts) p = 2.0 * rng.uniform() - 1.0;
    double h = fill_distance_1d(pts, 1.0);
    CHECK(h >= 3e-4);
    CHECK(h <= 5e-3);
    double scan = fill_by_grid(pts, 1.0);
    CHECK(std::abs(h - scan) <= 2.0 / 1e6 + 1e-12);
}

TEST_CASE("adding a point never increases the fill distance") {
    SplitMix64 rng(9);
    std::vector<double> pts{0.3};
    double prev = fill_distance_1d(pts, 1.5);
    for (int i = 0; i < 100; ++i) {
        pts.push_back(3.0 * (2.0 * rng.uniform() - 1.0));
        double h = fill_distance_1d(pts, 1.5);
        CHECK(h <= prev + 1e-15);
        prev = h;
    }
}

TEST_CASE("mahalanobis_fraction closed cases") {
    CHECK(mahalanobis_fraction(std::vector<double>{0.0, 0.0, 0.0}, 2.0) == 1.0);
    CHECK(mahalanobis_fraction(std::vector<double>{-2.0, 2.0}, 1.0) == 0.0);
    CHECK(mahalanobis_fraction(std::vector<double>{-1.0, 0.5, 3.0, 0.0}, 1.0) == Catch::Approx(0.75));
    CHECK_THROWS_AS(mahalanobis_fraction(std::vector<double>{}, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(mahalanobis_fraction(std::vector<double>{1.0}, 0.0), std::invalid_argument);
}

TEST_CASE("mahalanobis_fraction of matched draws approaches the normal mass") {
    SplitMix64 rng(13);
    const double sigma2 = 2.3;
    std::vector<double> pts(10000);
    for (auto& p : pts) p = std::sqrt(sigma2) * draw_normal(rng);
    double frac = mahalanobis_fraction(pts, sigma2);
    CHECK(frac == Catch::Approx(0.6826894921370859).margin(0.02));
}

TEST_CASE("concentration bound holds empirically") {
    // event {fraction >= p/2} with p = P(|Z| <= 1); failure probability is
    // at most exp(-p n / 8) plus slack
    const double p = 0.6826894921370859;
    for (std::size_t n : {50UL, 200UL}) {
        SplitMix64 rng(1000 + n);
        std::size_t failures = 0;
        for (int trial = 0; trial < 1000; ++trial) {
            std::size_t inside = 0;
            for (std::size_t i = 0; i < n; ++i)
                if (std::abs(draw_normal(rng)) <= 1.0) ++inside;
            if (static_cast<double>(inside) < 0.5 * p * static_cast<double>(n)) ++failures;
        }
        double bound = std::exp(-p * static_cast<double>(n) / 8.0);
        CHECK(static_cast<double>(failures) / 1000.0 <= bound + 0.015);
    }
}

TEST_CASE("rate_fit recovers exact power laws") {
    std::vector<std::pair<double, double>> pairs;
    for (double n : {10.0, 100.0, 1000.0}) pairs.emplace_back(n, 7.0 * std::pow(n, -1.5));
    RateFit fit = rate_fit(pairs);
    CHECK(fit.slope == Catch::Approx(-1.5).epsilon(1e-12));
    CHECK(fit.intercept == Catch::Approx(std::log(7.0)).epsilon(1e-10));
    CHECK(fit.r_squared == Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("rate_fit on constant values") {
    std::vector<std::pair<double, double>> pairs{{10.0, 3.0}, {20.0, 3.0}, {40.0, 3.0}, {80.0, 3.0}};
    RateFit fit = rate_fit(pairs);
    CHECK(fit.slope == Catch::Approx(0.0).margin(1e-14));
}

TEST_CASE("rate_fit validates input") {
    std::vector<std::pair<double, double>> two{{1.0, 1.0}, {2.0, 0.5}};
    CHECK_THROWS_AS(rate_fit(two), std::invalid_argument);
    std::vector<std::pair<double, double>> neg{{1.0, 1.0}, {2.0, -0.5}, {3.0, 0.2}};
    CHECK_THROWS_AS(rate_fit(neg), std::invalid_argument);
    std::vector<std::pair<double, double>> unsorted{{2.0, 1.0}, {1.0, 0.5}, {3.0, 0.2}};
    CHECK_THROWS_AS(rate_fit(unsorted), std::invalid_argument);
}

TEST_CASE("fill_report carries the inputs") {
    FillReport rep = fill_report(std::vector<double>{0.0, 1.0}, 2.0);
    CHECK(rep.n == 2);
    CHECK(rep.radius == 2.0);
    CHECK(rep.fill >= 0.0);
    CHECK(rep.fill <= 2.0 * rep.radius);
}
