#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "ducs/errors.hpp"
#include "ducs/numerics.hpp"
#include "ducs/rng.hpp"

using namespace ducs;

namespace {

// Independent oracles. The production code shifts to 6 and uses a 6-term
// Bernoulli tail; these shift far higher and truncate earlier, so agreement
// is a genuine cross-check rather than the same arithmetic twice.
double digamma_oracle(double x) {
    double shift = 0.0;
    while (x < 64.0) {
        shift -= 1.0 / x;
        x += 1.0;
    }
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    return shift + std::log(x) - 0.5 * inv -
           inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 / 252.0));
}

double trigamma_oracle(double x) {
    double shift = 0.0;
    while (x < 64.0) {
        shift += 1.0 / (x * x);
        x += 1.0;
    }
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    return shift + inv + 0.5 * inv2 +
           inv * inv2 * (1.0 / 6.0 - inv2 * (1.0 / 30.0 - inv2 / 42.0));
}

double two_pass_variance(const std::vector<double>& values, std::size_t start,
                         std::size_t k) {
    double mean = 0.0;
    for (std::size_t i = 0; i < k; ++i) mean += values[start + i];
    mean /= static_cast<double>(k);
    double sum_sq = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        const double d = values[start + i] - mean;
        sum_sq += d * d;
    }
    return sum_sq / static_cast<double>(k);
}

double log_uniform(PhiloxRng& rng, double lo, double hi) {
    return lo * std::pow(hi / lo, rng.next_double());
}

} // namespace

TEST_CASE("digamma defining values") {
    CHECK(std::abs(numerics::digamma(1.0) + 0.5772156649015328606) < 1e-12);
    CHECK(std::abs(numerics::digamma(2.0) - numerics::digamma(1.0) - 1.0) < 1e-12);
    // frozen from the shift-64 oracle
    CHECK(std::abs(numerics::digamma(11.0) - 2.3517525890667211076) < 1e-10);
    CHECK(std::abs(numerics::digamma(11.0) - digamma_oracle(11.0)) < 1e-10);
    CHECK(std::abs(numerics::digamma(0.5) + 1.9635100260214234794) < 1e-10);
}

TEST_CASE("digamma matches the oracle across the domain") {
    PhiloxRng rng(101, 0);
    for (int i = 0; i < 1000; ++i) {
        const double x = log_uniform(rng, 1e-3, 1e6);
        CHECK(std::abs(numerics::digamma(x) - digamma_oracle(x)) < 1e-10);
    }
}

TEST_CASE("digamma recurrence property") {
    PhiloxRng rng(102, 0);
    for (int i = 0; i < 1000; ++i) {
        const double x = log_uniform(rng, 1e-3, 1e6);
        const double residual =
            numerics::digamma(x + 1.0) - numerics::digamma(x) - 1.0 / x;
        CHECK(std::abs(residual) < 1e-12);
    }
}

TEST_CASE("digamma rejects the nonpositive axis") {
    CHECK_THROWS_AS((void)numerics::digamma(0.0), NumericError);
    CHECK_THROWS_AS((void)numerics::digamma(-3.5), NumericError);
    CHECK_THROWS_AS((void)numerics::trigamma(0.0), NumericError);
    CHECK_THROWS_AS((void)numerics::trigamma(-1.0), NumericError);
    CHECK_THROWS_AS((void)numerics::log_gamma(0.0), NumericError);
    CHECK_THROWS_AS((void)numerics::log_gamma(-2.0), NumericError);
}

TEST_CASE("trigamma closed forms and identities") {
    CHECK(std::abs(numerics::trigamma(1.0) - std::numbers::pi * std::numbers::pi / 6.0) <
          1e-9);
    for (const double x : {0.5, 3.0, 20.0}) {
        const double residual =
            numerics::trigamma(x) - numerics::trigamma(x + 1.0) - 1.0 / (x * x);
        CHECK(std::abs(residual) < 1e-10);
    }
    // frozen from the shift-64 oracle
    CHECK(std::abs(numerics::trigamma(7.3) - 0.14679576813142709816) < 1e-9);
}

TEST_CASE("trigamma agrees with a digamma finite difference") {
    const double h = 1e-5;
    const double fd =
        (numerics::digamma(7.3 + h) - numerics::digamma(7.3 - h)) / (2.0 * h);
    CHECK(std::abs(numerics::trigamma(7.3) - fd) < 1e-5);
}

TEST_CASE("trigamma is strictly positive") {
    PhiloxRng rng(103, 0);
    for (int i = 0; i < 1000; ++i) {
        const double x = log_uniform(rng, 1e-3, 1e6);
        CHECK(numerics::trigamma(x) > 0.0);
    }
}

TEST_CASE("log_gamma closed forms") {
    CHECK(std::abs(numerics::log_gamma(1.0)) < 1e-14);
    CHECK(std::abs(numerics::log_gamma(5.0) - std::log(24.0)) < 1e-12);
    CHECK(std::abs(numerics::log_gamma(0.5) - 0.5723649429247000871) < 1e-10);
}

TEST_CASE("log_gamma is convex") {
    PhiloxRng rng(104, 0);
    for (int i = 0; i < 500; ++i) {
        const double a = log_uniform(rng, 1e-3, 1e3);
        const double b = log_uniform(rng, 1e-3, 1e3);
        const double mid = numerics::log_gamma(0.5 * (a + b));
        const double chord = 0.5 * (numerics::log_gamma(a) + numerics::log_gamma(b));
        CHECK(mid <= chord + 1e-12);
    }
}

TEST_CASE("window_variance basics") {
    const std::vector<double> constant{1.0, 1.0, 1.0};
    CHECK(numerics::window_variance(std::span<const double>(constant), 0, 3) == 0.0);
    const std::vector<double> ramp{2.0, 4.0, 6.0};
    CHECK(std::abs(numerics::window_variance(std::span<const double>(ramp), 0, 3) -
                   8.0 / 3.0) < 1e-12);
}

TEST_CASE("window_variance matches the two-pass oracle") {
    PhiloxRng rng(105, 0);
    std::vector<double> values(50);
    for (double& v : values) v = rng.next_double() * 100.0 - 50.0;
    for (std::size_t start = 0; start < 40; start += 7) {
        for (std::size_t k = 1; start + k <= values.size(); k += 3) {
            const double got =
                numerics::window_variance(std::span<const double>(values), start, k);
            CHECK(std::abs(got - two_pass_variance(values, start, k)) < 1e-9);
            CHECK(got >= 0.0);
        }
    }
}

TEST_CASE("window_variance is shift invariant") {
    PhiloxRng rng(106, 0);
    std::vector<double> values(30);
    for (double& v : values) v = rng.next_double() * 10.0;
    std::vector<double> shifted = values;
    for (double& v : shifted) v += 1234.5;
    const double a = numerics::window_variance(std::span<const double>(values), 5, 20);
    const double b = numerics::window_variance(std::span<const double>(shifted), 5, 20);
    CHECK(std::abs(a - b) < 1e-9);
}

TEST_CASE("window_variance rejects bad windows") {
    const std::vector<double> values{1.0, 2.0, 3.0};
    CHECK_THROWS_AS(
        (void)numerics::window_variance(std::span<const double>(values), 0, 0),
        NumericError);
    CHECK_THROWS_AS(
        (void)numerics::window_variance(std::span<const double>(values), 2, 2),
        NumericError);
    CHECK_THROWS_AS(
        (void)numerics::window_variance(std::span<const double>(values), 4, 1),
        NumericError);
}

TEST_CASE("fd_gradient on a quadratic and a constant") {
    const auto square = [](const std::vector<double>& x) {
        double sum = 0.0;
        for (const double v : x) sum += v * v;
        return sum;
    };
    const std::vector<double> grad =
        numerics::fd_gradient(square, {1.0, 2.0}, 1e-5);
    CHECK(std::abs(grad[0] - 2.0) < 1e-6);
    CHECK(std::abs(grad[1] - 4.0) < 1e-6);

    const auto constant = [](const std::vector<double>&) { return 3.5; };
    for (const double g : numerics::fd_gradient(constant, {0.1, -0.2, 7.0}, 1e-5)) {
        CHECK(g == 0.0);
    }
}
