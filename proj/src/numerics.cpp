#include "ducs/numerics.hpp"

#include <cmath>
#include <string>

#include "ducs/errors.hpp"

namespace ducs::numerics {

namespace {

void check_positive(double x, const char* name) {
    if (!std::isfinite(x) || x <= 0.0) {
        throw NumericError(std::string(name) + " requires x > 0, got " +
                           std::to_string(x));
    }
}

// Bernoulli-number coefficients B_{2k}/(2k) for the psi series and B_{2k}
// for the psi' series, k = 1..6.
constexpr double kPsiCoeff[6] = {
    1.0 / 12.0,   -1.0 / 120.0,  1.0 / 252.0,
    -1.0 / 240.0, 1.0 / 132.0,   -691.0 / 32760.0,
};
constexpr double kTriCoeff[6] = {
    1.0 / 6.0,   -1.0 / 30.0, 1.0 / 42.0,
    -1.0 / 30.0, 5.0 / 66.0,  -691.0 / 2730.0,
};

constexpr double kAsymptoticCutoff = 6.0;

} // namespace

double digamma(double x) {
    check_positive(x, "digamma");
    // psi(x) = psi(x+1) - 1/x lifts the argument into the asymptotic regime.
    double shift = 0.0;
    while (x < kAsymptoticCutoff) {
        shift -= 1.0 / x;
        x += 1.0;
    }
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    double series = 0.0;
    double power = inv2;
    for (const double coeff : kPsiCoeff) {
        series += coeff * power;
        power *= inv2;
    }
    return shift + std::log(x) - 0.5 * inv - series;
}

double trigamma(double x) {
    check_positive(x, "trigamma");
    // psi'(x) = psi'(x+1) + 1/x^2.
    double shift = 0.0;
    while (x < kAsymptoticCutoff) {
        shift += 1.0 / (x * x);
        x += 1.0;
    }
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    double series = 0.0;
    double power = inv * inv2;
    for (const double coeff : kTriCoeff) {
        series += coeff * power;
        power *= inv2;
    }
    return shift + inv + 0.5 * inv2 + series;
}

double log_gamma(double x) {
    check_positive(x, "log_gamma");
    return std::lgamma(x);
}

namespace {

template <class T>
double window_variance_impl(std::span<const T> values, std::size_t start,
                            std::size_t k) {
    if (k == 0) throw NumericError("window_variance: window length is zero");
    if (start > values.size() || k > values.size() - start) {
        throw NumericError("window_variance: window [" + std::to_string(start) +
                           ", " + std::to_string(start + k) +
                           ") exceeds sequence length " +
                           std::to_string(values.size()));
    }
    // Welford's online update; the two-pass form serves as the test oracle.
    double mean = 0.0;
    double m2 = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        const double value = static_cast<double>(values[start + i]);
        const double delta = value - mean;
        mean += delta / static_cast<double>(i + 1);
        m2 += delta * (value - mean);
    }
    return m2 / static_cast<double>(k);
}

} // namespace

double window_variance(std::span<const double> values, std::size_t start,
                       std::size_t k) {
    return window_variance_impl(values, start, k);
}

double window_variance(std::span<const float> values, std::size_t start,
                       std::size_t k) {
    return window_variance_impl(values, start, k);
}

std::vector<double> fd_gradient(
    const std::function<double(const std::vector<double>&)>& f,
    const std::vector<double>& x, double h) {
    std::vector<double> grad(x.size());
    std::vector<double> probe = x;
    for (std::size_t j = 0; j < x.size(); ++j) {
        probe[j] = x[j] + h;
        const double plus = f(probe);
        probe[j] = x[j] - h;
        const double minus = f(probe);
        probe[j] = x[j];
        grad[j] = (plus - minus) / (2.0 * h);
    }
    return grad;
}

} // namespace ducs::numerics
