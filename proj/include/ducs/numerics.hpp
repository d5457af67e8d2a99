#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace ducs::numerics {

/// Digamma psi(x) for x > 0. Upward recurrence lifts the argument above 6,
/// then a 6-term Bernoulli asymptotic series applies. Absolute error is
/// below 1e-10 for x >= 1e-3. Throws NumericError for x <= 0 or non-finite x.
double digamma(double x);

/// Trigamma psi'(x) for x > 0, same recurrence/asymptotic scheme.
/// Absolute error below 1e-9 for x >= 1e-3. Throws NumericError for x <= 0.
double trigamma(double x);

/// ln Gamma(x) for x > 0. Throws NumericError for x <= 0.
double log_gamma(double x);

/// Population variance (divide by k) of values[start .. start+k-1].
/// Throws NumericError when k == 0 or the window leaves the sequence.
double window_variance(std::span<const double> values, std::size_t start, std::size_t k);
double window_variance(std::span<const float> values, std::size_t start, std::size_t k);

/// Central-difference gradient (f(x+h e_j) - f(x-h e_j)) / 2h per coordinate.
/// The gradient-check oracle for every analytic gradient in this project.
std::vector<double> fd_gradient(
    const std::function<double(const std::vector<double>&)>& f,
    const std::vector<double>& x, double h);

} // namespace ducs::numerics
