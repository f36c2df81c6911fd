#pragma once
// Special functions and numeric constants used across the library.

#include <cmath>
#include <limits>
#include <stdexcept>

namespace speclab {

// Laurent data of 1/Gamma(s) = s + A2 s^2 + A3 s^3 + ...
// A2 is the Euler-Mascheroni constant, A3 = gamma^2/2 - pi^2/12.
inline constexpr double euler_gamma = 0.57721566490153286060651209;
inline constexpr double inv_gamma_A2 = euler_gamma;
inline constexpr double inv_gamma_A3 =
    0.57721566490153286060651209 * 0.57721566490153286060651209 / 2.0 -
    9.86960440108935861883449099 / 12.0;

// E1(x) = \int_x^\infty e^{-u}/u du, x > 0.
inline double expint_e1(double x) {
  if (!(x > 0)) throw std::domain_error("expint_e1: x must be positive");
  return -std::expint(-x);
}

// Scaled modified Bessel function e^{-x} I_nu(x), nu >= 0, x >= 0.
//
// Single power-series evaluation centered on its largest term: the terms
//   T_k = e^{-x} (x/2)^{nu+2k} / (k! Gamma(nu+k+1))
// are all positive, and the ratio T_{k+1}/T_k = (x^2/4)/((k+1)(nu+k+1))
// lets us walk outward from the peak term without overflow for any x
// reachable here (the peak term magnitude is handled in log space once).
// Truncation at 1e-18 relative; no cancellation, so accuracy is limited
// only by the ~O(#terms * eps) ratio accumulation, ~1e-13 worst case.
inline double bessel_i_scaled(double nu, double x) {
  if (!(nu >= 0) || !(x >= 0)) throw std::domain_error("bessel_i_scaled: need nu,x >= 0");
  if (x == 0.0) return nu == 0.0 ? 1.0 : 0.0;

  // peak index: (k+1)(nu+k+1) ~ x^2/4
  double u = (-nu + std::sqrt(nu * nu + x * x)) / 2.0;
  long kpeak = static_cast<long>(std::floor(u - 1.0));
  if (kpeak < 0) kpeak = 0;

  double logx2 = std::log(x / 2.0);
  double logTpeak = -x + (nu + 2.0 * kpeak) * logx2 - std::lgamma(double(kpeak) + 1.0) -
                    std::lgamma(nu + double(kpeak) + 1.0);
  if (logTpeak < -745.0) return 0.0;  // entire sum underflows

  const double x24 = x * x / 4.0;
  const double tol = 1e-18;

  double sum = 1.0;  // in units of the peak term
  // upward from the peak
  double t = 1.0;
  for (long k = kpeak;; ++k) {
    t *= x24 / ((double(k) + 1.0) * (nu + double(k) + 1.0));
    sum += t;
    if (t < tol * sum) break;
    if (k > kpeak + 100000) throw std::runtime_error("bessel_i_scaled: series stall (up)");
  }
  // downward from the peak
  t = 1.0;
  for (long k = kpeak; k >= 1; --k) {
    t *= (double(k) * (nu + double(k))) / x24;
    sum += t;
    if (t < tol * sum) break;
  }
  return std::exp(logTpeak) * sum;
}

}  // namespace speclab
