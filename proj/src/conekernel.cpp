#include "speclab/conekernel.hpp"

#include <cmath>
#include <stdexcept>

#include "speclab/quadrature.hpp"
#include "speclab/special.hpp"

namespace speclab {

double plane_diag(double t) {
  if (!(t > 0)) throw std::domain_error("plane_diag: t must be positive");
  return 1.0 / (4.0 * M_PI * t);
}

double cone_mode_sum(double x, double gamma) {
  if (!(gamma > 0)) throw std::domain_error("cone_mode_sum: gamma must be positive");
  if (x == 0.0) return 1.0;
  double sum = bessel_i_scaled(0.0, x);
  for (int m = 1;; ++m) {
    double term = bessel_i_scaled(double(m) / gamma, x);
    sum += 2.0 * term;
    if (term < 1e-17 * sum && double(m) / gamma > std::sqrt(x)) break;
    if (m > 300000) throw std::runtime_error("cone_mode_sum: truncation stall");
  }
  return sum;
}

double cone_diag_switch_x(double gamma) {
  // excess/plane ~ e^{-2 sin^2(pi*gamma) x}; demand exponent > 40
  double s2 = std::sin(M_PI * std::min(gamma, 1.0));
  s2 *= s2;
  double x = 20.0 / std::max(s2, 1e-3);
  return std::min(std::max(x, 30.0), 5e4);
}

double cone_diag(double t, double r, double gamma) {
  if (!(t > 0) || !(r > 0)) throw std::domain_error("cone_diag: need t, r > 0");
  double x = r * r / (2.0 * t);
  if (x > cone_diag_switch_x(gamma)) return plane_diag(t);
  return cone_mode_sum(x, gamma) / (4.0 * M_PI * gamma * t);
}

namespace {
// (1/2) \int_{x0}^inf [S(x) - gamma] dx with certified tail
double excess_integral_from(double x0, double gamma) {
  double X = cone_diag_switch_x(gamma);
  if (x0 >= X) return 0.0;
  auto f = [gamma](double x) { return cone_mode_sum(x, gamma) - gamma; };
  QuadResult q = integrate(f, x0, X, 1e-12, 1e-13);
  if (q.error > 1e-8 * std::max(1.0, std::abs(q.value)) + 1e-10)
    throw std::runtime_error("cone excess integral: quadrature non-convergence");
  return 0.5 * q.value;
}
}  // namespace

double cone_trace_excess(double gamma) {
  if (!(gamma > 0)) throw std::domain_error("cone_trace_excess: gamma must be positive");
  if (gamma == 1.0) return 0.0;
  return excess_integral_from(0.0, gamma);
}

double cone_renorm_tail(double tau, double r0, double gamma) {
  if (!(tau > 0) || !(r0 > 0)) throw std::domain_error("cone_renorm_tail: need tau, r0 > 0");
  double x0 = r0 * r0 / (2.0 * tau);
  return excess_integral_from(x0, gamma) - 0.5 * gamma * x0;
}

double u_coefficient(double gamma, int k) {
  if (!(gamma > 0)) throw std::domain_error("u_coefficient: gamma must be positive");
  if (k == 0) return 1.0 / (4.0 * M_PI);
  if (k == 1) return 0.0;  // odd coefficients vanish (no boundary)
  if (k == 2) return 0.0;  // the 2-d cone is flat away from the tip
  throw std::invalid_argument("u_coefficient: unsupported k for n = 2");
}

}  // namespace speclab
