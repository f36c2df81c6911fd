#pragma once
// Independent shooting-method oracle for the m = 0 radial problem
//   u'' + (f'/f) u' + lambda u = 0
// on a closed profile with a conic tip at 0 and a smooth pole at R_top.
// On the exact conic part f = gamma r the regular solution is J_0(sqrt(l) r),
// so the left shot starts analytically at r = 2; the right shot starts from
// the regular pole expansion u = 1 - l s^2/4.  Eigenvalues are roots of the
// Wronskian mismatch at a matching point, found by bisection.  This path
// shares nothing with the FEM discretization.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "speclab/geometry.hpp"

namespace speclab_test {

struct ShootState {
  double u, du;
};

inline ShootState rk4_integrate(const speclab::Profile& p, double lambda, double r0, double r1,
                                ShootState y, double h) {
  auto rhs = [&](double r, const ShootState& s) {
    speclab::FDeriv v = p.eval(r);
    return ShootState{s.du, -(v.df / v.f) * s.du - lambda * s.u};
  };
  int n = int(std::ceil(std::abs(r1 - r0) / h));
  double step = (r1 - r0) / n;
  double r = r0;
  for (int i = 0; i < n; ++i) {
    ShootState k1 = rhs(r, y);
    ShootState k2 = rhs(r + step / 2, {y.u + step / 2 * k1.u, y.du + step / 2 * k1.du});
    ShootState k3 = rhs(r + step / 2, {y.u + step / 2 * k2.u, y.du + step / 2 * k2.du});
    ShootState k4 = rhs(r + step, {y.u + step * k3.u, y.du + step * k3.du});
    y.u += step / 6 * (k1.u + 2 * k2.u + 2 * k3.u + k4.u);
    y.du += step / 6 * (k1.du + 2 * k2.du + 2 * k3.du + k4.du);
    r += step;
  }
  return y;
}

// Wronskian mismatch at the matching radius (scaled to avoid overflow)
inline double shoot_mismatch(const speclab::Profile& p, double lambda, double h = 2e-4) {
  double R = p.r_max();
  double rm = 0.5 * (2.0 + R);
  double sl = std::sqrt(std::max(lambda, 1e-300));
  ShootState left{std::cyl_bessel_j(0.0, sl * 2.0), -sl * std::cyl_bessel_j(1.0, sl * 2.0)};
  left = rk4_integrate(p, lambda, 2.0, rm, left, h);
  double delta = 1e-5;
  ShootState right{1.0 - lambda * delta * delta / 4.0, lambda * delta / 2.0};
  right = rk4_integrate(p, lambda, R - delta, rm, right, h);
  double w = left.u * right.du - left.du * right.u;
  double scale = std::sqrt((left.u * left.u + left.du * left.du) *
                           (right.u * right.u + right.du * right.du));
  return w / scale;
}

inline std::vector<double> shoot_eigenvalues(const speclab::Profile& p, double lambda_max,
                                             double grid_step = 0.2) {
  std::vector<double> out;
  double prev_l = 1e-4;
  double prev_w = shoot_mismatch(p, prev_l);
  for (double l = grid_step; l <= lambda_max; l += grid_step) {
    double w = shoot_mismatch(p, l);
    if (prev_w == 0.0 || (prev_w < 0) != (w < 0)) {
      double a = prev_l, b = l;
      for (int it = 0; it < 60; ++it) {
        double m = 0.5 * (a + b);
        double wm = shoot_mismatch(p, m);
        if ((wm < 0) == (prev_w < 0))
          a = m;
        else
          b = m;
      }
      out.push_back(0.5 * (a + b));
    }
    prev_l = l;
    prev_w = w;
  }
  return out;
}

}  // namespace speclab_test
