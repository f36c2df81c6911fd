#pragma once
// Adaptive Gauss-Kronrod (G7,K15) quadrature plus small fixed rules.

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

namespace speclab {

struct QuadResult {
  double value = 0.0;
  double error = 0.0;  // accumulated error estimate
  std::size_t evals = 0;
};

namespace detail {
// K15 nodes (positive half) and weights; G7 weights on the shared nodes.
inline constexpr double k15_x[8] = {
    0.0,
    0.2077849550078984676006894037732449,
    0.4058451513773971669066064120769615,
    0.5860872354676911302941448382587296,
    0.7415311855993944398638647732807884,
    0.8648644233597690727897127886409262,
    0.9491079123427585245261896840478513,
    0.9914553711208126392068546975263285};
inline constexpr double k15_w[8] = {
    0.2094821410847278280129991748917143,
    0.2044329400752988924141619992346491,
    0.1903505780647854099132564024210137,
    0.1690047266392679028265834265985503,
    0.1406532597155259187451895905102379,
    0.1047900103222501838398763225415180,
    0.0630920926299785532907006631892043,
    0.0229353220105292249637320080589696};
inline constexpr double g7_w[4] = {
    0.4179591836734693877551020408163265,
    0.3818300505051189449503697754889751,
    0.2797053914892766679014677714237796,
    0.1294849661688696932706114326790820};

template <class F>
inline void gk15(const F& f, double a, double b, double& val, double& err) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double fk = 0.0, fg = 0.0;
  double f0 = f(c);
  fk += k15_w[0] * f0;
  for (int i = 1; i < 8; ++i) {
    double fx = f(c - h * k15_x[i]) + f(c + h * k15_x[i]);
    fk += k15_w[i] * fx;
    if (i % 2 == 0) fg += g7_w[i / 2] * fx;
  }
  fg += g7_w[0] * f0;
  val = fk * h;
  double diff = std::fabs(fk - fg) * std::fabs(h);
  // standard QUADPACK-style sharpening of the difference estimate
  err = diff;
  if (diff > 0.0 && std::fabs(val) > 0.0) {
    double scaled = std::pow(200.0 * diff / std::fabs(val), 1.5) * std::fabs(val);
    if (scaled < diff) err = scaled;
  }
}
}  // namespace detail

// Adaptive bisection on [a,b]; stops when the summed error estimate is
// below max(tol_abs, tol_rel * |integral|).
template <class F>
QuadResult integrate(const F& f, double a, double b, double tol_rel = 1e-10,
                     double tol_abs = 0.0, int max_depth = 50) {
  struct Seg {
    double a, b, val, err;
    int depth;
  };
  QuadResult out;
  double v, e;
  detail::gk15(f, a, b, v, e);
  out.evals = 15;
  std::vector<Seg> segs{{a, b, v, e, 0}};
  double total = v, toterr = e;
  for (std::size_t pass = 0; pass < 4000; ++pass) {
    if (toterr <= std::max(tol_abs, tol_rel * std::fabs(total))) break;
    std::size_t worst = 0;
    for (std::size_t i = 1; i < segs.size(); ++i)
      if (segs[i].err > segs[worst].err) worst = i;
    Seg s = segs[worst];
    if (s.depth >= max_depth) break;
    double m = 0.5 * (s.a + s.b);
    double v1, e1, v2, e2;
    detail::gk15(f, s.a, m, v1, e1);
    detail::gk15(f, m, s.b, v2, e2);
    out.evals += 30;
    total += v1 + v2 - s.val;
    toterr += e1 + e2 - s.err;
    segs[worst] = {s.a, m, v1, e1, s.depth + 1};
    segs.push_back({m, s.b, v2, e2, s.depth + 1});
  }
  out.value = total;
  out.error = toterr;
  return out;
}

// Integrate over a list of breakpoints (piecewise-smooth integrands).
template <class F>
QuadResult integrate_segmented(const F& f, const std::vector<double>& pts,
                               double tol_rel = 1e-10, double tol_abs = 0.0) {
  QuadResult out;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    if (!(pts[i + 1] > pts[i])) continue;
    QuadResult r = integrate(f, pts[i], pts[i + 1], tol_rel, tol_abs);
    out.value += r.value;
    out.error += r.error;
    out.evals += r.evals;
  }
  return out;
}

// \int_a^\infty f, via x = a + u/(1-u).
template <class F>
QuadResult integrate_to_infinity(const F& f, double a, double tol_rel = 1e-10,
                                 double tol_abs = 0.0) {
  auto g = [&](double u) {
    double w = 1.0 - u;
    double x = a + u / w;
    return f(x) / (w * w);
  };
  return integrate(g, 0.0, 1.0 - 1e-14, tol_rel, tol_abs);
}

// 4-point Gauss-Legendre on [a,b] (used for element integrals).
struct GL4 {
  static constexpr double x[4] = {-0.8611363115940526, -0.3399810435848563,
                                  0.3399810435848563, 0.8611363115940526};
  static constexpr double w[4] = {0.3478548451374538, 0.6521451548625461,
                                  0.6521451548625461, 0.3478548451374538};
  template <class F>
  static double apply(const F& f, double a, double b) {
    double c = 0.5 * (a + b), h = 0.5 * (b - a), s = 0.0;
    for (int i = 0; i < 4; ++i) s += w[i] * f(c + h * x[i]);
    return s * h;
  }
};

}  // namespace speclab
