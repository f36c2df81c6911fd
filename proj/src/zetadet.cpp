#include "speclab/zetadet.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "speclab/quadrature.hpp"
#include "speclab/special.hpp"

namespace speclab {

double zeta_long_time(const SpectrumResult& s, const TailBoundCertificate& cert, double T0,
                      double Tmax, double* err_out) {
  if (!(Tmax > T0) || !(T0 > 0)) throw std::invalid_argument("zeta_long_time: bad split");
  auto trace_m1 = [&s](double t) {
    double v = 0.0;
    for (const auto& it : s.eigenvalues)
      if (it.lambda > 1e-6) v += it.multiplicity * std::exp(-it.lambda * t);
    return v;
  };
  QuadResult q = integrate([&](double t) { return trace_m1(t) / t; }, T0, Tmax, 1e-12, 1e-13);
  // analytic closure beyond Tmax, termwise exponential integrals
  double closure = 0.0;
  for (const auto& it : s.eigenvalues)
    if (it.lambda > 1e-6) closure += it.multiplicity * expint_e1(it.lambda * Tmax);
  // spectrum above the cutoff: \int_{T0}^inf tail(t)/t dt bound
  double spec_tail = cert.tail(T0) / (T0 * cert.Cp * double(cert.k_cutoff));
  double err = q.error + spec_tail;
  if (err_out) *err_out = err;
  return q.value + closure;
}

ShortTimeZeta zeta_short_time(const AsymptoticFit& fit,
                              const std::function<double(double)>& trace, double T0,
                              double t_lo, bool project_explicitly) {
  if (!(T0 > 0) || !(t_lo > 0) || !(t_lo < T0))
    throw std::invalid_argument("zeta_short_time: bad window");
  const int n = fit.n;
  const double L0 = std::log(T0);
  const double A2 = inv_gamma_A2, A3 = inv_gamma_A3;

  ShortTimeZeta out;
  // fitted power terms over (0, T0]
  for (std::size_t k = 0; k < fit.a.size(); ++k) {
    double p = (double(k) - n) / 2.0;
    double ak = fit.a[k];
    if (int(k) == n) {
      double an = ak - (project_explicitly ? 0.0 : 1.0);
      out.zeta0 += an;
      out.zeta_prime0 += an * (L0 + A2);
    } else {
      out.zeta_prime0 += ak * std::pow(T0, p) / p;
    }
  }
  if (fit.with_log) {
    double K = fit.K_log;
    out.pole += -K;
    out.zeta0 += -K * A2;
    out.zeta_prime0 += K * (L0 * L0 / 2.0 - A3);
  }
  if (project_explicitly) {
    out.zeta0 -= 1.0;
    out.zeta_prime0 -= (L0 + A2);
  }

  // numeric remainder: trace (or trace-1) minus the fitted model on [t_lo, T0]
  double shift = project_explicitly ? 0.0 : 1.0;
  auto resid = [&](double t) { return (trace(t) - shift - (fit.eval(t) - shift)) / t; };
  QuadResult q = integrate(resid, t_lo, T0, 1e-11, 1e-13);
  out.remainder_integral = q.value;
  out.zeta_prime0 += q.value;

  // below t_lo the remainder is bounded by its next-order extrapolation
  double pnext = (double(fit.a.size()) - n) / 2.0;
  double cmax = 0.0;
  for (int i = 0; i < 8; ++i) {
    double t = t_lo * std::pow(2.0, i * 0.25);
    if (t > fit.t_hi) break;
    cmax = std::max(cmax, std::abs(trace(t) - fit.eval(t)) / std::pow(t, pnext));
  }
  out.remainder_tail_bound = cmax * std::pow(t_lo, pnext) / pnext;

  // sensitivity of the assembled value to fit-coefficient errors: only the
  // (0, t_lo) part survives, since the numeric remainder compensates above
  double sens = 0.0;
  for (std::size_t k = 0; k < fit.a.size(); ++k) {
    double p = (double(k) - n) / 2.0;
    if (int(k) == n)
      sens += fit.a_err[k] * std::abs(A2 + std::log(t_lo));
    else
      sens += fit.a_err[k] * std::abs(std::pow(t_lo, p) / p);
  }
  if (fit.with_log) {
    double lt = std::log(t_lo);
    sens += fit.K_log_err * std::abs(lt * lt / 2.0 - A3);
  }
  out.unc = sens + q.error + out.remainder_tail_bound;
  return out;
}

ZetaResult det_laplacian(const SpectrumResult& s, const MellinConfig& cfg) {
  TailBoundCertificate cert = TailBoundCertificate::build(s);
  const double T0 = cfg.b * cfg.b * cfg.t_split;

  // sample the trace on a log grid; auto window for the fit
  auto trace_fn = [&](double t) { return trace_from_spectrum(s, t, cert).value; };
  double t_hi_fit = std::max(2.0, 1.2 * cfg.t_split);
  std::vector<HeatTraceSample> samples;
  {
    double t = 1e-4;
    while (t < t_hi_fit * (1 + 1e-9)) {
      HeatTraceSample smp = trace_from_spectrum(s, t, cert);
      if (smp.tail_bound < 0.3 * smp.value) samples.push_back(smp);
      t *= std::pow(10.0, 0.05);
    }
  }
  AsymptoticFit fit = fit_short_time(samples, 2, cfg.allow_log, cfg.fit_kmax);

  double long_err = 0.0;
  double longv = zeta_long_time(s, cert, T0, std::max(cfg.long_tmax, 3.0 * T0), &long_err);
  ShortTimeZeta st = zeta_short_time(fit, trace_fn, T0, fit.t_lo, cfg.project_explicitly);

  ZetaResult out;
  out.pole_at_0 = st.pole;
  out.zeta0 = st.zeta0;  // the long-time piece has zeta_L(0) = 0
  out.zeta0_identity = fit.a[2] - 1.0;
  out.zeta_prime0 = longv + st.zeta_prime0;
  out.log_det = -out.zeta_prime0;
  // discretization of eigenvalues feeds both pieces; propagate via lambda1-level
  double disc = 0.0;
  for (const auto& it : s.eigenvalues)
    if (it.lambda > 1e-6)
      disc += it.multiplicity * it.err *
              (expint_e1(it.lambda * T0) + std::exp(-it.lambda * fit.t_lo) / it.lambda);
  out.unc_zeta_prime0 = long_err + st.unc + disc;
  out.unc_zeta0 = fit.a_err[2] + (fit.with_log ? inv_gamma_A2 * fit.K_log_err : 0.0);

  double id_gap = std::abs(out.zeta0 - out.zeta0_identity);
  double id_tol = std::max(3.0 * (out.unc_zeta0 + fit.a_err[2]), 1e-6);
  if (id_gap > id_tol) {
    std::ostringstream os;
    os << "det_laplacian: zeta(0) assembly " << out.zeta0 << " vs identity a_n-1 "
       << out.zeta0_identity << " differ by " << id_gap << " (tol " << id_tol << ")";
    throw std::runtime_error(os.str());
  }

  out.diag.b = cfg.b;
  out.diag.T0 = T0;
  out.diag.t_lo = fit.t_lo;
  out.diag.t_hi = fit.t_hi;
  out.diag.long_value = longv;
  out.diag.long_quad_err = long_err;
  out.diag.remainder_integral = st.remainder_integral;
  out.diag.remainder_tail_bound = st.remainder_tail_bound;
  out.diag.fit_cond = fit.cond;
  out.diag.K_log = fit.K_log;
  out.diag.A2_used = inv_gamma_A2;
  std::ostringstream os;
  os.precision(17);
  os << "det|" << s.surface_hash << "|" << s.mesh_hash << "|b=" << cfg.b
     << "|tsplit=" << cfg.t_split << "|kmax=" << cfg.fit_kmax;
  out.config_hash = fnv1a(os.str());
  return out;
}

DirectZeta zeta_direct(const SpectrumResult& s, double s_arg) {
  if (!(s_arg > 1.0 + 0.25)) throw std::invalid_argument("zeta_direct: need Re s > n/2 + margin");
  TailBoundCertificate cert = TailBoundCertificate::build(s);
  DirectZeta out;
  for (const auto& it : s.eigenvalues)
    if (it.lambda > 1e-6) out.value += it.multiplicity * std::pow(it.lambda, -s_arg);
  // counting-bound tail: sum_{k>=kc} (k/Ctilde)^{-s} ~ Ctilde^s kc^{1-s}/(s-1)
  double kc = double(cert.k_cutoff);
  out.tail_estimate = std::pow(cert.Ctilde, s_arg) * std::pow(kc, 1.0 - s_arg) / (s_arg - 1.0);
  return out;
}

DirectZeta zeta_mellin_at(const SpectrumResult& s, double s_arg, const MellinConfig& cfg) {
  if (!(s_arg > 1.25)) throw std::invalid_argument("zeta_mellin_at: need Re s > n/2");
  TailBoundCertificate cert = TailBoundCertificate::build(s);
  auto trace_m1 = [&](double t) {
    double v = 0.0;
    for (const auto& it : s.eigenvalues)
      if (it.lambda > 1e-6) v += it.multiplicity * std::exp(-it.lambda * t);
    return v;
  };
  const double T0 = cfg.b * cfg.b * cfg.t_split;
  // short piece: quadrature down to t_lo, then the fitted model continues to 0
  auto trace_fn = [&](double t) { return trace_from_spectrum(s, t, cert).value; };
  std::vector<HeatTraceSample> samples;
  double t = 1e-4;
  while (t < std::max(2.0, T0) * (1 + 1e-9)) {
    HeatTraceSample smp = trace_from_spectrum(s, t, cert);
    if (smp.tail_bound < 0.3 * smp.value) samples.push_back(smp);
    t *= std::pow(10.0, 0.05);
  }
  AsymptoticFit fit = fit_short_time(samples, 2, cfg.allow_log, cfg.fit_kmax);
  double t_lo = fit.t_lo;

  QuadResult qs = integrate([&](double u) { return (trace_fn(u) - 1.0) * std::pow(u, s_arg - 1.0); },
                            t_lo, T0, 1e-12, 1e-14);
  // (0, t_lo] from the model, termwise
  double below = 0.0;
  for (std::size_t k = 0; k < fit.a.size(); ++k) {
    double p = (double(k) - fit.n) / 2.0 + s_arg;
    below += fit.a[k] * std::pow(t_lo, p) / p;
  }
  if (fit.with_log)
    below += fit.K_log * std::pow(t_lo, s_arg) * (std::log(t_lo) / s_arg - 1.0 / (s_arg * s_arg));
  below -= std::pow(t_lo, s_arg) / s_arg;  // the -1 of (Tr - 1)

  double Tmax = cfg.long_tmax;
  QuadResult ql = integrate([&](double u) { return trace_m1(u) * std::pow(u, s_arg - 1.0); }, T0,
                            Tmax, 1e-12, 1e-14);
  double tail_long = trace_m1(Tmax) * std::pow(Tmax, s_arg - 1.0) / cert.lambda1;

  DirectZeta out;
  out.value = (qs.value + below + ql.value) / std::tgamma(s_arg);
  out.tail_estimate = (qs.error + ql.error + tail_long +
                       fit.residual_max * std::pow(t_lo, s_arg) / s_arg) /
                      std::tgamma(s_arg);
  return out;
}

}  // namespace speclab
