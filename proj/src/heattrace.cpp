#include "speclab/heattrace.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace speclab {

Q0Chart::A Q0Chart::to_chart_a(double t, double eps) { return {std::sqrt(t) / eps, eps}; }
Q0Chart::B Q0Chart::to_chart_b(double t, double eps) { return {eps / std::sqrt(t), std::sqrt(t)}; }
std::pair<double, double> Q0Chart::from_chart_a(const A& a) {
  double st = a.sqrt_tau * a.eps;
  return {st * st, a.eps};
}
std::pair<double, double> Q0Chart::from_chart_b(const B& b) {
  return {b.sqrt_t * b.sqrt_t, b.eta * b.sqrt_t};
}

TailBoundCertificate TailBoundCertificate::build(const SpectrumResult& s) {
  std::vector<double> lam = s.expanded();
  TailBoundCertificate c;
  c.lambda_cutoff = s.lambda_cutoff;
  c.k_cutoff = lam.size();
  c.lambda1 = s.lambda1();
  // counting bound N(lambda) <= Ctilde*lambda, maximized at eigenvalues >= 1
  double ct = 0.0;
  int n0 = -1;
  for (std::size_t k = 0; k < lam.size(); ++k) {
    if (lam[k] >= 1.0) {
      if (n0 < 0) n0 = int(k);
      ct = std::max(ct, double(k + 1) / lam[k]);
    }
  }
  if (n0 < 0) throw std::runtime_error("certificate: no eigenvalues above 1 below cutoff");
  c.N0 = n0;
  c.Ctilde = 1.25 * ct;  // Weyl-envelope margin beyond the computed range
  c.Cp = 1.0 / c.Ctilde;
  if (!c.verify(s)) throw std::runtime_error("certificate: self-check failed");
  return c;
}

bool TailBoundCertificate::verify(const SpectrumResult& s) const {
  std::vector<double> lam = s.expanded();
  for (std::size_t k = std::size_t(N0); k < lam.size(); ++k)
    if (lam[k] < Cp * double(k) - 1e-12) return false;
  return true;
}

double TailBoundCertificate::tail(double t) const {
  double a = t * Cp;
  return std::exp(-a * double(k_cutoff)) / (1.0 - std::exp(-a));
}

double TailBoundCertificate::required_lambda(double t, double tol) const {
  // tail < tol needs k_cut > ln((1/tol)/(1-e^{-tCp}))/(t*Cp); lambda ~ k/Ctilde
  double a = t * Cp;
  double k = std::log(1.0 / (tol * (1.0 - std::exp(-a)))) / a;
  return k / Ctilde;
}

HeatTraceSample trace_from_spectrum(const SpectrumResult& s, double t,
                                    const TailBoundCertificate& cert, double tail_tol) {
  if (!(t > 0)) throw std::domain_error("trace_from_spectrum: t must be positive");
  double tail = cert.tail(t);
  if (tail_tol > 0 && tail > tail_tol) {
    std::ostringstream os;
    os << "trace_from_spectrum: tail bound " << tail << " exceeds tolerance at t=" << t
       << "; need lambda_max >= " << cert.required_lambda(t, tail_tol);
    throw std::runtime_error(os.str());
  }
  double v = 0.0, disc = 0.0;
  for (const auto& it : s.eigenvalues) {
    double w = std::exp(-it.lambda * t);
    v += it.multiplicity * w;
    disc += it.multiplicity * it.err * t * w;
  }
  HeatTraceSample out;
  out.t = t;
  out.epsilon = 0.0;
  out.value = v;
  out.tail_bound = tail;
  out.uncertainty = tail + disc;
  out.source = TraceSource::Spectral;
  return out;
}

double AsymptoticFit::eval(double t) const {
  double v = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) v += a[k] * std::pow(t, (double(k) - n) / 2.0);
  if (with_log) v += K_log * std::log(t);
  return v;
}

namespace {

AsymptoticFit fit_on_window(const std::vector<HeatTraceSample>& samples, int n, bool allow_log,
                            int k_max, double t_lo, double t_hi) {
  std::vector<const HeatTraceSample*> use;
  for (const auto& s : samples)
    if (s.t >= t_lo * (1 - 1e-12) && s.t <= t_hi * (1 + 1e-12)) use.push_back(&s);
  int ncoef = k_max + 1 + (allow_log ? 1 : 0);
  if (int(use.size()) < ncoef + 2)
    throw std::runtime_error("fit_short_time: too few samples in window");

  Eigen::MatrixXd A(use.size(), ncoef);
  Eigen::VectorXd b(use.size());
  for (std::size_t i = 0; i < use.size(); ++i) {
    double t = use[i]->t;
    double sigma = std::max(use[i]->uncertainty, 1e-12 * std::abs(use[i]->value) + 1e-14);
    double w = 1.0 / sigma;
    for (int k = 0; k <= k_max; ++k) A(i, k) = w * std::pow(t, (double(k) - n) / 2.0);
    if (allow_log) A(i, k_max + 1) = w * std::log(t);
    b(i) = w * use[i]->value;
  }
  // column scaling for conditioning
  Eigen::VectorXd scale(ncoef);
  for (int j = 0; j < ncoef; ++j) {
    scale(j) = A.col(j).norm();
    if (scale(j) == 0.0) scale(j) = 1.0;
    A.col(j) /= scale(j);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  double cond = svd.singularValues()(0) / svd.singularValues()(ncoef - 1);
  if (!(cond < 1e12)) {
    std::ostringstream os;
    os << "fit_short_time: ill-conditioned basis on [" << t_lo << ", " << t_hi
       << "], cond=" << cond;
    throw std::runtime_error(os.str());
  }
  Eigen::VectorXd c = svd.solve(b);
  Eigen::VectorXd resid = A * c - b;
  double rms = std::sqrt(resid.squaredNorm() / double(use.size()));

  // per-coefficient sigma from the weighted normal equations
  Eigen::MatrixXd V = svd.matrixV();
  Eigen::VectorXd sv = svd.singularValues();
  double s2 = std::max(1.0, resid.squaredNorm() / std::max<int>(1, int(use.size()) - ncoef));

  AsymptoticFit fit;
  fit.n = n;
  fit.with_log = allow_log;
  fit.t_lo = t_lo;
  fit.t_hi = t_hi;
  fit.cond = cond;
  fit.residual_norm = rms;
  fit.a.resize(k_max + 1);
  fit.a_err.resize(k_max + 1);
  for (int k = 0; k <= k_max; ++k) {
    fit.a[k] = c(k) / scale(k);
    double var = 0.0;
    for (int j = 0; j < ncoef; ++j) var += V(k, j) * V(k, j) / (sv(j) * sv(j));
    fit.a_err[k] = std::sqrt(var * s2) / scale(k);
  }
  if (allow_log) {
    fit.K_log = c(k_max + 1) / scale(k_max + 1);
    double var = 0.0;
    for (int j = 0; j < ncoef; ++j) var += V(k_max + 1, j) * V(k_max + 1, j) / (sv(j) * sv(j));
    fit.K_log_err = std::sqrt(var * s2) / scale(k_max + 1);
  }
  double rmax = 0.0;
  for (const auto* s : use) rmax = std::max(rmax, std::abs(s->value - fit.eval(s->t)));
  fit.residual_max = rmax;
  return fit;
}

}  // namespace

AsymptoticFit fit_short_time(const std::vector<HeatTraceSample>& samples, int n, bool allow_log,
                             int k_max, double t_lo, double t_hi) {
  if (samples.size() < 4) throw std::runtime_error("fit_short_time: need samples");
  std::vector<HeatTraceSample> sorted = samples;
  std::sort(sorted.begin(), sorted.end(),
            [](const HeatTraceSample& a, const HeatTraceSample& b) { return a.t < b.t; });
  if (t_hi <= 0) t_hi = sorted.back().t;
  if (t_lo <= 0) {
    // largest window with tail_bound < 1e-3 * smallest retained basis term
    t_lo = sorted.front().t;
    for (const auto& s : sorted) {
      double smallest = std::pow(s.t, (double(k_max) - n) / 2.0);
      if (s.tail_bound < 1e-3 * smallest) {
        t_lo = s.t;
        break;
      }
    }
  }
  if (!(std::log10(t_hi / t_lo) >= 1.5 - 1e-9))
    throw std::runtime_error("fit_short_time: window spans less than 1.5 decades");

  AsymptoticFit fit = fit_on_window(samples, n, allow_log, k_max, t_lo, t_hi);

  // cross-window stability: shift the window and widen the error bars
  try {
    AsymptoticFit alt1 = fit_on_window(samples, n, allow_log, k_max, t_lo * 1.6, t_hi);
    AsymptoticFit alt2 = fit_on_window(samples, n, allow_log, k_max, t_lo, t_hi / 1.6);
    for (std::size_t k = 0; k < fit.a.size(); ++k) {
      double shift = std::max(std::abs(alt1.a[k] - fit.a[k]), std::abs(alt2.a[k] - fit.a[k]));
      fit.a_err[k] = std::max(fit.a_err[k], shift);
    }
    if (allow_log) {
      double shift =
          std::max(std::abs(alt1.K_log - fit.K_log), std::abs(alt2.K_log - fit.K_log));
      fit.K_log_err = std::max(fit.K_log_err, shift);
    }
  } catch (const std::exception&) {
    // shifted window infeasible (too few points); keep LS errors
  }
  return fit;
}

double weighted_trace(const SpectrumResult& s, const std::function<double(double)>& weight,
                      double t) {
  if (!s.modes) throw std::runtime_error("weighted_trace: eigenfunctions not stored");
  const ModeBundle& mb = *s.modes;
  std::size_t nn = mb.mesh.n_nodes();
  std::vector<double> wq(nn);
  for (std::size_t i = 0; i < nn; ++i) wq[i] = weight(mb.mesh.node(i)) * mb.lumped_mass[i];
  double total = 0.0;
  for (const auto& md : mb.modes) {
    double mode_mult = md.m == 0 ? 1.0 : 2.0;
    for (std::size_t j = 0; j < md.vec.size(); ++j) {
      double ip = 0.0;
      const auto& v = md.vec[j];
      for (std::size_t i = 0; i < nn; ++i) ip += wq[i] * v[i] * v[i];
      total += mode_mult * std::exp(-md.lambda[j] * t) * ip;
    }
  }
  return total;
}

HeatTraceSample weighted_trace_sample(const SpectrumResult& s,
                                      const std::function<double(double)>& weight, double t,
                                      const TailBoundCertificate& cert) {
  HeatTraceSample out;
  out.t = t;
  out.value = weighted_trace(s, weight, t);
  out.tail_bound = cert.tail(t);  // weight <= 1 on all uses here
  double disc = 0.0;
  for (const auto& it : s.eigenvalues)
    disc += it.multiplicity * it.err * t * std::exp(-it.lambda * t);
  out.uncertainty = out.tail_bound + disc;
  out.source = TraceSource::Spectral;
  return out;
}

StructureResidual structure_decomposition(double eps, const StructureTerms& terms, double t) {
  StructureResidual out;
  out.t = t;
  out.epsilon = eps;
  HeatTraceSample full = terms.trace_eps(t);
  double tau = t / (eps * eps);
  auto [zval, zunc] = terms.z_weighted(tau);
  HeatTraceSample om = terms.omega0_chi2(t);
  out.R = full.value - zval - om.value;
  out.uncertainty = full.uncertainty + zunc + om.uncertainty;
  out.conclusive = std::abs(out.R) > out.uncertainty;
  return out;
}

std::vector<ConvTableRow> htconv_check(
    const std::vector<std::pair<double, SpectrumResult>>& family,
    const SpectrumResult& omega0, const std::vector<double>& t_grid,
    const TailBoundCertificate& cert0) {
  std::vector<ConvTableRow> rows;
  for (double t : t_grid) {
    ConvTableRow row;
    row.t = t;
    double v0 = trace_from_spectrum(omega0, t, cert0).value;
    for (const auto& [eps, spec] : family) {
      TailBoundCertificate c = TailBoundCertificate::build(spec);
      row.gap.push_back(std::abs(trace_from_spectrum(spec, t, c).value - v0));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

double loglog_slope(const std::vector<double>& t, const std::vector<double>& y) {
  if (t.size() != y.size() || t.size() < 2) throw std::invalid_argument("loglog_slope: bad input");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(std::abs(y[i]) > 0)) continue;
    double X = std::log(t[i]), Y = std::log(std::abs(y[i]));
    sx += X;
    sy += Y;
    sxx += X * X;
    sxy += X * Y;
    ++n;
  }
  if (n < 2) throw std::runtime_error("loglog_slope: too few nonzero points");
  return (double(n) * sxy - sx * sy) / (double(n) * sxx - sx * sx);
}

}  // namespace speclab
