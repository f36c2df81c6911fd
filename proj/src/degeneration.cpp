#include "speclab/degeneration.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "speclab/conekernel.hpp"

namespace speclab {

namespace {

SweepModel fit_rows(const std::vector<SweepRow>& rows, double delta) {
  const int ncoef = delta > 0 ? 4 : 3;
  if (int(rows.size()) < ncoef)
    throw std::invalid_argument("fit_sweep: need at least as many rows as coefficients");
  Eigen::MatrixXd A(rows.size(), ncoef);
  Eigen::VectorXd b(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    double le = std::log(rows[i].eps);
    double w = 1.0 / std::max(rows[i].unc, 1e-10);
    A(i, 0) = w * le * le;
    A(i, 1) = w * le;
    A(i, 2) = w;
    if (ncoef == 4) A(i, 3) = w * std::pow(rows[i].eps, delta);
    b(i) = w * rows[i].log_det;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Eigen::VectorXd c = svd.solve(b);
  Eigen::VectorXd resid = A * c - b;
  double s2 = std::max(1.0, resid.squaredNorm() / std::max<int>(1, int(rows.size()) - ncoef));
  auto cerr = [&](int k) {
    double var = 0.0;
    for (int j = 0; j < ncoef; ++j) {
      double vj = svd.matrixV()(k, j) / svd.singularValues()(j);
      var += vj * vj;
    }
    return std::sqrt(var * s2);
  };
  SweepModel m;
  m.c2 = c(0);
  m.c1 = c(1);
  m.c0 = c(2);
  m.c2_err = cerr(0);
  m.c1_err = cerr(1);
  m.c0_err = cerr(2);
  if (ncoef == 4) {
    m.c3 = c(3);
    m.delta = delta;
  }
  m.residual = std::sqrt(resid.squaredNorm() / double(rows.size()));
  return m;
}

}  // namespace

SweepModel fit_sweep(const std::vector<SweepRow>& rows, bool with_eps_power) {
  if (!with_eps_power) return fit_rows(rows, 0.0);
  // deterministic small scan over the free o(1) exponent
  SweepModel best;
  double best_res = std::numeric_limits<double>::infinity();
  for (double delta : {0.5, 1.0, 1.5, 2.0}) {
    SweepModel m = fit_rows(rows, delta);
    if (m.residual < best_res) {
      best_res = m.residual;
      best = m;
    }
  }
  return best;
}

Prediction prediction(const ZetaResult& omega0_det, const RenormZeta& rz,
                      const ExpansionCoefficients& coeffs, const AsymptoticFit& a_fit,
                      const AsymptoticFit& a_chi2_fit) {
  Prediction p;
  p.half_L = 0.5 * coeffs.L;
  p.minus2_rzeta0 = -2.0 * rz.rzeta0;
  p.c0 = omega0_det.log_det + rz.log_rdet;
  p.c0_unc = omega0_det.unc_zeta_prime0 + rz.unc1;
  p.c1_unc = 2.0 * rz.unc0;
  const int n = a_fit.n;
  for (int k = 0; k < n; ++k) {
    p.coeff_cancel.push_back(-a_fit.a[k] + a_chi2_fit.a[k] + coeffs.D[k]);
    p.coeff_cancel_unc.push_back(a_fit.a_err[k] + a_chi2_fit.a_err[k]);
  }
  p.f_identity = -a_fit.a[n] + a_chi2_fit.a[n] - coeffs.L * coeffs.l_log + coeffs.f_infty;
  p.f_identity_unc = a_fit.a_err[n] + a_chi2_fit.a_err[n] + rz.large_fit.f_infty_err;
  return p;
}

SweepResult run_sweep(const DegenerationConfig& cfg) {
  for (double e : cfg.epsilons)
    if (!(e > 0) || !(e < 0.5)) throw std::invalid_argument("run_sweep: eps out of (0,1/2)");

  SweepResult out;

  // Omega0 pipeline: determinant plus the a_k / a~_k fits
  SpectrumResult so =
      full_spectrum(Surface::closed(cfg.omega0, "omega0"), cfg.lambda_max, cfg.mesh, true,
                    cfg.workers);
  out.omega0_det = det_laplacian(so, cfg.mellin);
  TailBoundCertificate cert = TailBoundCertificate::build(so);
  CutoffFamily cuts;
  {
    std::vector<HeatTraceSample> plain, weighted;
    double t = 1e-3;
    while (t < 2.0) {
      HeatTraceSample s = trace_from_spectrum(so, t, cert);
      if (s.tail_bound < 0.3 * s.value) {
        plain.push_back(s);
        weighted.push_back(
            weighted_trace_sample(so, [&](double r) { return cuts.chi2_v(r); }, t, cert));
      }
      t *= std::pow(10.0, 0.05);
    }
    out.omega0_fit = fit_short_time(plain, 2, true, cfg.mellin.fit_kmax);
    out.omega0_chi2_fit = fit_short_time(weighted, 2, false, cfg.mellin.fit_kmax,
                                         out.omega0_fit.t_lo, out.omega0_fit.t_hi);
  }

  // renormalized data on Z
  RenormTrace small = renorm_trace_grid(cfg.z, cfg.renorm_small_taus, cfg.renorm_small);
  RenormTrace large = renorm_trace_grid(cfg.z, cfg.renorm_large_taus, cfg.renorm_large);
  out.rzeta = renorm_zeta(small, large);
  out.coeffs = expansion_coefficients(cuts, cfg.z.gamma(), 2, out.rzeta.large_fit.f_infty);

  // per-eps determinants
  for (double eps : cfg.epsilons) {
    GluedSurface g = glue(cfg.omega0, cfg.z, eps);
    SpectrumResult se = full_spectrum(Surface::glued(g), cfg.lambda_max, cfg.mesh, false,
                                      cfg.workers);
    ZetaResult zr = det_laplacian(se, cfg.mellin);
    SweepRow row;
    row.eps = eps;
    row.log_det = zr.log_det;
    row.unc = zr.unc_zeta_prime0;
    row.zeta0 = zr.zeta0;
    out.rows.push_back(row);
  }

  out.fit = fit_sweep(out.rows, cfg.fit_eps_power);
  if (out.rows.size() >= 4) {
    std::vector<SweepRow> dropped(out.rows.begin() + 1, out.rows.end());
    out.fit_drop_largest = fit_sweep(dropped, cfg.fit_eps_power);
  } else {
    out.fit_drop_largest = out.fit;
  }
  out.pred = prediction(out.omega0_det, out.rzeta, out.coeffs, out.omega0_fit,
                        out.omega0_chi2_fit);

  // agreement: interval overlap with 2x inflation (or 5% relative)
  auto agree = [](double fitted, double ferr, double predicted, double perr) {
    double tol = std::max(0.05 * std::abs(predicted), 2.0 * (ferr + perr));
    return std::abs(fitted - predicted) <= tol;
  };
  out.agree_c2 = std::abs(out.fit.c2) < std::max(0.01, 2.0 * out.fit.c2_err);
  out.agree_c1 = agree(out.fit.c1, out.fit.c1_err, out.pred.minus2_rzeta0, out.pred.c1_unc);
  out.agree_c0 = agree(out.fit.c0, out.fit.c0_err, out.pred.c0, out.pred.c0_unc);
  return out;
}

}  // namespace speclab
