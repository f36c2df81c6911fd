#include "speclab/renorm.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include "speclab/conekernel.hpp"
#include "speclab/quadrature.hpp"
#include "speclab/special.hpp"

namespace speclab {

namespace {

Profile infinite_cone(double gamma) {
  const double inf = std::numeric_limits<double>::infinity();
  std::ostringstream os;
  os.precision(17);
  os << "cone|gamma=" << gamma;
  std::vector<Profile::Piece> pieces{
      {0.0, inf, [gamma](double r) { return FDeriv{gamma * r, gamma, 0.0}; }}};
  return Profile(gamma, EndKind::ConicTip, EndKind::ConicInfinity, std::move(pieces), {0.0, inf},
                 os.str());
}

// per-eigenpair weighted norm over elements inside [0, support_end]
struct ModeAccum {
  // contribution of one mode to the tau grid values
  std::vector<double> contrib;
};

void accumulate_mode(const Surface& s, const Mesh& mesh, int m, double lambda_max,
                     const std::vector<double>& taus, const std::function<double(double)>& weight,
                     double support_end, std::vector<double>& contrib,
                     std::vector<std::vector<double>>* diag, double two_pi_norm) {
  ModeOperator op = assemble_mode(s, mesh, m);
  DenseEigs eg = solve_tridiag(op, -1e-4, lambda_max, true);
  contrib.assign(taus.size(), 0.0);
  if (eg.lambda.empty()) return;
  const double mult = (m == 0) ? 1.0 : 2.0;
  std::size_t nn = mesh.n_nodes();

  // weighted norms w_j = sum_{elements in [0,support_end]} lumped phi^2 w f
  std::vector<double> wj(eg.lambda.size(), 0.0);
  for (std::size_t e = 0; e + 1 < nn; ++e) {
    double a = mesh.node(e), b = mesh.node(e + 1);
    if (b > support_end * (1.0 + 1e-12)) break;
    double h = b - a;
    double ma = 0.0, mb = 0.0;
    for (int q = 0; q < 4; ++q) {
      double r = mesh.qr(e, q), f = mesh.qf(e, q), w = mesh.qw(e, q);
      double pb = (r - a) / h;
      ma += w * (1.0 - pb) * f;
      mb += w * pb * f;
    }
    double wa = weight ? weight(a) : 1.0;
    double wb = weight ? weight(b) : 1.0;
    for (std::size_t j = 0; j < eg.lambda.size(); ++j) {
      double va = 0.0, vb = 0.0;
      long ia = long(e) - op.dof0, ib = long(e + 1) - op.dof0;
      if (ia >= 0 && ia < long(eg.vec[j].size())) va = eg.vec[j][ia];
      if (ib >= 0 && ib < long(eg.vec[j].size())) vb = eg.vec[j][ib];
      wj[j] += wa * va * va * ma + wb * vb * vb * mb;
    }
  }
  for (std::size_t ti = 0; ti < taus.size(); ++ti) {
    double acc = 0.0;
    for (std::size_t j = 0; j < eg.lambda.size(); ++j)
      acc += std::exp(-eg.lambda[j] * taus[ti]) * wj[j];
    contrib[ti] = mult * acc;
  }
  if (diag) {
    // nodal diagonal values, sum_j e^{-lam tau} phi_i^2 * mult / (2 pi)
    for (std::size_t ti = 0; ti < taus.size(); ++ti) {
      auto& row = (*diag)[ti];
      for (std::size_t j = 0; j < eg.lambda.size(); ++j) {
        double w = mult * std::exp(-eg.lambda[j] * taus[ti]) / two_pi_norm;
        const auto& v = eg.vec[j];
        for (std::size_t i = 0; i < v.size(); ++i) row[i + op.dof0] += w * v[i] * v[i];
      }
    }
  }
}

struct StreamResult {
  std::vector<double> value;
  int modes_used = 0;
  std::vector<std::vector<double>>* diag = nullptr;
};

StreamResult stream_modes(const Surface& s, const Mesh& mesh, double lambda_max,
                          const std::vector<double>& taus,
                          const std::function<double(double)>& weight, double support_end,
                          unsigned workers, std::vector<std::vector<double>>* diag) {
  StreamResult out;
  out.value.assign(taus.size(), 0.0);
  double fmax = mesh.f_max();
  int m_hard = int(std::floor(fmax * std::sqrt(lambda_max))) + 1;
  const int chunk = 16;
  int consecutive_small = 0;
  std::mutex diag_mtx;
  for (int m0 = 0; m0 < m_hard && consecutive_small < 3; m0 += chunk) {
    int m1 = std::min(m0 + chunk, m_hard);
    std::vector<std::vector<double>> contribs(m1 - m0);
    std::vector<std::vector<std::vector<double>>> diags;
    if (diag) diags.assign(m1 - m0, std::vector<std::vector<double>>());
    parallel_for(std::size_t(m1 - m0), [&](std::size_t k) {
      std::vector<std::vector<double>>* dptr = nullptr;
      if (diag) {
        diags[k].assign(taus.size(), std::vector<double>(mesh.n_nodes(), 0.0));
        dptr = &diags[k];
      }
      accumulate_mode(s, mesh, m0 + int(k), lambda_max, taus, weight, support_end, contribs[k],
                      dptr, 2.0 * M_PI);
    }, workers);
    for (int k = 0; k < m1 - m0; ++k) {
      bool small = true;
      for (std::size_t ti = 0; ti < taus.size(); ++ti) {
        out.value[ti] += contribs[k][ti];
        if (std::abs(contribs[k][ti]) > 1e-12 * (std::abs(out.value[ti]) + 1.0)) small = false;
      }
      if (diag)
        for (std::size_t ti = 0; ti < taus.size(); ++ti)
          for (std::size_t i = 0; i < mesh.n_nodes(); ++i) (*diag)[ti][i] += diags[k][ti][i];
      out.modes_used = m0 + k + 1;
      if (m0 + k > 0) consecutive_small = small ? consecutive_small + 1 : 0;
      if (consecutive_small >= 3) break;
    }
  }
  return out;
}

}  // namespace

TruncTraceResult truncated_weighted_trace(const Profile& p, double R,
                                          const std::vector<double>& taus, double lambda_max,
                                          const MeshConfig& cfg,
                                          const std::function<double(double)>& weight,
                                          double support_end, unsigned workers) {
  Surface s = Surface::truncation(p, R);
  Mesh mesh = Mesh::build(p, 0.0, R, cfg, 0.0, {support_end});
  StreamResult sr = stream_modes(s, mesh, lambda_max, taus, weight, support_end, workers, nullptr);
  TruncTraceResult out;
  out.value = std::move(sr.value);
  out.modes_used = sr.modes_used;
  return out;
}

DiagKernelResult truncated_diag_kernel(const Profile& p, double R,
                                       const std::vector<double>& taus, double lambda_max,
                                       const MeshConfig& cfg, double support_end,
                                       unsigned workers) {
  Surface s = Surface::truncation(p, R);
  Mesh mesh = Mesh::build(p, 0.0, R, cfg, 0.0, {support_end});
  DiagKernelResult out;
  out.r = mesh.nodes();
  out.diag.assign(taus.size(), std::vector<double>(mesh.n_nodes(), 0.0));
  out.lumped.assign(mesh.n_nodes(), 0.0);
  for (std::size_t e = 0; e + 1 < mesh.n_nodes(); ++e) {
    double a = mesh.node(e), b = mesh.node(e + 1), h = b - a;
    for (int q = 0; q < 4; ++q) {
      double r = mesh.qr(e, q), f = mesh.qf(e, q), w = mesh.qw(e, q);
      double pb = (r - a) / h;
      out.lumped[e] += w * (1.0 - pb) * f;
      out.lumped[e + 1] += w * pb * f;
    }
  }
  StreamResult sr = stream_modes(s, mesh, lambda_max, taus, nullptr, support_end, workers,
                                 &out.diag);
  out.modes_used = sr.modes_used;
  return out;
}

namespace {

void auto_params(const std::vector<double>& taus, double& R, double& R_int, double& lam) {
  double tau_min = taus.front(), tau_max = taus.front();
  for (double t : taus) {
    tau_min = std::min(tau_min, t);
    tau_max = std::max(tau_max, t);
  }
  if (R_int <= 0) R_int = std::max(2.5, 1.0 + std::sqrt(21.0 * tau_max));
  if (R <= 0) R = R_int + std::max(3.0, 0.8 * std::sqrt(21.0 * tau_max));
  if (lam <= 0) lam = 38.0 / tau_min;
}

// tail of the true subtraction integrand beyond R_int (cap influence)
double subtraction_tail_bound(double tau, double R_int, double gamma) {
  double d = R_int - 0.5;
  return std::exp(-d * d / tau) * std::max(1.0, gamma * R_int / std::sqrt(tau));
}

}  // namespace

RenormTrace renorm_trace_grid(const Profile& z, const std::vector<double>& taus,
                              const RenormSolverConfig& cfg_in) {
  RenormSolverConfig cfg = cfg_in;
  double R = cfg.R, R_int = cfg.R_int, lam = cfg.lambda_max;
  auto_params(taus, R, R_int, lam);
  double gamma = z.gamma();
  Profile cone = infinite_cone(gamma);
  double cg = cone_trace_excess(gamma);

  auto run = [&](double radius, int refine) {
    MeshConfig mc = cfg.mesh;
    mc.refine = cfg.mesh.refine + refine;
    TruncTraceResult tz =
        truncated_weighted_trace(z, radius, taus, lam, mc, nullptr, R_int, cfg.workers);
    TruncTraceResult tc =
        truncated_weighted_trace(cone, radius, taus, lam, mc, nullptr, R_int, cfg.workers);
    std::pair<std::vector<double>, int> out;
    out.first.resize(taus.size());
    for (std::size_t i = 0; i < taus.size(); ++i) out.first[i] = tz.value[i] - tc.value[i];
    out.second = std::max(tz.modes_used, tc.modes_used);
    return out;
  };

  auto [v0, mu0] = run(R, 0);
  auto [v1, mu1] = run(R, 1);

  RenormTrace out;
  out.tau = taus;
  out.gamma = gamma;
  out.R = R;
  out.R_int = R_int;
  out.modes_used = std::max(mu0, mu1);
  out.value.resize(taus.size());
  out.unc.resize(taus.size());
  out.certified.resize(taus.size());
  for (std::size_t i = 0; i < taus.size(); ++i) {
    double extrap = (4.0 * v1[i] - v0[i]) / 3.0;
    out.value[i] = extrap + cg;
    out.unc[i] = std::abs(v1[i] - v0[i]) / 3.0 + subtraction_tail_bound(taus[i], R_int, gamma);
    out.certified[i] = taus[i] <= (R / 4.0) * (R / 4.0);
  }
  if (cfg.second_radius) {
    auto [w1, muw] = run(2.0 * R, 1);
    (void)muw;
    for (std::size_t i = 0; i < taus.size(); ++i)
      out.unc[i] += std::abs(w1[i] - v1[i]);
  }
  return out;
}

double renorm_trace(const Profile& z, double tau, const RenormSolverConfig& cfg) {
  RenormTrace rt = renorm_trace_grid(z, {tau}, cfg);
  return rt.value[0];
}

double renorm_trace_pointwise(const Profile& z, double tau, double r0,
                              const RenormSolverConfig& cfg_in) {
  if (!(r0 >= 0.5)) throw std::invalid_argument("renorm_trace_pointwise: need r0 >= 1/2");
  RenormSolverConfig cfg = cfg_in;
  double R = cfg.R, R_int = cfg.R_int, lam = cfg.lambda_max;
  auto_params({tau}, R, R_int, lam);
  double gamma = z.gamma();

  auto eval = [&](int refine) {
    MeshConfig mc = cfg.mesh;
    mc.refine = cfg.mesh.refine + refine;
    Surface s = Surface::truncation(z, R);
    Mesh mesh = Mesh::build(z, 0.0, R, mc, 0.0, {R_int, r0});
    std::vector<std::vector<double>> diag(1, std::vector<double>(mesh.n_nodes(), 0.0));
    stream_modes(s, mesh, lam, {tau}, nullptr, R_int, cfg.workers, &diag);
    // lumped masses restricted to elements inside [0, R_int]
    double total = 0.0;
    for (std::size_t e = 0; e + 1 < mesh.n_nodes(); ++e) {
      double a = mesh.node(e), b = mesh.node(e + 1), h = b - a;
      if (b > R_int * (1.0 + 1e-12)) break;
      double ma = 0.0, mb = 0.0;
      for (int q = 0; q < 4; ++q) {
        double r = mesh.qr(e, q), f = mesh.qf(e, q), w = mesh.qw(e, q);
        double pb = (r - a) / h;
        ma += w * (1.0 - pb) * f;
        mb += w * pb * f;
      }
      auto integrand = [&](std::size_t node, double mass) {
        double r = mesh.node(node);
        double v = diag[0][node];
        if (r >= r0 && r > 0) v -= cone_diag(tau, r, gamma);
        total += 2.0 * M_PI * v * mass;
      };
      integrand(e, ma);
      integrand(e + 1, mb);
    }
    return total + cone_renorm_tail(tau, r0, gamma);
  };
  double p0 = eval(0), p1 = eval(1);
  return (4.0 * p1 - p0) / 3.0;
}

LargeTauFit fit_large_tau(const RenormTrace& rt, double tau_min_fit) {
  std::vector<double> ts, vs, us;
  for (std::size_t i = 0; i < rt.tau.size(); ++i)
    if (rt.tau[i] >= tau_min_fit && rt.certified[i]) {
      ts.push_back(rt.tau[i]);
      vs.push_back(rt.value[i]);
      us.push_back(std::max(rt.unc[i], 1e-12));
    }
  if (ts.size() < 6) throw std::runtime_error("fit_large_tau: too few certified points");
  const int ncoef = 4;  // {1, log tau, tau^{-1/2}, tau^{-1}}
  Eigen::MatrixXd A(ts.size(), ncoef);
  Eigen::VectorXd b(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) {
    double w = 1.0 / us[i];
    A(i, 0) = w;
    A(i, 1) = w * std::log(ts[i]);
    A(i, 2) = w / std::sqrt(ts[i]);
    A(i, 3) = w / ts[i];
    b(i) = w * vs[i];
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Eigen::VectorXd c = svd.solve(b);
  Eigen::VectorXd resid = A * c - b;
  double s2 = std::max(1.0, resid.squaredNorm() / std::max<int>(1, int(ts.size()) - ncoef));
  auto coef_err = [&](int k) {
    double var = 0.0;
    for (int j = 0; j < ncoef; ++j) {
      double vj = svd.matrixV()(k, j) / svd.singularValues()(j);
      var += vj * vj;
    }
    return std::sqrt(var * s2);
  };
  LargeTauFit out;
  out.f_infty = c(0);
  out.f_infty_err = coef_err(0);
  out.c_log = c(1);
  out.c_log_err = coef_err(1);
  out.decay_coeff = c(2);
  out.residual = std::sqrt(resid.squaredNorm() / double(ts.size()));
  return out;
}

ExpansionCoefficients expansion_coefficients(const CutoffFamily& cuts, double gamma, int n,
                                             double f_infty) {
  if (n != 2) throw std::invalid_argument("expansion_coefficients: only n = 2");
  ExpansionCoefficients out;
  out.f_infty = f_infty;
  // moments of chi1' over its band; the power moments are taken in the
  // boundary-defining variable x = 1/r of the conic infinity, which in r
  // reads l_k = \int chi1'(r) r^{n-k} dr (the D_0 cancellation fixes the
  // convention; the log moment is inversion-invariant)
  for (int k = 0; k < n; ++k) {
    auto fk = [&](double r) { return cuts.chi1_d1(r) * std::pow(r, double(n - k)); };
    out.l.push_back(integrate(fk, 0.5, 2.0, 1e-13, 1e-15).value);
  }
  out.l_log = -integrate([&](double r) { return cuts.chi1_d1(r) * std::log(r); }, 0.5, 2.0,
                         1e-13, 1e-15)
                   .value;
  out.L = 2.0 * M_PI * gamma * u_coefficient(gamma, 2);  // = 0 in 2-d
  for (int k = 0; k < n; ++k) {
    double uk = u_coefficient(gamma, k);
    out.D.push_back(out.l[k] / (double(k) - n) * (2.0 * M_PI * gamma) * uk);
  }
  return out;
}

RenormZeta renorm_zeta(const RenormTrace& small_grid, const RenormTrace& large_grid) {
  if (small_grid.tau.empty() || large_grid.tau.empty())
    throw std::invalid_argument("renorm_zeta: empty grids");
  const double A2 = inv_gamma_A2, A3 = inv_gamma_A3;

  // small-tau expansion fit (even index set expected; the tau^{-1/2} term is
  // retained so its size can be checked downstream)
  std::vector<HeatTraceSample> samples;
  for (std::size_t i = 0; i < small_grid.tau.size(); ++i) {
    HeatTraceSample s;
    s.t = small_grid.tau[i];
    s.value = small_grid.value[i];
    s.uncertainty = std::max(small_grid.unc[i], 1e-12);
    s.tail_bound = small_grid.unc[i];
    samples.push_back(s);
  }
  double tmin = samples.front().t, tmax = samples.back().t;
  AsymptoticFit sfit = fit_short_time(samples, 2, false, 6, tmin, std::min(1.0, tmax));

  LargeTauFit lfit = fit_large_tau(large_grid, 2.49);

  RenormZeta out;
  out.small_fit = sfit;
  out.large_fit = lfit;

  // closed forms over (0,1]: no projection (no zero mode is removed on Z)
  double z0 = 0.0, zp = 0.0, unc0 = 0.0, unc1 = 0.0;
  for (std::size_t k = 0; k < sfit.a.size(); ++k) {
    double p = (double(k) - 2.0) / 2.0;
    if (int(k) == 2) {
      z0 += sfit.a[k];
      zp += sfit.a[k] * A2;
      unc0 += sfit.a_err[k];
      unc1 += sfit.a_err[k] * A2;
    } else {
      zp += sfit.a[k] / p;
      unc1 += sfit.a_err[k] * std::abs(std::pow(tmin, p) / p);
    }
  }
  // small-tau numeric remainder on [tmin, 1] (log-uniform trapezoid in log t)
  {
    double acc = 0.0, prev_x = 0.0, prev_g = 0.0;
    bool first = true;
    for (std::size_t i = 0; i < small_grid.tau.size(); ++i) {
      double t = small_grid.tau[i];
      if (t > 1.0 * (1 + 1e-9)) break;
      double x = std::log(t);
      double g = small_grid.value[i] - sfit.eval(t);
      if (!first) acc += 0.5 * (g + prev_g) * (x - prev_x);
      prev_x = x;
      prev_g = g;
      first = false;
    }
    zp += acc;
    unc1 += std::abs(acc) * 0.05 + sfit.residual_max;
  }
  // below tmin: next-order bound
  {
    double pnext = (double(sfit.a.size()) - 2.0) / 2.0;
    double c = std::abs(small_grid.value.front() - sfit.eval(tmin)) / std::pow(tmin, pnext) +
               sfit.residual_max / std::pow(tmin, pnext);
    unc1 += c * std::pow(tmin, pnext) / pnext;
  }

  // large-tau closed forms: -f_inf/s and c_log/s^2 continuations
  z0 += -lfit.f_infty + lfit.c_log * A2;
  zp += -lfit.f_infty * A2 + lfit.c_log * A3;
  unc0 += lfit.f_infty_err + lfit.c_log_err * A2;
  unc1 += lfit.f_infty_err * A2 + lfit.c_log_err * std::abs(A3);
  out.pole = lfit.c_log;

  // large-tau numeric remainder on [1, tau_max_cert]
  {
    double acc = 0.0, prev_x = 0.0, prev_g = 0.0;
    bool first = true;
    double tau_top = 1.0;
    for (std::size_t i = 0; i < large_grid.tau.size(); ++i) {
      if (!large_grid.certified[i]) continue;
      double t = large_grid.tau[i];
      if (t < 1.0 * (1 - 1e-9)) continue;
      double x = std::log(t);
      double g = large_grid.value[i] - lfit.f_infty - lfit.c_log * std::log(t);
      if (!first) acc += 0.5 * (g + prev_g) * (x - prev_x);
      prev_x = x;
      prev_g = g;
      first = false;
      tau_top = t;
    }
    zp += acc;
    // decay-model closure beyond the certified window: integrand ~ c tau^{-3/2}
    double tail = 2.0 * lfit.decay_coeff / std::sqrt(tau_top);
    zp += tail;
    unc1 += std::abs(acc) * 0.05 + std::abs(tail);
  }

  out.rzeta0 = z0;
  out.rzeta_prime0 = zp;
  out.log_rdet = -zp;
  out.unc0 = unc0;
  out.unc1 = unc1;
  return out;
}

std::pair<double, double> z_weighted_trace(const Profile& z, double eps, double tau,
                                           const CutoffFamily& cuts,
                                           const RenormSolverConfig& cfg_in) {
  RenormSolverConfig cfg = cfg_in;
  double support = (17.0 / 16.0) / eps;
  double R = cfg.R > 0 ? cfg.R : support + std::sqrt(21.0 * tau) + 1.0;
  double lam = cfg.lambda_max > 0 ? cfg.lambda_max : 38.0 / tau;
  auto weight = [&cuts, eps](double r) { return cuts.chi1_v(eps * r); };
  auto run = [&](int refine) {
    MeshConfig mc = cfg.mesh;
    mc.refine = cfg.mesh.refine + refine;
    return truncated_weighted_trace(z, R, {tau}, lam, mc, weight, support, cfg.workers).value[0];
  };
  double v0 = run(0), v1 = run(1);
  double extrap = (4.0 * v1 - v0) / 3.0;
  double d = R - support;
  double defect = std::exp(-d * d / tau) / (4.0 * M_PI * tau) * 2.0 * M_PI * z.gamma() * support *
                  std::sqrt(M_PI * tau);
  return {extrap, std::abs(v1 - v0) / 3.0 + defect};
}

}  // namespace speclab
