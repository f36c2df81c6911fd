#include "speclab/parametrix.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "speclab/geometry.hpp"
#include "speclab/heattrace.hpp"

namespace speclab {

Eigen::MatrixXd ModeEigs::kernel(double t) const {
  Eigen::VectorXd e(lam.size());
  for (std::size_t j = 0; j < lam.size(); ++j) e(j) = std::exp(-lam[j] * t);
  return phi * e.asDiagonal() * phi.transpose();
}

Eigen::MatrixXd ModeEigs::kernel_d(double t) const {
  Eigen::VectorXd e(lam.size());
  for (std::size_t j = 0; j < lam.size(); ++j) e(j) = std::exp(-lam[j] * t);
  return dphi * e.asDiagonal() * phi.transpose();
}

double RadialKernelGrid::sup_at(std::size_t j) const {
  if (j == 0 || j >= at.size()) return 0.0;
  return at[j].cwiseAbs().maxCoeff();
}
double RadialKernelGrid::sup() const {
  double s = 0.0;
  for (std::size_t j = 1; j < at.size(); ++j) s = std::max(s, sup_at(j));
  return s;
}

namespace {

KernelGrid make_grid(const Profile& p, double r_hi, const ParametrixConfig& cfg) {
  std::set<double> nodes;
  const double bands[] = {3.0 / 4.0, 7.0 / 8.0, 15.0 / 16.0, 17.0 / 16.0, 9.0 / 8.0, 5.0 / 4.0};
  for (double b : bands) nodes.insert(b);
  std::size_t n0 = std::max<std::size_t>(8, std::llround(r_hi / cfg.grid_h));
  for (std::size_t i = 0; i <= n0; ++i) nodes.insert(r_hi * double(i) / double(n0));
  // finer sampling across the cutoff region
  std::size_t n1 = std::max<std::size_t>(8, std::llround(0.7 / cfg.band_h));
  for (std::size_t i = 0; i <= n1; ++i) nodes.insert(0.65 + 0.7 * double(i) / double(n1));
  KernelGrid g;
  for (double r : nodes)
    if (r <= r_hi + 1e-12) g.r.push_back(r);
  std::sort(g.r.begin(), g.r.end());
  g.f.resize(g.r.size());
  g.df.resize(g.r.size());
  g.w.assign(g.r.size(), 0.0);
  for (std::size_t i = 0; i < g.r.size(); ++i) {
    FDeriv v = p.eval(g.r[i]);
    g.f[i] = v.f;
    g.df[i] = v.df;
  }
  for (std::size_t i = 0; i < g.r.size(); ++i) {
    double left = i == 0 ? g.r[0] : g.r[i - 1];
    double right = i + 1 == g.r.size() ? g.r.back() : g.r[i + 1];
    g.w[i] = 0.5 * (right - left) * g.f[i];
  }
  return g;
}

// interpolate FEM nodal vectors onto grid points (P1), with derivative by
// centered differences on the kernel grid
void interp_modes(const ModeBundle& mb, const std::vector<double>& gr,
                  const std::function<double(double)>& map_r, double value_scale,
                  double lam_scale, double lam_max, int m_max, std::vector<ModeEigs>& out) {
  const auto& nodes = mb.mesh.nodes();
  auto interp = [&](const std::vector<double>& v, double x) {
    if (x <= nodes.front()) return v.front();
    if (x >= nodes.back()) return v.back();
    auto it = std::upper_bound(nodes.begin(), nodes.end(), x);
    std::size_t i = std::size_t(it - nodes.begin());
    double a = nodes[i - 1], b = nodes[i];
    double u = (x - a) / (b - a);
    return (1.0 - u) * v[i - 1] + u * v[i];
  };
  out.resize(std::min<std::size_t>(m_max, mb.modes.size()));
  for (std::size_t m = 0; m < out.size(); ++m) {
    const ModeData& md = mb.modes[m];
    std::vector<int> keep;
    for (std::size_t j = 0; j < md.vec.size(); ++j)
      if (md.lambda[j] * lam_scale <= lam_max) keep.push_back(int(j));
    ModeEigs me;
    me.lam.resize(keep.size());
    me.phi.resize(gr.size(), keep.size());
    me.dphi.resize(gr.size(), keep.size());
    for (std::size_t c = 0; c < keep.size(); ++c) {
      me.lam[c] = md.lambda[keep[c]] * lam_scale;
      for (std::size_t i = 0; i < gr.size(); ++i) {
        double x = map_r(gr[i]);
        me.phi(i, c) = (x <= nodes.back()) ? value_scale * interp(md.vec[keep[c]], x) : 0.0;
      }
    }
    // centered differences in the grid variable
    for (std::size_t c = 0; c < keep.size(); ++c) {
      for (std::size_t i = 0; i < gr.size(); ++i) {
        std::size_t i0 = i == 0 ? 0 : i - 1;
        std::size_t i1 = i + 1 == gr.size() ? i : i + 1;
        me.dphi(i, c) = (me.phi(i1, c) - me.phi(i0, c)) / (gr[i1] - gr[i0]);
      }
    }
    out[m] = std::move(me);
  }
}

}  // namespace

Components component_heat_kernels(const GluedSurface& g, const ParametrixConfig& cfg) {
  Components c;
  c.eps = g.epsilon;
  c.dt = cfg.dt;
  c.nt = int(std::llround(cfg.t_max / cfg.dt));
  c.m_max = cfg.m_max;

  double r_hi = g.omega0.r_max();
  c.grid = make_grid(g.profile, r_hi, cfg);

  double lam_max = 38.0 / cfg.dt;

  // Omega0 eigen-data (Friedrichs conic surface)
  MeshConfig mc = cfg.mesh;
  SpectrumResult so = full_spectrum(Surface::closed(g.omega0, "omega0"), lam_max, mc, true,
                                    cfg.workers);
  interp_modes(*so.modes, c.grid.r, [](double r) { return r; }, 1.0, 1.0, lam_max,
               cfg.m_max, c.omega0);
  c.eig_budget_err = 0.0;
  for (const auto& it : so.eigenvalues) c.eig_budget_err = std::max(c.eig_budget_err, it.err);

  // eps Z by parabolic scaling of a Dirichlet truncation of Z;
  // kernels are only used for r, r' <= 5/4 (cutoff supports)
  double tau_max = cfg.t_max / (g.epsilon * g.epsilon);
  double rho_need = 1.25 / g.epsilon;
  double Rz = rho_need + std::sqrt(21.0 * tau_max) + 1.0;
  double lam_z = lam_max * g.epsilon * g.epsilon;
  SpectrumResult sz = full_spectrum(Surface::truncation(g.z_profile, Rz, "ztrunc"), lam_z, mc,
                                    true, cfg.workers);
  double eps = g.epsilon;
  interp_modes(*sz.modes, c.grid.r, [eps](double r) { return r / eps; }, 1.0 / eps,
               1.0 / (eps * eps), lam_max, cfg.m_max, c.epsz);
  c.z_R = Rz;
  return c;
}

RadialKernelGrid build_parametrix(const Components& c, int m, const CutoffFamily& cuts) {
  const std::size_t N = c.grid.size();
  Eigen::VectorXd x1(N), x2(N), x1t(N), x2t(N);
  for (std::size_t i = 0; i < N; ++i) {
    x1(i) = cuts.chi1_v(c.grid.r[i]);
    x2(i) = cuts.chi2_v(c.grid.r[i]);
    x1t(i) = cuts.chi1t_v(c.grid.r[i]);
    x2t(i) = cuts.chi2t_v(c.grid.r[i]);
  }
  RadialKernelGrid out;
  out.at0 = RadialKernelGrid::Endpoint::Delta;
  out.dt = c.dt;
  out.at.resize(c.nt + 1);
  for (int j = 1; j <= c.nt; ++j) {
    double t = j * c.dt;
    Eigen::MatrixXd hz = c.epsz[m].kernel(t);
    Eigen::MatrixXd ho = c.omega0[m].kernel(t);
    out.at[j] = x1t.asDiagonal() * hz * x1.asDiagonal();
    out.at[j] += x2t.asDiagonal() * ho * x2.asDiagonal();
  }
  return out;
}

RadialKernelGrid error_kernel(const Components& c, int m, const CutoffFamily& cuts) {
  const std::size_t N = c.grid.size();
  Eigen::VectorXd x1(N), x2(N);
  Eigen::VectorXd v0a(N), v1a(N), v0b(N), v1b(N);
  for (std::size_t i = 0; i < N; ++i) {
    double r = c.grid.r[i];
    x1(i) = cuts.chi1_v(r);
    x2(i) = cuts.chi2_v(r);
    double fp_over_f = c.grid.df[i] / c.grid.f[i];
    v0a(i) = -cuts.chi1t_d2(r) - fp_over_f * cuts.chi1t_d1(r);
    v1a(i) = -2.0 * cuts.chi1t_d1(r);
    v0b(i) = -cuts.chi2t_d2(r) - fp_over_f * cuts.chi2t_d1(r);
    v1b(i) = -2.0 * cuts.chi2t_d1(r);
  }
  RadialKernelGrid out;
  out.at0 = RadialKernelGrid::Endpoint::Zero;
  out.dt = c.dt;
  out.at.resize(c.nt + 1);
  for (int j = 1; j <= c.nt; ++j) {
    double t = j * c.dt;
    Eigen::MatrixXd hz = c.epsz[m].kernel(t);
    Eigen::MatrixXd dhz = c.epsz[m].kernel_d(t);
    Eigen::MatrixXd ho = c.omega0[m].kernel(t);
    Eigen::MatrixXd dho = c.omega0[m].kernel_d(t);
    out.at[j] = (v0a.asDiagonal() * hz + v1a.asDiagonal() * dhz) * x1.asDiagonal();
    out.at[j] += (v0b.asDiagonal() * ho + v1b.asDiagonal() * dho) * x2.asDiagonal();
  }
  return out;
}

RadialKernelGrid t_convolve(const RadialKernelGrid& A, const RadialKernelGrid& B,
                            const KernelGrid& grid) {
  if (A.at.size() != B.at.size() || A.dt != B.dt)
    throw std::invalid_argument("t_convolve: incompatible grids");
  if (A.at0 == RadialKernelGrid::Endpoint::Delta &&
      B.at0 == RadialKernelGrid::Endpoint::Delta)
    throw std::invalid_argument("t_convolve: both factors singular at s-endpoints");
  const std::size_t N = grid.size();
  Eigen::VectorXd w(N);
  for (std::size_t i = 0; i < N; ++i) w(i) = grid.w[i];
  RadialKernelGrid out;
  out.at0 = RadialKernelGrid::Endpoint::Zero;
  out.dt = A.dt;
  out.at.assign(A.at.size(), Eigen::MatrixXd());
  const double dt = A.dt;
  for (std::size_t j = 1; j < A.at.size(); ++j) {
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(N, N);
    for (std::size_t i = 1; i < j; ++i) acc += A.at[j - i] * w.asDiagonal() * B.at[i];
    acc *= dt;
    // endpoint strips: s -> 0 uses B(0), s -> t uses A(0)
    if (B.at0 == RadialKernelGrid::Endpoint::Delta) acc += 0.5 * dt * A.at[j];
    if (A.at0 == RadialKernelGrid::Endpoint::Delta) acc += 0.5 * dt * B.at[j];
    out.at[j] = std::move(acc);
  }
  return out;
}

NeumannResult neumann_series(const RadialKernelGrid& E, const KernelGrid& grid, int k_max,
                             double tol) {
  if (k_max < 2) throw std::invalid_argument("neumann_series: k_max >= 2 required");
  NeumannResult out;
  out.K = E;
  out.term_sup.push_back(E.sup());
  RadialKernelGrid power = E;
  double sign = -1.0;
  for (int k = 2; k <= k_max; ++k) {
    power = t_convolve(power, E, grid);
    double s = power.sup();
    if (!out.term_sup.empty() && s > out.term_sup.back() * double(k) * 4.0 && s > 1e-10)
      throw std::runtime_error("neumann_series: non-decaying terms");
    out.term_sup.push_back(s);
    for (std::size_t j = 1; j < out.K.at.size(); ++j) out.K.at[j] += sign * power.at[j];
    sign = -sign;
    out.terms = k;
    if (s < tol) break;
  }
  return out;
}

double kernel_trace(const RadialKernelGrid& A, const KernelGrid& grid, std::size_t j) {
  if (j == 0 || j >= A.at.size()) throw std::invalid_argument("kernel_trace: bad index");
  double tr = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) tr += A.at[j](i, i) * grid.w[i];
  return tr;
}

ThreeTermReport reconstruct_and_compare(const GluedSurface& g, const SpectrumResult& spec_eps,
                                        const ParametrixConfig& cfg) {
  CutoffFamily cuts;
  Components c = component_heat_kernels(g, cfg);
  TailBoundCertificate cert = TailBoundCertificate::build(spec_eps);

  ThreeTermReport rep;
  std::vector<double> trG(c.nt + 1, 0.0), trEG(c.nt + 1, 0.0), trKEG(c.nt + 1, 0.0);
  std::vector<double> trG_half(c.nt + 1, 0.0), trEG_half(c.nt + 1, 0.0),
      trKEG_half(c.nt + 1, 0.0);
  double C0 = 0.0;
  std::vector<double> neumann_sup;

  for (int m = 0; m < c.m_max; ++m) {
    RadialKernelGrid G = build_parametrix(c, m, cuts);
    RadialKernelGrid E = error_kernel(c, m, cuts);
    RadialKernelGrid EG = t_convolve(E, G, c.grid);
    NeumannResult K = neumann_series(E, c.grid, 5, 1e-14);
    RadialKernelGrid KEG = t_convolve(K.K, EG, c.grid);
    C0 = std::max(C0, E.sup());
    if (neumann_sup.size() < K.term_sup.size()) neumann_sup.resize(K.term_sup.size(), 0.0);
    for (std::size_t k = 0; k < K.term_sup.size(); ++k)
      neumann_sup[k] = std::max(neumann_sup[k], K.term_sup[k]);

    double mode_tr = 0.0;
    for (int j = 1; j <= c.nt; ++j) {
      double a = kernel_trace(G, c.grid, j);
      trG[j] += a;
      trEG[j] += kernel_trace(EG, c.grid, j);
      trKEG[j] += kernel_trace(KEG, c.grid, j);
      mode_tr = std::max(mode_tr, std::abs(a));
    }
    // coarse-grid (2*dt) repeat of the convolutions for the quadrature error
    {
      RadialKernelGrid E2, G2;
      E2.at0 = E.at0;
      G2.at0 = G.at0;
      E2.dt = G2.dt = 2.0 * c.dt;
      int nh = c.nt / 2;
      E2.at.resize(nh + 1);
      G2.at.resize(nh + 1);
      for (int j = 1; j <= nh; ++j) {
        E2.at[j] = E.at[2 * j];
        G2.at[j] = G.at[2 * j];
      }
      RadialKernelGrid EG2 = t_convolve(E2, G2, c.grid);
      NeumannResult K2 = neumann_series(E2, c.grid, 5, 1e-14);
      RadialKernelGrid KEG2 = t_convolve(K2.K, EG2, c.grid);
      for (int j = 1; j <= nh; ++j) {
        trEG_half[2 * j] += kernel_trace(EG2, c.grid, j);
        trKEG_half[2 * j] += kernel_trace(KEG2, c.grid, j);
      }
    }
    if (m > 2 && mode_tr < 1e-12 * std::abs(trG[c.nt])) break;
  }

  WeightFunction wf{g.epsilon};
  (void)wf;
  // measured cutoff-region volume (z-support of E)
  double V = area(g.profile, 3.0 / 4.0, 7.0 / 8.0) + area(g.profile, 9.0 / 8.0, 5.0 / 4.0);

  for (int j = 1; j <= c.nt; ++j) {
    ThreeTermRow row;
    row.t = j * c.dt;
    row.trG = trG[j];
    row.trEG = trEG[j];
    row.trKEG = trKEG[j];
    row.total = trG[j] - trEG[j] + trKEG[j];
    row.trH = trace_from_spectrum(spec_eps, row.t, cert).value;
    double quad = 0.0;
    if (j % 2 == 0 && j > 0 && trEG_half[j] != 0.0)
      quad = (std::abs(trEG[j] - trEG_half[j]) + std::abs(trKEG[j] - trKEG_half[j])) / 3.0;
    row.quad_unc = quad + c.eig_budget_err + cert.tail(row.t);
    rep.rows.push_back(row);
  }
  // fill odd-index quadrature estimates from neighbors
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    if (rep.rows[i].quad_unc == 0.0) {
      double left = i > 0 ? rep.rows[i - 1].quad_unc : 0.0;
      double right = i + 1 < rep.rows.size() ? rep.rows[i + 1].quad_unc : 0.0;
      rep.rows[i].quad_unc = std::max(left, right);
    }
  }
  rep.neumann_sup = neumann_sup;
  rep.V_volume = V;
  rep.C0 = C0;
  return rep;
}

}  // namespace speclab
