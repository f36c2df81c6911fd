#include <doctest.h>

#include <cmath>

#include "speclab/conekernel.hpp"
#include "speclab/heattrace.hpp"
#include "speclab/parametrix.hpp"
#include "speclab/special.hpp"

using namespace speclab;

namespace {

ParametrixConfig small_cfg() {
  ParametrixConfig c;
  c.dt = 0.05;
  c.t_max = 0.4;
  c.m_max = 10;
  c.grid_h = 0.05;
  c.band_h = 0.02;
  c.mesh.h0 = 0.02;
  return c;
}

// exact plane mode kernel (1/2t) e^{-(r-r')^2/4t} [e^{-z} I_m(z)], z = r r'/2t
double plane_mode_kernel(int m, double t, double r, double rp) {
  double z = r * rp / (2.0 * t);
  double gauss = std::exp(-(r - rp) * (r - rp) / (4.0 * t));
  return gauss * bessel_i_scaled(std::abs(double(m)), z) / (2.0 * t);
}

}  // namespace

TEST_CASE("weight functions R_eps and W_eps") {
  WeightFunction w{0.125};
  CHECK(w.R(0.01) == 0.125);
  CHECK(w.R(0.5) == 0.5);
  CHECK(w.R(3.0) == 1.0);
  CHECK(w.W(0.5) == 0.5);
  CHECK(w.W(1.4) == 1.4);
  CHECK(w.W(2.0) == 1.5);
}

TEST_CASE("parametrix support discipline and exact component regions") {
  Profile om = build_omega0(1.0);
  Profile z = build_Z(1.0, "plane");
  GluedSurface g = glue(om, z, 0.25);
  ParametrixConfig cfg = small_cfg();
  Components c = component_heat_kernels(g, cfg);
  CutoffFamily cuts;
  RadialKernelGrid G = build_parametrix(c, 0, cuts);
  RadialKernelGrid E = error_kernel(c, 0, cuts);

  auto idx_of = [&](double r) {
    std::size_t best = 0;
    for (std::size_t i = 0; i < c.grid.size(); ++i)
      if (std::abs(c.grid.r[i] - r) < std::abs(c.grid.r[best] - r)) best = i;
    return best;
  };
  std::size_t j = 4;  // some interior t index
  // r, r' <= 3/4: G = H^{eps Z} exactly
  std::size_t a = idx_of(0.3), b = idx_of(0.6);
  double hz = c.epsz[0].kernel(j * cfg.dt)(a, b);
  CHECK(G.at[j](a, b) == doctest::Approx(hz).epsilon(1e-13));
  // r, r' >= 5/4: G = H^{Omega0} exactly
  std::size_t p = idx_of(1.5), q = idx_of(2.5);
  double ho = c.omega0[0].kernel(j * cfg.dt)(p, q);
  CHECK(G.at[j](p, q) == doctest::Approx(ho).epsilon(1e-13));

  // E vanishes identically for z outside the commutator bands
  for (std::size_t i = 0; i < c.grid.size(); ++i) {
    double r = c.grid.r[i];
    bool in_band = (r > 0.75 && r < 0.875) || (r > 1.125 && r < 1.25);
    if (!in_band) {
      for (std::size_t col = 0; col < c.grid.size(); ++col) CHECK(E.at[j](i, col) == 0.0);
    }
  }
}

TEST_CASE("(dt + Delta)G = E at the discrete level") {
  Profile om = build_omega0(1.0);
  Profile zp = build_Z(1.0, "plane");
  GluedSurface g = glue(om, zp, 0.25);
  ParametrixConfig cfg = small_cfg();
  Components c = component_heat_kernels(g, cfg);
  CutoffFamily cuts;
  RadialKernelGrid G = build_parametrix(c, 0, cuts);
  RadialKernelGrid E = error_kernel(c, 0, cuts);
  // compare (d/dt + Delta_z)G against E at a band point (z in supp V2)
  auto idx_of = [&](double r) {
    std::size_t best = 0;
    for (std::size_t i = 0; i < c.grid.size(); ++i)
      if (std::abs(c.grid.r[i] - r) < std::abs(c.grid.r[best] - r)) best = i;
    return best;
  };
  std::size_t i = idx_of(0.8), col = idx_of(1.8);
  std::size_t j = 4;
  double t = j * cfg.dt;
  double dtG = (G.at[j + 1](i, col) - G.at[j - 1](i, col)) / (2.0 * cfg.dt);
  // Delta in r on the nonuniform grid (3-point)
  double r0 = c.grid.r[i - 1], r1 = c.grid.r[i], r2 = c.grid.r[i + 1];
  double u0 = G.at[j](i - 1, col), u1 = G.at[j](i, col), u2 = G.at[j](i + 1, col);
  double h1 = r1 - r0, h2 = r2 - r1;
  double upp = 2.0 * (h1 * u2 + h2 * u0 - (h1 + h2) * u1) / (h1 * h2 * (h1 + h2));
  double up = (u2 - u0) / (h1 + h2);
  FDeriv fv = g.profile.eval(r1);
  double lap = -(upp + fv.df / fv.f * up);
  double resid = dtG + lap - E.at[j](i, col);
  double scale = std::abs(dtG) + std::abs(lap) + 1e-12;
  CHECK(std::abs(resid) / scale < 0.1);
}

TEST_CASE("initial condition: G(t->0) acts as the identity on probes") {
  Profile om = build_omega0(1.0);
  Profile zp = build_Z(1.0, "plane");
  GluedSurface g = glue(om, zp, 0.25);
  ParametrixConfig cfg = small_cfg();
  cfg.dt = 0.00625;
  cfg.t_max = 0.05;
  Components c = component_heat_kernels(g, cfg);
  CutoffFamily cuts;
  RadialKernelGrid G = build_parametrix(c, 0, cuts);
  auto probe = [&](const std::function<double(double)>& f, double r_at, std::size_t j) {
    std::size_t i = 0;
    for (std::size_t k = 0; k < c.grid.size(); ++k)
      if (std::abs(c.grid.r[k] - r_at) < std::abs(c.grid.r[i] - r_at)) i = k;
    double acc = 0.0;
    for (std::size_t col = 0; col < c.grid.size(); ++col)
      acc += G.at[j](i, col) * f(c.grid.r[col]) * c.grid.w[col];
    return std::abs(acc - f(c.grid.r[i]));
  };
  auto f1 = [](double) { return 1.0; };
  auto f2 = [](double r) { return std::exp(-r); };
  auto f3 = [](double r) { return 1.0 / (1.0 + r * r); };
  for (auto f : {std::function<double(double)>(f1), std::function<double(double)>(f2),
                 std::function<double(double)>(f3)}) {
    double e_late = probe(f, 1.5, 4);
    double e_early = probe(f, 1.5, 1);
    CHECK(e_early < 0.05);
    CHECK(e_early <= e_late + 1e-3);
  }
}

TEST_CASE("t-convolution: rank-1 analytic check and trace cyclicity") {
  // rank-1 kernels a(t) P with P a projector in the discrete measure:
  // (A*B(t) = \int a(t-s)b(s) ds) P
  KernelGrid grid;
  for (int i = 0; i < 12; ++i) grid.r.push_back(0.2 * (i + 1));
  grid.f.assign(12, 1.0);
  grid.w.assign(12, 0.1);
  Eigen::VectorXd phi(12);
  for (int i = 0; i < 12; ++i) phi(i) = std::sin(0.3 * i) + 1.2;
  double nrm = 0.0;
  for (int i = 0; i < 12; ++i) nrm += phi(i) * phi(i) * grid.w[i];
  phi /= std::sqrt(nrm);
  Eigen::MatrixXd P = phi * phi.transpose();

  double dt = 0.0125;
  int nt = 32;
  RadialKernelGrid A, B;
  A.dt = B.dt = dt;
  A.at0 = B.at0 = RadialKernelGrid::Endpoint::Zero;
  A.at.resize(nt + 1);
  B.at.resize(nt + 1);
  for (int j = 1; j <= nt; ++j) {
    double t = j * dt;
    A.at[j] = t * P;
    B.at[j] = t * t * P;
  }
  RadialKernelGrid C = t_convolve(A, B, grid);
  for (int j = 8; j <= nt; j += 8) {
    double t = j * dt;
    double exact = t * t * t * t / 12.0;  // \int (t-s) s^2 ds
    double got = C.at[j](3, 7) / P(3, 7);
    CHECK(got == doctest::Approx(exact).epsilon(0.02));
  }
  // trace cyclicity within quadrature error
  RadialKernelGrid AB = t_convolve(A, B, grid);
  RadialKernelGrid BA = t_convolve(B, A, grid);
  for (int j : {8, 16, 32})
    CHECK(kernel_trace(AB, grid, j) ==
          doctest::Approx(kernel_trace(BA, grid, j)).epsilon(1e-10));
  // A = E-type, B = 0
  RadialKernelGrid Z0;
  Z0.dt = dt;
  Z0.at0 = RadialKernelGrid::Endpoint::Zero;
  Z0.at.assign(nt + 1, Eigen::MatrixXd::Zero(12, 12));
  RadialKernelGrid AZ = t_convolve(A, Z0, grid);
  CHECK(AZ.at[16].norm() == 0.0);
  // two delta endpoints are refused
  RadialKernelGrid D1 = A, D2 = B;
  D1.at0 = D2.at0 = RadialKernelGrid::Endpoint::Delta;
  CHECK_THROWS(t_convolve(D1, D2, grid));
}

TEST_CASE("neumann series: k=1 partial sum is E; factorial-envelope decay") {
  KernelGrid grid;
  for (int i = 0; i < 10; ++i) grid.r.push_back(0.1 * (i + 1));
  grid.f.assign(10, 1.0);
  grid.w.assign(10, 0.1);
  double dt = 0.025;
  int nt = 20;
  RadialKernelGrid E;
  E.dt = dt;
  E.at0 = RadialKernelGrid::Endpoint::Zero;
  E.at.resize(nt + 1);
  for (int j = 1; j <= nt; ++j) {
    double t = j * dt;
    E.at[j] = Eigen::MatrixXd::Constant(10, 10, 0.5 * t);
  }
  NeumannResult nr = neumann_series(E, grid, 5, 1e-300);
  CHECK(nr.term_sup[0] == doctest::Approx(0.5 * nt * dt));
  // measured envelope: ||E^{*(k+1)}|| / ||E^{*k}|| <= V C0 t / k
  double V = 0.0;
  for (double w : grid.w) V += w;
  double C0 = nr.term_sup[0];
  double T = nt * dt;
  for (std::size_t k = 1; k < nr.term_sup.size(); ++k) {
    double ratio = nr.term_sup[k] / nr.term_sup[k - 1];
    CHECK(ratio <= V * C0 * T / double(k) * 1.05 + 1e-12);
  }
  CHECK_THROWS(neumann_series(E, grid, 1, 1e-3));
}

TEST_CASE("Lemma 4.3 desk proxy: sup|E| decays superpolynomially (model kernels)") {
  // analytic plane-model assembly of E = V1 H chi1 + V2 H chi2; the
  // infinite-order window is t ~ gap^2 with gap = 1/16
  CutoffFamily cuts;
  auto model_sup_E = [&](double t) {
    double sup = 0.0;
    for (double r = 0.755; r < 1.25; r += 0.005) {
      double v1a = -cuts.chi1t_d2(r) - (1.0 / r) * cuts.chi1t_d1(r);
      double v1b = -2.0 * cuts.chi1t_d1(r);
      double v2a = -cuts.chi2t_d2(r) - (1.0 / r) * cuts.chi2t_d1(r);
      double v2b = -2.0 * cuts.chi2t_d1(r);
      for (double rp = 0.05; rp < 2.0; rp += 0.01) {
        // m-sum of mode kernels equals the angular max of the 2-d kernel
        double ker = 0.0, dker = 0.0;
        for (int m = 0; m < 60; ++m) {
          double mult = m == 0 ? 1.0 : 2.0;
          double k = plane_mode_kernel(m, t, r, rp);
          ker += mult * k;
          double h = 1e-5;
          dker += mult * (plane_mode_kernel(m, t, r + h, rp) -
                          plane_mode_kernel(m, t, r - h, rp)) /
                  (2 * h);
          if (m > 4 && std::abs(k) < 1e-18 * std::abs(ker)) break;
        }
        ker /= 2.0 * M_PI;
        dker /= 2.0 * M_PI;
        double e = (v1a * ker + v1b * dker) * cuts.chi1_v(rp) +
                   (v2a * ker + v2b * dker) * cuts.chi2_v(rp);
        sup = std::max(sup, std::abs(e));
      }
    }
    return sup;
  };
  std::vector<double> ts{2e-5, 4e-5, 8e-5, 1.6e-4}, sups;
  for (double t : ts) sups.push_back(model_sup_E(t));
  double slope = loglog_slope(ts, sups);
  MESSAGE("model sup|E| slope on [2e-5, 1.6e-4]: ", slope);
  CHECK(slope >= 3.0);
}

TEST_CASE("H^{eps Z} scaling vs direct eps Z solve") {
  // solve eps*Z directly as its own truncated surface and compare the
  // mode-0 heat kernel diagonal with the scaled Z kernel
  double eps = 0.25;
  Profile z = build_Z(0.7);
  GluedSurface g = glue(build_omega0(0.7), z, eps);
  ParametrixConfig cfg = small_cfg();
  cfg.mesh.h0 = 0.01;
  Components c = component_heat_kernels(g, cfg);

  // direct:  eps Z truncated at the same physical radius eps * z_R
  std::vector<Profile::Piece> pieces;
  double Rz = c.z_R;
  auto scaled = [z, eps](double r) {
    FDeriv v = z.eval(r / eps);
    return FDeriv{eps * v.f, v.df, v.ddf / eps};
  };
  pieces.push_back({0.0, eps * Rz, scaled});
  Profile ez(0.7, EndKind::SmoothPole, EndKind::Truncated, std::move(pieces), {0, 0}, "epsZ");
  MeshConfig mc;
  mc.h0 = 0.004;
  Surface s = Surface::truncation(ez, eps * Rz);
  Mesh mesh = Mesh::build(ez, 0.0, eps * Rz, mc);
  DenseEigs de = solve_tridiag(assemble_mode(s, mesh, 0), -1e-4, 38.0 / cfg.dt, true);

  double t = 0.2;
  double r_probe = 0.5;
  // direct diagonal at r_probe
  std::size_t ip = 0;
  for (std::size_t i = 0; i < mesh.n_nodes(); ++i)
    if (std::abs(mesh.node(i) - r_probe) < std::abs(mesh.node(ip) - r_probe)) ip = i;
  double direct = 0.0;
  for (std::size_t j = 0; j < de.lambda.size(); ++j)
    direct += std::exp(-de.lambda[j] * t) * de.vec[j][ip] * de.vec[j][ip];
  // scaled-Z kernel from the components
  std::size_t ig = 0;
  for (std::size_t i = 0; i < c.grid.size(); ++i)
    if (std::abs(c.grid.r[i] - r_probe) < std::abs(c.grid.r[ig] - r_probe)) ig = i;
  double scaled_val = c.epsz[0].kernel(t)(ig, ig);
  CHECK(scaled_val == doctest::Approx(direct).epsilon(5e-3));
}
