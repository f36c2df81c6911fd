#include <doctest.h>

#include <cmath>

#include "../oracles/shooting.hpp"
#include "speclab/spectrum.hpp"

using namespace speclab;

namespace {
MeshConfig fine_cfg() {
  MeshConfig c;
  c.h0 = 0.01;
  return c;
}
}  // namespace

TEST_CASE("sphere mode eigenvalues: lambda = k(k+1)") {
  Profile s = build_omega0(1.0, "sphere");
  Surface surf = Surface::closed(s, "sphere");
  auto m0 = mode_eigenvalues(surf, 0, 50.0, fine_cfg());
  std::vector<double> exact{0, 2, 6, 12, 20, 30, 42};
  REQUIRE(m0.size() == exact.size());
  for (std::size_t i = 0; i < exact.size(); ++i) {
    CHECK(std::abs(m0[i].first - exact[i]) < 1e-6 * std::max(1.0, exact[i]));
  }
  auto m1 = mode_eigenvalues(surf, 1, 50.0, fine_cfg());
  std::vector<double> exact1{2, 6, 12, 20, 30, 42};
  REQUIRE(m1.size() == exact1.size());
  for (std::size_t i = 0; i < exact1.size(); ++i)
    CHECK(std::abs(m1[i].first - exact1[i]) < 1e-6 * exact1[i]);
}

TEST_CASE("sphere full spectrum: multiplicities 2k+1") {
  Profile s = build_omega0(1.0, "sphere");
  SpectrumResult res = full_spectrum(Surface::closed(s, "sphere"), 50.0, fine_cfg());
  REQUIRE(res.eigenvalues.size() >= 7);
  for (int k = 0; k <= 6; ++k) {
    CHECK(res.eigenvalues[k].multiplicity == 2 * k + 1);
    CHECK(std::abs(res.eigenvalues[k].lambda - k * (k + 1)) < 1e-6 * std::max(1, k * (k + 1)));
  }
  CHECK(res.complete_below_cutoff);
}

TEST_CASE("operator assembly: exact symmetry and constant kernel") {
  Profile p = build_omega0(0.7);
  Surface surf = Surface::closed(p, "omega0");
  Mesh mesh = Mesh::build(p, 0.0, p.r_max(), fine_cfg());
  ModeOperator op = assemble_mode(surf, mesh, 0);
  // K * 1 = 0 to machine precision, row by row
  double scale = 0.0;
  for (double v : op.kdiag) scale = std::max(scale, std::abs(v));
  for (std::size_t i = 0; i < op.n(); ++i) {
    double row = op.kdiag[i];
    if (i > 0) row += op.koff[i - 1];
    if (i + 1 < op.n()) row += op.koff[i];
    CHECK(std::abs(row) < 1e-12 * scale);
  }
}

TEST_CASE("gamma=0.7 omega0 m=0: mesh stability and shooting oracle") {
  Profile p = build_omega0(0.7);
  Surface surf = Surface::closed(p, "omega0");
  MeshConfig c1 = fine_cfg();
  MeshConfig c2 = fine_cfg();
  c2.refine = 1;
  auto e1 = mode_eigenvalues(surf, 0, 50.0, c1);
  auto e2 = mode_eigenvalues(surf, 0, 50.0, c2);
  REQUIRE(e1.size() == e2.size());
  for (std::size_t i = 1; i < e1.size(); ++i)
    CHECK(std::abs(e1[i].first - e2[i].first) < 1e-6 * e1[i].first);

  auto oracle = speclab_test::shoot_eigenvalues(p, 20.0);
  std::size_t matched = 0;
  for (std::size_t i = 1; i < e2.size() && e2[i].first < 20.0; ++i) {
    REQUIRE(matched < oracle.size());
    CHECK(std::abs(e2[i].first - oracle[matched]) < 2e-6 * e2[i].first);
    ++matched;
  }
  CHECK(matched >= 3);
}

TEST_CASE("Weyl ratio near the cutoff") {
  Profile p = build_omega0(0.7);
  SpectrumResult res = full_spectrum(Surface::closed(p, "omega0"), 120.0, fine_cfg());
  double count = 0;
  for (const auto& it : res.eigenvalues)
    if (it.lambda <= 120.0) count += it.multiplicity;
  double weyl = res.area * 120.0 / (4.0 * M_PI);
  CHECK(count / weyl > 0.95);
  CHECK(count / weyl < 1.05);
}

TEST_CASE("mode monotonicity in |m| and domain monotonicity in R") {
  Profile p = build_omega0(0.7);
  Surface surf = Surface::closed(p, "omega0");
  auto e1 = mode_eigenvalues(surf, 1, 60.0, fine_cfg());
  auto e2 = mode_eigenvalues(surf, 2, 60.0, fine_cfg());
  auto e3 = mode_eigenvalues(surf, 3, 60.0, fine_cfg());
  for (std::size_t i = 0; i < std::min(e1.size(), e2.size()); ++i)
    CHECK(e2[i].first >= e1[i].first - 1e-9);
  for (std::size_t i = 0; i < std::min(e2.size(), e3.size()); ++i)
    CHECK(e3[i].first >= e2[i].first - 1e-9);

  Profile z = build_Z(0.7);
  auto d1 = mode_eigenvalues(Surface::truncation(z, 6.0), 0, 40.0, fine_cfg());
  auto d2 = mode_eigenvalues(Surface::truncation(z, 9.0), 0, 40.0, fine_cfg());
  for (std::size_t i = 0; i < std::min(d1.size(), d2.size()); ++i)
    CHECK(d2[i].first <= d1[i].first + 1e-9);
}

TEST_CASE("mesh convergence at second order") {
  Profile s = build_omega0(1.0, "sphere");
  Surface surf = Surface::closed(s, "sphere");
  // raw (un-extrapolated) eigenvalue errors at lambda = 30 across h, h/2:
  // coarse/fine error ratio should approach 4
  MeshConfig c;
  c.h0 = 0.04;
  Mesh mc = Mesh::build(s, 0.0, s.r_max(), c);
  Mesh mf = mc.refined();
  auto lc = solve_tridiag(assemble_mode(surf, mc, 0), -1e-4, 40.0, false);
  auto lf = solve_tridiag(assemble_mode(surf, mf, 0), -1e-4, 40.0, false);
  double ec = std::abs(lc.lambda[5] - 30.0), ef = std::abs(lf.lambda[5] - 30.0);
  CHECK(ec / ef > 3.0);
  CHECK(ec / ef < 5.0);
}

TEST_CASE("glued-surface spectrum basics") {
  Profile om = build_omega0(0.7);
  Profile z = build_Z(0.7);
  SpectrumResult s0 = full_spectrum(Surface::closed(om, "omega0"), 50.0, fine_cfg());
  GluedSurface g = glue(om, z, 0.125);
  SpectrumResult se = full_spectrum(Surface::glued(g), 50.0, fine_cfg());
  CHECK(se.eigenvalues.front().lambda == doctest::Approx(0.0).epsilon(1e-8));
  CHECK(se.lambda1() >= 0.5 * s0.lambda1());  // uniform lower bound, Lemma-2.3 scale
}

TEST_CASE("spectral convergence report on the trivial family") {
  Profile om = build_omega0(1.0);
  Profile z = build_Z(1.0, "plane");
  SpectrumResult s0 = full_spectrum(Surface::closed(om, "omega0"), 40.0, fine_cfg());
  std::vector<std::pair<double, SpectrumResult>> fam;
  for (double eps : {0.25, 0.125}) {
    GluedSurface g = glue(om, z, eps);
    fam.push_back({eps, full_spectrum(Surface::glued(g), 40.0, fine_cfg())});
  }
  ConvergenceReport rep = spectral_convergence_report(fam, s0, 8);
  CHECK(std::abs(rep.rows[0].gap[0]) < 1e-10);  // i = 0: both zero modes
  for (int i = 0; i <= 8; ++i) CHECK(rep.extrapolated_gap[i] <= rep.disc_error[i] + 1e-9);
  CHECK_THROWS(spectral_convergence_report(fam, s0, 100000));
}
