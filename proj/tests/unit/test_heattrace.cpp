#include <doctest.h>

#include <cmath>

#include "speclab/conekernel.hpp"
#include "speclab/heattrace.hpp"

using namespace speclab;

namespace {

// synthetic spectrum with exact data (multiplicity 2k+1, lambda = k(k+1))
SpectrumResult sphere_synthetic(double lambda_max) {
  SpectrumResult s;
  s.lambda_cutoff = lambda_max;
  s.area = 4.0 * M_PI;
  s.label = "sphere-exact";
  s.complete_below_cutoff = true;
  for (int k = 0;; ++k) {
    double lam = double(k) * (k + 1);
    if (lam > lambda_max) break;
    EigItem it;
    it.lambda = lam;
    it.err = 0.0;
    it.multiplicity = 2 * k + 1;
    it.m = 0;
    it.radial_index = k;
    s.eigenvalues.push_back(it);
  }
  s.m_max = int(std::sqrt(lambda_max)) + 1;
  return s;
}

}  // namespace

TEST_CASE("Q0 chart transitions are exact") {
  for (double t : {0.01, 0.3, 2.0}) {
    for (double eps : {0.03, 0.125, 0.4}) {
      auto a = Q0Chart::to_chart_a(t, eps);
      auto [ta, ea] = Q0Chart::from_chart_a(a);
      CHECK(ta == doctest::Approx(t).epsilon(1e-14));
      CHECK(ea == eps);
      auto b = Q0Chart::to_chart_b(t, eps);
      auto [tb, eb] = Q0Chart::from_chart_b(b);
      CHECK(tb == doctest::Approx(t).epsilon(1e-14));
      CHECK(eb == doctest::Approx(eps).epsilon(1e-14));
      // tau * eps^2 = t and eta * sqrt(t) = eps
      CHECK(a.sqrt_tau * a.sqrt_tau * eps * eps == doctest::Approx(t).epsilon(1e-14));
      CHECK(b.eta * std::sqrt(t) == doctest::Approx(eps).epsilon(1e-14));
    }
  }
}

TEST_CASE("certificate and tail bounds on the exact sphere") {
  SpectrumResult s = sphere_synthetic(600.0);
  TailBoundCertificate cert = TailBoundCertificate::build(s);
  CHECK(cert.verify(s));
  CHECK(cert.lambda1 == doctest::Approx(2.0));
  // trace at t=1: 1 + 3 e^{-2} + 5 e^{-6} + ...
  HeatTraceSample smp = trace_from_spectrum(s, 1.0, cert);
  double exact = 0.0;
  for (int k = 0; k < 40; ++k) exact += (2 * k + 1) * std::exp(-double(k) * (k + 1));
  CHECK(smp.value == doctest::Approx(exact).epsilon(1e-14));
  CHECK(smp.tail_bound < 1e-200);
  // t -> infinity: value -> 1 exponentially
  CHECK(trace_from_spectrum(s, 10.0, cert).value - 1.0 < 3.1 * std::exp(-20.0) * 1.01);
  // refusal with required-lambda diagnostic
  CHECK_THROWS(trace_from_spectrum(s, 1e-4, cert, 1e-9));
}

TEST_CASE("t * Tr H -> Area/4pi on the sphere") {
  SpectrumResult s = sphere_synthetic(20000.0);
  TailBoundCertificate cert = TailBoundCertificate::build(s);
  // Richardson extrapolate t*TrH at t, t/2 to remove the O(t) term
  double t = 4e-3;
  double v1 = t * trace_from_spectrum(s, t, cert).value;
  double v2 = (t / 2) * trace_from_spectrum(s, t / 2, cert).value;
  double extrap = 2.0 * v2 - v1;
  CHECK(extrap == doctest::Approx(1.0).epsilon(2e-5));  // Area/4pi = 1
}

TEST_CASE("fitter recovers the Taylor coefficients of e^{-t}") {
  // samples of exp(-t): in the half-power basis a2 = 1, a4 = -1, a6 = 1/2
  std::vector<HeatTraceSample> samples;
  for (double t = 0.01; t <= 1.0; t *= 1.15) {
    HeatTraceSample s;
    s.t = t;
    s.value = std::exp(-t);
    s.tail_bound = 0.0;
    s.uncertainty = 1e-12;
    samples.push_back(s);
  }
  AsymptoticFit fit = fit_short_time(samples, 2, false, 8, 0.01, 1.0);
  CHECK(std::abs(fit.a[0]) < 1e-8);
  CHECK(std::abs(fit.a[1]) < 1e-7);
  CHECK(fit.a[2] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std::abs(fit.a[3]) < 1e-4);
  CHECK(fit.a[4] == doctest::Approx(-1.0).epsilon(1e-3));
}

TEST_CASE("sphere short-time fit: a0 = 1, a1 = 0, a2 = 1/3") {
  SpectrumResult s = sphere_synthetic(20000.0);
  TailBoundCertificate cert = TailBoundCertificate::build(s);
  std::vector<HeatTraceSample> samples;
  for (double t = 2e-3; t <= 2.0; t *= std::pow(10.0, 0.05))
    samples.push_back(trace_from_spectrum(s, t, cert));
  AsymptoticFit fit = fit_short_time(samples, 2, true, 8);
  CHECK(fit.a[0] == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(std::abs(fit.a[1]) < 1e-5);
  CHECK(fit.a[2] == doctest::Approx(1.0 / 3.0).epsilon(1e-4));
  CHECK(std::abs(fit.K_log) < 1e-5);
  // window stability is folded into the reported errors
  CHECK(fit.a_err[2] < 1e-3);
}

TEST_CASE("monotonicity and uniform bound of the trace") {
  SpectrumResult s = sphere_synthetic(600.0);
  TailBoundCertificate cert = TailBoundCertificate::build(s);
  double prev = 1e300;
  for (double t = 0.05; t <= 8.0; t *= 1.5) {
    double v = trace_from_spectrum(s, t, cert).value;
    CHECK(v < prev);
    prev = v;
    CHECK(t * v < 2.0);  // Lemma 2.2 shape: t^{n/2} Tr H bounded
  }
  // counting bound N(lambda) <= Ctilde * lambda on the computed range
  double count = 0.0;
  for (const auto& it : s.eigenvalues) {
    count += it.multiplicity;
    if (it.lambda >= 1.0) CHECK(count <= cert.Ctilde * it.lambda);
  }
}

TEST_CASE("loglog slope helper") {
  std::vector<double> t, y;
  for (double x = 0.01; x < 1.0; x *= 2) {
    t.push_back(x);
    y.push_back(3.0 * x * x * x);
  }
  CHECK(loglog_slope(t, y) == doctest::Approx(3.0).epsilon(1e-12));
}
