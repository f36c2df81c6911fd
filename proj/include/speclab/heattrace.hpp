#pragma once
// Heat traces from spectra with rigorous tails, short-time asymptotic
// fits, and the blown-up parameter quadrant Q0.

#include <functional>
#include <string>
#include <vector>

#include "speclab/spectrum.hpp"

namespace speclab {

// Q0: quadrant (sqrt t, eps) blown up at the origin.  Chart A = (sqrt tau,
// eps) near faces L/F (tau = t/eps^2); chart B = (eta, sqrt t) near R/F
// (eta = eps/sqrt t).
struct Q0Chart {
  struct A {
    double sqrt_tau, eps;
  };
  struct B {
    double eta, sqrt_t;
  };
  static A to_chart_a(double t, double eps);
  static B to_chart_b(double t, double eps);
  static std::pair<double, double> from_chart_a(const A& a);  // (t, eps)
  static std::pair<double, double> from_chart_b(const B& b);
};

enum class TraceSource { Spectral, Parametrix, Model };

struct HeatTraceSample {
  double t = 0.0;
  double epsilon = 0.0;
  double value = 0.0;
  double tail_bound = 0.0;   // rigorous remainder above the cutoff
  double uncertainty = 0.0;  // tail + discretization estimate
  TraceSource source = TraceSource::Spectral;
};

// Lemma-2.2/2.3 data: lambda_k >= Cp * k^{2/n} for k >= N0 (n = 2 here, so
// the tail sum closes geometrically).
struct TailBoundCertificate {
  int N0 = 0;
  double Cp = 0.0;      // C'
  double Ctilde = 0.0;  // counting bound N(lambda) <= Ctilde * lambda
  double lambda1 = 0.0;
  double lambda_cutoff = 0.0;
  std::size_t k_cutoff = 0;  // eigenvalues (with multiplicity) below cutoff

  static TailBoundCertificate build(const SpectrumResult& s);
  bool verify(const SpectrumResult& s) const;  // recheck every eigenvalue
  double tail(double t) const;                 // sum_{k >= k_cutoff} e^{-t Cp k}
  double required_lambda(double t, double tol) const;
};

HeatTraceSample trace_from_spectrum(const SpectrumResult& s, double t,
                                    const TailBoundCertificate& cert,
                                    double tail_tol = -1.0);

struct AsymptoticFit {
  int n = 2;
  std::vector<double> a;      // a[k] multiplies t^{(k-n)/2}
  std::vector<double> a_err;  // LS sigma + cross-window shift
  bool with_log = false;
  double K_log = 0.0, K_log_err = 0.0;
  double t_lo = 0.0, t_hi = 0.0;
  double residual_norm = 0.0;  // rms weighted residual
  double residual_max = 0.0;
  double cond = 0.0;

  double eval(double t) const;
};

// Weighted least squares in the basis {t^{(k-n)/2}}_{k=0..k_max} (+ log t);
// the window is [t_lo_auto, max t] unless overridden.  Throws if the basis
// is ill-conditioned on the window or the window spans < 1.5 decades.
AsymptoticFit fit_short_time(const std::vector<HeatTraceSample>& samples, int n,
                             bool allow_log, int k_max = 8, double t_lo = -1.0,
                             double t_hi = -1.0);

// Weighted trace sum_j e^{-lambda t} <w phi, phi> using the lumped-mass
// quadrature, so that chi1 + chi2 splits reproduce the plain trace exactly.
double weighted_trace(const SpectrumResult& s, const std::function<double(double)>& weight,
                      double t);
HeatTraceSample weighted_trace_sample(const SpectrumResult& s,
                                      const std::function<double(double)>& weight, double t,
                                      const TailBoundCertificate& cert);

// Theorem 1.3 residual R(eps,t) = Tr H^{Omega_eps}(t)
//   - int chi1(eps z) H^Z(t/eps^2, z, z) dz - int chi2(z) H^{Omega0}(t,z,z) dz.
// The two integral terms are supplied as callables returning (value, unc).
struct StructureTerms {
  std::function<HeatTraceSample(double)> trace_eps;              // t -> sample
  std::function<std::pair<double, double>(double)> z_weighted;   // tau -> (value, unc)
  std::function<HeatTraceSample(double)> omega0_chi2;            // t -> sample
};
struct StructureResidual {
  double t = 0.0, epsilon = 0.0;
  double R = 0.0;
  double uncertainty = 0.0;
  bool conclusive = false;  // |R| > uncertainty
};
StructureResidual structure_decomposition(double eps, const StructureTerms& terms, double t);

struct ConvTableRow {
  double t = 0.0;
  std::vector<double> gap;  // |Tr H_eps(t) - Tr H_0(t)| per eps
};
std::vector<ConvTableRow> htconv_check(
    const std::vector<std::pair<double, SpectrumResult>>& family,
    const SpectrumResult& omega0, const std::vector<double>& t_grid,
    const TailBoundCertificate& cert0);

// least-squares slope of log|y| vs log t (used for decay-order proxies)
double loglog_slope(const std::vector<double>& t, const std::vector<double>& y);

}  // namespace speclab
