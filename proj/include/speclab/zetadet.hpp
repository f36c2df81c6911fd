#pragma once
// Zeta function and zeta-regularized determinant via the Mellin split
//
//   Gamma(s) zeta(s) = \int_0^{T0} Tr H t^{s-1} dt - T0^s/s  (projection)
//                    + \int_{T0}^inf (Tr H - 1) t^{s-1} dt,
//
// T0 = b^2 * t_split.  The short-time piece is evaluated through the
// fitted expansion sum_k a_k t^{(k-n)/2} + K log t: each term has a
// closed-form Laurent contribution at s = 0 through 1/Gamma(s) =
// s + A2 s^2 + A3 s^3 + ... (A2 = Euler-Mascheroni), and the fitted
// remainder is integrated numerically on [t_lo, T0] where the trace tail
// is certified; below t_lo it is bounded, not computed.

#include <cstdint>
#include <functional>

#include "speclab/heattrace.hpp"

namespace speclab {

struct MellinConfig {
  double t_split = 1.0;
  double b = 1.0;  // T0 = b^2 * t_split; results must be b-independent
  double long_tmax = 40.0;
  int fit_kmax = 8;
  bool allow_log = true;
  bool project_explicitly = true;  // bookkeeping route only; value identical
  unsigned workers = 0;
};

struct ZetaResult {
  double pole_at_0 = 0.0;
  double zeta0 = 0.0;           // assembled
  double zeta0_identity = 0.0;  // a_n - dim ker
  double zeta_prime0 = 0.0;
  double log_det = 0.0;  // = -zeta_prime0
  double unc_zeta0 = 0.0;
  double unc_zeta_prime0 = 0.0;
  struct Diagnostics {
    double b = 1.0, T0 = 1.0;
    double t_lo = 0.0, t_hi = 0.0;
    double long_value = 0.0, long_quad_err = 0.0;
    double remainder_integral = 0.0, remainder_tail_bound = 0.0;
    double fit_cond = 0.0;
    double K_log = 0.0;
    double A2_used = 0.0;
  } diag;
  std::uint64_t config_hash = 0;
};

// zeta'_L(0) = \int_{T0}^inf (Tr H - 1) t^{-1} dt: adaptive quadrature on
// [T0, Tmax] closed by the analytic tail sum mult*E1(lambda*Tmax); the
// spectrum tail above the cutoff is bounded via the certificate.
double zeta_long_time(const SpectrumResult& s, const TailBoundCertificate& cert, double T0,
                      double Tmax, double* err_out = nullptr);

// closed-form Laurent contributions of the fitted short-time model over
// (0, T0], including the projection term, plus the numeric remainder.
struct ShortTimeZeta {
  double zeta0 = 0.0;
  double zeta_prime0 = 0.0;
  double pole = 0.0;
  double remainder_integral = 0.0;
  double remainder_tail_bound = 0.0;  // |contribution below t_lo| bound
  double unc = 0.0;                   // fit-coefficient sensitivity
};
ShortTimeZeta zeta_short_time(const AsymptoticFit& fit,
                              const std::function<double(double)>& trace, double T0,
                              double t_lo, bool project_explicitly);

ZetaResult det_laplacian(const SpectrumResult& s, const MellinConfig& cfg);

// direct sum for Re s > n/2 + margin; tail estimated from the certificate
struct DirectZeta {
  double value = 0.0;
  double tail_estimate = 0.0;
};
DirectZeta zeta_direct(const SpectrumResult& s, double s_arg);

// Mellin-assembled zeta(s) for real s > n/2 (cross-validation route):
// straight quadrature of the trace against t^{s-1} with analytic closures.
DirectZeta zeta_mellin_at(const SpectrumResult& s, double s_arg, const MellinConfig& cfg);

}  // namespace speclab
