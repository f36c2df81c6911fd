#pragma once
// Epsilon-sweep of the glued family: measured log det against the
// degeneration prediction
//   log det(Omega_eps) = (L/2)(log eps)^2 - 2 log eps ^Rzeta_Z(0)
//                        + log det(Omega_0) + log ^Rdet(Z) + o(1).

#include <vector>

#include "speclab/renorm.hpp"
#include "speclab/zetadet.hpp"

namespace speclab {

struct DegenerationConfig {
  Profile omega0;
  Profile z;
  std::vector<double> epsilons;  // descending, in (0, 1/2)
  double lambda_max = 400.0;
  MeshConfig mesh;
  MellinConfig mellin;
  std::vector<double> renorm_small_taus;  // small-tau grid (for ^RTr fits)
  std::vector<double> renorm_large_taus;  // large-tau grid (f_infty window)
  RenormSolverConfig renorm_small, renorm_large;
  bool fit_eps_power = false;  // optional o(1) model c3 * eps^delta
  unsigned workers = 0;
};

struct SweepRow {
  double eps = 0.0;
  double log_det = 0.0;
  double unc = 0.0;
  double zeta0 = 0.0;
};

struct SweepModel {
  double c2 = 0.0, c1 = 0.0, c0 = 0.0;
  double c2_err = 0.0, c1_err = 0.0, c0_err = 0.0;
  double c3 = 0.0, delta = 0.0;  // optional o(1) term
  double residual = 0.0;
};

struct Prediction {
  double half_L = 0.0;          // coefficient of (log eps)^2
  double minus2_rzeta0 = 0.0;   // coefficient of log eps
  double c0 = 0.0;              // log det Omega0 + log ^Rdet Z
  double c0_unc = 0.0, c1_unc = 0.0;
  std::vector<double> coeff_cancel;      // (-a_k + a~_k + D_k), k = 0..n-1
  std::vector<double> coeff_cancel_unc;
  double f_identity = 0.0;      // -a_n + a~_n - L l_log + f_infty
  double f_identity_unc = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  SweepModel fit;
  SweepModel fit_drop_largest;
  Prediction pred;
  ZetaResult omega0_det;
  RenormZeta rzeta;
  ExpansionCoefficients coeffs;
  AsymptoticFit omega0_fit;       // a_k of Tr H^{Omega0}
  AsymptoticFit omega0_chi2_fit;  // a~_k of the chi2-weighted trace
  bool agree_c1 = false, agree_c0 = false, agree_c2 = false;
};

SweepModel fit_sweep(const std::vector<SweepRow>& rows, bool with_eps_power);

Prediction prediction(const ZetaResult& omega0_det, const RenormZeta& rz,
                      const ExpansionCoefficients& coeffs, const AsymptoticFit& a_fit,
                      const AsymptoticFit& a_chi2_fit);

SweepResult run_sweep(const DegenerationConfig& cfg);

}  // namespace speclab
