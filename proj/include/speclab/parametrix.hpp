#pragma once
// Numerical realization of the gluing construction: parametrix G, error
// kernel E, t-convolution, Neumann series K, and the three-term trace
// identity Tr H = Tr G - Tr(E*G) + Tr(K*(E*G)).
//
// Everything is mode-resolved: a rotationally invariant operator has
// kernel A(t,z,z') = sum_m A_m(t,r,r') e^{im(th-th')}/(2pi), composition
// is (A o B)_m = \int A_m(r,rho) B_m(rho,r') f(rho) drho, and traces are
// sum_m \int A_m(r,r) f dr.  Kernels are tabulated on a shared radial
// grid and a uniform t-grid; t-convolution is the product-trapezoid
// Volterra rule on that grid with analytic handling of the delta (G) and
// vanishing (E) endpoints.  Validation-only; never on the determinant
// critical path.

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "speclab/spectrum.hpp"

namespace speclab {

// weight functions of the convergence/decay arguments (a = 0 throughout)
struct WeightFunction {
  double epsilon = 0.0;
  double R(double r) const {  // eps for r<=eps, r in [eps,1], 1 outside
    return r <= epsilon ? epsilon : (r <= 1.0 ? r : 1.0);
  }
  double W(double r) const {  // r between eps and 3/2, 3/2 outside
    return r <= epsilon ? epsilon : (r <= 1.5 ? r : 1.5);
  }
};

struct KernelGrid {
  std::vector<double> r;
  std::vector<double> w;       // trapezoid weights for \int . f dr
  std::vector<double> f, df;
  std::size_t size() const { return r.size(); }
};

struct ModeEigs {
  std::vector<double> lam;
  Eigen::MatrixXd phi;   // grid values, N x k
  Eigen::MatrixXd dphi;  // radial derivative on the grid
  Eigen::MatrixXd kernel(double t) const;               // phi e^{-lam t} phi^T
  Eigen::MatrixXd kernel_d(double t) const;             // d/dr rows
};

// one mode-resolved time-tabulated kernel
struct RadialKernelGrid {
  enum class Endpoint { Zero, Delta };
  Endpoint at0 = Endpoint::Zero;
  std::vector<Eigen::MatrixXd> at;  // index j >= 1 -> t_j = j*dt; at[0] unused
  double dt = 0.0;
  double sup() const;
  double sup_at(std::size_t j) const;
};

struct Components {
  KernelGrid grid;
  double eps = 0.0;
  double dt = 0.0;
  int nt = 0;  // kernels at t_j, j=1..nt
  std::vector<ModeEigs> omega0;  // index m
  std::vector<ModeEigs> epsz;
  int m_max = 0;
  double z_R = 0.0;    // Z truncation radius used
  double eig_budget_err = 0.0;
};

struct ParametrixConfig {
  double dt = 0.025;
  double t_max = 0.5;
  int m_max = 32;
  double grid_h = 0.025;
  double band_h = 0.0125;
  MeshConfig mesh;
  unsigned workers = 0;
};

// component kernels H^{Omega0} and H^{eps Z} (the latter by parabolic
// scaling of a Dirichlet-truncated Z solve)
Components component_heat_kernels(const GluedSurface& g, const ParametrixConfig& cfg);

// G_m(t) = chi1t Hz chi1 + chi2t Ho chi2, one mode
RadialKernelGrid build_parametrix(const Components& c, int m, const CutoffFamily& cuts);
// E_m(t) = V1 Hz chi1 + V2 Ho chi2 with V = [Delta, chi~] first order
RadialKernelGrid error_kernel(const Components& c, int m, const CutoffFamily& cuts);

// product-trapezoid Volterra convolution on the shared grids
RadialKernelGrid t_convolve(const RadialKernelGrid& A, const RadialKernelGrid& B,
                            const KernelGrid& grid);

struct NeumannResult {
  RadialKernelGrid K;
  std::vector<double> term_sup;    // sup norm of E^{*k} per k (on the grid)
  int terms = 0;
};
NeumannResult neumann_series(const RadialKernelGrid& E, const KernelGrid& grid, int k_max,
                             double tol);

double kernel_trace(const RadialKernelGrid& A, const KernelGrid& grid, std::size_t j);

struct ThreeTermRow {
  double t = 0.0;
  double trG = 0.0, trEG = 0.0, trKEG = 0.0;
  double total = 0.0;   // trG - trEG + trKEG
  double trH = 0.0;     // spectral truth
  double quad_unc = 0.0;
};
struct ThreeTermReport {
  std::vector<ThreeTermRow> rows;
  std::vector<double> neumann_sup;  // sup|E^{*k}|, k = 1..
  double V_volume = 0.0;            // measured cutoff-region volume
  double C0 = 0.0;                  // measured sup|E|
};

ThreeTermReport reconstruct_and_compare(const GluedSurface& g, const SpectrumResult& spec_eps,
                                        const ParametrixConfig& cfg);

}  // namespace speclab
