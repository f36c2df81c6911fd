#pragma once
// Per-Fourier-mode Sturm-Liouville eigensolver.
//
// Mode m of the Laplacian on dr^2 + f^2 dtheta^2 is
//     A_m u = -(1/f)(f u')' + (m^2/f^2) u,
// symmetric w.r.t. the measure f dr.  Discretization: P1 finite elements
// with row-sum mass lumping (equivalently, a self-adjoint second-order
// finite-difference scheme), fixed repo-wide.  Boundary conditions:
// smooth pole / Friedrichs conic tip: m = 0 natural, m != 0 Dirichlet;
// artificial truncations: Dirichlet.  Eigenvalues are extrapolated from
// two nested meshes (Richardson, h^2 scheme).

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "speclab/mesh.hpp"

namespace speclab {

struct Surface {
  Profile profile;
  double r_lo = 0.0;
  double r_hi = 0.0;            // domain end; = profile.r_max() when closed
  bool dirichlet_right = false; // artificial truncation
  double eps_cap = 0.0;         // glued structure scale (mesh hint)
  std::string label;

  static Surface closed(const Profile& p, std::string label = "");
  static Surface glued(const GluedSurface& g, std::string label = "");
  static Surface truncation(const Profile& z, double R, std::string label = "");
  bool closed_surface() const { return !dirichlet_right; }
  std::uint64_t hash() const;
};

struct EigItem {
  double lambda = 0.0;
  double err = 0.0;  // Richardson discretization estimate
  int multiplicity = 1;
  int m = 0;          // representative angular mode
  int radial_index = 0;
};

// Per-mode eigendata on the fine mesh (kept only when requested).
struct ModeData {
  int m = 0;
  std::vector<double> lambda;       // extrapolated values
  std::vector<double> err;
  std::vector<std::vector<double>> vec;  // fine-mesh nodal values, u^T M u = 1
  int dof0 = 0;                     // first mesh node carried by the dof vector
};

struct ModeBundle {
  Mesh mesh;                          // fine mesh
  std::vector<double> lumped_mass;    // M_i on the fine mesh (all nodes)
  std::vector<ModeData> modes;        // index = m
};

struct SpectrumResult {
  std::vector<EigItem> eigenvalues;   // sorted, +-m merged
  double lambda_cutoff = 0.0;
  int m_max = 0;                      // modes 0..m_max-1 solved
  bool complete_below_cutoff = false;
  double area = 0.0;
  std::uint64_t surface_hash = 0, mesh_hash = 0;
  std::string label;
  std::shared_ptr<const ModeBundle> modes;  // null unless keep_vectors

  // eigenvalues expanded by multiplicity (ascending), for tail work
  std::vector<double> expanded() const;
  double lambda1() const;  // smallest positive eigenvalue
};

// Eigenvalues of one mode below lambda_max: (lambda, err) pairs, ascending.
// Throws if the mesh cannot certify the requested accuracy budget.
std::vector<std::pair<double, double>> mode_eigenvalues(const Surface& s, int m,
                                                        double lambda_max,
                                                        const MeshConfig& cfg);

SpectrumResult full_spectrum(const Surface& s, double lambda_max, const MeshConfig& cfg,
                             bool keep_vectors = false, unsigned workers = 0);

struct ConvergenceRow {
  double epsilon;
  std::vector<double> gap;  // |lambda_{eps,i} - lambda_{0,i}|, i = 0..i_max
};
struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;       // one per epsilon, as given
  std::vector<bool> monotone;             // per i: gaps nonincreasing along rows
  std::vector<double> extrapolated_gap;   // last-row gap
  std::vector<double> disc_error;         // combined discretization error per i
};

ConvergenceReport spectral_convergence_report(
    const std::vector<std::pair<double, SpectrumResult>>& family,
    const SpectrumResult& omega0_spectrum, int i_max);

// internals shared with tests: assembled tridiagonal operator
struct ModeOperator {
  std::vector<double> diag, off;   // symmetric tridiagonal (after mass scaling)
  std::vector<double> mass;        // lumped mass per dof
  std::vector<double> kdiag, koff; // raw stiffness+potential tridiagonal
  int dof0 = 0;                    // mesh node index of dof 0
  std::size_t n() const { return diag.size(); }
};
ModeOperator assemble_mode(const Surface& s, const Mesh& mesh, int m);

// eigen-solve of the assembled operator on [vl, vu]; vectors optional
struct DenseEigs {
  std::vector<double> lambda;
  std::vector<std::vector<double>> vec;  // nodal (mass-normalized) if requested
};
DenseEigs solve_tridiag(const ModeOperator& op, double vl, double vu, bool vectors);

}  // namespace speclab
