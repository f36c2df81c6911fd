#pragma once
// Graded 1-D meshes for the radial mode problems.
//
// Near a conic tip the nodes follow r ~ (i/N)^beta (default beta = 2),
// which restores second-order eigenvalue convergence for the r^{|m|/gamma}
// eigenfunction behavior; glued surfaces additionally carry a uniform
// grid at the cap scale eps.  Element integrals are cached at 4-point
// Gauss-Legendre points.

#include <cstdint>
#include <memory>
#include <vector>

#include "speclab/geometry.hpp"

namespace speclab {

struct MeshConfig {
  double h0 = 0.02;    // base spacing
  double beta = 2.0;   // conic-tip grading exponent
  double cap_h = 0.01; // spacing in z-units inside a glued cap
  int refine = 0;      // extra uniform refinements applied at build time
  std::uint64_t hash() const;
};

class Mesh {
 public:
  static Mesh build(const Profile& p, double r_lo, double r_hi, const MeshConfig& cfg,
                    double eps_cap = 0.0, const std::vector<double>& forced_nodes = {});
  Mesh refined() const;  // midpoint split of every element

  std::size_t n_nodes() const { return r_.size(); }
  std::size_t n_elems() const { return r_.size() - 1; }
  const std::vector<double>& nodes() const { return r_; }
  double node(std::size_t i) const { return r_[i]; }
  const Profile& profile() const { return prof_; }

  // quadrature caches: element e, GL4 point j -> index 4*e+j
  double qr(std::size_t e, int j) const { return qr_[4 * e + j]; }
  double qf(std::size_t e, int j) const { return qf_[4 * e + j]; }
  double qw(std::size_t e, int j) const { return qw_[4 * e + j]; }
  double nodal_f(std::size_t i) const { return nf_[i]; }
  double nodal_df(std::size_t i) const { return ndf_[i]; }

  double f_max() const { return fmax_; }
  std::uint64_t hash() const;

 private:
  void fill_caches();
  Profile prof_;
  std::vector<double> r_;
  std::vector<double> qr_, qf_, qw_;  // GL4 abscissae, f values, weights*jacobian
  std::vector<double> nf_, ndf_;
  double fmax_ = 0.0;
};

}  // namespace speclab
