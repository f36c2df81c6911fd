#pragma once
// Rotationally symmetric model geometries.
//
// A surface of revolution carries the metric dr^2 + f(r)^2 dtheta^2,
// theta in [0,2pi).  The cone parameter gamma corresponds to f(r) =
// gamma*r (total cone angle 2*pi*gamma).  Omega0 is a closed surface
// with a conic tip at r=0, exactly conic for r <= 2; Z is a complete
// scattering surface with a smooth pole at r=0, exactly conic for
// r >= 1/2.  Gluing replaces the r <= 1 part of Omega0 with the scaled
// cap eps*{Z : r <= 1/eps}.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "speclab/util.hpp"

namespace speclab {

struct CrossSection {
  double gamma = 1.0;  // circle of circumference 2*pi*gamma
  int dim_n = 2;       // only n = 2 supported
};

enum class EndKind { ConicTip, SmoothPole, ConicInfinity, Truncated };

struct FDeriv {
  double f = 0.0, df = 0.0, ddf = 0.0;
};

class Profile {
 public:
  using Fn = std::function<FDeriv(double)>;

  struct Piece {
    double a, b;
    Fn fn;
  };

  Profile() = default;
  Profile(double gamma, EndKind left, EndKind right, std::vector<Piece> pieces,
          std::pair<double, double> exact_conic, std::string desc);

  FDeriv eval(double r) const;
  double f(double r) const { return eval(r).f; }
  double df(double r) const { return eval(r).df; }
  double ddf(double r) const { return eval(r).ddf; }

  double gamma() const { return gamma_; }
  EndKind left_end() const { return left_; }
  EndKind right_end() const { return right_; }
  double r_min() const { return pieces_.front().a; }
  double r_max() const { return pieces_.back().b; }  // may be +inf
  bool unbounded() const { return !std::isfinite(r_max()); }
  std::pair<double, double> exact_conic_range() const { return exact_conic_; }

  // interior piece boundaries, for mesh/quadrature alignment
  std::vector<double> breakpoints() const;

  const std::string& describe() const { return desc_; }
  std::uint64_t hash() const;

 private:
  double gamma_ = 1.0;
  EndKind left_ = EndKind::SmoothPole, right_ = EndKind::SmoothPole;
  std::vector<Piece> pieces_;
  std::pair<double, double> exact_conic_{0.0, 0.0};
  std::string desc_;
};

struct CapParams {
  // "blend" family for Omega0: cap length l (R_top = 2 + l) and sine-cap
  // radius c; f = (1-w)*gamma*r + w*c*sin((R_top-r)/c) on [2, R_top].
  // For Z: blend window [a_z, 1/2]; f = (1-w)*c*sin(r/c) + w*gamma*r.
  double length = 3.0;
  double cap_radius = 1.5;
  double z_blend_start = 0.25;
  double z_cap_radius = 0.3;
};

// Closed conic surface: ConicTip(gamma) at r=0, smooth pole at R_top.
// Families: "blend" (default) and "sphere" (gamma=1, f=sin r; no conic tip,
// used as an analytic oracle).
Profile build_omega0(double gamma, const std::string& cap_family_id = "blend",
                     const CapParams& params = {});

// Scattering surface: smooth pole at r=0, f = gamma*r exactly for r >= 1/2.
// Families: "blend" (default) and "plane" (gamma=1, f=r, Z = R^2).
Profile build_Z(double gamma, const std::string& cap_family_id = "blend",
                const CapParams& params = {});

struct GluedSurface {
  double epsilon = 0.0;
  Profile profile;  // composite warp on [0, R_top]
  Profile omega0;
  Profile z_profile;
};

GluedSurface glue(const Profile& omega0, const Profile& z_profile, double epsilon);

// 2*pi * \int f dr by adaptive quadrature; throws on non-integrable input.
double area(const Profile& p);
double area(const Profile& p, double r0, double r1);
inline double area(const GluedSurface& g) { return area(g.profile); }

// K = -f''/f; near a pole the limit -f'''/f' is taken via a small offset.
double gauss_curvature(const Profile& p, double r);

// \int K dA over [r0, r1] (= -2*pi*[f']_{r0}^{r1} analytically; computed by
// quadrature of -2*pi*f'' so it doubles as a derivative-consistency check).
double total_curvature(const Profile& p, double r0, double r1);

// The paper's radial cutoffs.  chi1 = 1 on r<=15/16, 0 on r>=17/16,
// chi2 = 1-chi1; chi1t = 1 on r<=9/8, 0 on r>=5/4; chi2t = 0 on r<=3/4,
// 1 on r>=7/8 (the figure caption's "1 on r>=5/8" is inconsistent with
// supp V2 in (3/4,7/8) and is not used).
struct CutoffFamily {
  SmoothCutoff chi1{15.0 / 16.0, 17.0 / 16.0};
  SmoothCutoff chi1t{9.0 / 8.0, 5.0 / 4.0};
  SmoothCutoff chi2t_complement{3.0 / 4.0, 7.0 / 8.0};  // chi2t = 1 - this

  double chi1_v(double r) const { return chi1.value(r); }
  double chi2_v(double r) const { return 1.0 - chi1.value(r); }
  double chi1t_v(double r) const { return chi1t.value(r); }
  double chi2t_v(double r) const { return 1.0 - chi2t_complement.value(r); }

  double chi1_d1(double r) const { return chi1.d1(r); }
  double chi1_d2(double r) const { return chi1.d2(r); }
  double chi1t_d1(double r) const { return chi1t.d1(r); }
  double chi1t_d2(double r) const { return chi1t.d2(r); }
  double chi2t_d1(double r) const { return -chi2t_complement.d1(r); }
  double chi2t_d2(double r) const { return -chi2t_complement.d2(r); }
};

}  // namespace speclab
