#include "speclab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "speclab/quadrature.hpp"

namespace speclab {

Profile::Profile(double gamma, EndKind left, EndKind right, std::vector<Piece> pieces,
                 std::pair<double, double> exact_conic, std::string desc)
    : gamma_(gamma),
      left_(left),
      right_(right),
      pieces_(std::move(pieces)),
      exact_conic_(exact_conic),
      desc_(std::move(desc)) {
  if (pieces_.empty()) throw std::invalid_argument("Profile: no pieces");
  for (std::size_t i = 0; i + 1 < pieces_.size(); ++i)
    if (pieces_[i].b != pieces_[i + 1].a)
      throw std::invalid_argument("Profile: pieces not contiguous");
}

FDeriv Profile::eval(double r) const {
  // clamp to the closed domain; callers stay inside by construction
  if (r <= pieces_.front().a) return pieces_.front().fn(pieces_.front().a);
  for (const auto& p : pieces_)
    if (r <= p.b) return p.fn(r);
  return pieces_.back().fn(r);
}

std::vector<double> Profile::breakpoints() const {
  std::vector<double> bp;
  for (std::size_t i = 0; i + 1 < pieces_.size(); ++i) bp.push_back(pieces_[i].b);
  return bp;
}

std::uint64_t Profile::hash() const { return fnv1a(desc_); }

namespace {

Profile::Fn cone_fn(double gamma) {
  return [gamma](double r) { return FDeriv{gamma * r, gamma, 0.0}; };
}

// c*sin((R-r)/c): smooth pole at r=R with f'= -1, f''(R)=0.
Profile::Fn sine_pole_fn(double R, double c) {
  return [R, c](double r) {
    double u = (R - r) / c;
    return FDeriv{c * std::sin(u), -std::cos(u), -std::sin(u) / c};
  };
}

// c*sin(r/c): smooth pole at r=0 with f'=1.
Profile::Fn sine_origin_fn(double c) {
  return [c](double r) {
    double u = r / c;
    return FDeriv{c * std::sin(u), std::cos(u), -std::sin(u) / c};
  };
}

// Blend g0 -> g1 over [a,b] with the degree-7 smoothstep:
// f = (1-w) g0 + w g1,  w = S((r-a)/(b-a)).
Profile::Fn blend_fn(Profile::Fn g0, Profile::Fn g1, double a, double b) {
  return [g0 = std::move(g0), g1 = std::move(g1), a, b](double r) {
    double L = b - a, u = (r - a) / L;
    double w = Smoothstep7::value(u);
    double w1 = Smoothstep7::d1(u) / L;
    double w2 = Smoothstep7::d2(u) / (L * L);
    FDeriv p = g0(r), q = g1(r);
    FDeriv out;
    out.f = (1.0 - w) * p.f + w * q.f;
    out.df = (1.0 - w) * p.df + w * q.df + w1 * (q.f - p.f);
    out.ddf = (1.0 - w) * p.ddf + w * q.ddf + 2.0 * w1 * (q.df - p.df) + w2 * (q.f - p.f);
    return out;
  };
}

void check_positive(const Profile& p, double a, double b) {
  const int N = 4000;
  for (int i = 1; i < N; ++i) {
    double r = a + (b - a) * double(i) / N;
    if (!(p.f(r) > 0.0)) throw std::runtime_error("profile not positive at r=" + std::to_string(r));
  }
}

std::string cap_desc(const char* kind, double gamma, const std::string& fam,
                     const CapParams& cp) {
  std::ostringstream os;
  os.precision(17);
  os << kind << "|gamma=" << gamma << "|family=" << fam << "|l=" << cp.length
     << "|c=" << cp.cap_radius << "|za=" << cp.z_blend_start << "|zc=" << cp.z_cap_radius;
  return os.str();
}

}  // namespace

Profile build_omega0(double gamma, const std::string& family, const CapParams& cp) {
  if (!(gamma > 0)) throw std::invalid_argument("build_omega0: gamma must be positive");
  if (family == "sphere") {
    if (std::abs(gamma - 1.0) > 1e-14)
      throw std::invalid_argument("sphere family requires gamma = 1");
    std::vector<Profile::Piece> pieces{{0.0, M_PI, [](double r) {
                                          return FDeriv{std::sin(r), std::cos(r), -std::sin(r)};
                                        }}};
    return Profile(1.0, EndKind::SmoothPole, EndKind::SmoothPole, std::move(pieces), {0.0, 0.0},
                   cap_desc("omega0", 1.0, family, cp));
  }
  if (family != "blend") throw std::invalid_argument("unknown cap family: " + family);
  double l = cp.length, c = cp.cap_radius;
  if (!(l > 0) || !(c > 0)) throw std::invalid_argument("build_omega0: bad cap params");
  double R = 2.0 + l;
  if (l / c >= M_PI)
    throw std::invalid_argument("build_omega0: need cap_radius > length/pi for positivity");
  std::vector<Profile::Piece> pieces;
  pieces.push_back({0.0, 2.0, cone_fn(gamma)});
  pieces.push_back({2.0, R, blend_fn(cone_fn(gamma), sine_pole_fn(R, c), 2.0, R)});
  Profile p(gamma, EndKind::ConicTip, EndKind::SmoothPole, std::move(pieces), {0.0, 2.0},
            cap_desc("omega0", gamma, family, cp));
  check_positive(p, 0.0, R);
  double dfR = p.df(R);
  if (std::abs(std::abs(dfR) - 1.0) > 1e-12)
    throw std::runtime_error("build_omega0: cap fails |f'(R_top)| = 1");
  return p;
}

Profile build_Z(double gamma, const std::string& family, const CapParams& cp) {
  if (!(gamma > 0)) throw std::invalid_argument("build_Z: gamma must be positive");
  const double inf = std::numeric_limits<double>::infinity();
  if (family == "plane") {
    if (std::abs(gamma - 1.0) > 1e-14)
      throw std::invalid_argument("plane family requires gamma = 1");
    std::vector<Profile::Piece> pieces{{0.0, inf, cone_fn(1.0)}};
    return Profile(1.0, EndKind::SmoothPole, EndKind::ConicInfinity, std::move(pieces),
                   {0.0, inf}, cap_desc("Z", 1.0, family, cp));
  }
  if (family != "blend") throw std::invalid_argument("unknown cap family: " + family);
  double a = cp.z_blend_start, c = cp.z_cap_radius;
  if (!(a > 0) || !(a < 0.5) || !(c > 0.5 / M_PI))
    throw std::invalid_argument("build_Z: bad cap params");
  std::vector<Profile::Piece> pieces;
  pieces.push_back({0.0, a, sine_origin_fn(c)});
  pieces.push_back({a, 0.5, blend_fn(sine_origin_fn(c), cone_fn(gamma), a, 0.5)});
  pieces.push_back({0.5, inf, cone_fn(gamma)});
  Profile p(gamma, EndKind::SmoothPole, EndKind::ConicInfinity, std::move(pieces), {0.5, inf},
            cap_desc("Z", gamma, family, cp));
  check_positive(p, 0.0, 2.0);
  return p;
}

GluedSurface glue(const Profile& omega0, const Profile& z_profile, double epsilon) {
  if (!(epsilon > 0.0) || !(epsilon < 0.5))
    throw std::invalid_argument("glue: epsilon must lie in (0, 1/2)");
  if (std::abs(omega0.gamma() - z_profile.gamma()) > 1e-14)
    throw std::invalid_argument("glue: gamma mismatch");
  bool omega_conic = omega0.exact_conic_range().first <= 1e-300 &&
                     omega0.exact_conic_range().second >= 2.0;
  bool z_conic = z_profile.exact_conic_range().first <= 0.5 && z_profile.unbounded();
  if (!omega_conic || !z_conic)
    throw std::invalid_argument("glue: profiles lack the required exact conic ranges");

  // scaled cap branch: f(r) = eps * f_Z(r/eps) for r <= 1
  // (profiles are captured by value so the composite owns its pieces)
  auto scaled = [z = z_profile, epsilon](double r) {
    FDeriv v = z.eval(r / epsilon);
    return FDeriv{epsilon * v.f, v.df, v.ddf / epsilon};
  };

  std::vector<Profile::Piece> pieces;
  double prev = 0.0;
  std::vector<double> zb = z_profile.breakpoints();
  for (double b : zb) {
    double rb = b * epsilon;
    if (rb <= 0.0 || rb >= 1.0) continue;
    pieces.push_back({prev, rb, scaled});
    prev = rb;
  }
  pieces.push_back({prev, 1.0, scaled});
  prev = 1.0;
  auto base = [om = omega0](double r) { return om.eval(r); };
  for (double b : omega0.breakpoints()) {
    if (b <= 1.0 || b >= omega0.r_max()) continue;
    pieces.push_back({prev, b, base});
    prev = b;
  }
  pieces.push_back({prev, omega0.r_max(), base});

  std::ostringstream os;
  os.precision(17);
  os << "glued|eps=" << epsilon << "|" << omega0.describe() << "|" << z_profile.describe();
  Profile composite(omega0.gamma(), EndKind::SmoothPole, EndKind::SmoothPole, std::move(pieces),
                    {epsilon * z_profile.exact_conic_range().first, 2.0}, os.str());

  // both branches must be gamma*r on the overlap, to machine precision
  double g = omega0.gamma();
  for (int i = 0; i <= 64; ++i) {
    double r = std::max(epsilon * 0.55, 0.7) + i * (2.0 - 0.7) / 64.0;
    if (r > 2.0) break;
    double fz = (r <= 1.0) ? composite.f(r) : g * r;
    double fo = omega0.f(r);
    double ref = std::max(1.0, g * r);
    if (std::abs(fz - g * r) > 1e-12 * ref || std::abs(fo - g * r) > 1e-12 * ref)
      throw std::runtime_error("glue: overlap residual exceeds machine tolerance");
  }
  return GluedSurface{epsilon, std::move(composite), omega0, z_profile};
}

double area(const Profile& p, double r0, double r1) {
  if (!std::isfinite(r1)) throw std::invalid_argument("area: unbounded range");
  std::vector<double> pts{r0};
  for (double b : p.breakpoints())
    if (b > r0 && b < r1) pts.push_back(b);
  pts.push_back(r1);
  auto f = [&p](double r) { return p.f(r); };
  QuadResult q = integrate_segmented(f, pts, 1e-12, 1e-14);
  if (q.error > 1e-8 * std::max(1.0, std::abs(q.value)))
    throw std::runtime_error("area: quadrature failed to converge");
  return 2.0 * M_PI * q.value;
}

double area(const Profile& p) {
  if (p.unbounded()) throw std::invalid_argument("area: profile is non-compact");
  return area(p, p.r_min(), p.r_max());
}

double gauss_curvature(const Profile& p, double r) {
  FDeriv v = p.eval(r);
  if (v.f > 1e-8) return -v.ddf / v.f;
  // near a pole, move slightly inward; K extends continuously
  double h = 1e-6 * std::max(1.0, std::abs(p.r_max()));
  double rr = (r - p.r_min() < (std::isfinite(p.r_max()) ? p.r_max() : 1e300) - r) ? r + h : r - h;
  FDeriv w = p.eval(rr);
  if (w.f <= 0.0) throw std::domain_error("gauss_curvature: degenerate point");
  return -w.ddf / w.f;
}

double total_curvature(const Profile& p, double r0, double r1) {
  std::vector<double> pts{r0};
  for (double b : p.breakpoints())
    if (b > r0 && b < r1) pts.push_back(b);
  pts.push_back(r1);
  auto integrand = [&p](double r) { return -p.eval(r).ddf; };
  QuadResult q = integrate_segmented(integrand, pts, 1e-12, 1e-14);
  return 2.0 * M_PI * q.value;
}

}  // namespace speclab
