#include "speclab/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace speclab {

std::uint64_t MeshConfig::hash() const {
  std::ostringstream os;
  os.precision(17);
  os << "mesh|h0=" << h0 << "|beta=" << beta << "|cap_h=" << cap_h << "|refine=" << refine;
  return fnv1a(os.str());
}

Mesh Mesh::build(const Profile& p, double r_lo, double r_hi, const MeshConfig& cfg,
                 double eps_cap, const std::vector<double>& forced_nodes) {
  if (!(r_hi > r_lo)) throw std::invalid_argument("Mesh::build: empty domain");
  if (!std::isfinite(r_hi)) throw std::invalid_argument("Mesh::build: unbounded domain");

  std::set<double> nodes;
  nodes.insert(r_lo);
  nodes.insert(r_hi);
  for (double b : p.breakpoints())
    if (b > r_lo && b < r_hi) nodes.insert(b);
  for (double b : forced_nodes)
    if (b > r_lo && b < r_hi) nodes.insert(b);

  const double h0 = cfg.h0;

  // base uniform grid
  std::size_t nu = std::max<std::size_t>(8, std::llround((r_hi - r_lo) / h0));
  for (std::size_t i = 1; i < nu; ++i) nodes.insert(r_lo + (r_hi - r_lo) * double(i) / double(nu));

  // conic-tip grading r ~ (i/N)^beta on [0, rc]; a gamma = 1 "tip" is a
  // smooth point and needs none.  Spacing is floored so the scaled
  // tridiagonal keeps a benign norm (eigenvalue roundoff ~ eps * ||B||).
  const double grade_floor = std::max(h0 / 8.0, 5e-4);
  bool tip_graded = p.left_end() == EndKind::ConicTip && std::abs(p.gamma() - 1.0) > 1e-12;
  if (tip_graded && r_lo == 0.0) {
    double rc = std::min(2.0, r_hi);
    std::size_t N1 = std::max<std::size_t>(8, std::llround(cfg.beta * rc / h0));
    double prev = 0.0;
    for (std::size_t i = 1; i < N1; ++i) {
      double r = rc * std::pow(double(i) / double(N1), cfg.beta);
      if (r - prev < grade_floor) continue;
      nodes.insert(r);
      prev = r;
    }
  }

  // glued cap: uniform at scale eps below 0.6*eps, graded bridge up to 2
  if (eps_cap > 0.0 && r_lo == 0.0) {
    double cap_end = 0.6 * eps_cap;
    std::size_t nc = std::max<std::size_t>(12, std::llround(0.6 / cfg.cap_h));
    for (std::size_t i = 1; i <= nc; ++i) nodes.insert(cap_end * double(i) / double(nc));
    double rc = std::min(2.0, r_hi);
    std::size_t N1 = std::max<std::size_t>(8, std::llround(cfg.beta * rc / h0));
    for (std::size_t i = 1; i < N1; ++i) {
      double r = rc * std::pow(double(i) / double(N1), cfg.beta);
      if (r > cap_end && r < r_hi) nodes.insert(r);
    }
  }

  // thin out nodes that crowd closer than a fraction of the local target
  std::vector<double> cand(nodes.begin(), nodes.end());
  std::set<double> keep_exact{r_lo, r_hi};
  for (double b : p.breakpoints())
    if (b > r_lo && b < r_hi) keep_exact.insert(b);
  for (double b : forced_nodes)
    if (b > r_lo && b < r_hi) keep_exact.insert(b);

  auto local_target = [&](double r) {
    double h = h0;
    if (tip_graded || eps_cap > 0.0) {
      double hg = h0 * std::pow(std::max(r, 1e-300) / std::min(2.0, r_hi), 1.0 - 1.0 / cfg.beta);
      h = std::min(h, std::max(hg, grade_floor));
    }
    if (eps_cap > 0.0 && r < 0.7 * eps_cap) h = std::min(h, eps_cap * cfg.cap_h);
    return h;
  };

  std::vector<double> out;
  out.push_back(cand.front());
  for (std::size_t i = 1; i < cand.size(); ++i) {
    double r = cand[i];
    bool forced = keep_exact.count(r) > 0;
    if (!forced && r - out.back() < 0.45 * local_target(r)) continue;
    // never drop a forced node; if the previous non-forced node crowds it, drop that instead
    if (forced && out.size() > 1 && !keep_exact.count(out.back()) &&
        r - out.back() < 0.25 * local_target(r))
      out.back() = r;
    else
      out.push_back(r);
  }

  Mesh m;
  m.prof_ = p;
  m.r_ = std::move(out);
  for (int k = 0; k < cfg.refine; ++k) m = m.refined();
  m.fill_caches();
  return m;
}

Mesh Mesh::refined() const {
  Mesh m;
  m.prof_ = prof_;
  m.r_.reserve(2 * r_.size());
  for (std::size_t i = 0; i + 1 < r_.size(); ++i) {
    m.r_.push_back(r_[i]);
    m.r_.push_back(0.5 * (r_[i] + r_[i + 1]));
  }
  m.r_.push_back(r_.back());
  m.fill_caches();
  return m;
}

void Mesh::fill_caches() {
  std::size_t ne = n_elems();
  qr_.resize(4 * ne);
  qf_.resize(4 * ne);
  qw_.resize(4 * ne);
  nf_.resize(r_.size());
  ndf_.resize(r_.size());
  static const double gx[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
                               0.8611363115940526};
  static const double gw[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461,
                               0.3478548451374538};
  fmax_ = 0.0;
  for (std::size_t i = 0; i < r_.size(); ++i) {
    FDeriv v = prof_.eval(r_[i]);
    nf_[i] = v.f;
    ndf_[i] = v.df;
    fmax_ = std::max(fmax_, v.f);
  }
  for (std::size_t e = 0; e < ne; ++e) {
    double a = r_[e], b = r_[e + 1];
    double c = 0.5 * (a + b), h = 0.5 * (b - a);
    for (int j = 0; j < 4; ++j) {
      double r = c + h * gx[j];
      qr_[4 * e + j] = r;
      qf_[4 * e + j] = prof_.f(r);
      qw_[4 * e + j] = gw[j] * h;
    }
  }
}

std::uint64_t Mesh::hash() const {
  std::ostringstream os;
  os.precision(17);
  os << prof_.describe() << "|n=" << r_.size() << "|r0=" << r_.front() << "|r1=" << r_.back();
  // fold in a few interior nodes; enough to distinguish gradings
  for (std::size_t i = 0; i < r_.size(); i += std::max<std::size_t>(1, r_.size() / 16))
    os << "," << r_[i];
  return fnv1a(os.str());
}

}  // namespace speclab
