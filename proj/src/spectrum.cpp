#include "speclab/spectrum.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "speclab/quadrature.hpp"

namespace speclab {

Surface Surface::closed(const Profile& p, std::string label) {
  if (p.unbounded()) throw std::invalid_argument("Surface::closed: profile is non-compact");
  Surface s;
  s.profile = p;
  s.r_lo = p.r_min();
  s.r_hi = p.r_max();
  s.dirichlet_right = false;
  s.label = label.empty() ? "closed" : std::move(label);
  return s;
}

Surface Surface::glued(const GluedSurface& g, std::string label) {
  Surface s = closed(g.profile, label.empty() ? "glued" : std::move(label));
  s.eps_cap = g.epsilon;
  return s;
}

Surface Surface::truncation(const Profile& z, double R, std::string label) {
  if (!(R > z.r_min())) throw std::invalid_argument("Surface::truncation: bad radius");
  Surface s;
  s.profile = z;
  s.r_lo = z.r_min();
  s.r_hi = R;
  s.dirichlet_right = true;
  s.label = label.empty() ? "truncation" : std::move(label);
  return s;
}

std::uint64_t Surface::hash() const {
  std::ostringstream os;
  os.precision(17);
  os << profile.describe() << "|lo=" << r_lo << "|hi=" << r_hi << "|dir=" << dirichlet_right;
  return fnv1a(os.str());
}

ModeOperator assemble_mode(const Surface& s, const Mesh& mesh, int m) {
  const std::size_t nn = mesh.n_nodes();
  // natural ends keep their node only for m = 0
  bool keep_left = (m == 0);
  bool keep_right = (m == 0) && !s.dirichlet_right;
  std::size_t dof0 = keep_left ? 0 : 1;
  std::size_t dof1 = keep_right ? nn - 1 : nn - 2;  // inclusive
  if (dof1 < dof0 || dof1 >= nn) throw std::runtime_error("assemble_mode: empty dof set");
  std::size_t n = dof1 - dof0 + 1;

  std::vector<double> kd(n, 0.0), ko(n > 0 ? n - 1 : 0, 0.0), mm(n, 0.0);
  const double m2 = double(m) * double(m);

  for (std::size_t e = 0; e + 1 < nn; ++e) {
    double a = mesh.node(e), b = mesh.node(e + 1), h = b - a;
    double sint = 0.0;                 // \int_e f dr
    double paa = 0.0, pab = 0.0, pbb = 0.0;  // m^2 \int phi_i phi_j / f dr
    double ma = 0.0, mb = 0.0;         // lumped masses
    for (int j = 0; j < 4; ++j) {
      double r = mesh.qr(e, j), f = mesh.qf(e, j), w = mesh.qw(e, j);
      double pb = (r - a) / h, pa = 1.0 - pb;
      sint += w * f;
      ma += w * pa * f;
      mb += w * pb * f;
      if (m != 0) {
        double winv = w * m2 / f;
        paa += winv * pa * pa;
        pab += winv * pa * pb;
        pbb += winv * pb * pb;
      }
    }
    double stiff = sint / (h * h);
    // scatter: local nodes e (a) and e+1 (b)
    auto dof = [&](std::size_t node) -> long {
      if (node < dof0 || node > dof1) return -1;
      return long(node - dof0);
    };
    long ia = dof(e), ib = dof(e + 1);
    if (ia >= 0) {
      kd[ia] += stiff + paa;
      mm[ia] += ma;
    }
    if (ib >= 0) {
      kd[ib] += stiff + pbb;
      mm[ib] += mb;
    }
    if (ia >= 0 && ib >= 0) ko[ia] += -stiff + pab;
  }

  ModeOperator op;
  op.kdiag = kd;
  op.koff = ko;
  op.mass = mm;
  op.dof0 = int(dof0);
  op.diag.resize(n);
  op.off.resize(n > 0 ? n - 1 : 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(mm[i] > 0.0)) throw std::runtime_error("assemble_mode: degenerate lumped mass");
    op.diag[i] = kd[i] / mm[i];
  }
  for (std::size_t i = 0; i + 1 < n; ++i) op.off[i] = ko[i] / std::sqrt(mm[i] * mm[i + 1]);
  return op;
}

DenseEigs solve_tridiag(const ModeOperator& op, double vl, double vu, bool vectors) {
  lapack_int n = lapack_int(op.n());
  DenseEigs out;
  if (n == 0) return out;
  std::vector<double> d = op.diag, e = op.off;
  e.resize(n, 0.0);
  std::vector<double> w(n);
  std::vector<double> z(vectors ? std::size_t(n) * n : 1);
  std::vector<lapack_int> isuppz(2 * std::size_t(n) + 2);
  lapack_int found = 0;
  lapack_int info = LAPACKE_dstevr(LAPACK_COL_MAJOR, vectors ? 'V' : 'N', 'V', n, d.data(),
                                   e.data(), vl, vu, 1, n, 1e-13, &found, w.data(), z.data(),
                                   n, isuppz.data());
  if (info != 0) throw std::runtime_error("dstevr failed, info=" + std::to_string(info));
  out.lambda.assign(w.begin(), w.begin() + found);
  if (vectors) {
    out.vec.resize(found);
    for (lapack_int k = 0; k < found; ++k) {
      out.vec[k].resize(n);
      for (lapack_int i = 0; i < n; ++i) {
        // back-transform D^{-1/2} v and mass-normalize: u^T M u = v^T v = 1
        out.vec[k][i] = z[std::size_t(k) * n + i] / std::sqrt(op.mass[i]);
      }
    }
  }
  return out;
}

namespace {

std::vector<std::pair<double, double>> richardson_pairs(const std::vector<double>& lc,
                                                        const std::vector<double>& lf,
                                                        double lambda_max) {
  std::vector<std::pair<double, double>> out;
  std::size_t n = std::min(lc.size(), lf.size());
  for (std::size_t i = 0; i < n; ++i) {
    double ext = (4.0 * lf[i] - lc[i]) / 3.0;
    double err = std::max(std::abs(lf[i] - lc[i]) / 3.0, 1e-14 * std::max(1.0, std::abs(ext)));
    if (ext <= lambda_max) out.push_back({ext, err});
  }
  return out;
}

}  // namespace

std::vector<std::pair<double, double>> mode_eigenvalues(const Surface& s, int m,
                                                        double lambda_max,
                                                        const MeshConfig& cfg) {
  Mesh coarse = Mesh::build(s.profile, s.r_lo, s.r_hi, cfg, s.eps_cap);
  Mesh fine = coarse.refined();
  double vu = lambda_max * 1.2 + 10.0;
  DenseEigs ec = solve_tridiag(assemble_mode(s, coarse, m), -1e-4, vu, false);
  DenseEigs ef = solve_tridiag(assemble_mode(s, fine, m), -1e-4, vu, false);
  auto pairs = richardson_pairs(ec.lambda, ef.lambda, lambda_max);
  for (const auto& [lam, err] : pairs) {
    if (err > 5e-3 * std::max(1.0, lam)) {
      std::ostringstream os;
      os << "mode_eigenvalues: mesh too coarse for m=" << m << " lambda=" << lam
         << " err=" << err << "; refine h0 below " << cfg.h0 / 2;
      throw std::runtime_error(os.str());
    }
  }
  return pairs;
}

SpectrumResult full_spectrum(const Surface& s, double lambda_max, const MeshConfig& cfg,
                             bool keep_vectors, unsigned workers) {
  Mesh coarse = Mesh::build(s.profile, s.r_lo, s.r_hi, cfg, s.eps_cap);
  Mesh fine = coarse.refined();
  double fmax = std::max(coarse.f_max(), fine.f_max());
  int m_max = int(std::floor(fmax * std::sqrt(lambda_max))) + 1;
  double vu = lambda_max * 1.2 + 10.0;

  struct PerMode {
    std::vector<std::pair<double, double>> eigs;
    std::vector<std::vector<double>> vec;
    int dof0 = 0;
  };
  std::vector<PerMode> per(m_max);

  parallel_for(std::size_t(m_max), [&](std::size_t mi) {
    int m = int(mi);
    ModeOperator oc = assemble_mode(s, coarse, m);
    ModeOperator of = assemble_mode(s, fine, m);
    DenseEigs ec = solve_tridiag(oc, -1e-4, vu, false);
    DenseEigs ef = solve_tridiag(of, -1e-4, vu, keep_vectors);
    per[mi].eigs = richardson_pairs(ec.lambda, ef.lambda, lambda_max);
    if (keep_vectors) {
      per[mi].vec.assign(ef.vec.begin(),
                         ef.vec.begin() + std::min(ef.vec.size(), per[mi].eigs.size()));
      per[mi].dof0 = of.dof0;
    }
  }, workers);

  // budget check (diagnostic, never silent)
  for (int m = 0; m < m_max; ++m)
    for (const auto& [lam, err] : per[m].eigs)
      if (err > 5e-3 * std::max(1.0, lam))
        throw std::runtime_error("full_spectrum: discretization budget exceeded at m=" +
                                 std::to_string(m) + " lambda=" + std::to_string(lam));

  // merge +-m; multiplicity 2 for m != 0
  struct Raw {
    double lam, err;
    int m, radial;
  };
  std::vector<Raw> raw;
  for (int m = 0; m < m_max; ++m)
    for (std::size_t j = 0; j < per[m].eigs.size(); ++j)
      raw.push_back({per[m].eigs[j].first, per[m].eigs[j].second, m, int(j)});
  std::sort(raw.begin(), raw.end(), [](const Raw& a, const Raw& b) { return a.lam < b.lam; });

  SpectrumResult out;
  out.lambda_cutoff = lambda_max;
  out.m_max = m_max;
  out.complete_below_cutoff = true;
  out.label = s.label;
  out.surface_hash = s.hash();
  out.mesh_hash = fine.hash() ^ cfg.hash();
  out.area = area(s.profile, s.r_lo, s.r_hi);

  for (std::size_t i = 0; i < raw.size();) {
    EigItem item;
    item.lambda = raw[i].lam;
    item.err = raw[i].err;
    item.m = raw[i].m;
    item.radial_index = raw[i].radial;
    item.multiplicity = raw[i].m == 0 ? 1 : 2;
    double wsum = raw[i].lam, werr = raw[i].err;
    int cnt = 1;
    std::size_t j = i + 1;
    while (j < raw.size()) {
      double tol = std::max(1e-9 * std::max(1.0, raw[j].lam), raw[j].err + raw[j - 1].err);
      if (raw[j].lam - raw[j - 1].lam > tol) break;
      item.multiplicity += raw[j].m == 0 ? 1 : 2;
      wsum += raw[j].lam;
      werr = std::max(werr, raw[j].err);
      ++cnt;
      if (std::abs(raw[j].m) < std::abs(item.m)) {
        item.m = raw[j].m;
        item.radial_index = raw[j].radial;
      }
      ++j;
    }
    item.lambda = wsum / cnt;
    item.err = werr;
    out.eigenvalues.push_back(item);
    i = j;
  }

  if (s.closed_surface()) {
    // exactly one kernel eigenvalue expected
    int zero_count = 0;
    for (const auto& it : out.eigenvalues)
      if (std::abs(it.lambda) < 1e-6) zero_count += it.multiplicity;
    if (zero_count != 1)
      throw std::runtime_error("full_spectrum: closed surface kernel has dimension " +
                               std::to_string(zero_count));
  }

  if (keep_vectors) {
    auto bundle = std::make_shared<ModeBundle>();
    bundle->mesh = fine;
    // full-node lumped mass: assemble once from the m=0 operator layout
    std::size_t nn = fine.n_nodes();
    bundle->lumped_mass.assign(nn, 0.0);
    for (std::size_t e = 0; e + 1 < nn; ++e) {
      double a = fine.node(e), b = fine.node(e + 1), h = b - a;
      for (int j = 0; j < 4; ++j) {
        double r = fine.qr(e, j), f = fine.qf(e, j), w = fine.qw(e, j);
        double pb = (r - a) / h;
        bundle->lumped_mass[e] += w * (1.0 - pb) * f;
        bundle->lumped_mass[e + 1] += w * pb * f;
      }
    }
    bundle->modes.resize(m_max);
    for (int m = 0; m < m_max; ++m) {
      ModeData md;
      md.m = m;
      md.dof0 = per[m].dof0;
      for (std::size_t j = 0; j < per[m].eigs.size(); ++j) {
        md.lambda.push_back(per[m].eigs[j].first);
        md.err.push_back(per[m].eigs[j].second);
        if (j < per[m].vec.size()) {
          // pad the dof vector to full mesh nodes
          std::vector<double> full(nn, 0.0);
          for (std::size_t i = 0; i < per[m].vec[j].size(); ++i)
            full[i + per[m].dof0] = per[m].vec[j][i];
          md.vec.push_back(std::move(full));
        }
      }
      bundle->modes[m] = std::move(md);
    }
    out.modes = bundle;
  }
  return out;
}

std::vector<double> SpectrumResult::expanded() const {
  std::vector<double> v;
  for (const auto& it : eigenvalues)
    for (int k = 0; k < it.multiplicity; ++k) v.push_back(it.lambda);
  return v;
}

double SpectrumResult::lambda1() const {
  for (const auto& it : eigenvalues)
    if (it.lambda > 1e-6) return it.lambda;
  throw std::runtime_error("lambda1: no positive eigenvalue below cutoff");
}

ConvergenceReport spectral_convergence_report(
    const std::vector<std::pair<double, SpectrumResult>>& family,
    const SpectrumResult& omega0_spectrum, int i_max) {
  std::vector<double> l0 = omega0_spectrum.expanded();
  if (int(l0.size()) <= i_max)
    throw std::invalid_argument("spectral_convergence_report: i_max exceeds certified range");
  ConvergenceReport rep;
  for (const auto& [eps, spec] : family) {
    std::vector<double> le = spec.expanded();
    if (int(le.size()) <= i_max)
      throw std::invalid_argument("spectral_convergence_report: i_max exceeds certified range");
    ConvergenceRow row;
    row.epsilon = eps;
    for (int i = 0; i <= i_max; ++i) row.gap.push_back(std::abs(le[i] - l0[i]));
    rep.rows.push_back(std::move(row));
  }
  // per-i monotonicity along the given (descending-eps) order
  for (int i = 0; i <= i_max; ++i) {
    bool mono = true;
    for (std::size_t k = 1; k < rep.rows.size(); ++k)
      if (rep.rows[k].gap[i] > rep.rows[k - 1].gap[i] + 1e-12) mono = false;
    rep.monotone.push_back(mono);
    rep.extrapolated_gap.push_back(rep.rows.back().gap[i]);
  }
  // combined discretization error per i (last family member + omega0)
  auto err_of = [&](const SpectrumResult& s, int i) {
    int k = 0;
    for (const auto& it : s.eigenvalues)
      for (int c = 0; c < it.multiplicity; ++c) {
        if (k == i) return it.err;
        ++k;
      }
    return 0.0;
  };
  for (int i = 0; i <= i_max; ++i)
    rep.disc_error.push_back(err_of(family.back().second, i) + err_of(omega0_spectrum, i));
  return rep;
}

}  // namespace speclab
