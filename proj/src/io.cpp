#include "speclab/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace speclab {

using ordered_json = nlohmann::ordered_json;

std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void write_text(const std::string& path, const std::string& content) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << content;
}

std::string profile_csv(const Profile& p, int n) {
  std::string out = "r,f,fp,fpp\n";
  double hi = p.unbounded() ? 4.0 : p.r_max();
  for (int i = 0; i <= n; ++i) {
    double r = p.r_min() + (hi - p.r_min()) * double(i) / n;
    FDeriv v = p.eval(r);
    out += fmt_g(r) + "," + fmt_g(v.f) + "," + fmt_g(v.df) + "," + fmt_g(v.ddf) + "\n";
  }
  return out;
}

std::string spectrum_csv(const SpectrumResult& s) {
  std::string out = "lambda,m,radial_index,multiplicity,error\n";
  for (const auto& it : s.eigenvalues)
    out += fmt_g(it.lambda) + "," + std::to_string(it.m) + "," + std::to_string(it.radial_index) +
           "," + std::to_string(it.multiplicity) + "," + fmt_g(it.err) + "\n";
  return out;
}

std::string spectrum_json(const SpectrumResult& s) {
  ordered_json j;
  j["label"] = s.label;
  j["lambda_cutoff"] = s.lambda_cutoff;
  j["m_max"] = s.m_max;
  j["complete_below_cutoff"] = s.complete_below_cutoff;
  j["area"] = s.area;
  j["surface_hash"] = hash_hex(s.surface_hash);
  j["mesh_hash"] = hash_hex(s.mesh_hash);
  ordered_json arr = ordered_json::array();
  for (const auto& it : s.eigenvalues) {
    ordered_json e;
    e["lambda"] = it.lambda;
    e["m"] = it.m;
    e["radial_index"] = it.radial_index;
    e["multiplicity"] = it.multiplicity;
    e["error"] = it.err;
    arr.push_back(e);
  }
  j["eigenvalues"] = arr;
  return j.dump(2) + "\n";
}

std::string samples_csv(const std::vector<HeatTraceSample>& samples, double eps) {
  std::string out = "t,eps,tau,eta,value,tail_bound\n";
  for (const auto& s : samples) {
    double tau = eps > 0 ? s.t / (eps * eps) : 0.0;
    double eta = eps > 0 ? eps / std::sqrt(s.t) : 0.0;
    out += fmt_g(s.t) + "," + fmt_g(eps) + "," + fmt_g(tau) + "," + fmt_g(eta) + "," +
           fmt_g(s.value) + "," + fmt_g(s.tail_bound) + "\n";
  }
  return out;
}

std::string zeta_json(const ZetaResult& z) {
  ordered_json j;
  j["zeta0"] = z.zeta0;
  j["zeta0_identity"] = z.zeta0_identity;
  j["zeta_prime0"] = z.zeta_prime0;
  j["log_det"] = z.log_det;
  j["pole_at_0"] = z.pole_at_0;
  j["uncertainties"] = {{"zeta0", z.unc_zeta0}, {"zeta_prime0", z.unc_zeta_prime0}};
  j["diagnostics"] = {{"b", z.diag.b},
                      {"T0", z.diag.T0},
                      {"t_lo", z.diag.t_lo},
                      {"t_hi", z.diag.t_hi},
                      {"long_value", z.diag.long_value},
                      {"long_quad_err", z.diag.long_quad_err},
                      {"remainder_integral", z.diag.remainder_integral},
                      {"remainder_tail_bound", z.diag.remainder_tail_bound},
                      {"fit_cond", z.diag.fit_cond},
                      {"K_log", z.diag.K_log},
                      {"A2", z.diag.A2_used}};
  j["config_hash"] = hash_hex(z.config_hash);
  return j.dump(2) + "\n";
}

std::string renorm_csv(const RenormTrace& rt) {
  std::string out = "tau,rtrace,uncertainty,certified\n";
  for (std::size_t i = 0; i < rt.tau.size(); ++i)
    out += fmt_g(rt.tau[i]) + "," + fmt_g(rt.value[i]) + "," + fmt_g(rt.unc[i]) + "," +
           (rt.certified[i] ? "1" : "0") + "\n";
  return out;
}

std::string renorm_zeta_json(const RenormZeta& rz) {
  ordered_json j;
  j["pole"] = rz.pole;
  j["rzeta0"] = rz.rzeta0;
  j["rzeta_prime0"] = rz.rzeta_prime0;
  j["log_rdet"] = rz.log_rdet;
  j["uncertainties"] = {{"rzeta0", rz.unc0}, {"rzeta_prime0", rz.unc1}};
  j["f_infty"] = rz.large_fit.f_infty;
  j["f_infty_err"] = rz.large_fit.f_infty_err;
  j["c_log"] = rz.large_fit.c_log;
  ordered_json small = ordered_json::array();
  for (std::size_t k = 0; k < rz.small_fit.a.size(); ++k) small.push_back(rz.small_fit.a[k]);
  j["small_tau_coefficients"] = small;
  return j.dump(2) + "\n";
}

std::string sweep_csv(const SweepResult& r) {
  std::string out = "eps,log_det,uncertainty,zeta0\n";
  for (const auto& row : r.rows)
    out += fmt_g(row.eps) + "," + fmt_g(row.log_det) + "," + fmt_g(row.unc) + "," +
           fmt_g(row.zeta0) + "\n";
  return out;
}

std::string sweep_fit_json(const SweepResult& r) {
  ordered_json j;
  j["c2"] = r.fit.c2;
  j["c1"] = r.fit.c1;
  j["c0"] = r.fit.c0;
  j["c2_err"] = r.fit.c2_err;
  j["c1_err"] = r.fit.c1_err;
  j["c0_err"] = r.fit.c0_err;
  j["residual"] = r.fit.residual;
  j["drop_largest"] = {{"c2", r.fit_drop_largest.c2},
                       {"c1", r.fit_drop_largest.c1},
                       {"c0", r.fit_drop_largest.c0}};
  if (r.fit.delta > 0) j["eps_power"] = {{"c3", r.fit.c3}, {"delta", r.fit.delta}};
  return j.dump(2) + "\n";
}

std::string sweep_prediction_json(const SweepResult& r) {
  ordered_json j;
  j["half_L"] = r.pred.half_L;
  j["minus2_rzeta0"] = r.pred.minus2_rzeta0;
  j["c0"] = r.pred.c0;
  j["c0_unc"] = r.pred.c0_unc;
  j["c1_unc"] = r.pred.c1_unc;
  j["log_det_omega0"] = r.omega0_det.log_det;
  j["log_rdet_z"] = r.rzeta.log_rdet;
  j["coeff_cancellation"] = r.pred.coeff_cancel;
  j["coeff_cancellation_unc"] = r.pred.coeff_cancel_unc;
  j["f_identity"] = r.pred.f_identity;
  j["f_identity_unc"] = r.pred.f_identity_unc;
  j["agree_c2"] = r.agree_c2;
  j["agree_c1"] = r.agree_c1;
  j["agree_c0"] = r.agree_c0;
  return j.dump(2) + "\n";
}

std::string sweep_plotdata(const SweepResult& r) {
  std::string out = "# log_eps log_det fit_value uncertainty\n";
  for (const auto& row : r.rows) {
    double le = std::log(row.eps);
    double model = r.fit.c2 * le * le + r.fit.c1 * le + r.fit.c0 +
                   (r.fit.delta > 0 ? r.fit.c3 * std::pow(row.eps, r.fit.delta) : 0.0);
    out += fmt_g(le) + " " + fmt_g(row.log_det) + " " + fmt_g(model) + " " + fmt_g(row.unc) +
           "\n";
  }
  return out;
}

std::string threeterm_csv(const ThreeTermReport& rep) {
  std::string out = "t,trG,trEG,trKEG,total,trH,quad_unc\n";
  for (const auto& row : rep.rows)
    out += fmt_g(row.t) + "," + fmt_g(row.trG) + "," + fmt_g(row.trEG) + "," +
           fmt_g(row.trKEG) + "," + fmt_g(row.total) + "," + fmt_g(row.trH) + "," +
           fmt_g(row.quad_unc) + "\n";
  return out;
}

}  // namespace speclab
