#include "speclab/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace speclab {

namespace {
std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// strip a trailing comment that is not inside a string
std::string strip_comment(const std::string& s) {
  bool in_str = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') in_str = !in_str;
    if (s[i] == '#' && !in_str) return s.substr(0, i);
  }
  return s;
}
}  // namespace

Toml Toml::parse(const std::string& text) {
  Toml out;
  std::istringstream is(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw std::runtime_error("toml: bad section at line " +
                                                       std::to_string(lineno));
      section = trim(line.substr(1, line.size() - 2));
      if (section.find('.') != std::string::npos)
        throw std::runtime_error("toml: nested tables unsupported (line " +
                                 std::to_string(lineno) + ")");
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("toml: expected key = value at line " + std::to_string(lineno));
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key.empty() || val.empty())
      throw std::runtime_error("toml: empty key or value at line " + std::to_string(lineno));
    std::string full = section.empty() ? key : section + "." + key;
    out.values_[full] = val;
  }
  return out;
}

Toml Toml::parse_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open config file: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse(ss.str());
}

double Toml::num(const std::string& key, double def) const {
  auto it = values_.find(key);
  if (it == values_.end()) return def;
  return std::stod(it->second);
}

double Toml::num_req(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw std::runtime_error("missing required config key: " + key);
  return std::stod(it->second);
}

std::string Toml::str(const std::string& key, const std::string& def) const {
  auto it = values_.find(key);
  if (it == values_.end()) return def;
  std::string v = it->second;
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') return v.substr(1, v.size() - 2);
  return v;
}

bool Toml::flag(const std::string& key, bool def) const {
  auto it = values_.find(key);
  if (it == values_.end()) return def;
  if (it->second == "true") return true;
  if (it->second == "false") return false;
  throw std::runtime_error("toml: boolean expected for " + key);
}

std::vector<double> Toml::nums(const std::string& key) const {
  std::vector<double> out;
  auto it = values_.find(key);
  if (it == values_.end()) return out;
  std::string v = it->second;
  if (v.empty() || v.front() != '[' || v.back() != ']')
    throw std::runtime_error("toml: array expected for " + key);
  std::string body = v.substr(1, v.size() - 2);
  std::istringstream is(body);
  std::string tok;
  while (std::getline(is, tok, ',')) {
    tok = trim(tok);
    if (!tok.empty()) out.push_back(std::stod(tok));
  }
  return out;
}

RunConfig RunConfig::from_file(const std::string& path) {
  return from_toml(Toml::parse_file(path));
}

RunConfig RunConfig::from_toml(const Toml& t) {
  RunConfig c;
  c.gamma = t.num("surface.gamma", c.gamma);
  c.cap_family = t.str("surface.cap_family", c.cap_family);
  c.z_family = t.str("surface.z_family", c.z_family);
  auto cp = t.nums("surface.cap_params");
  if (cp.size() >= 1) c.cap.length = cp[0];
  if (cp.size() >= 2) c.cap.cap_radius = cp[1];
  auto zp = t.nums("surface.z_cap_params");
  if (zp.size() >= 1) c.cap.z_blend_start = zp[0];
  if (zp.size() >= 2) c.cap.z_cap_radius = zp[1];

  auto eps = t.nums("sweep.epsilons");
  if (!eps.empty()) c.epsilons = eps;
  c.fit_eps_power = t.flag("sweep.fit_eps_power", c.fit_eps_power);

  c.lambda_max = t.num("solver.lambda_max", c.lambda_max);
  c.mesh.h0 = t.num("solver.h0", c.mesh.h0);
  c.mesh.beta = t.num("solver.beta", c.mesh.beta);
  c.mesh.cap_h = t.num("solver.cap_h", c.mesh.cap_h);
  c.mesh.refine = int(t.num("solver.refine", c.mesh.refine));
  c.workers = unsigned(t.num("solver.workers", 0));

  c.mellin.b = t.num("mellin.b", c.mellin.b);
  c.mellin.t_split = t.num("mellin.t_split", c.mellin.t_split);
  c.mellin.long_tmax = t.num("mellin.long_tmax", c.mellin.long_tmax);
  c.mellin.fit_kmax = int(t.num("mellin.fit_kmax", c.mellin.fit_kmax));
  c.mellin.workers = c.workers;

  c.renorm_small_taus = t.nums("renorm.small_taus");
  c.renorm_large_taus = t.nums("renorm.large_taus");
  if (c.renorm_small_taus.empty())
    for (int i = 0; i <= 24; ++i)
      c.renorm_small_taus.push_back(0.02 * std::pow(50.0, double(i) / 24.0));  // 0.02 .. 1
  if (c.renorm_large_taus.empty())
    for (int i = 0; i <= 12; ++i)
      c.renorm_large_taus.push_back(std::pow(12.0, double(i) / 12.0));  // 1 .. 12
  c.renorm_small.mesh = c.mesh;
  c.renorm_small.mesh.h0 = t.num("renorm.small_h0", 0.01);
  c.renorm_small.second_radius = t.flag("renorm.small_second_radius", false);
  c.renorm_small.workers = c.workers;
  c.renorm_large.mesh = c.mesh;
  c.renorm_large.mesh.h0 = t.num("renorm.large_h0", 0.02);
  c.renorm_large.second_radius = t.flag("renorm.large_second_radius", true);
  c.renorm_large.workers = c.workers;

  c.par_eps = t.num("parametrix.eps", c.par_eps);
  c.par_dt = t.num("parametrix.dt", c.par_dt);
  c.par_tmax = t.num("parametrix.t_max", c.par_tmax);
  c.par_mmax = int(t.num("parametrix.m_max", c.par_mmax));

  c.outdir = t.str("output.dir", c.outdir);
  return c;
}

Profile RunConfig::make_omega0() const { return build_omega0(gamma, cap_family, cap); }
Profile RunConfig::make_z() const { return build_Z(gamma, z_family, cap); }

DegenerationConfig RunConfig::degeneration() const {
  DegenerationConfig d;
  d.omega0 = make_omega0();
  d.z = make_z();
  d.epsilons = epsilons;
  d.lambda_max = lambda_max;
  d.mesh = mesh;
  d.mellin = mellin;
  d.renorm_small_taus = renorm_small_taus;
  d.renorm_large_taus = renorm_large_taus;
  d.renorm_small = renorm_small;
  d.renorm_large = renorm_large;
  d.fit_eps_power = fit_eps_power;
  d.workers = workers;
  return d;
}

std::uint64_t RunConfig::hash() const {
  std::ostringstream os;
  os.precision(17);
  os << "gamma=" << gamma << "|fam=" << cap_family << "|zfam=" << z_family
     << "|cap=" << cap.length << "," << cap.cap_radius << "," << cap.z_blend_start << ","
     << cap.z_cap_radius << "|lmax=" << lambda_max << "|h0=" << mesh.h0 << "|beta=" << mesh.beta
     << "|caph=" << mesh.cap_h << "|refine=" << mesh.refine << "|b=" << mellin.b
     << "|tsplit=" << mellin.t_split << "|kmax=" << mellin.fit_kmax << "|eps=";
  for (double e : epsilons) os << e << ",";
  os << "|staus=";
  for (double t : renorm_small_taus) os << t << ",";
  os << "|ltaus=";
  for (double t : renorm_large_taus) os << t << ",";
  os << "|pdt=" << par_dt << "|ptmax=" << par_tmax << "|pm=" << par_mmax << "|peps=" << par_eps;
  return fnv1a(os.str());
}

}  // namespace speclab
