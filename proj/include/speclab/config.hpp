#pragma once
// TOML-subset config parsing and the run configuration.
//
// Supported TOML subset: [section] headers, key = value with string,
// number, boolean, or flat array values, and # comments.  That covers
// every config this tool reads; nested tables are rejected loudly.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "speclab/degeneration.hpp"

namespace speclab {

class Toml {
 public:
  static Toml parse(const std::string& text);
  static Toml parse_file(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  double num(const std::string& key, double def) const;
  double num_req(const std::string& key) const;
  std::string str(const std::string& key, const std::string& def) const;
  bool flag(const std::string& key, bool def) const;
  std::vector<double> nums(const std::string& key) const;  // empty if absent

  const std::map<std::string, std::string>& raw() const { return values_; }

 private:
  std::map<std::string, std::string> values_;  // "section.key" -> raw token
};

struct RunConfig {
  // [surface]
  double gamma = 0.7;
  std::string cap_family = "blend";
  std::string z_family = "blend";
  CapParams cap;
  // [sweep]
  std::vector<double> epsilons{0.125, 0.0625, 0.03125, 0.015625, 0.0078125};
  bool fit_eps_power = false;
  // [solver]
  double lambda_max = 400.0;
  MeshConfig mesh;
  unsigned workers = 0;
  // [mellin]
  MellinConfig mellin;
  // [renorm]
  std::vector<double> renorm_small_taus, renorm_large_taus;
  RenormSolverConfig renorm_small, renorm_large;
  // [parametrix]
  double par_eps = 0.125;
  double par_dt = 0.025, par_tmax = 0.5;
  int par_mmax = 32;
  // [output]
  std::string outdir = "out";

  static RunConfig from_file(const std::string& path);
  static RunConfig from_toml(const Toml& t);
  Profile make_omega0() const;
  Profile make_z() const;
  DegenerationConfig degeneration() const;
  std::uint64_t hash() const;  // covers every semantic field
};

}  // namespace speclab
