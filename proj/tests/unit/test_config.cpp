#include <doctest.h>

#include "speclab/config.hpp"
#include "speclab/io.hpp"

using namespace speclab;

TEST_CASE("toml subset parsing") {
  std::string text = R"(
# comment
title = "ignored top level"
[surface]
gamma = 0.7
cap_family = "blend"
cap_params = [3.0, 1.5]
[sweep]
epsilons = [0.125, 0.0625]   # ladder
fit_eps_power = true
[solver]
lambda_max = 200
h0 = 0.015
)";
  Toml t = Toml::parse(text);
  CHECK(t.num("surface.gamma", 0) == 0.7);
  CHECK(t.str("surface.cap_family", "") == "blend");
  CHECK(t.nums("surface.cap_params") == std::vector<double>{3.0, 1.5});
  CHECK(t.nums("sweep.epsilons").size() == 2);
  CHECK(t.flag("sweep.fit_eps_power", false));
  CHECK(t.num("solver.lambda_max", 0) == 200);
  CHECK(t.num("missing.key", -1.0) == -1.0);
  CHECK_THROWS(Toml::parse("[a.b]\nx=1"));
  CHECK_THROWS(Toml::parse("novalue"));

  RunConfig cfg = RunConfig::from_toml(t);
  CHECK(cfg.gamma == 0.7);
  CHECK(cfg.lambda_max == 200);
  CHECK(cfg.mesh.h0 == 0.015);
  CHECK(cfg.epsilons.size() == 2);
}

TEST_CASE("config hash covers semantic fields") {
  Toml t = Toml::parse("[surface]\ngamma = 0.7\n");
  RunConfig a = RunConfig::from_toml(t);
  RunConfig b = a;
  CHECK(a.hash() == b.hash());
  b.gamma = 0.71;
  CHECK(a.hash() != b.hash());
  b = a;
  b.mellin.b = 2.0;
  CHECK(a.hash() != b.hash());
  b = a;
  b.epsilons.push_back(0.01);
  CHECK(a.hash() != b.hash());
  // the output dir is not semantic
  b = a;
  b.outdir = "elsewhere";
  CHECK(a.hash() == b.hash());
}

TEST_CASE("deterministic formatting") {
  CHECK(fmt_g(0.1) == "0.1");
  CHECK(fmt_g(1.0 / 3.0) == "0.333333333333");
  CHECK(fmt_g(4.0 * 3.14159) == "12.56636");
}
