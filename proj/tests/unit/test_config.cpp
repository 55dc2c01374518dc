#include <doctest.h>

#include <filesystem>
#include <stdexcept>
#include <numbers>
#include <string>

#include "cglab/config.hpp"

using namespace cglab;
using nlohmann::json;

namespace {

std::string error_of(const json& j) {
  try {
    parse_config(j);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

bool mentions(const std::string& msg, const std::string& needle) {
  return msg.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("defaults") {
  RunConfig c = parse_config(json::object());
  CHECK(c.dim == 2);
  CHECK(c.alpha == 2.0);
  CHECK(c.thetas == std::vector<double>{0.0});
  CHECK(c.weight.mode == WeightConfig::Mode::none);
  CHECK(c.ceilings.at("modulus") == 1e-8);
  CHECK_FALSE(c.necessity);
}

TEST_CASE("unknown keys are rejected with their path") {
  CHECK(mentions(error_of({{"dimension", 2}}), "'dimension'"));
  CHECK(mentions(error_of({{"integrator", {{"tolerance", 1e-6}}}}), "'integrator.tolerance'"));
  CHECK(mentions(error_of({{"initial_data", {{"kind", "gaussian"}, {"sigma2", 1}}}}),
                 "'initial_data.sigma2'"));
  CHECK(mentions(error_of({{"audit", {{"ceilings", {{"energy", 1e-3}}}}}}), "'audit.ceilings.energy'"));
}

TEST_CASE("types and ranges") {
  CHECK(mentions(error_of({{"dim", 2.5}}), "dim"));
  CHECK(mentions(error_of({{"alpha", "two"}}), "alpha"));
  CHECK(mentions(error_of({{"grid", {{"m", 1001}}}}), "grid.m"));
  CHECK(mentions(error_of({{"integrator", {{"dt_min", 1.0}}}}), "dt_min"));
  CHECK(mentions(error_of({{"theta", 2.0}}), "theta"));
  CHECK(mentions(error_of({{"theta", 0.1}, {"theta_list", {0.1}}}), "at most one"));
  CHECK(mentions(error_of({{"weight", {{"epsilon", 0.5}, {"auto", json::object()}}}}), "exactly one"));
  CHECK(mentions(error_of({{"initial_data", {{"kind", "sech"}}}}), "initial_data.kind"));
  CHECK(mentions(error_of({{"initial_data", {{"kind", "ring"}, {"r0", 1}, {"offset", 1}}}}), "either"));
  CHECK(mentions(error_of({{"necessity", {{"lambdas", {1, 2}}}}}), "necessity.family"));
}

TEST_CASE("theta sources") {
  RunConfig c = parse_config({{"cos_theta_log_grid", {{"start", 0.5}, {"factor", 0.5}, {"count", 3}}}});
  REQUIRE(c.thetas.size() == 3);
  CHECK(std::cos(c.thetas[2]) == doctest::Approx(0.125));
  c = parse_config({{"theta_list", {0.0, 0.3}}});
  CHECK(c.thetas.size() == 2);
}

TEST_CASE("weight modes and params") {
  RunConfig c = parse_config({{"grid", {{"r_max", 4}, {"m", 64}}}, {"weight", {{"epsilon", 0.5}}}});
  SimParams p = make_params(c, 0.2);
  CHECK(p.theta == 0.2);
  CHECK(p.grid.m == 64);
  REQUIRE(p.weight);
  CHECK(p.weight->epsilon == 0.5);

  c = parse_config({{"weight", {{"auto", {{"snapshots", 4}}}}}});
  CHECK(c.weight.mode == WeightConfig::Mode::automatic);
  CHECK_FALSE(c.weight.a);
  CHECK(c.weight.snapshots == 4);
  CHECK_FALSE(make_params(c, 0.0).weight);
}

TEST_CASE("shipped configs parse") {
  int n = 0;
  for (const auto& e : std::filesystem::directory_iterator(CGLAB_CONFIG_DIR)) {
    if (e.path().extension() != ".json") continue;
    CAPTURE(e.path().string());
    CHECK_NOTHROW(load_config(e.path()));
    ++n;
  }
  CHECK(n >= 5);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}
