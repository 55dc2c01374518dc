#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <numbers>

#include "cglab/bounds.hpp"
#include "cglab/diagnostics.hpp"

using namespace cglab;
constexpr double pi = std::numbers::pi;

namespace {

std::vector<TrajectorySample> synthetic(int n, double dt) {
  std::vector<TrajectorySample> s(n);
  for (int i = 0; i < n; ++i) {
    s[i].t = i * dt;
    s[i].dt = i == 0 ? 0.0 : dt;
  }
  return s;
}

SimResult run(double amplitude, double theta, bool nonlinear, double t_end) {
  SimParams p;
  p.dim = 2;
  p.alpha = 2.0;
  p.theta = theta;
  p.grid = build_grid(2, 10.0, 1024);
  p.t_end = t_end;
  p.tol = 1e-9;
  p.nonlinear = nonlinear;
  Field u(p.grid.size());
  for (std::size_t j = 0; j < u.size(); ++j) u[j] = amplitude * std::exp(-p.grid.nodes[j] * p.grid.nodes[j]);
  return simulate(u, p);
}

}  // namespace

TEST_CASE("nonuniform differences are exact on quadratics") {
  std::vector<double> t{0.0, 0.1, 0.35, 0.4, 0.9};
  std::vector<double> f;
  for (double x : t) f.push_back(3 * x * x - 2 * x + 1);
  for (std::size_t i = 1; i + 1 < t.size(); ++i) {
    CHECK(d1_nonuniform(t, f, i) == doctest::Approx(6 * t[i] - 2).epsilon(1e-12));
    CHECK(d2_nonuniform(t, f, i) == doctest::Approx(6.0).epsilon(1e-10));
  }
}

TEST_CASE("monotone violation") {
  CHECK(monotone_violation(std::vector<double>{1, 2, 3}, true) == 0.0);
  CHECK(monotone_violation(std::vector<double>{1, 2, 3}, false) == doctest::Approx(1.0 / 3));
  CHECK(monotone_violation(std::vector<double>{4, 3, 3.5}, true) == doctest::Approx(0.25));
}

TEST_CASE("identities on synthetic series with known answers") {
  auto s = synthetic(40, 0.01);
  const double theta = 0.4, c = std::cos(theta);
  for (auto& x : s) {
    x.mass = std::exp(x.t);
    x.i_val = -std::exp(x.t) / (2 * c);
    x.energy = -x.t;
    x.diss_cum = x.t;
    x.imqu = std::abs(x.i_val);
  }
  CHECK(check_energy_identity(s).max_abs_residual < 1e-15);
  CHECK(check_mass_identity(s, 2.0, theta).max_rel_residual < 1e-3);
  CHECK(check_modulus_identity(s).max_abs_residual < 1e-15);
}

TEST_CASE("tau interpolates the K-crossing") {
  auto s = synthetic(11, 0.1);
  for (auto& x : s) {
    x.mass = 1 + 10 * x.t;
    x.energy = -1.0;
  }
  TauMeasurement m = measure_tau(s, 2.0);
  CHECK(m.k_const == doctest::Approx(7.46410161514).epsilon(1e-10));
  CHECK(m.tau == doctest::Approx((m.k_const - 1) / 10).epsilon(1e-12));
  CHECK(m.nonpositive_energy);
  s.resize(3);
  CHECK(std::isinf(measure_tau(s, 2.0).tau));
}

TEST_CASE("variance identities need dense recording") {
  auto s = synthetic(10, 0.01);
  s[4].dt = 0.005;
  CHECK_THROWS_AS(check_variance_identities(s, WeightKind::quadratic, 0.0, 2.0, 2), std::invalid_argument);
  auto dense = synthetic(10, 0.01);
  CHECK_THROWS_AS(check_variance_identities(dense, WeightKind::truncated, 0.0, 2.0, 2),
                  std::invalid_argument);
  CHECK_THROWS_AS(check_mass_identity(synthetic(2, 0.1), 2.0, 0.0), std::invalid_argument);
}

TEST_CASE("identities along a simulated heat-type run") {
  SimResult r = run(1.0, pi / 4, true, 0.2);
  Trajectory tr = r.samples;
  CHECK(check_energy_identity(tr).max_rel_residual < 1e-6);
  CHECK(check_modulus_identity(tr).max_rel_residual < 1e-10);
  CHECK(check_mass_identity(tr, 2.0, pi / 4).max_rel_residual < 1e-4);
  for (const auto& rep : check_variance_identities(tr, WeightKind::quadratic, pi / 4, 2.0, 2)) {
    CAPTURE(rep.name);
    CHECK(rep.max_rel_residual < 1e-3);
  }
}

TEST_CASE("energy chain and Levine monotonicity before blow-up") {
  SimResult r = run(3.0, 0.0, true, 1.0);
  REQUIRE(r.estimate.status == RunStatus::blowup);
  auto span = truncate_span(r.samples, 0.9 * r.estimate.t_lo);
  CHECK(span.back().t <= 0.9 * r.estimate.t_lo);
  CHECK(energy_chain_violation(span, 2.0) < 1e-6);
  CHECK(levine_violation(span, 2.0) < 1e-6);
  for (const auto& rep : check_combined_identities(span, 2.0, 0.0)) {
    CAPTURE(rep.name);
    CHECK(rep.max_rel_residual < 1e-3);
  }
}
