#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <limits>
#include <numbers>
#include <random>

#include "cglab/functionals.hpp"
#include "cglab/integrator.hpp"
#include "cglab/variance_weights.hpp"

using namespace cglab;
constexpr double pi = std::numbers::pi;

namespace {

SimParams params(int dim, double r_max, int m, double theta) {
  SimParams p;
  p.dim = dim;
  p.alpha = 2.0;
  p.theta = theta;
  p.grid = build_grid(dim, r_max, m);
  p.t_end = 0.1;
  p.tol = 1e-8;
  return p;
}

Field gaussian(const RadialGrid& g, double a) {
  Field u(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) u[j] = a * std::exp(-g.nodes[j] * g.nodes[j]);
  return u;
}

// u_t = e^{iθ}Δu from e^{-r²}: (1 + 4ct)^{-N/2} exp(-r²/(1 + 4ct)), c = e^{iθ}
cplx heat_kernel(double r, double t, double theta, int dim) {
  const cplx s = 1.0 + 4.0 * std::polar(1.0, theta) * t;
  return std::pow(s, -dim / 2.0) * std::exp(-r * r / s);
}

}  // namespace

TEST_CASE("zero data stays zero") {
  SimParams p = params(2, 4.0, 64, 0.3);
  SimResult r = simulate(Field(p.grid.size()), p);
  CHECK(r.estimate.status == RunStatus::global_until_horizon);
  CHECK_FALSE(r.estimate.blowup_detected);
  CHECK(r.estimate.t_last == doctest::Approx(p.t_end));
  for (const auto& s : r.samples) CHECK(s.mass == 0.0);
}

TEST_CASE("linear flow matches the Gaussian kernel") {
  for (double theta : {0.0, pi / 4, pi / 2}) {
    SimParams p = params(2, 12.0, 1024, theta);
    p.nonlinear = false;
    SimResult r = simulate(gaussian(p.grid, 1.0), p);
    double err = 0.0;
    for (std::size_t j = 0; j < p.grid.size(); ++j)
      err = std::max(err, std::abs(r.final_state[j] - heat_kernel(p.grid.nodes[j], p.t_end, theta, 2)));
    CAPTURE(theta);
    CHECK(err < 1e-4);
  }
}

TEST_CASE("Schrodinger limit conserves the discrete mass") {
  SimParams p = params(3, 12.0, 512, pi / 2);
  p.nonlinear = false;
  SimResult r = simulate(gaussian(p.grid, 1.0), p);
  const double m0 = r.samples.front().mass;
  for (const auto& s : r.samples) CHECK(s.mass == doctest::Approx(m0).epsilon(1e-12));
}

TEST_CASE("heat flow dissipates mass and energy") {
  SimParams p = params(2, 12.0, 512, 0.0);
  p.nonlinear = false;
  SimResult r = simulate(gaussian(p.grid, 1.0), p);
  for (std::size_t i = 1; i < r.samples.size(); ++i) {
    CHECK(r.samples[i].mass < r.samples[i - 1].mass);
    CHECK(r.samples[i].energy < r.samples[i - 1].energy);
  }
}

TEST_CASE("step-doubling error estimate shrinks at third order") {
  // coarse grid keeps dt/dr² small, out of the stiff regime
  SimParams p = params(2, 8.0, 64, pi / 4);
  Field u = gaussian(p.grid, 2.0);
  double e1 = step(u, 1e-3, p).error;
  double e2 = step(u, 5e-4, p).error;
  CHECK(e1 / e2 > 6.0);
  CHECK(e1 / e2 < 10.0);
}

TEST_CASE("negative-energy datum blows up inside the horizon") {
  SimParams p = params(2, 12.0, 1024, 0.0);
  p.t_end = 1.0;
  p.u_max = 1e3;
  SimResult r = simulate(gaussian(p.grid, 3.0), p);
  const BlowupEstimate& e = r.estimate;
  CHECK(e.status == RunStatus::blowup);
  CHECK(e.trigger == "u_max");
  CHECK(e.t_lo < e.t_hi);
  CHECK(e.t_lo < 1.0);
  REQUIRE(std::isfinite(e.t_fit));
  CHECK(std::abs(e.t_fit - e.t_lo) < 1e-3);
  CHECK(e.fit_exponent == doctest::Approx(-0.5).epsilon(0.2));
}

TEST_CASE("rate fit on a synthetic profile") {
  std::vector<double> t, linf;
  for (int k = 0; k < 60; ++k) {
    double s = 2.0 - std::pow(0.8, k);
    t.push_back(s);
    linf.push_back(std::pow(2.0 - s, -1.0 / 3.0));
  }
  RateFit f = fit_blowup_rate(t, linf, 3.0);
  CHECK(f.t_fit == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(f.exponent == doctest::Approx(-1.0 / 3.0).epsilon(1e-8));
  CHECK(std::isnan(fit_blowup_rate(std::vector<double>{0, 1}, std::vector<double>{1, 2}, 2.0).t_fit));
}

TEST_CASE("tail above threshold marks the run but keeps integrating") {
  SimParams p = params(2, 3.0, 128, 0.0);
  p.nonlinear = false;
  p.tail_threshold = 1e-6;
  SimResult r = simulate(gaussian(p.grid, 1.0), p);
  CHECK(r.estimate.status == RunStatus::truncation_violated);
  CHECK(r.estimate.t_last == doctest::Approx(p.t_end));
  CHECK(std::isfinite(r.estimate.t_truncation));
}

TEST_CASE("recording stride") {
  SimParams p = params(2, 8.0, 128, 0.2);
  p.record_every = 3;
  SimResult r = simulate(gaussian(p.grid, 1.0), p);
  CHECK(r.samples.front().t == 0.0);
  CHECK(r.samples.back().t == doctest::Approx(p.t_end));
  CHECK(r.samples.size() < r.estimate.accepted / 3 + 3);
}

TEST_CASE("parameter validation") {
  SimParams good = params(2, 4.0, 64, 0.0);
  Field u = gaussian(good.grid, 1.0);
  auto bad = [&](auto mutate) {
    SimParams p = good;
    mutate(p);
    return p;
  };
  CHECK_THROWS_AS(simulate(u, bad([](SimParams& p) { p.theta = 2.0; })), std::invalid_argument);
  CHECK_THROWS_AS(simulate(u, bad([](SimParams& p) { p.theta = pi / 2; })), std::invalid_argument);
  CHECK_THROWS_AS(simulate(u, bad([](SimParams& p) { p.dim = 3; })), std::invalid_argument);
  CHECK_THROWS_AS(simulate(u, bad([](SimParams& p) { p.alpha = 0.0; })), std::invalid_argument);
  CHECK_THROWS_AS(simulate(u, bad([](SimParams& p) { p.dt_min = 1.0; })), std::invalid_argument);
  CHECK_THROWS_AS(simulate(u, bad([](SimParams& p) { p.record_every = 0; })), std::invalid_argument);
  CHECK_THROWS_AS(simulate(u, bad([](SimParams& p) { p.tol = 0.0; })), std::invalid_argument);
  CHECK_THROWS_AS(simulate(Field(3), good), std::invalid_argument);
  Field nan = u;
  nan[2] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(simulate(nan, good), NonFiniteFieldError);
  CHECK_THROWS_AS(simulate_nls_reference(u, good), std::invalid_argument);
  SimParams critical = bad([](SimParams& p) { p.theta = pi / 2; });
  CHECK_THROWS_AS(simulate_nls_reference(u, critical), std::invalid_argument);
}

TEST_CASE("NLS reference run in the mass-subcritical regime") {
  SimParams p = params(2, 12.0, 512, pi / 2);
  p.alpha = 1.0;
  SimResult r = simulate_nls_reference(gaussian(p.grid, 1.0), p);
  CHECK(r.estimate.status == RunStatus::global_until_horizon);
  const double m0 = r.samples.front().mass;
  CHECK(r.samples.back().mass == doctest::Approx(m0).epsilon(1e-6));
}

TEST_CASE("weighted mass rate equals the discrete time derivative") {
  std::mt19937 rng(5);
  std::normal_distribution<double> nd;
  for (int dim = 1; dim <= 3; ++dim) {
    for (double theta : {0.0, 0.7, -1.3}) {
      SimParams p = params(dim, 6.0, 128, theta);
      Field u(p.grid.size());
      for (auto& x : u) x = {nd(rng), nd(rng)};
      const Field ut = rhs(u, p);
      for (const SampledWeight& w :
           {sample_quadratic(p.grid),
            sample_weight(p.grid, make_weight(ZetaProfile::standard_mollifier(), 0.5, dim))}) {
        double rate = 0.0;
        for (std::size_t j = 0; j < u.size(); ++j) {
          rate += p.grid.cell_volumes[j] * w.psi[j] * (std::conj(u[j]) * ut[j]).real();
        }
        const WeightTerms t = weight_terms(u, ut, w, p);
        CHECK(std::abs(t.var1_rhs - rate) <= 1e-12 * (std::abs(rate) + t.wmass));
      }
    }
  }
}

TEST_CASE("run status strings round trip") {
  for (RunStatus s : {RunStatus::global_until_horizon, RunStatus::blowup, RunStatus::truncation_violated})
    CHECK(run_status_from_string(to_string(s)) == s);
  CHECK_THROWS_AS(run_status_from_string("exploded"), std::invalid_argument);
}
