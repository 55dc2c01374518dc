#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <numbers>
#include <string>

#include "cglab/bounds.hpp"
#include "cglab/experiments.hpp"

using namespace cglab;
constexpr double pi = std::numbers::pi;

namespace {

std::vector<SweepRecord> records_with(double (*t_of_cos)(double)) {
  std::vector<SweepRecord> out;
  for (int k = 0; k < 6; ++k) {
    SweepRecord r;
    r.cos_theta = 0.5 * std::pow(0.5, k);
    r.theta = std::acos(r.cos_theta);
    r.status = RunStatus::blowup;
    r.t_lo = t_of_cos(r.cos_theta);
    out.push_back(r);
  }
  return out;
}

SimParams small_params() {
  SimParams p;
  p.dim = 2;
  p.alpha = 2.0;
  p.grid = build_grid(2, 10.0, 256);
  p.t_end = 0.05;
  p.tol = 1e-6;
  return p;
}

bool throws_naming(auto&& f, const std::string& needle) {
  try {
    f();
  } catch (const std::invalid_argument& e) {
    return std::string(e.what()).find(needle) != std::string::npos;
  }
  return false;
}

}  // namespace

TEST_CASE("cos log grid") {
  auto th = thetas_from_cos_log_grid(0.5, 0.5, 6);
  REQUIRE(th.size() == 6);
  for (int k = 0; k < 6; ++k) CHECK(std::cos(th[k]) == doctest::Approx(0.5 * std::pow(0.5, k)));
  for (int k = 1; k < 6; ++k) CHECK(th[k] > th[k - 1]);
}

TEST_CASE("cos power fit on constructed records") {
  auto inv = records_with([](double c) { return 2.0 / c; });
  PowerFit f = fit_cos_power(inv);
  CHECK(f.slope == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(f.r2 == doctest::Approx(1.0));
  CHECK(f.n == 6);

  auto flat = records_with([](double) { return 0.3; });
  CHECK(std::abs(fit_cos_power(flat).slope) < 1e-12);

  auto few = inv;
  few[0].status = RunStatus::global_until_horizon;
  few[1].status = RunStatus::truncation_violated;
  CHECK_THROWS_AS(fit_cos_power(few), std::invalid_argument);
  few.resize(4);
  CHECK_THROWS_AS(fit_cos_power(few), std::invalid_argument);

  auto hi = inv;
  for (auto& r : hi) r.t_hi = 3.0 * std::pow(r.cos_theta, -0.5);
  CHECK(fit_cos_power(hi, &SweepRecord::t_hi).slope == doctest::Approx(-0.5));
}

TEST_CASE("plain power fit") {
  std::vector<double> x{1, 2, 4, 8}, y{3, 12, 48, 192};
  PowerFit f = fit_power(x, y);
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(std::exp(f.intercept) == doctest::Approx(3.0));
  CHECK_THROWS_AS(fit_power(std::vector<double>{1}, std::vector<double>{1}), std::invalid_argument);
  CHECK_THROWS_AS(fit_power(std::vector<double>{1, 2}, std::vector<double>{1, -1}), std::invalid_argument);
}

TEST_CASE("predicted exponents") {
  CorpusSpec dil{CorpusSpec::Kind::scaled_bump};
  auto p = predicted_exponents(dil, 2, 3.0);
  CHECK(p.at("mass") == 0.0);
  CHECK(p.at("grad") == 2.0);
  CHECK(p.at("lp_alpha2") == doctest::Approx(3.0));
  CHECK(p.at("weighted_lp") == doctest::Approx(1.0));
  CHECK(p.at("weighted_grad") == 0.0);

  CorpusSpec ann{CorpusSpec::Kind::annular_bump};
  ann.r0 = 1.0;
  p = predicted_exponents(ann, 3, 2.0);
  CHECK(p.at("lp_alpha2") == doctest::Approx(1.0));
  CHECK(p.at("weighted_lp") == doctest::Approx(1.0));
  CHECK(p.at("weighted_grad") == doctest::Approx(2.0));
}

TEST_CASE("necessity scan on the dilation family") {
  CorpusSpec dil{CorpusSpec::Kind::scaled_bump};
  NecessityOptions opt;
  opt.dim = 3;
  opt.alpha = 2.0;
  std::vector<double> lambdas{1, 2, 4, 8};
  NecessityTable t = necessity_scan(dil, lambdas, opt);
  CHECK(t.all_match());
  CHECK(t.at("lp_alpha2").fitted == doctest::Approx(3.0).epsilon(1e-6));
  CHECK(t.weighted_gap() == doctest::Approx(1.0).epsilon(1e-6));
  CHECK_THROWS_AS(t.at("nothing"), std::out_of_range);

  CHECK_THROWS_AS(necessity_scan(dil, std::vector<double>{1}, opt), std::invalid_argument);
  CHECK_THROWS_AS(necessity_scan(CorpusSpec{}, lambdas, opt), std::invalid_argument);
}

TEST_CASE("weighted inequality hypotheses are enforced by name") {
  std::vector<CorpusSpec> corpus{{CorpusSpec::Kind::gaussian, 1.0, 1.0}};
  Lemma71Options o;
  o.dim = 1;
  CHECK(throws_naming([&] { lemma71_check(corpus, o); }, "N >= 2"));
  o.dim = 2;
  o.alpha = 1.0;
  CHECK(throws_naming([&] { lemma71_check(corpus, o); }, "4/N <= alpha"));
  o.alpha = 5.0;
  CHECK(throws_naming([&] { lemma71_check(corpus, o); }, "alpha <= 4"));
  o.override_hypotheses = true;
  CHECK(lemma71_check(corpus, o).hypotheses_overridden);
  o.alpha = 2.0;
  o.override_hypotheses = false;
  o.mass_bound = 0.5;
  CHECK(throws_naming([&] { lemma71_check(corpus, o); }, "||u||^2 <= M^2"));
}

TEST_CASE("weighted inequality terms") {
  // 2-D Gaussian A e^{-r²/σ²}: ∫|x|²|∇u|² = πA²σ², ∫|x|²|u|⁴ = πA⁴σ⁴/16
  CorpusSpec g{CorpusSpec::Kind::gaussian, 2.0, 0.5};
  RadialGrid grid = build_grid(2, 6.0, 4096);
  Lemma71Field f = lemma71_terms(grid, generate(grid, g), 2.0);
  CHECK(f.weighted_grad == doctest::Approx(pi).epsilon(1e-5));
  CHECK(f.weighted_lp == doctest::Approx(pi / 16).epsilon(1e-8));
  CHECK(f.c_needed == 0.0);
  CHECK(f.pointwise_margin > 0.0);
  CHECK(f.pointwise_margin_sharp > 0.0);
  CHECK(f.pointwise_margin_sharp < f.pointwise_margin);
}

TEST_CASE("concentrated data need a positive constant at alpha = 4") {
  std::vector<CorpusSpec> corpus{{CorpusSpec::Kind::gaussian, 6.0, 0.3},
                                 {CorpusSpec::Kind::gaussian, 1.0, 1.0}};
  Lemma71Options o;
  o.alpha = 4.0;
  Lemma71Result r = lemma71_check(corpus, o);
  CHECK(r.c_needed_max > 0.0);
  CHECK(std::isfinite(r.c_min_found));
  CHECK(r.c_min_found >= r.c_needed_max);
  for (const auto& f : r.fields)
    CHECK(f.weighted_lp <= f.weighted_grad + r.c_min_found * (f.lp + 1.0) + 1e-12);
}

TEST_CASE("default C grid") {
  auto c = default_c_grid();
  CHECK(c.front() == 0.0);
  CHECK(c[1] == doctest::Approx(1e-3));
  CHECK(c.back() == doctest::Approx(1e6));
  for (std::size_t i = 1; i < c.size(); ++i) CHECK(c[i] > c[i - 1]);
}

TEST_CASE("sweep: ordering, threads and zero data") {
  SimParams p = small_params();
  CorpusSpec zero{CorpusSpec::Kind::gaussian, 0.0, 1.0};
  std::vector<double> th{0.0, 0.5, 1.0};
  SweepResult one = theta_sweep(zero, p, th);
  REQUIRE(one.runs.size() == 3);
  for (const auto& run : one.runs) {
    CHECK(run.record.status == RunStatus::global_until_horizon);
    CHECK(std::isinf(run.record.thm1_upper));
  }
  CHECK_THROWS_AS(theta_sweep(zero, p, std::vector<double>{0.5, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(theta_sweep(zero, p, std::vector<double>{pi / 2}), std::invalid_argument);

  CorpusSpec g{CorpusSpec::Kind::gaussian, 2.0, 1.0};
  SweepOptions two;
  two.threads = 2;
  SweepResult a = theta_sweep(g, p, th);
  SweepResult b = theta_sweep(g, p, th, two);
  for (std::size_t i = 0; i < th.size(); ++i) {
    CHECK(a.runs[i].record.theta == th[i]);
    CHECK(a.runs[i].sim.final_state == b.runs[i].sim.final_state);
    CHECK(a.runs[i].record.identity_max_residuals == b.runs[i].record.identity_max_residuals);
  }
}

TEST_CASE("sweep grid grows with the bound at fixed spacing") {
  SimParams p = small_params();
  p.t_end = 100.0;
  SweepOptions o;
  o.tail_speed = 10.0;
  RadialGrid g = sweep_grid(p, 1.0, 10.0, -1.0, o);
  const double upper = thm1_upper(10.0, -1.0, 2.0, 1.0);
  CHECK(g.r_max >= 10.0 * upper - p.grid.dr);
  CHECK(g.dr == doctest::Approx(p.grid.dr).epsilon(0.05));
  o.tail_speed = 0.0;
  CHECK(sweep_grid(p, 1.0, 10.0, -1.0, o).r_max == p.grid.r_max);
}

TEST_CASE("extrapolated initial functionals") {
  CorpusSpec g{CorpusSpec::Kind::gaussian, 3.0, 1.0};
  const double e_exact = 9 * pi / 2 - 81 * pi / 16;
  FunctionalReport f = initial_functionals(g, 2, 12.0, 2048, 2.0);
  CHECK(f.mass == doctest::Approx(9 * pi / 2).epsilon(1e-9));
  CHECK(f.energy == doctest::Approx(e_exact).epsilon(1e-8));
  RadialGrid grid = build_grid(2, 12.0, 2048);
  FunctionalReport plain = report(grid, generate(grid, g), 2.0);
  CHECK(std::abs(f.energy - e_exact) < 1e-3 * std::abs(plain.energy - e_exact));
}

TEST_CASE("mass window snapshots stay under the K threshold") {
  SimParams p = small_params();
  p.t_end = 1.0;
  p.grid = build_grid(2, 10.0, 512);
  CorpusSpec g{CorpusSpec::Kind::gaussian, 3.0, 1.0};
  Field u0 = generate(p.grid, g);
  auto snaps = mass_window_snapshots(u0, p, 4);
  REQUIRE(snaps.size() == 5);
  const double m0 = fv_norm2(p.grid, u0);
  for (const Field& s : snaps) CHECK(fv_norm2(p.grid, s) <= k_const(2.0) * m0);
  CHECK_THROWS_AS(mass_window_snapshots(u0, p, -1), std::invalid_argument);
}

TEST_CASE("audit covers the identities a trajectory supports") {
  SimParams p = small_params();
  CorpusSpec g{CorpusSpec::Kind::gaussian, 2.0, 1.0};
  Field u0 = generate(p.grid, g);
  auto names = [&](const SimParams& q) {
    std::vector<std::string> n;
    for (const auto& r : audit_trajectory(simulate(u0, q), q)) n.push_back(r.name);
    return n;
  };
  auto dense = names(p);
  CHECK(std::find(dense.begin(), dense.end(), "variance_acceleration") != dense.end());
  p.record_every = 4;
  auto sparse = names(p);
  CHECK(std::find(sparse.begin(), sparse.end(), "variance_acceleration") == sparse.end());
  CHECK(std::find(sparse.begin(), sparse.end(), "energy_dissipation") != sparse.end());
}
