#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <numbers>

#include "cglab/bounds.hpp"

using namespace cglab;
constexpr double pi = std::numbers::pi;

TEST_CASE("upper bound for 3exp(-r^2) in the plane at theta = 0 is 1") {
  // mass = 9π/2, E = 9π/2 − 81π/16
  const double mass0 = 9 * pi / 2, e0 = 9 * pi / 2 - 81 * pi / 16;
  CHECK(thm1_upper(mass0, e0, 2.0, 0.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(thm1_upper(mass0, e0, 2.0, pi / 3) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(std::isinf(thm1_upper(mass0, 0.5, 2.0, 0.0)));
  CHECK_THROWS_AS(thm1_upper(mass0, e0, 2.0, pi / 2), std::invalid_argument);
}

TEST_CASE("K constant and tau conversion") {
  CHECK(k_const(2.0) == doctest::Approx(7.46410161514).epsilon(1e-11));
  CHECK(k_const(2.0) == doctest::Approx(4 + 2 * std::sqrt(3.0)).epsilon(1e-14));
  CHECK(tau_to_tmax(1.0, 2.0) == doctest::Approx(3.0));
  CHECK(tau_to_tmax(0.5, 4.0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(tau_to_tmax(-1.0, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(k_const(0.0), std::invalid_argument);
}

TEST_CASE("eta and C_GN") {
  CHECK(eta(4.0, -2.0, 2.0) == doctest::Approx(2.0 / 16.0));
  CHECK(cgn(1, 1.0, 3.0, 0.5) == doctest::Approx(0.5 * std::pow(6.0, 5.0)));
  CHECK(cgn(2, 1.0, 3.0, 0.5) == doctest::Approx(1.0 * std::pow(6.0, 4.0)));
  CHECK(cgn(3, 1.0, 1.0, 1.0) == doctest::Approx(27.0 * 8.0));
}

TEST_CASE("lower bounds") {
  const double mass0 = 2.0, c = 0.7;
  const double C = cgn(1, 1.0, mass0, c);
  LowerBounds neg = thm2_lower(1, 1.0, mass0, -0.5, c, 0.0);
  CHECK(neg.cgn == doctest::Approx(C));
  CHECK(neg.nonpositive_energy == doctest::Approx(mass0 / (12 * std::pow(C, 1.0 / 3.0))));
  CHECK(neg.general == doctest::Approx(neg.nonpositive_energy));

  LowerBounds pos = thm2_lower(1, 1.0, mass0, 0.5, c, 0.0);
  CHECK(pos.nonpositive_energy == 0.0);
  CHECK(pos.general == doctest::Approx(mass0 / (2 * (2.5 + 6 * std::pow(C, 1.0 / 3.0)))));

  LowerBounds tilted = thm2_lower(1, 1.0, mass0, -0.5, c, pi / 3);
  CHECK(tilted.general == doctest::Approx(2 * neg.general));

  CHECK_THROWS_AS(thm2_lower(2, 2.0, mass0, -0.5, c, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(thm2_lower(1, 1.0, mass0, -0.5, 0.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(thm2_lower(1, 1.0, mass0, -0.5, c, pi / 2), std::invalid_argument);
}

TEST_CASE("envelope") {
  CHECK(remark_envelope(0.0, 1.0, 1, 2.0) == doctest::Approx(8.0));
  CHECK(remark_envelope(pi / 3, 1.0, 1, 2.0) == doctest::Approx(2.0 * (1 + 3 * 2)));
}

TEST_CASE("report marks inapplicable bounds as trivially true") {
  BoundsReport crit = make_bounds_report(2, 2.0, 0.0, 1.0, 0.5, 1.0);
  CHECK(std::isinf(crit.thm1_upper));
  CHECK(crit.thm2_lower == 0.0);
  CHECK(crit.k_const == doctest::Approx(k_const(2.0)));

  BoundsReport sub = make_bounds_report(1, 1.0, 0.2, 2.0, -0.5, 0.7, 3.0);
  CHECK(sub.thm2_lower == doctest::Approx(thm2_lower(1, 1.0, 2.0, -0.5, 0.7, 0.2).general));
  CHECK(sub.thm1_upper == doctest::Approx(thm1_upper(2.0, -0.5, 1.0, 0.2)));
  CHECK(sub.remark_envelope_coeff[0] == doctest::Approx(3.0));
  CHECK(sub.remark_envelope_coeff[1] == doctest::Approx(9.0));
  CHECK_THROWS_AS(make_bounds_report(2, 2.0, 0.0, 1.0, 0.5, 0.0), std::invalid_argument);
}
