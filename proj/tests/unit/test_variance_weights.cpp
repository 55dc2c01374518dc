#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <random>

#include "cglab/functionals.hpp"
#include "cglab/variance_weights.hpp"

using namespace cglab;

namespace {

const ZetaProfile& zeta() {
  static const ZetaProfile z = ZetaProfile::standard_mollifier();
  return z;
}

Field gaussian(const RadialGrid& g, double a, double sigma) {
  Field u(g.size());
  for (std::size_t j = 0; j < g.size(); ++j)
    u[j] = a * std::exp(-g.nodes[j] * g.nodes[j] / (sigma * sigma));
  return u;
}

}  // namespace

TEST_CASE("bump is a unit-mass density on [1, 2]") {
  const ZetaProfile& z = zeta();
  CHECK(z.h(0.5) == 0.0);
  CHECK(z.h(2.5) == 0.0);
  CHECK(z.h(1.5) > 0.0);
  CHECK(z.h_integral(1.0) == doctest::Approx(0.0));
  CHECK(z.h_integral(2.0) == doctest::Approx(1.0).epsilon(1e-12));
  // symmetric bump: ∫ s h = 3/2
  CHECK(z.plateau() == doctest::Approx(1.5).epsilon(1e-10));
}

TEST_CASE("zeta: identity below 1, plateau above 2") {
  const ZetaProfile& z = zeta();
  for (double t : {0.0, 0.25, 0.5, 0.999}) {
    CHECK(z.zeta(t) == t);
    CHECK(z.zeta1(t) == 1.0);
    CHECK(z.zeta2(t) == 0.0);
  }
  for (double t : {2.0, 2.5, 10.0, 1e6}) {
    CHECK(z.zeta(t) == z.plateau());
    CHECK(z.zeta1(t) == 0.0);
    CHECK(z.zeta2(t) == 0.0);
  }
}

TEST_CASE("zeta derivatives agree with finite differences") {
  const ZetaProfile& z = zeta();
  const double h = 1e-5;
  for (double t : {1.1, 1.3, 1.5, 1.7, 1.9}) {
    CAPTURE(t);
    CHECK((z.zeta(t + h) - z.zeta(t - h)) / (2 * h) == doctest::Approx(z.zeta1(t)).epsilon(1e-8));
    CHECK((z.zeta1(t + h) - z.zeta1(t - h)) / (2 * h) == doctest::Approx(z.zeta2(t)).epsilon(1e-7));
    CHECK((z.zeta2(t + h) - z.zeta2(t - h)) / (2 * h) == doctest::Approx(z.zeta3(t)).epsilon(1e-6));
    CHECK((z.zeta3(t + h) - z.zeta3(t - h)) / (2 * h) == doctest::Approx(z.zeta4(t)).epsilon(1e-5));
  }
}

TEST_CASE("weight identities hold pointwise") {
  for (int dim = 1; dim <= 3; ++dim) {
    for (double eps : {1.0, 0.1, 0.01}) {
      WeightFamily w = make_weight(zeta(), eps, dim);
      auto radii = log_spaced(1e-3 / eps, 10.0 / eps, 300);
      for (const WeightSample& s : tabulate_weight(w, radii)) {
        CHECK(std::abs(s.hessian_residual) < 1e-10);
        CHECK(std::abs(s.laplacian_residual) < 1e-10);
      }
    }
  }
}

TEST_CASE("psi radial derivatives agree with finite differences") {
  WeightFamily w = make_weight(zeta(), 0.5, 3);
  const double h = 1e-5;
  for (double r : {0.5, 2.2, 2.5, 2.8}) {
    CAPTURE(r);
    double d1 = (w.psi(r + h) - w.psi(r - h)) / (2 * h);
    double d2 = (w.psi(r + h) - 2 * w.psi(r) + w.psi(r - h)) / (h * h);
    CHECK(d1 == doctest::Approx(w.dpsi(r)).epsilon(1e-8));
    CHECK(d2 == doctest::Approx(w.psi2(r)).epsilon(1e-4));
    CHECK(w.lap_psi(r) == doctest::Approx(w.psi2(r) + 2.0 / r * w.dpsi(r)).epsilon(1e-12));
  }
}

TEST_CASE("bilaplacian scales like epsilon squared") {
  const double sup1 = make_weight(zeta(), 1.0, 2).bilap_phi_sup();
  CHECK(sup1 > 0.0);
  for (double eps : {0.5, 0.1}) {
    WeightFamily w = make_weight(zeta(), eps, 2);
    double sup = 0.0;
    for (double r : log_spaced(0.9 / eps, 1.5 / eps, 20000)) sup = std::max(sup, std::abs(w.bilap_psi(r)));
    CHECK(sup <= eps * eps * sup1 * (1 + 1e-9));
    CHECK(sup >= eps * eps * sup1 * (1 - 1e-3));
  }
}

TEST_CASE("I_eps vanishes when the field lives inside the parabolic region") {
  RadialGrid g = build_grid(2, 4.0, 512);
  Field u(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) {
    double r = g.nodes[j];
    u[j] = r < 1.0 ? 2.0 * std::exp(-1.0 / (1.0 - r * r)) : 0.0;
  }
  WeightFamily w = make_weight(zeta(), 0.5, 2);
  CHECK(std::abs(i_eps(g, u, w, 2.0)) < 1e-12);
  IEpsTerms q = i_eps_terms(g, u, sample_quadratic(g), 2.0);
  CHECK(q.value == 0.0);
}

TEST_CASE("I_eps stays below its pointwise upper bound") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> amp(0.5, 4.0), width(0.3, 3.0);
  RadialGrid g = build_grid(2, 20.0, 2048);
  for (int k = 0; k < 10; ++k) {
    Field u = gaussian(g, amp(rng), width(rng));
    for (double eps : {1.0, 0.3, 0.1}) {
      WeightFamily w = make_weight(zeta(), eps, 2);
      CHECK(i_eps(g, u, w, 2.0) <= i_eps_upper_bound(g, u, w, 2.0) + 1e-10);
    }
  }
}

TEST_CASE("find_epsilon certifies a negative-energy datum") {
  RadialGrid g = build_grid(2, 12.0, 2048);
  Field u = gaussian(g, 3.0, 1.0);
  FunctionalReport f = report(g, u, 2.0);
  REQUIRE(f.energy < 0.0);
  std::vector<Field> corpus{u};
  EpsilonCertificate c = find_epsilon(-4.0 * f.energy, std::sqrt(7.5 * f.mass), g, corpus, zeta(), 2.0);
  CHECK(c.epsilon > 0.0);
  CHECK(c.max_i_eps <= -4.0 * f.energy);
  CHECK(c.tried_epsilon.back() == c.epsilon);
}

TEST_CASE("find_epsilon failure modes") {
  RadialGrid g = build_grid(2, 12.0, 512);
  std::vector<Field> corpus{gaussian(g, 3.0, 1.0)};
  double mass = report(g, corpus[0], 2.0).mass;
  CHECK_THROWS_AS(find_epsilon(1.0, std::sqrt(mass) / 2, g, corpus, zeta(), 2.0), std::invalid_argument);
  CHECK_THROWS_AS(find_epsilon(0.0, 10.0, g, corpus, zeta(), 2.0), std::invalid_argument);
  // a tall ring sitting on the plateau of every weight tried: I_eps > 0 throughout
  Field ring(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) {
    double s = (g.nodes[j] - 6.0) / 0.5;
    ring[j] = 5.0 * std::exp(-s * s);
  }
  std::vector<Field> tall{ring};
  CHECK_THROWS_AS(find_epsilon(1e-12, 100.0, g, tall, zeta(), 2.0, 2), EpsilonSearchError);
}

TEST_CASE("bad parameters") {
  CHECK_THROWS_AS(make_weight(zeta(), 0.0, 2), std::invalid_argument);
  CHECK_THROWS_AS(make_weight(zeta(), 1.0, 0), std::invalid_argument);
  CHECK_THROWS_AS(log_spaced(0.0, 1.0, 10), std::invalid_argument);
  CHECK_THROWS_AS(ZetaProfile::standard_mollifier(4), std::invalid_argument);
}
