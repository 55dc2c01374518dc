#include "cglab/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace cglab {

double abs_pow(cplx z, double p) {
  const double n2 = std::norm(z);
  if (p == 2.0) return n2;
  if (p == 4.0) return n2 * n2;
  if (p == 6.0) return n2 * n2 * n2;
  if (p == 8.0) return (n2 * n2) * (n2 * n2);
  const double a = std::sqrt(n2);
  if (p == 1.0) return a;
  if (p == 3.0) return a * n2;
  if (p == 5.0) return a * n2 * n2;
  if (p == 7.0) return a * n2 * n2 * n2;
  if (a == 0.0) return 0.0;
  return std::pow(a, p);
}

std::size_t first_non_finite(std::span<const cplx> u) {
  for (std::size_t j = 0; j < u.size(); ++j) {
    if (!std::isfinite(u[j].real()) || !std::isfinite(u[j].imag())) return j;
  }
  return u.size();
}

FunctionalReport report(const RadialGrid& grid, std::span<const cplx> u, double alpha,
                        Pairing pairing) {
  if (!(alpha > 0.0)) throw std::invalid_argument("report: alpha must be positive");
  require_aligned(grid, u.size(), "report");
  if (auto bad = first_non_finite(u); bad < u.size()) throw NonFiniteFieldError("report", bad);

  FunctionalReport rep;
  if (pairing == Pairing::finite_volume) {
    const std::size_t n = u.size();
    for (std::size_t j = 0; j < n; ++j) {
      const double v = grid.cell_volumes[j];
      const double r = grid.nodes[j];
      const double m2 = std::norm(u[j]);
      const cplx next = j + 1 < n ? u[j + 1] : cplx{};
      rep.mass += v * m2;
      rep.variance += v * r * r * m2;
      rep.grad += grid.face_areas[j] * std::norm(next - u[j]) / grid.dr;
      rep.lp_alpha2 += v * abs_pow(u[j], alpha + 2.0);
      rep.linf = std::max(rep.linf, std::sqrt(m2));
    }
    rep.energy = 0.5 * rep.grad - rep.lp_alpha2 / (alpha + 2.0);
    rep.i_val = rep.grad - rep.lp_alpha2;
    return rep;
  }

  const Field ur = ddr(grid, u);
  for (std::size_t j = 0; j < u.size(); ++j) {
    const double w = grid.quad_weights[j];
    const double r = grid.nodes[j];
    const double m2 = std::norm(u[j]);
    rep.mass += w * m2;
    rep.variance += w * r * r * m2;
    rep.grad += w * std::norm(ur[j]);
    rep.lp_alpha2 += w * abs_pow(u[j], alpha + 2.0);
    rep.linf = std::max(rep.linf, std::sqrt(m2));
  }
  rep.energy = 0.5 * rep.grad - rep.lp_alpha2 / (alpha + 2.0);
  rep.i_val = rep.grad - rep.lp_alpha2;
  return rep;
}

GnCheck gn_check(const RadialGrid& grid, std::span<const cplx> u, double c) {
  if (!(c > 0.0)) throw std::invalid_argument("gn_check: c must be positive");
  require_aligned(grid, u.size(), "gn_check");
  const double n = grid.dim;
  const Field ur = ddr(grid, u);
  double mass = 0.0, grad = 0.0, lhs = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    const double w = grid.quad_weights[j];
    mass += w * std::norm(u[j]);
    grad += w * std::norm(ur[j]);
    lhs += w * abs_pow(u[j], 2.0 + 4.0 / n);
  }
  GnCheck out;
  out.lhs = lhs;
  out.rhs = c * grad * std::pow(mass, 2.0 / n);
  out.holds = out.lhs <= out.rhs;
  return out;
}

double fv_norm2(const RadialGrid& grid, std::span<const cplx> g) {
  require_aligned(grid, g.size(), "fv_norm2");
  double s = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) s += grid.cell_volumes[j] * std::norm(g[j]);
  return s;
}

cplx fv_inner(const RadialGrid& grid, std::span<const cplx> a, std::span<const cplx> b) {
  require_aligned(grid, a.size(), "fv_inner");
  require_aligned(grid, b.size(), "fv_inner");
  double re = 0.0, im = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const cplx z = std::conj(a[j]) * b[j];
    re += grid.cell_volumes[j] * z.real();
    im += grid.cell_volumes[j] * z.imag();
  }
  return {re, im};
}

double weighted_mass(const RadialGrid& grid, std::span<const cplx> u, std::span<const double> w) {
  require_aligned(grid, u.size(), "weighted_mass");
  require_aligned(grid, w.size(), "weighted_mass");
  double s = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) s += grid.quad_weights[j] * w[j] * std::norm(u[j]);
  return s;
}

}  // namespace cglab
