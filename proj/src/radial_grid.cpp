#include "cglab/radial_grid.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace cglab {

double unit_sphere_area(int dim) {
  if (dim < 1) throw std::invalid_argument("unit_sphere_area: dim must be >= 1");
  const double n = dim;
  return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

RadialGrid build_grid(int dim, double r_max, int m) {
  if (dim < 1) throw std::invalid_argument("build_grid: dim must be >= 1");
  if (!(r_max > 0.0)) throw std::invalid_argument("build_grid: r_max must be positive");
  if (m < 16) throw std::invalid_argument("build_grid: m must be >= 16");
  if (m % 2 != 0) throw std::invalid_argument("build_grid: m must be even (composite Simpson)");

  RadialGrid g;
  g.dim = dim;
  g.r_max = r_max;
  g.m = m;
  g.dr = r_max / m;
  g.omega = unit_sphere_area(dim);

  const std::size_t n = static_cast<std::size_t>(m) + 1;
  const double dr = g.dr;
  g.nodes.resize(n);
  for (std::size_t j = 0; j < n; ++j) g.nodes[j] = static_cast<double>(j) * dr;
  g.nodes.back() = r_max;

  g.quad_weights.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    double c = (j == 0 || j == n - 1) ? 1.0 : (j % 2 == 1 ? 4.0 : 2.0);
    g.quad_weights[j] = g.omega * std::pow(g.nodes[j], dim - 1) * c * dr / 3.0;
  }

  // Finite-volume pairing: cell j = [r_{j-1/2}, r_{j+1/2}] ∩ [0, ∞).
  g.face_areas.resize(n);
  g.cell_volumes.resize(n);
  auto ball = [&](double r) { return g.omega * std::pow(r, dim) / dim; };
  for (std::size_t j = 0; j < n; ++j) {
    const double rp = (static_cast<double>(j) + 0.5) * dr;
    const double rm = j == 0 ? 0.0 : (static_cast<double>(j) - 0.5) * dr;
    g.face_areas[j] = g.omega * std::pow(rp, dim - 1);
    g.cell_volumes[j] = ball(rp) - ball(rm);
  }

  g.lap_lower.assign(n, 0.0);
  g.lap_diag.assign(n, 0.0);
  g.lap_upper.assign(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const double inv = 1.0 / (g.cell_volumes[j] * dr);
    const double right = g.face_areas[j] * inv;
    const double left = j == 0 ? 0.0 : g.face_areas[j - 1] * inv;
    g.lap_lower[j] = left;
    g.lap_upper[j] = j + 1 < n ? right : 0.0;  // ghost u_{m+1} = 0
    g.lap_diag[j] = -(left + right);
  }
  return g;
}

void require_aligned(const RadialGrid& grid, std::size_t n, const char* what) {
  if (n != grid.size()) {
    throw std::invalid_argument(std::string(what) + ": sample count " + std::to_string(n) +
                                " does not match grid size " + std::to_string(grid.size()));
  }
}

double integrate(const RadialGrid& grid, std::span<const double> g) {
  require_aligned(grid, g.size(), "integrate");
  double s = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) s += grid.quad_weights[j] * g[j];
  return s;
}

cplx integrate(const RadialGrid& grid, std::span<const cplx> g) {
  require_aligned(grid, g.size(), "integrate");
  double re = 0.0, im = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    re += grid.quad_weights[j] * g[j].real();
    im += grid.quad_weights[j] * g[j].imag();
  }
  return {re, im};
}

double integrate_cells(const RadialGrid& grid, std::span<const double> g) {
  require_aligned(grid, g.size(), "integrate_cells");
  double s = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) s += grid.cell_volumes[j] * g[j];
  return s;
}

Field laplacian(const RadialGrid& grid, std::span<const cplx> u) {
  require_aligned(grid, u.size(), "laplacian");
  const std::size_t n = u.size();
  Field out(n);
  for (std::size_t j = 0; j < n; ++j) {
    cplx v = grid.lap_diag[j] * u[j];
    if (j > 0) v += grid.lap_lower[j] * u[j - 1];
    if (j + 1 < n) v += grid.lap_upper[j] * u[j + 1];
    out[j] = v;
  }
  return out;
}

Field ddr(const RadialGrid& grid, std::span<const cplx> u) {
  require_aligned(grid, u.size(), "ddr");
  const std::size_t n = u.size();
  const double h = grid.dr;
  Field out(n);
  out[0] = 0.0;
  for (std::size_t j = 1; j + 1 < n; ++j) out[j] = (u[j + 1] - u[j - 1]) / (2.0 * h);
  out[n - 1] = (3.0 * u[n - 1] - 4.0 * u[n - 2] + u[n - 3]) / (2.0 * h);
  return out;
}

}  // namespace cglab
