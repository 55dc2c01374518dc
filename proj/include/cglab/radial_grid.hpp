#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace cglab {

using cplx = std::complex<double>;

/// Samples u(r_j) of a radially symmetric complex field on a RadialGrid.
using Field = std::vector<cplx>;

/// Area of the unit sphere in R^N (2, 2π, 4π, ... for N = 1, 2, 3).
double unit_sphere_area(int dim);

/// Uniform radial discretization of R^N.
///
/// Nodes r_j = j·dr for j = 0..m. Two discrete measures live on the grid:
///  - quad_weights: composite Simpson with the ω_N r^{N-1} Jacobian folded in,
///    used by every functional;
///  - cell_volumes / face_areas: the finite-volume pairing under which the
///    discrete Laplacian is self-adjoint (Crank–Nicolson is unitary in that
///    norm when the operator is skew).
struct RadialGrid {
  int dim = 0;
  double r_max = 0.0;
  int m = 0;
  double dr = 0.0;
  double omega = 0.0;

  std::vector<double> nodes;
  std::vector<double> quad_weights;
  std::vector<double> cell_volumes;
  std::vector<double> face_areas;  // face j sits at r_{j+1/2}, j = 0..m

  // Laplacian stencil: (L u)_j = lap_lower[j] u_{j-1} + lap_diag[j] u_j + lap_upper[j] u_{j+1}
  std::vector<double> lap_lower;
  std::vector<double> lap_diag;
  std::vector<double> lap_upper;

  std::size_t size() const { return nodes.size(); }
};

/// Throws std::invalid_argument for dim < 1, r_max <= 0, m < 16 or m odd.
RadialGrid build_grid(int dim, double r_max, int m);

/// ω_N Σ_j w_j g(r_j) r_j^{N-1} through the stored Simpson weights.
double integrate(const RadialGrid& grid, std::span<const double> g);

/// Complex version, integrating real and imaginary parts separately.
cplx integrate(const RadialGrid& grid, std::span<const cplx> g);

/// Σ_j V_j g_j with the finite-volume cell volumes.
double integrate_cells(const RadialGrid& grid, std::span<const double> g);

/// Δu = u'' + (N-1)/r u' in conservative form. The origin row reduces to
/// N·u''(0) with u''(0) ≈ 2(u_1-u_0)/dr²; the outer row uses a zero ghost
/// value at r_max + dr.
Field laplacian(const RadialGrid& grid, std::span<const cplx> u);

/// Centered ∂_r; zero at the origin by symmetry, second-order one-sided at r_max.
Field ddr(const RadialGrid& grid, std::span<const cplx> u);

void require_aligned(const RadialGrid& grid, std::size_t n, const char* what);

}  // namespace cglab
