#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>

#include "cglab/radial_grid.hpp"

namespace cglab {

/// Raised when a field contains NaN/Inf; carries the first offending node.
class NonFiniteFieldError : public std::runtime_error {
 public:
  NonFiniteFieldError(const std::string& where, std::size_t node)
      : std::runtime_error(where + ": non-finite value at node " + std::to_string(node)),
        node_(node) {}
  std::size_t node() const { return node_; }

 private:
  std::size_t node_;
};

/// Scalar functionals of one state.
///   mass       ∫|u|²
///   grad       ∫|∇u|²  (radial: ∫|u_r|², u_r from ddr)
///   lp_alpha2  ∫|u|^{α+2}
///   energy     grad/2 − lp_alpha2/(α+2)
///   i_val      grad − lp_alpha2
///   variance   ∫|x|²|u|²
struct FunctionalReport {
  double mass = 0.0;
  double energy = 0.0;
  double i_val = 0.0;
  double linf = 0.0;
  double variance = 0.0;
  double lp_alpha2 = 0.0;
  double grad = 0.0;
};

/// Which discrete measure the integrals use.
///   simpson        Simpson weights, gradient through ddr
///   finite_volume  cell volumes, gradient as face differences (ghost zero at
///                  r_max + dr); the pairing under which ⟨u, Lu⟩ = −grad exactly
enum class Pairing { simpson, finite_volume };

FunctionalReport report(const RadialGrid& grid, std::span<const cplx> u, double alpha,
                        Pairing pairing = Pairing::simpson);

/// Σ V_j |g_j|² style inner products in the finite-volume pairing.
double fv_norm2(const RadialGrid& grid, std::span<const cplx> g);
cplx fv_inner(const RadialGrid& grid, std::span<const cplx> a, std::span<const cplx> b);

struct GnCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = true;
};

/// lhs = ∫|u|^{2+4/N}, rhs = c ∫|∇u|² (∫|u|²)^{2/N}.
GnCheck gn_check(const RadialGrid& grid, std::span<const cplx> u, double c);

/// ∫ w |u|², w sampled on the grid and nonnegative.
double weighted_mass(const RadialGrid& grid, std::span<const cplx> u, std::span<const double> w);

/// |z|^p with exact fast paths for small integer and even-integer p.
double abs_pow(cplx z, double p);

/// First non-finite node, or size() if none.
std::size_t first_non_finite(std::span<const cplx> u);

}  // namespace cglab
