#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "cglab/functionals.hpp"
#include "cglab/radial_grid.hpp"
#include "cglab/variance_weights.hpp"

namespace cglab {

struct SimParams {
  int dim = 2;
  double alpha = 2.0;
  double theta = 0.0;
  RadialGrid grid;

  double dt0 = 1e-4;
  double dt_min = 1e-12;
  double u_max = 0.0;  // <= 0: 1e6·‖u0‖∞
  double t_end = 1.0;
  double tol = 1e-8;
  int record_every = 1;

  double tail_threshold = 1e-10;
  bool nonlinear = true;
  // θ = ±π/2 is only admitted in this mode (or with the nonlinearity off).
  bool nls_reference = false;

  // Optional truncated weight; its terms are recorded next to the |x|² ones.
  std::optional<SampledWeight> weight;
};

/// Per-weight integrals recorded along a trajectory, in the finite-volume pairing.
///   wmass        ∫Ψ|u|²
///   var1_rhs     cosθ(−∫Ψ|u_r|² + ∫Ψ|u|^{α+2} + ½∫ΔΨ|u|²) + sinθ Im∫Ψ′ū u_r
///   defect_grad  ∫(2−Ψ″)|u_r|²
///   defect_lp    ∫(2N−ΔΨ)|u|^{α+2}
///   bilap_mass   ∫Δ²Ψ|u|²
///   j_val        −2∫Ψ|u_r|² + (α+4)/(α+2)∫Ψ|u|^{α+2} + ∫ΔΨ|u|²
///   psi_ut2      ∫Ψ|u_t|²
struct WeightTerms {
  double wmass = 0.0;
  double var1_rhs = 0.0;
  double defect_grad = 0.0;
  double defect_lp = 0.0;
  double bilap_mass = 0.0;
  double j_val = 0.0;
  double psi_ut2 = 0.0;
};

/// Functionals are in the finite-volume pairing of the discrete Laplacian.
struct TrajectorySample {
  double t = 0.0;
  double dt = 0.0;
  double mass = 0.0;
  double energy = 0.0;
  double i_val = 0.0;
  double linf = 0.0;
  double variance = 0.0;
  double diss_cum = 0.0;
  double mass_cum = 0.0;
  double imqu = 0.0;
  double var1_rhs = 0.0;
  double tail_mag = 0.0;

  double grad = 0.0;
  double lp_alpha2 = 0.0;
  WeightTerms quad;
  std::optional<WeightTerms> weighted;
};

enum class RunStatus { global_until_horizon, blowup, truncation_violated };
std::string to_string(RunStatus s);
RunStatus run_status_from_string(const std::string& s);

struct BlowupEstimate {
  RunStatus status = RunStatus::global_until_horizon;
  bool blowup_detected = false;  // survives a truncation_violated status
  std::string trigger;           // "u_max", "dt_floor" or ""
  double t_last = 0.0;
  double t_lo = 0.0;
  double t_hi = 0.0;
  double t_fit = 0.0;  // NaN when the rate fit is not possible
  double fit_exponent = 0.0;
  double t_truncation = 0.0;  // first accepted time with |u(r_max)| above threshold; NaN if none
  std::size_t accepted = 0;
  std::size_t rejected = 0;
};

struct SimResult {
  std::vector<TrajectorySample> samples;
  BlowupEstimate estimate;
  Field final_state;
};

/// e^{iθ}(Δu + |u|^α u) (nonlinearity dropped when p.nonlinear is false).
Field rhs(std::span<const cplx> u, const SimParams& p);

struct StepResult {
  Field u_next;  // two half steps
  Field u_mid;   // state after the first half step
  double error = 0.0;
};

/// One step-doubled IMEX step: Crank–Nicolson on e^{iθ}Δ, nonlinearity at a
/// linearly-implicit predicted midpoint.
StepResult step(std::span<const cplx> u, double dt, const SimParams& p);

/// Throws std::invalid_argument on bad parameters, NonFiniteFieldError on a
/// non-finite u0, std::runtime_error when dt underflows without growth.
SimResult simulate(std::span<const cplx> u0, const SimParams& p);

/// θ must be ±π/2 and α < 4/N.
SimResult simulate_nls_reference(std::span<const cplx> u0, SimParams p);

void validate(const SimParams& p);

struct RateFit {
  double t_fit = 0.0;  // NaN when not determinable
  double exponent = 0.0;
};

/// Fits ‖u‖∞ ≈ C(T−t)^{−1/α} over the last decade of growth: T from a linear
/// fit of ‖u‖∞^{−α} against t, the exponent from log‖u‖∞ against log(T−t).
RateFit fit_blowup_rate(std::span<const double> t, std::span<const double> linf, double alpha);

/// Observables of one state at time t (diss_cum, mass_cum, dt left zero).
TrajectorySample observe(std::span<const cplx> u, const SimParams& p);

WeightTerms weight_terms(std::span<const cplx> u, std::span<const cplx> ut, const SampledWeight& w,
                         const SimParams& p);

}  // namespace cglab
