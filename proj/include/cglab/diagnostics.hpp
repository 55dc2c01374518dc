#pragma once

#include <span>
#include <string>
#include <vector>

#include "cglab/integrator.hpp"

namespace cglab {

/// Residual series of one identity. max_rel_residual divides by the largest
/// magnitude either side of the identity reaches over the span.
struct IdentityReport {
  std::string name;
  double max_abs_residual = 0.0;
  double max_rel_residual = 0.0;
  double worst_time = 0.0;
  std::vector<double> t;
  std::vector<double> residual;
};

using Trajectory = std::span<const TrajectorySample>;

/// Samples with t <= t_stop.
std::vector<TrajectorySample> truncate_span(Trajectory traj, double t_stop);

/// d(mass)/dt + 2cosθ I at interior samples ("mass_balance").
IdentityReport check_mass_identity(Trajectory traj, double alpha, double theta);

/// energy(t) + diss_cum(t) − energy(0) ("energy_dissipation").
IdentityReport check_energy_identity(Trajectory traj);

/// |∫u_t ū| − |I| ("modulus").
IdentityReport check_modulus_identity(Trajectory traj);

/// Mass rate against the L^{α+2} form ("mass_balance_lp") and the gradient
/// form ("mass_balance_grad").
std::vector<IdentityReport> check_combined_identities(Trajectory traj, double alpha, double theta);

enum class WeightKind { quadratic, truncated };

/// First-derivative weighted variance identity ("variance_rate") and the
/// second-derivative radial identity ("weighted_variance_acceleration"); for
/// the quadratic weight also the pure variance form ("variance_acceleration").
/// Requires every accepted step to be recorded; throws std::invalid_argument
/// otherwise, and when a truncated weight is asked of a trajectory that did
/// not record one.
std::vector<IdentityReport> check_variance_identities(Trajectory traj, WeightKind weight,
                                                      double theta, double alpha, int dim);

struct TauMeasurement {
  double tau = 0.0;  // +∞ if mass never exceeds K·mass(0)
  double k_const = 0.0;
  bool nonpositive_energy = true;  // E(u0) <= 0, where the T_max ≤ (α+4)/α·τ conclusion applies
};

TauMeasurement measure_tau(Trajectory traj, double alpha);

/// Largest relative violation of I ≤ (α+2)E ≤ (α+2)E(0); 0 when it holds.
double energy_chain_violation(Trajectory traj, double alpha);

/// Largest relative decrease of −E·mass^{−(α+2)/2} between consecutive samples.
double levine_violation(Trajectory traj, double alpha);

/// Largest relative step against the requested direction.
double monotone_violation(std::span<const double> values, bool nondecreasing);

/// Nonuniform three-point derivatives at interior index i.
double d1_nonuniform(std::span<const double> t, std::span<const double> f, std::size_t i);
double d2_nonuniform(std::span<const double> t, std::span<const double> f, std::size_t i);

}  // namespace cglab
