#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "cglab/corpus.hpp"
#include "cglab/diagnostics.hpp"
#include "cglab/integrator.hpp"

namespace cglab {

/// θ_k = arccos(start·factor^k), k = 0..count−1 (increasing θ for factor < 1).
std::vector<double> thetas_from_cos_log_grid(double start, double factor, int count);

/// Residual ceilings for the audit; names as in IdentityReport::name.
std::map<std::string, double> default_identity_ceilings();

/// All identities a trajectory supports, on [0, fraction·t_lo] for blow-up
/// runs and on the whole run otherwise. The variance identities are added
/// when every accepted step was recorded, the truncated-weight ones when the
/// samples carry weighted terms. Only dim, alpha and theta are read from p.
std::vector<IdentityReport> audit_trajectory(const SimResult& sim, const SimParams& p,
                                             double fraction = 0.9);

/// Functionals of the initial datum, Richardson-extrapolated from grids with
/// m and 2m intervals on [0, r_max] to cancel the O(dr²) gradient error. Used
/// wherever a bound needs mass(u0) and E(u0).
FunctionalReport initial_functionals(const CorpusSpec& spec, int dim, double r_max, int m,
                                     double alpha, double tail_threshold = 1e-10);

/// u0 followed by `count` solution states at equally spaced times up to the
/// first time the mass reaches K·mass(u0) (or 0.9·t_lo, or t_end, whichever
/// comes first). These all satisfy ‖u‖² ≤ K‖u0‖².
std::vector<Field> mass_window_snapshots(std::span<const cplx> u0, const SimParams& p, int count);

struct SweepRecord {
  double theta = 0.0;
  double cos_theta = 0.0;
  RunStatus status = RunStatus::global_until_horizon;
  bool blowup_detected = false;
  double t_lo = 0.0;
  double t_hi = 0.0;
  double t_fit = 0.0;
  double thm1_upper = 0.0;
  double thm2_lower = 0.0;
  double tau = 0.0;
  double k_tau_bound = 0.0;  // (α+4)/α·τ
  std::map<std::string, double> identity_max_residuals;

  double r_max = 0.0;
  int m = 0;
  double mass0 = 0.0;
  double e0 = 0.0;
};

struct SweepOptions {
  int threads = 1;
  double gn_c = 1.0;
  double audit_fraction = 0.9;
  // > 0: r_max(θ) = max(base r_max, tail_speed·min(t_end, thm1_upper(θ)))
  // at the base spacing, for data that radiate at a finite speed.
  double tail_speed = 0.0;
  bool keep_trajectories = true;
};

struct SweepRun {
  SweepRecord record;
  SimParams params;
  SimResult sim;  // samples dropped unless keep_trajectories
  std::vector<IdentityReport> identities;
};

struct SweepResult {
  std::vector<SweepRun> runs;
  bool any_truncation = false;
};

/// One audited simulation per θ, in parallel over options.threads workers;
/// results keep the θ order. θ must be strictly increasing inside (−π/2, π/2).
SweepResult theta_sweep(const CorpusSpec& u0, const SimParams& base,
                        std::span<const double> thetas, const SweepOptions& opt = {});

/// Grid used for θ under the sweep's r_max policy.
RadialGrid sweep_grid(const SimParams& base, double theta, double mass0, double e0,
                      const SweepOptions& opt);

struct PowerFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::size_t n = 0;
};

/// Least squares of log(stat) against log cos θ over records with status
/// blowup. Throws std::invalid_argument with fewer than 5 such records.
PowerFit fit_cos_power(std::span<const SweepRecord> records,
                       double SweepRecord::*stat = &SweepRecord::t_lo);

/// Plain log-log least squares.
PowerFit fit_power(std::span<const double> x, std::span<const double> y);

// ---- scaling families -----------------------------------------------------

/// Per-field grid: spacing width/nodes_per_width, r_max covering the profile
/// (support end, or where a Gaussian falls below 1e-13) unless r_max > 0.
struct AutoGrid {
  double r_max = 0.0;
  double nodes_per_width = 64.0;
};

RadialGrid grid_for(const CorpusSpec& spec, int dim, const AutoGrid& policy);

struct ScalingQuantity {
  std::string name;
  double predicted = 0.0;
  double fitted = 0.0;
  std::vector<double> values;
};

/// Quantities: mass, grad, lp_alpha2, weighted_lp (∫|x|²|u|^{α+2}) and
/// weighted_grad (∫|x|²|∇u|²), fitted as powers of λ.
struct NecessityTable {
  std::string family;
  int dim = 0;
  double alpha = 0.0;
  double offset = 0.0;
  std::vector<double> lambdas;
  std::vector<ScalingQuantity> quantities;
  double tolerance = 0.05;

  const ScalingQuantity& at(const std::string& name) const;
  /// fitted(weighted_lp) − fitted(weighted_grad)
  double weighted_gap() const;
  bool all_match() const;
};

struct NecessityOptions {
  int dim = 2;
  double alpha = 2.0;
  AutoGrid grid;
  double tolerance = 0.05;
};

/// Exponents the scaling laws predict; scaled_bump at x0 = 0 is the exact
/// dilation, at x0 > 0 the leading order of a thin shell; annular_bump to
/// leading order in 1/(λr0).
std::map<std::string, double> predicted_exponents(const CorpusSpec& base, int dim, double alpha);

/// Throws std::invalid_argument for fewer than two λ values, a non-bump
/// family, or a support leaving a fixed grid.
NecessityTable necessity_scan(const CorpusSpec& base, std::span<const double> lambdas,
                              const NecessityOptions& opt);

// ---- weighted nonlinear inequality ----------------------------------------

struct Lemma71Field {
  std::string label;
  double mass = 0.0;
  double lp = 0.0;             // ∫|u|^{α+2}
  double weighted_lp = 0.0;    // ∫|x|²|u|^{α+2}
  double weighted_grad = 0.0;  // ∫|x|²|∇u|²
  double c_needed = 0.0;       // smallest C ≥ 0 with weighted_lp ≤ weighted_grad + C(lp + 1)
  // sup r^N|u|² against 2‖u‖‖|x|∇u‖ as stated, and against the same bound
  // divided by ω_N, which is what the radial integration actually gives.
  double pointwise_sup = 0.0;
  double pointwise_margin = 0.0;
  double pointwise_margin_sharp = 0.0;
};

Lemma71Field lemma71_terms(const RadialGrid& grid, std::span<const cplx> u, double alpha,
                           std::string label = {});

struct Lemma71Options {
  int dim = 2;
  double alpha = 2.0;
  double mass_bound = 3.0;  // M, fields need ∫|u|² ≤ M²
  std::vector<double> c_grid;  // empty: {0} ∪ 10^{k/8}, k = −24..48
  bool override_hypotheses = false;  // admit N, α outside N ≥ 2, 4/N ≤ α ≤ 4
  AutoGrid grid;
};

struct Lemma71Result {
  double c_min_found = 0.0;  // +∞ when no grid value works
  double c_needed_max = 0.0;
  std::vector<Lemma71Field> fields;
  bool hypotheses_overridden = false;
};

std::vector<double> default_c_grid();

/// Throws std::invalid_argument naming the violated hypothesis.
Lemma71Result lemma71_check(std::span<const CorpusSpec> corpus, const Lemma71Options& opt);

/// Cumulative C_min along a sequence of annular bumps (λ_k, r0_k): entry k
/// covers fields 0..k.
struct Lemma71Sweep {
  std::vector<double> lambdas;
  std::vector<double> r0;
  std::vector<double> c_needed;
  std::vector<double> c_min_cumulative;
};

Lemma71Sweep lemma71_lambda_sweep(const CorpusSpec& base, std::span<const double> lambdas,
                                  std::span<const double> r0, const Lemma71Options& opt);

}  // namespace cglab
