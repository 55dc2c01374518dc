#pragma once

#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cglab/radial_grid.hpp"

namespace cglab {

/// The profile ζ(t) = t − ∫₀ᵗ (t−s) h(s) ds built from a unit-mass C^∞ bump h
/// supported in [1,2].
///
/// ζ′ = 1 − H and ζ″ = −h, where H(t) = ∫₀ᵗ h. H and ∫H are tabulated on a
/// dense uniform mesh of [1,2] and read back through cubic Hermite
/// interpolation whose slopes are the exact derivatives; outside [1,2] the
/// closed forms ζ = t and ζ = M are used.
class ZetaProfile {
 public:
  static ZetaProfile standard_mollifier(int table_intervals = 4096);

  double h(double s) const;
  double dh(double s) const;
  double d2h(double s) const;
  double h_integral(double t) const;  // H(t) = ∫₀ᵗ h

  double zeta(double t) const;
  double zeta1(double t) const;
  double zeta2(double t) const;
  double zeta3(double t) const;
  double zeta4(double t) const;

  /// ξ(t) = sqrt(2∫₀ᵗh + 4t h(t)).
  double xi(double t) const;

  /// M = ∫₀² s h(s) ds.
  double plateau() const { return plateau_; }
  double normalization() const { return norm_; }

 private:
  struct Table {
    int n = 0;
    std::vector<double> H;   // H(1 + k/n)
    std::vector<double> IH;  // ∫₁^{1+k/n} H
  };
  double norm_ = 1.0;
  double plateau_ = 0.0;
  std::shared_ptr<const Table> table_;

  double raw_bump(double s) const;
  void locate(double t, int& k, double& s) const;
  double integral_of_h_integral(double t) const;
};

/// ε-rescaled truncated variance weight Ψ_ε(x) = ε⁻² ζ(ε²|x|²) in R^N and
/// the radial derivatives the identities need.
class WeightFamily {
 public:
  WeightFamily(ZetaProfile zeta, double epsilon, int dim);

  double epsilon() const { return eps_; }
  int dim() const { return dim_; }
  const ZetaProfile& zeta() const { return zeta_; }

  double psi(double r) const;
  double dpsi(double r) const;
  double psi2(double r) const;
  double lap_psi(double r) const;
  double bilap_psi(double r) const;
  double gamma_eps(double r) const;

  /// sup_x |Δ²Φ| for the unscaled weight Φ = Ψ_1.
  double bilap_phi_sup() const;

 private:
  ZetaProfile zeta_;
  double eps_;
  int dim_;
};

/// Throws std::invalid_argument if epsilon <= 0 or dim < 1.
WeightFamily make_weight(const ZetaProfile& zeta, double epsilon, int dim);

/// A radial weight Ψ sampled on a grid with its derivatives.
struct SampledWeight {
  std::string kind;  // "quadratic" or "truncated"
  double epsilon = 0.0;
  std::vector<double> psi, dpsi, psi2, lap, bilap;
};

SampledWeight sample_quadratic(const RadialGrid& grid);

/// Pointwise values at one radius plus the residuals of
///   2 − Ψ″ = γ_ε²
///   2N − ΔΨ = Nγ_ε² + 4(N−1)ε²r²ζ″(ε²r²)
struct WeightSample {
  double r = 0.0;
  double psi = 0.0;
  double psi2 = 0.0;
  double lap_psi = 0.0;
  double bilap_psi = 0.0;
  double gamma_eps = 0.0;
  double hessian_residual = 0.0;
  double laplacian_residual = 0.0;
};

std::vector<WeightSample> tabulate_weight(const WeightFamily& w, std::span<const double> radii);

/// n points log-spaced on [lo, hi].
std::vector<double> log_spaced(double lo, double hi, int n);
SampledWeight sample_weight(const RadialGrid& grid, const WeightFamily& w);

/// The three Lemma-style integrals of I_ε kept separately for auditing.
struct IEpsTerms {
  double defect_grad = 0.0;   // ∫(2 − Ψ″)|u_r|²
  double defect_lp = 0.0;     // ∫(2N − ΔΨ)|u|^{α+2}
  double bilap_mass = 0.0;    // ∫Δ²Ψ|u|²
  double value = 0.0;         // −2·defect_grad + α/(α+2)·defect_lp − bilap_mass/2
};

IEpsTerms i_eps_terms(const RadialGrid& grid, std::span<const cplx> u, const SampledWeight& w,
                      double alpha);
double i_eps(const RadialGrid& grid, std::span<const cplx> u, const WeightFamily& w, double alpha);

/// Right-hand side of the pointwise I_ε upper bound
///   −2∫γ_ε²|u_r|² + Nα/(α+2)∫γ_ε²|u|^{α+2} + ε²/2 ‖Δ²Φ‖_∞ ‖u‖².
double i_eps_upper_bound(const RadialGrid& grid, std::span<const cplx> u, const WeightFamily& w,
                         double alpha);

struct EpsilonCertificate {
  double epsilon = 0.0;
  double max_i_eps = 0.0;
  std::vector<double> tried_epsilon;
  std::vector<double> tried_max_i_eps;
};

class EpsilonSearchError : public std::runtime_error {
 public:
  EpsilonSearchError(double best_eps, double best_value)
      : std::runtime_error("find_epsilon: no epsilon on the search grid satisfies the bound"),
        best_epsilon(best_eps),
        best_max_i_eps(best_value) {}
  double best_epsilon;
  double best_max_i_eps;
};

/// Largest ε = 2^{-k}, k = 0..max_halvings, with max over the corpus of I_ε ≤ a.
/// Every corpus field must satisfy ∫|u|² ≤ A².
EpsilonCertificate find_epsilon(double a, double A, const RadialGrid& grid,
                                std::span<const Field> corpus, const ZetaProfile& zeta,
                                double alpha, int max_halvings = 30);

}  // namespace cglab
