#pragma once

#include <limits>

namespace cglab {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// mass0/(α(α+2)(−e0)cosθ) for e0 < 0, +∞ otherwise. Throws when cos θ <= 0.
double thm1_upper(double mass0, double e0, double alpha, double theta);

/// K = [1 − ((α+4)/(2α+4))^{1/2}]^{-1}.
double k_const(double alpha);

/// (α+4)/α · τ.
double tau_to_tmax(double tau, double alpha);

/// (−e0)·mass0^{−(α+2)/2}.
double eta(double mass0, double e0, double alpha);

/// C_GN = (Nc)^{Nα} (2 mass0)^{4−(N−2)α}.
double cgn(int dim, double alpha, double mass0, double c);

struct LowerBounds {
  double cgn = 0.0;
  double general = 0.0;  // mass0 / (2[(α+4)e0⁺ + 2(α+2)C_GN^{1/(4−Nα)}] cosθ)
  double nonpositive_energy = 0.0;  // mass0 / (4(α+2)C_GN^{1/(4−Nα)} cosθ); 0 when e0 > 0
};

/// Throws for α >= 4/N, c <= 0 or cos θ <= 0.
LowerBounds thm2_lower(int dim, double alpha, double mass0, double e0, double c, double theta);

/// c_fit·(1 + (4−Nα)/cosθ).
double remark_envelope(double theta, double alpha, int dim, double c_fit);

/// Every constant and bound for one datum. Inapplicable theorems give the
/// trivially true value: +∞ for upper bounds, 0 for lower bounds.
struct BoundsReport {
  int dim = 0;
  double alpha = 0.0;
  double theta = 0.0;
  double mass0 = 0.0;
  double e0 = 0.0;

  double thm1_upper = kInfinity;
  double eta = 0.0;
  double k_const = 0.0;
  double c_gn_input = 0.0;
  double cgn = 0.0;
  double thm2_lower = 0.0;
  double loweru = 0.0;
  // envelope = first + second / cosθ, i.e. (c_fit, c_fit·(4−Nα))
  double remark_envelope_coeff[2] = {0.0, 0.0};
};

BoundsReport make_bounds_report(int dim, double alpha, double theta, double mass0, double e0,
                                double c, double c_fit = 1.0);

}  // namespace cglab
