#include "cglab/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace cglab {

namespace {

void require_positive_alpha(double alpha, const char* who) {
  if (!(alpha > 0.0)) throw std::invalid_argument(std::string(who) + ": alpha must be positive");
}

double cos_checked(double theta, const char* who) {
  const double c = std::cos(theta);
  if (!(c > 0.0) || std::abs(theta) >= 0.5 * std::numbers::pi) {
    throw std::invalid_argument(std::string(who) + ": requires cos(theta) > 0");
  }
  return c;
}

}  // namespace

double thm1_upper(double mass0, double e0, double alpha, double theta) {
  require_positive_alpha(alpha, "thm1_upper");
  const double c = cos_checked(theta, "thm1_upper");
  if (!(e0 < 0.0)) return kInfinity;
  return mass0 / (alpha * (alpha + 2.0) * (-e0) * c);
}

double k_const(double alpha) {
  require_positive_alpha(alpha, "k_const");
  return 1.0 / (1.0 - std::sqrt((alpha + 4.0) / (2.0 * alpha + 4.0)));
}

double tau_to_tmax(double tau, double alpha) {
  require_positive_alpha(alpha, "tau_to_tmax");
  if (!(tau >= 0.0)) throw std::invalid_argument("tau_to_tmax: tau must be >= 0");
  return (alpha + 4.0) / alpha * tau;
}

double eta(double mass0, double e0, double alpha) {
  require_positive_alpha(alpha, "eta");
  if (!(mass0 > 0.0)) return 0.0;
  return -e0 * std::pow(mass0, -0.5 * (alpha + 2.0));
}

double cgn(int dim, double alpha, double mass0, double c) {
  const double n = dim;
  return std::pow(n * c, n * alpha) * std::pow(2.0 * mass0, 4.0 - (n - 2.0) * alpha);
}

LowerBounds thm2_lower(int dim, double alpha, double mass0, double e0, double c, double theta) {
  require_positive_alpha(alpha, "thm2_lower");
  if (dim < 1) throw std::invalid_argument("thm2_lower: dim must be >= 1");
  if (!(alpha < 4.0 / dim)) throw std::invalid_argument("thm2_lower: requires alpha < 4/N");
  if (!(c > 0.0)) throw std::invalid_argument("thm2_lower: GN constant c must be positive");
  const double ct = cos_checked(theta, "thm2_lower");
  LowerBounds lb;
  lb.cgn = cgn(dim, alpha, mass0, c);
  const double root = std::pow(lb.cgn, 1.0 / (4.0 - dim * alpha));
  const double e_plus = std::max(e0, 0.0);
  lb.general = mass0 / (2.0 * ((alpha + 4.0) * e_plus + 2.0 * (alpha + 2.0) * root) * ct);
  lb.nonpositive_energy = e0 <= 0.0 ? mass0 / (4.0 * (alpha + 2.0) * root * ct) : 0.0;
  return lb;
}

double remark_envelope(double theta, double alpha, int dim, double c_fit) {
  return c_fit * (1.0 + (4.0 - dim * alpha) / std::cos(theta));
}

BoundsReport make_bounds_report(int dim, double alpha, double theta, double mass0, double e0,
                                double c, double c_fit) {
  require_positive_alpha(alpha, "make_bounds_report");
  if (dim < 1) throw std::invalid_argument("make_bounds_report: dim must be >= 1");
  if (!(c > 0.0)) throw std::invalid_argument("make_bounds_report: GN constant c must be positive");
  BoundsReport r;
  r.dim = dim;
  r.alpha = alpha;
  r.theta = theta;
  r.mass0 = mass0;
  r.e0 = e0;
  r.eta = eta(mass0, e0, alpha);
  r.k_const = k_const(alpha);
  r.c_gn_input = c;
  r.cgn = cgn(dim, alpha, mass0, c);
  const bool parabolic = std::cos(theta) > 0.0 && std::abs(theta) < 0.5 * std::numbers::pi;
  if (parabolic) {
    r.thm1_upper = thm1_upper(mass0, e0, alpha, theta);
    if (alpha < 4.0 / dim) {
      const LowerBounds lb = thm2_lower(dim, alpha, mass0, e0, c, theta);
      r.thm2_lower = lb.general;
      r.loweru = lb.nonpositive_energy;
    }
  }
  r.remark_envelope_coeff[0] = c_fit;
  r.remark_envelope_coeff[1] = c_fit * (4.0 - dim * alpha);
  return r;
}

}  // namespace cglab
