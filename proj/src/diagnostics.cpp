#include "cglab/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cglab/bounds.hpp"

namespace cglab {

namespace {

IdentityReport make_report(std::string name, std::vector<double> t, std::span<const double> lhs,
                           std::span<const double> rhs) {
  IdentityReport r;
  r.name = std::move(name);
  r.t = std::move(t);
  r.residual.resize(lhs.size());
  double scale = 0.0;
  for (std::size_t i = 0; i < lhs.size(); ++i) {
    r.residual[i] = lhs[i] - rhs[i];
    scale = std::max({scale, std::abs(lhs[i]), std::abs(rhs[i])});
    if (std::abs(r.residual[i]) > r.max_abs_residual) {
      r.max_abs_residual = std::abs(r.residual[i]);
      r.worst_time = r.t[i];
    }
  }
  r.max_rel_residual = scale > 0.0 ? r.max_abs_residual / scale : 0.0;
  return r;
}

void require_samples(Trajectory traj, std::size_t n, const char* who) {
  if (traj.size() < n) {
    throw std::invalid_argument(std::string(who) + ": needs at least " + std::to_string(n) +
                                " samples, got " + std::to_string(traj.size()));
  }
}

template <class F>
std::vector<double> column(Trajectory traj, F f) {
  std::vector<double> out;
  out.reserve(traj.size());
  for (const auto& s : traj) out.push_back(f(s));
  return out;
}

}  // namespace

double d1_nonuniform(std::span<const double> t, std::span<const double> f, std::size_t i) {
  const double hm = t[i] - t[i - 1], hp = t[i + 1] - t[i];
  return (hm * hm * f[i + 1] - hp * hp * f[i - 1] + (hp * hp - hm * hm) * f[i]) /
         (hm * hp * (hm + hp));
}

double d2_nonuniform(std::span<const double> t, std::span<const double> f, std::size_t i) {
  const double hm = t[i] - t[i - 1], hp = t[i + 1] - t[i];
  return 2.0 * (hm * f[i + 1] - (hm + hp) * f[i] + hp * f[i - 1]) / (hm * hp * (hm + hp));
}

std::vector<TrajectorySample> truncate_span(Trajectory traj, double t_stop) {
  std::vector<TrajectorySample> out;
  for (const auto& s : traj) {
    if (s.t > t_stop) break;
    out.push_back(s);
  }
  return out;
}

IdentityReport check_mass_identity(Trajectory traj, double alpha, double theta) {
  require_samples(traj, 3, "check_mass_identity");
  (void)alpha;
  const auto t = column(traj, [](const auto& s) { return s.t; });
  const auto mass = column(traj, [](const auto& s) { return s.mass; });
  const double c = std::cos(theta);
  std::vector<double> ti, lhs, rhs;
  for (std::size_t i = 1; i + 1 < traj.size(); ++i) {
    ti.push_back(t[i]);
    lhs.push_back(d1_nonuniform(t, mass, i));
    rhs.push_back(-2.0 * c * traj[i].i_val);
  }
  return make_report("mass_balance", std::move(ti), lhs, rhs);
}

IdentityReport check_energy_identity(Trajectory traj) {
  require_samples(traj, 1, "check_energy_identity");
  const double e0 = traj.front().energy;
  std::vector<double> lhs, rhs(traj.size(), e0);
  for (const auto& s : traj) lhs.push_back(s.energy + s.diss_cum);
  return make_report("energy_dissipation", column(traj, [](const auto& s) { return s.t; }), lhs,
                     rhs);
}

IdentityReport check_modulus_identity(Trajectory traj) {
  require_samples(traj, 1, "check_modulus_identity");
  const auto lhs = column(traj, [](const auto& s) { return s.imqu; });
  const auto rhs = column(traj, [](const auto& s) { return std::abs(s.i_val); });
  return make_report("modulus", column(traj, [](const auto& s) { return s.t; }), lhs, rhs);
}

std::vector<IdentityReport> check_combined_identities(Trajectory traj, double alpha,
                                                      double theta) {
  require_samples(traj, 3, "check_combined_identities");
  const auto t = column(traj, [](const auto& s) { return s.t; });
  const auto mass = column(traj, [](const auto& s) { return s.mass; });
  const double c = std::cos(theta);
  const double e0 = traj.front().energy;
  std::vector<double> ti, lhs, rhs_lp, rhs_grad;
  for (std::size_t i = 1; i + 1 < traj.size(); ++i) {
    const auto& s = traj[i];
    ti.push_back(t[i]);
    lhs.push_back(d1_nonuniform(t, mass, i));
    rhs_lp.push_back(2.0 * alpha / (alpha + 2.0) * c * s.lp_alpha2 + 4.0 * c * s.diss_cum -
                     4.0 * c * e0);
    rhs_grad.push_back(alpha * c * s.grad + 2.0 * (alpha + 2.0) * c * s.diss_cum -
                       2.0 * (alpha + 2.0) * c * e0);
  }
  std::vector<IdentityReport> out;
  out.push_back(make_report("mass_balance_lp", ti, lhs, rhs_lp));
  out.push_back(make_report("mass_balance_grad", ti, lhs, rhs_grad));
  return out;
}

std::vector<IdentityReport> check_variance_identities(Trajectory traj, WeightKind weight,
                                                      double theta, double alpha, int dim) {
  require_samples(traj, 3, "check_variance_identities");
  for (std::size_t i = 1; i < traj.size(); ++i) {
    const double gap = traj[i].t - traj[i - 1].t;
    if (std::abs(gap - traj[i].dt) > 1e-9 * traj[i].dt + 1e-15 * std::abs(traj[i].t)) {
      throw std::invalid_argument(
          "check_variance_identities: samples are not consecutive accepted steps (gap at t = " +
          std::to_string(traj[i].t) +
          "); second differences need dense recording, rerun with record_every = 1");
    }
  }
  auto terms = [&](const TrajectorySample& s) -> const WeightTerms& {
    if (weight == WeightKind::quadratic) return s.quad;
    if (!s.weighted) {
      throw std::invalid_argument(
          "check_variance_identities: trajectory was recorded without a truncated weight");
    }
    return *s.weighted;
  };

  const auto t = column(traj, [](const auto& s) { return s.t; });
  std::vector<double> w, j;
  for (const auto& s : traj) {
    w.push_back(terms(s).wmass);
    j.push_back(terms(s).j_val);
  }
  const double c = std::cos(theta);
  const double n = dim;
  std::vector<double> ti, rate_l, rate_r, acc_l, acc_r, pure_r;
  for (std::size_t i = 1; i + 1 < traj.size(); ++i) {
    const auto& s = traj[i];
    const WeightTerms& wt = terms(s);
    ti.push_back(t[i]);
    rate_l.push_back(0.5 * d1_nonuniform(t, w, i));
    rate_r.push_back(wt.var1_rhs);
    acc_l.push_back(0.5 * d2_nonuniform(t, w, i));
    const double common = 2.0 * n * alpha * s.energy - (n * alpha - 4.0) * s.grad +
                          c * d1_nonuniform(t, j, i) - 2.0 * c * c * wt.psi_ut2;
    acc_r.push_back(common - 2.0 * wt.defect_grad + alpha / (alpha + 2.0) * wt.defect_lp -
                    0.5 * wt.bilap_mass);
    pure_r.push_back(common);
  }
  std::vector<IdentityReport> out;
  out.push_back(make_report("variance_rate", ti, rate_l, rate_r));
  out.push_back(make_report("weighted_variance_acceleration", ti, acc_l, acc_r));
  if (weight == WeightKind::quadratic) {
    out.push_back(make_report("variance_acceleration", ti, acc_l, pure_r));
  }
  return out;
}

TauMeasurement measure_tau(Trajectory traj, double alpha) {
  require_samples(traj, 1, "measure_tau");
  TauMeasurement m;
  m.k_const = k_const(alpha);
  m.nonpositive_energy = traj.front().energy <= 0.0;
  m.tau = kInfinity;
  const double thr = m.k_const * traj.front().mass;
  for (std::size_t i = 1; i < traj.size(); ++i) {
    if (traj[i].mass > thr) {
      const auto& a = traj[i - 1];
      const auto& b = traj[i];
      m.tau = a.t + (thr - a.mass) * (b.t - a.t) / (b.mass - a.mass);
      break;
    }
  }
  return m;
}

double energy_chain_violation(Trajectory traj, double alpha) {
  if (traj.empty()) return 0.0;
  const double e0 = traj.front().energy;
  double scale = (alpha + 2.0) * std::abs(e0), worst = 0.0;
  for (const auto& s : traj) {
    scale = std::max(scale, std::abs(s.i_val));
    worst = std::max({worst, s.i_val - (alpha + 2.0) * s.energy, (alpha + 2.0) * (s.energy - e0)});
  }
  return scale > 0.0 ? worst / scale : 0.0;
}

double levine_violation(Trajectory traj, double alpha) {
  std::vector<double> eta;
  for (const auto& s : traj) {
    eta.push_back(s.mass > 0.0 ? -s.energy * std::pow(s.mass, -0.5 * (alpha + 2.0)) : 0.0);
  }
  return monotone_violation(eta, true);
}

double monotone_violation(std::span<const double> values, bool nondecreasing) {
  double scale = 0.0, worst = 0.0;
  for (double v : values) scale = std::max(scale, std::abs(v));
  for (std::size_t i = 1; i < values.size(); ++i) {
    const double d = nondecreasing ? values[i - 1] - values[i] : values[i] - values[i - 1];
    worst = std::max(worst, d);
  }
  return scale > 0.0 ? worst / scale : 0.0;
}

}  // namespace cglab
