#include "cglab/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <numbers>
#include <stdexcept>
#include <thread>

#include "cglab/bounds.hpp"
#include "cglab/functionals.hpp"
#include "cglab/variance_weights.hpp"

namespace cglab {

namespace {

bool is_dense(Trajectory traj) {
  for (std::size_t i = 1; i < traj.size(); ++i) {
    const double gap = traj[i].t - traj[i - 1].t;
    if (std::abs(gap - traj[i].dt) > 1e-9 * traj[i].dt + 1e-15 * std::abs(traj[i].t)) {
      return false;
    }
  }
  return true;
}

int even_ceil(double x) {
  int m = static_cast<int>(std::ceil(x - 1e-9));
  if (m % 2) ++m;
  return std::max(m, 16);
}

}  // namespace

std::vector<double> thetas_from_cos_log_grid(double start, double factor, int count) {
  if (!(start > 0.0 && start <= 1.0) || !(factor > 0.0 && factor < 1.0) || count < 1) {
    throw std::invalid_argument(
        "cos_theta_log_grid: need 0 < start <= 1, 0 < factor < 1 and count >= 1");
  }
  std::vector<double> out;
  double c = start;
  for (int k = 0; k < count; ++k, c *= factor) out.push_back(std::acos(c));
  return out;
}

std::map<std::string, double> default_identity_ceilings() {
  return {
      {"mass_balance", 1e-4},
      {"energy_dissipation", 1e-4},
      {"modulus", 1e-8},
      {"mass_balance_lp", 1e-4},
      {"mass_balance_grad", 1e-4},
      {"variance_rate", 1e-4},
      {"weighted_variance_acceleration", 1e-3},
      {"variance_acceleration", 1e-3},
      {"truncated_variance_rate", 1e-4},
      {"truncated_weighted_variance_acceleration", 1e-3},
  };
}

std::vector<IdentityReport> audit_trajectory(const SimResult& sim, const SimParams& p,
                                             double fraction) {
  std::vector<TrajectorySample> kept;
  Trajectory traj = sim.samples;
  if (sim.estimate.blowup_detected) {
    kept = truncate_span(sim.samples, fraction * sim.estimate.t_lo);
    traj = kept;
  }
  std::vector<IdentityReport> out;
  if (traj.empty()) return out;
  out.push_back(check_energy_identity(traj));
  out.push_back(check_modulus_identity(traj));
  if (traj.size() < 3) return out;
  out.push_back(check_mass_identity(traj, p.alpha, p.theta));
  for (auto& r : check_combined_identities(traj, p.alpha, p.theta)) out.push_back(std::move(r));
  if (is_dense(traj)) {
    for (auto& r : check_variance_identities(traj, WeightKind::quadratic, p.theta, p.alpha, p.dim)) {
      out.push_back(std::move(r));
    }
    if (traj.front().weighted) {
      for (auto& r :
           check_variance_identities(traj, WeightKind::truncated, p.theta, p.alpha, p.dim)) {
        r.name = "truncated_" + r.name;
        out.push_back(std::move(r));
      }
    }
  }
  return out;
}

FunctionalReport initial_functionals(const CorpusSpec& spec, int dim, double r_max, int m,
                                     double alpha, double tail_threshold) {
  const RadialGrid g1 = build_grid(dim, r_max, m);
  const RadialGrid g2 = build_grid(dim, r_max, 2 * m);
  const FunctionalReport a = report(g1, generate(g1, spec, tail_threshold), alpha);
  const FunctionalReport b = report(g2, generate(g2, spec, tail_threshold), alpha);
  auto x = [](double coarse, double fine) { return (4.0 * fine - coarse) / 3.0; };
  FunctionalReport f;
  f.mass = x(a.mass, b.mass);
  f.grad = x(a.grad, b.grad);
  f.lp_alpha2 = x(a.lp_alpha2, b.lp_alpha2);
  f.variance = x(a.variance, b.variance);
  f.energy = 0.5 * f.grad - f.lp_alpha2 / (alpha + 2.0);
  f.i_val = f.grad - f.lp_alpha2;
  f.linf = b.linf;
  return f;
}

std::vector<Field> mass_window_snapshots(std::span<const cplx> u0, const SimParams& p, int count) {
  if (count < 0) throw std::invalid_argument("mass_window_snapshots: count must be >= 0");
  std::vector<Field> out{Field(u0.begin(), u0.end())};
  if (count == 0) return out;
  SimParams probe = p;
  probe.weight.reset();
  const SimResult sim = simulate(u0, probe);
  double t_stop = sim.estimate.blowup_detected ? 0.9 * sim.estimate.t_lo : sim.estimate.t_last;
  t_stop = std::min(t_stop, measure_tau(sim.samples, p.alpha).tau);
  // Stop just short of the crossing so every state stays inside the window.
  t_stop *= 0.999;
  Field u(u0.begin(), u0.end());
  double t = 0.0;
  for (int k = 1; k <= count; ++k) {
    const double target = t_stop * k / count;
    SimParams leg = probe;
    leg.t_end = target - t;
    leg.dt0 = std::min(p.dt0, leg.t_end);
    leg.dt_min = std::min(p.dt_min, leg.dt0);
    u = simulate(u, leg).final_state;
    t = target;
    out.push_back(u);
  }
  return out;
}

RadialGrid sweep_grid(const SimParams& base, double theta, double mass0, double e0,
                      const SweepOptions& opt) {
  if (!(opt.tail_speed > 0.0)) return base.grid;
  double horizon = base.t_end;
  if (e0 < 0.0) horizon = std::min(horizon, thm1_upper(mass0, e0, base.alpha, theta));
  const double r_max = std::max(base.grid.r_max, opt.tail_speed * horizon);
  const int m = even_ceil(r_max / base.grid.dr);
  return build_grid(base.grid.dim, m * base.grid.dr, m);
}

SweepResult theta_sweep(const CorpusSpec& u0_spec, const SimParams& base,
                        std::span<const double> thetas, const SweepOptions& opt) {
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    if (!(std::abs(thetas[i]) < 0.5 * std::numbers::pi)) {
      throw std::invalid_argument("theta_sweep: every theta must lie strictly inside (-pi/2, pi/2)");
    }
    if (i > 0 && !(thetas[i] > thetas[i - 1])) {
      throw std::invalid_argument("theta_sweep: thetas must be strictly increasing");
    }
  }
  if (opt.threads < 1) throw std::invalid_argument("theta_sweep: threads must be >= 1");
  validate(base);

  const FunctionalReport f0 = initial_functionals(u0_spec, base.dim, base.grid.r_max, base.grid.m,
                                                  base.alpha, base.tail_threshold);

  SweepResult result;
  result.runs.resize(thetas.size());
  std::vector<std::exception_ptr> errors(thetas.size());

  auto run_one = [&](std::size_t i) {
    const double theta = thetas[i];
    SweepRun& run = result.runs[i];
    SimParams p = base;
    p.theta = theta;
    p.grid = sweep_grid(base, theta, f0.mass, f0.energy, opt);
    if (p.weight && p.grid.size() != base.grid.size()) {
      const auto w = make_weight(ZetaProfile::standard_mollifier(), p.weight->epsilon, p.dim);
      p.weight = sample_weight(p.grid, w);
    }
    const Field u0 = generate(p.grid, u0_spec, p.tail_threshold);
    run.sim = simulate(u0, p);
    run.identities = audit_trajectory(run.sim, p, opt.audit_fraction);

    SweepRecord& rec = run.record;
    const BlowupEstimate& est = run.sim.estimate;
    rec.theta = theta;
    rec.cos_theta = std::cos(theta);
    rec.status = est.status;
    rec.blowup_detected = est.blowup_detected;
    rec.t_lo = est.t_lo;
    rec.t_hi = est.t_hi;
    rec.t_fit = est.t_fit;
    rec.mass0 = f0.mass;
    rec.e0 = f0.energy;
    const BoundsReport b =
        make_bounds_report(p.dim, p.alpha, theta, f0.mass, f0.energy, opt.gn_c);
    rec.thm1_upper = b.thm1_upper;
    rec.thm2_lower = b.thm2_lower;
    rec.tau = measure_tau(run.sim.samples, p.alpha).tau;
    rec.k_tau_bound = std::isfinite(rec.tau) ? tau_to_tmax(rec.tau, p.alpha) : kInfinity;
    for (const auto& r : run.identities) rec.identity_max_residuals[r.name] = r.max_rel_residual;
    rec.r_max = p.grid.r_max;
    rec.m = p.grid.m;

    if (!opt.keep_trajectories) {
      run.sim.samples.clear();
      run.sim.samples.shrink_to_fit();
      run.sim.final_state.clear();
      run.sim.final_state.shrink_to_fit();
      for (auto& r : run.identities) {
        r.t.clear();
        r.residual.clear();
      }
      p.grid = RadialGrid{};
      p.weight.reset();
    }
    run.params = std::move(p);
  };

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < thetas.size(); i = next++) {
      try {
        run_one(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t n_workers =
      std::min<std::size_t>(static_cast<std::size_t>(opt.threads), std::max<std::size_t>(1, thetas.size()));
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }

  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("theta = " + std::to_string(thetas[i]) + ": " + e.what());
    } catch (const std::exception& e) {
      throw std::runtime_error("theta = " + std::to_string(thetas[i]) + ": " + e.what());
    }
  }
  for (const auto& run : result.runs) {
    if (run.record.status == RunStatus::truncation_violated) result.any_truncation = true;
  }
  return result;
}

PowerFit fit_power(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("fit_power: need two or more paired points");
  }
  const std::size_t n = x.size();
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0) || !std::isfinite(x[i]) || !std::isfinite(y[i])) {
      throw std::invalid_argument("fit_power: values must be positive and finite");
    }
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("fit_power: abscissae are all equal");
  PowerFit f;
  f.n = n;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss_res = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = ly[i] - (f.intercept + f.slope * lx[i]);
    ss_res += e * e;
  }
  f.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return f;
}

PowerFit fit_cos_power(std::span<const SweepRecord> records, double SweepRecord::*stat) {
  std::vector<double> c, t;
  for (const auto& r : records) {
    if (r.status != RunStatus::blowup) continue;
    c.push_back(r.cos_theta);
    t.push_back(r.*stat);
  }
  if (c.size() < 5) {
    throw std::invalid_argument("fit_cos_power: needs at least 5 blow-up records, got " +
                                std::to_string(c.size()));
  }
  return fit_power(c, t);
}

// ---- scaling families -----------------------------------------------------

RadialGrid grid_for(const CorpusSpec& spec, int dim, const AutoGrid& policy) {
  if (!(policy.nodes_per_width > 0.0)) {
    throw std::invalid_argument("grid policy: nodes_per_width must be positive");
  }
  const double width = feature_width(spec);
  if (!(width > 0.0)) throw std::invalid_argument("grid policy: profile has no positive width");
  const double dr = width / policy.nodes_per_width;
  double r_max = policy.r_max;
  if (!(r_max > 0.0)) {
    const double end = support_end(spec);
    if (std::isfinite(end)) {
      r_max = end + 0.25 * width;
    } else {
      const double amp = std::abs(spec.amplitude);
      const double decades = amp > 0.0 ? std::max(1.0, std::log(amp / 1e-13)) : 1.0;
      r_max = spec.r0 + width * std::sqrt(decades);
    }
  }
  const int m = even_ceil(r_max / dr);
  return build_grid(dim, policy.r_max > 0.0 ? r_max : m * dr, m);
}

namespace {

struct WeightedIntegrals {
  FunctionalReport f;
  double weighted_lp = 0.0;
  double weighted_grad = 0.0;
};

WeightedIntegrals weighted_integrals(const RadialGrid& g, std::span<const cplx> u, double alpha) {
  WeightedIntegrals w;
  w.f = report(g, u, alpha);
  const Field ur = ddr(g, u);
  std::vector<double> a(u.size()), b(u.size());
  for (std::size_t j = 0; j < u.size(); ++j) {
    const double r2 = g.nodes[j] * g.nodes[j];
    a[j] = r2 * abs_pow(u[j], alpha + 2.0);
    b[j] = r2 * std::norm(ur[j]);
  }
  w.weighted_lp = integrate(g, a);
  w.weighted_grad = integrate(g, b);
  return w;
}

}  // namespace

std::map<std::string, double> predicted_exponents(const CorpusSpec& base, int dim, double alpha) {
  const double n = dim;
  switch (base.kind) {
    case CorpusSpec::Kind::scaled_bump:
      if (base.r0 == 0.0) {
        return {{"mass", 0.0},
                {"grad", 2.0},
                {"lp_alpha2", n * alpha / 2.0},
                {"weighted_lp", n * alpha / 2.0 - 2.0},
                {"weighted_grad", 0.0}};
      }
      return {{"mass", n - 1.0},
              {"grad", n + 1.0},
              {"lp_alpha2", n * (alpha + 2.0) / 2.0 - 1.0},
              {"weighted_lp", n * (alpha + 2.0) / 2.0 - 1.0},
              {"weighted_grad", n + 1.0}};
    case CorpusSpec::Kind::annular_bump:
      return {{"mass", 0.0},
              {"grad", 2.0},
              {"lp_alpha2", alpha / 2.0},
              {"weighted_lp", alpha / 2.0},
              {"weighted_grad", 2.0}};
    default:
      throw std::invalid_argument("necessity_scan: family must be scaled_bump or annular_bump, got " +
                                  to_string(base.kind));
  }
}

const ScalingQuantity& NecessityTable::at(const std::string& name) const {
  for (const auto& q : quantities) {
    if (q.name == name) return q;
  }
  throw std::out_of_range("NecessityTable: no quantity '" + name + "'");
}

double NecessityTable::weighted_gap() const {
  return at("weighted_lp").fitted - at("weighted_grad").fitted;
}

bool NecessityTable::all_match() const {
  return std::all_of(quantities.begin(), quantities.end(), [&](const ScalingQuantity& q) {
    return std::abs(q.fitted - q.predicted) <= tolerance;
  });
}

NecessityTable necessity_scan(const CorpusSpec& base, std::span<const double> lambdas,
                              const NecessityOptions& opt) {
  if (lambdas.size() < 2) throw std::invalid_argument("necessity_scan: needs two or more lambdas");
  const auto predicted = predicted_exponents(base, opt.dim, opt.alpha);
  static const char* kNames[] = {"mass", "grad", "lp_alpha2", "weighted_lp", "weighted_grad"};

  NecessityTable t;
  t.family = to_string(base.kind);
  t.dim = opt.dim;
  t.alpha = opt.alpha;
  t.offset = base.r0;
  t.tolerance = opt.tolerance;
  t.lambdas.assign(lambdas.begin(), lambdas.end());
  for (const char* name : kNames) {
    ScalingQuantity q;
    q.name = name;
    q.predicted = predicted.at(name);
    t.quantities.push_back(std::move(q));
  }
  for (double lambda : lambdas) {
    CorpusSpec s = base;
    s.lambda = lambda;
    const RadialGrid g = grid_for(s, opt.dim, opt.grid);
    const Field u = generate(g, s);
    const WeightedIntegrals w = weighted_integrals(g, u, opt.alpha);
    const double vals[] = {w.f.mass, w.f.grad, w.f.lp_alpha2, w.weighted_lp, w.weighted_grad};
    for (std::size_t k = 0; k < t.quantities.size(); ++k) t.quantities[k].values.push_back(vals[k]);
  }
  for (auto& q : t.quantities) q.fitted = fit_power(t.lambdas, q.values).slope;
  return t;
}

// ---- weighted nonlinear inequality ----------------------------------------

Lemma71Field lemma71_terms(const RadialGrid& grid, std::span<const cplx> u, double alpha,
                           std::string label) {
  require_aligned(grid, u.size(), "lemma71_terms");
  const WeightedIntegrals w = weighted_integrals(grid, u, alpha);
  Lemma71Field f;
  f.label = std::move(label);
  f.mass = w.f.mass;
  f.lp = w.f.lp_alpha2;
  f.weighted_lp = w.weighted_lp;
  f.weighted_grad = w.weighted_grad;
  f.c_needed = std::max(0.0, (f.weighted_lp - f.weighted_grad) / (f.lp + 1.0));
  for (std::size_t j = 0; j < u.size(); ++j) {
    f.pointwise_sup =
        std::max(f.pointwise_sup, std::pow(grid.nodes[j], grid.dim) * std::norm(u[j]));
  }
  const double bound = 2.0 * std::sqrt(f.mass * f.weighted_grad);
  f.pointwise_margin = bound - f.pointwise_sup;
  f.pointwise_margin_sharp = bound / grid.omega - f.pointwise_sup;
  return f;
}

std::vector<double> default_c_grid() {
  std::vector<double> c{0.0};
  for (int k = -24; k <= 48; ++k) c.push_back(std::pow(10.0, k / 8.0));
  return c;
}

namespace {

void check_lemma71_window(const Lemma71Options& opt) {
  if (opt.override_hypotheses) return;
  if (opt.dim < 2) {
    throw std::invalid_argument("lemma71_check: hypothesis N >= 2 violated (N = " +
                                std::to_string(opt.dim) + ")");
  }
  if (opt.alpha < 4.0 / opt.dim) {
    throw std::invalid_argument("lemma71_check: hypothesis 4/N <= alpha violated (alpha = " +
                                std::to_string(opt.alpha) + ")");
  }
  if (opt.alpha > 4.0) {
    throw std::invalid_argument("lemma71_check: hypothesis alpha <= 4 violated (alpha = " +
                                std::to_string(opt.alpha) + ")");
  }
}

Lemma71Field field_terms(const CorpusSpec& spec, const Lemma71Options& opt, std::string label) {
  const RadialGrid g = grid_for(spec, opt.dim, opt.grid);
  const Field u = generate(g, spec);
  Lemma71Field f = lemma71_terms(g, u, opt.alpha, std::move(label));
  const double m2 = opt.mass_bound * opt.mass_bound;
  if (f.mass > m2 * (1.0 + 1e-12)) {
    throw std::invalid_argument("lemma71_check: hypothesis ||u||^2 <= M^2 violated by " + f.label +
                                " (mass " + std::to_string(f.mass) + " > " + std::to_string(m2) +
                                ")");
  }
  return f;
}

double smallest_c(std::span<const double> grid, std::span<const Lemma71Field> fields) {
  for (double c : grid) {
    const bool ok = std::all_of(fields.begin(), fields.end(), [&](const Lemma71Field& f) {
      return f.weighted_lp <= f.weighted_grad + c * (f.lp + 1.0);
    });
    if (ok) return c;
  }
  return kInfinity;
}

std::string spec_label(const CorpusSpec& s) {
  std::string out = to_string(s.kind) + "(A=" + std::to_string(s.amplitude);
  switch (s.kind) {
    case CorpusSpec::Kind::gaussian: out += ",sigma=" + std::to_string(s.sigma); break;
    case CorpusSpec::Kind::ring:
      out += ",r0=" + std::to_string(s.r0) + ",width=" + std::to_string(s.width);
      break;
    default: out += ",lambda=" + std::to_string(s.lambda) + ",r0=" + std::to_string(s.r0);
  }
  return out + ")";
}

std::vector<double> sorted_grid(const Lemma71Options& opt) {
  std::vector<double> c = opt.c_grid.empty() ? default_c_grid() : opt.c_grid;
  for (double v : c) {
    if (!(v >= 0.0)) throw std::invalid_argument("lemma71_check: C grid values must be >= 0");
  }
  std::sort(c.begin(), c.end());
  return c;
}

}  // namespace

Lemma71Result lemma71_check(std::span<const CorpusSpec> corpus, const Lemma71Options& opt) {
  check_lemma71_window(opt);
  if (!(opt.mass_bound > 0.0)) throw std::invalid_argument("lemma71_check: M must be positive");
  const std::vector<double> c_grid = sorted_grid(opt);
  Lemma71Result res;
  res.hypotheses_overridden = opt.override_hypotheses;
  for (const auto& spec : corpus) {
    res.fields.push_back(field_terms(spec, opt, spec_label(spec)));
    res.c_needed_max = std::max(res.c_needed_max, res.fields.back().c_needed);
  }
  res.c_min_found = smallest_c(c_grid, res.fields);
  return res;
}

Lemma71Sweep lemma71_lambda_sweep(const CorpusSpec& base, std::span<const double> lambdas,
                                  std::span<const double> r0, const Lemma71Options& opt) {
  check_lemma71_window(opt);
  if (lambdas.empty()) throw std::invalid_argument("lemma71 sweep: empty lambda grid");
  if (r0.size() != 1 && r0.size() != lambdas.size()) {
    throw std::invalid_argument("lemma71 sweep: r0 needs one value or one per lambda");
  }
  const std::vector<double> c_grid = sorted_grid(opt);
  Lemma71Sweep out;
  std::vector<Lemma71Field> fields;
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    CorpusSpec s = base;
    s.lambda = lambdas[k];
    s.r0 = r0.size() == 1 ? r0[0] : r0[k];
    fields.push_back(field_terms(s, opt, spec_label(s)));
    out.lambdas.push_back(s.lambda);
    out.r0.push_back(s.r0);
    out.c_needed.push_back(fields.back().c_needed);
    out.c_min_cumulative.push_back(smallest_c(c_grid, fields));
  }
  return out;
}

}  // namespace cglab
