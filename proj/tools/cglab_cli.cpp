#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>

#include <CLI11.hpp>

#include "cglab/bounds.hpp"
#include "cglab/config.hpp"
#include "cglab/experiments.hpp"
#include "cglab/functionals.hpp"
#include "cglab/persist.hpp"
#include "cglab/variance_weights.hpp"

namespace fs = std::filesystem;
using namespace cglab;

namespace {

enum Exit { kOk = 0, kFailure = 1, kConfig = 2, kTruncation = 3, kAudit = 4 };

struct Flags {
  std::string config;
  std::string out;
  int threads = 0;
  std::optional<double> epsilon;
  std::optional<int> dim;
};

RunConfig load(const Flags& f, bool required = true) {
  RunConfig c;
  if (!f.config.empty()) {
    c = load_config(f.config);
  } else if (required) {
    throw ConfigError("--config is required for this subcommand");
  }
  if (!f.out.empty()) c.output_dir = f.out;
  if (f.threads > 0) c.threads = f.threads;
  if (f.dim) {
    if (*f.dim < 1) throw ConfigError("--dim must be >= 1");
    c.dim = *f.dim;
  }
  return c;
}

fs::path out_dir(const RunConfig& c) {
  fs::path p(c.output_dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw std::runtime_error("cannot create " + p.string() + ": " + ec.message());
  return p;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// Failing identities as "name (value > ceiling)".
std::vector<std::string> audit_failures(std::span<const IdentityReport> reports,
                                        const std::map<std::string, double>& ceilings) {
  std::vector<std::string> out;
  for (const auto& r : reports) {
    auto it = ceilings.find(r.name);
    if (it == ceilings.end()) continue;
    if (!(r.max_rel_residual <= it->second)) {
      out.push_back(r.name + " (" + fmt(r.max_rel_residual) + " > " + fmt(it->second) + ")");
    }
  }
  return out;
}

json params_json(const SimParams& p) {
  return json{{"dim", p.dim},
              {"alpha", num(p.alpha)},
              {"theta", num(p.theta)},
              {"r_max", num(p.grid.r_max)},
              {"m", p.grid.m},
              {"dt0", num(p.dt0)},
              {"dt_min", num(p.dt_min)},
              {"u_max", num(p.u_max)},
              {"tol", num(p.tol)},
              {"t_end", num(p.t_end)},
              {"record_every", p.record_every},
              {"tail_threshold", num(p.tail_threshold)},
              {"nonlinear", p.nonlinear},
              {"weight_epsilon", p.weight ? num(p.weight->epsilon) : json(nullptr)}};
}

json certificate_json(const EpsilonCertificate& c, double a, double A) {
  json tried = json::array();
  for (std::size_t i = 0; i < c.tried_epsilon.size(); ++i) {
    tried.push_back(json{{"epsilon", num(c.tried_epsilon[i])},
                         {"max_i_eps", num(c.tried_max_i_eps[i])}});
  }
  return json{{"a", num(a)},
              {"A", num(A)},
              {"epsilon", num(c.epsilon)},
              {"max_i_eps", num(c.max_i_eps)},
              {"tried", tried}};
}

// Resolves weight.auto into a sampled weight on p.grid.
std::optional<json> resolve_auto_weight(const RunConfig& c, SimParams& p, const Field& u0) {
  if (c.weight.mode != WeightConfig::Mode::automatic) return std::nullopt;
  const FunctionalReport f0 = report(p.grid, u0, p.alpha);
  const double a = c.weight.a.value_or(-p.dim * p.alpha * f0.energy);
  const double A = c.weight.A.value_or(std::sqrt(k_const(p.alpha) * f0.mass));
  const std::vector<Field> corpus = mass_window_snapshots(u0, p, c.weight.snapshots);
  const ZetaProfile zeta = ZetaProfile::standard_mollifier();
  const EpsilonCertificate cert = find_epsilon(a, A, p.grid, corpus, zeta, p.alpha);
  p.weight = sample_weight(p.grid, make_weight(zeta, cert.epsilon, p.dim));
  return certificate_json(cert, a, A);
}

void write_run(const fs::path& dir, const SimParams& p, const SimResult& sim,
               std::span<const IdentityReport> ids, const BoundsReport& b,
               const std::optional<json>& certificate) {
  fs::create_directories(dir);
  write_trajectory_csv(dir / "trajectory.csv", sim.samples);
  write_identity_csv(dir / "identities.csv", ids);
  json payload{{"params", params_json(p)},
               {"estimate", to_json(sim.estimate)},
               {"bounds", to_json(b)},
               {"identities", identity_summary(ids)}};
  if (certificate) payload["weight_certificate"] = *certificate;
  write_json(dir / "summary.json", make_document("run", payload));

  PlotSpec res{"identity residuals", "t", "|residual|", false, true, {}};
  for (const auto& r : ids) {
    PlotSeries s{r.name, r.t, {}};
    for (double v : r.residual) s.y.push_back(std::abs(v));
    res.series.push_back(std::move(s));
  }
  write_svg_plot(dir / "residuals.svg", res);
  PlotSpec lin{"sup norm", "t", "max |u|", false, true, {}};
  PlotSeries s{"linf", {}, {}};
  for (const auto& x : sim.samples) {
    s.x.push_back(x.t);
    s.y.push_back(x.linf);
  }
  lin.series.push_back(std::move(s));
  write_svg_plot(dir / "linf.svg", lin);
}

void print_identities(std::span<const IdentityReport> ids) {
  for (const auto& r : ids) {
    std::printf("  %-42s max rel %-12s at t = %s\n", r.name.c_str(), fmt(r.max_rel_residual).c_str(),
                fmt(r.worst_time).c_str());
  }
}

struct SingleRun {
  SimParams p;
  SimResult sim;
  std::vector<IdentityReport> ids;
  BoundsReport bounds;
  std::optional<json> certificate;
};

SingleRun run_single(const RunConfig& c) {
  if (c.thetas.size() != 1) {
    throw ConfigError("this subcommand takes a single theta; use sweep for theta lists");
  }
  SingleRun r;
  r.p = make_params(c, c.thetas[0]);
  const Field u0 = generate(r.p.grid, c.initial_data, r.p.tail_threshold);
  r.certificate = resolve_auto_weight(c, r.p, u0);
  r.sim = simulate(u0, r.p);
  r.ids = audit_trajectory(r.sim, r.p, c.audit_fraction);
  const FunctionalReport f0 =
      initial_functionals(c.initial_data, c.dim, c.r_max, c.m, c.alpha, c.tail_threshold);
  r.bounds = make_bounds_report(r.p.dim, r.p.alpha, r.p.theta, f0.mass, f0.energy, c.gn_constant_c);
  return r;
}

int cmd_simulate(const Flags& f) {
  const RunConfig c = load(f);
  const SingleRun r = run_single(c);
  write_run(out_dir(c), r.p, r.sim, r.ids, r.bounds, r.certificate);
  const auto& e = r.sim.estimate;
  std::printf("status %s  t_lo %s  t_hi %s  accepted %zu  rejected %zu\n",
              to_string(e.status).c_str(), fmt(e.t_lo).c_str(), fmt(e.t_hi).c_str(), e.accepted,
              e.rejected);
  if (e.status == RunStatus::truncation_violated) {
    std::cerr << "truncation violated at t = " << e.t_truncation << "; enlarge grid.r_max\n";
    return kTruncation;
  }
  return kOk;
}

// Audits trajectory.csv + summary.json in the output directory, simulating
// first when they are missing.
int cmd_verify(const Flags& f) {
  const RunConfig c = load(f);
  const fs::path dir = out_dir(c);
  if (!fs::exists(dir / "trajectory.csv") || !fs::exists(dir / "summary.json")) {
    std::printf("no trajectory in %s, simulating\n", dir.string().c_str());
    const SingleRun r = run_single(c);
    write_run(dir, r.p, r.sim, r.ids, r.bounds, r.certificate);
  }
  const json summary = read_json(dir / "summary.json", "run");
  const json& params = summary.at("params");
  SimParams p;
  p.dim = params.at("dim").get<int>();
  p.alpha = get_num(params, "alpha", "params");
  p.theta = get_num(params, "theta", "params");
  SimResult sim;
  sim.estimate = estimate_from_json(summary.at("estimate"));
  sim.samples = read_trajectory_csv(dir / "trajectory.csv");
  const auto ids = audit_trajectory(sim, p, c.audit_fraction);

  json detail = identity_summary(ids);
  for (const auto& r : ids) {
    const std::string name = "identity_" + r.name + ".csv";
    std::ofstream out(dir / name);
    out << "t,residual\n";
    for (std::size_t i = 0; i < r.t.size(); ++i) {
      out << format_double(r.t[i]) << ',' << format_double(r.residual[i]) << '\n';
    }
    if (!out) throw std::runtime_error("write to " + (dir / name).string() + " failed");
  }
  write_identity_csv(dir / "identities.csv", ids);
  write_json(dir / "identities.json",
             make_document("identities", json{{"audit_fraction", num(c.audit_fraction)},
                                              {"estimate", summary.at("estimate")},
                                              {"identities", detail}}));

  std::printf("status %s  t_lo %s\n", to_string(sim.estimate.status).c_str(),
              fmt(sim.estimate.t_lo).c_str());
  print_identities(ids);
  if (sim.estimate.status == RunStatus::truncation_violated) {
    std::cerr << "truncation violated at t = " << sim.estimate.t_truncation << "\n";
    return kTruncation;
  }
  const auto bad = audit_failures(ids, c.ceilings);
  for (const auto& b : bad) std::cerr << "identity above ceiling: " << b << "\n";
  return bad.empty() ? kOk : kAudit;
}

int cmd_sweep(const Flags& f) {
  const RunConfig c = load(f);
  SimParams base = make_params(c, 0.0);
  const Field u0 = generate(base.grid, c.initial_data, base.tail_threshold);
  const std::optional<json> certificate = resolve_auto_weight(c, base, u0);
  SweepOptions opt;
  opt.threads = c.threads;
  opt.gn_c = c.gn_constant_c;
  opt.audit_fraction = c.audit_fraction;
  opt.tail_speed = c.tail_speed;
  const SweepResult res = theta_sweep(c.initial_data, base, c.thetas, opt);

  const fs::path dir = out_dir(c);
  std::vector<SweepRecord> records;
  std::vector<std::string> failures;
  for (std::size_t k = 0; k < res.runs.size(); ++k) {
    const SweepRun& run = res.runs[k];
    records.push_back(run.record);
    char name[32];
    std::snprintf(name, sizeof name, "theta_%02zu", k);
    write_run(dir / name, run.params, run.sim, run.identities,
              make_bounds_report(run.params.dim, run.params.alpha, run.params.theta,
                                 run.record.mass0, run.record.e0, c.gn_constant_c),
              certificate);
    for (const auto& b : audit_failures(run.identities, c.ceilings)) {
      failures.push_back(std::string(name) + ": " + b);
    }
  }
  write_sweep_csv(dir / "sweep.csv", records);
  json doc = sweep_document(records, res.any_truncation);
  try {
    const PowerFit fit = fit_cos_power(records);
    doc["cos_power_fit"] = json{{"slope", num(fit.slope)},
                                {"intercept", num(fit.intercept)},
                                {"r2", num(fit.r2)},
                                {"n", fit.n}};
  } catch (const std::invalid_argument&) {
    doc["cos_power_fit"] = nullptr;
  }
  write_json(dir / "sweep.json", doc);

  PlotSpec plot{"blow-up time against cos theta", "cos theta", "t", true, true, {}};
  PlotSeries lo{"t_lo", {}, {}}, hi{"t_hi", {}, {}}, up{"upper bound", {}, {}};
  for (const auto& r : records) {
    lo.x.push_back(r.cos_theta);
    lo.y.push_back(r.t_lo);
    hi.x.push_back(r.cos_theta);
    hi.y.push_back(r.t_hi);
    up.x.push_back(r.cos_theta);
    up.y.push_back(r.thm1_upper);
  }
  plot.series = {lo, hi, up};
  write_svg_plot(dir / "t_lo_vs_cos.svg", plot);

  std::printf("%-10s %-10s %-20s %-12s %-12s %-12s\n", "theta", "cos", "status", "t_lo", "t_hi",
              "upper");
  for (const auto& r : records) {
    std::printf("%-10s %-10s %-20s %-12s %-12s %-12s\n", fmt(r.theta).c_str(),
                fmt(r.cos_theta).c_str(), to_string(r.status).c_str(), fmt(r.t_lo).c_str(),
                fmt(r.t_hi).c_str(), fmt(r.thm1_upper).c_str());
  }
  if (!doc["cos_power_fit"].is_null()) {
    std::printf("fit t_lo ~ cos^slope: slope %s  r2 %s\n",
                fmt(get_num(doc["cos_power_fit"], "slope")).c_str(),
                fmt(get_num(doc["cos_power_fit"], "r2")).c_str());
  }
  if (res.any_truncation) {
    std::cerr << "at least one run violated the truncation threshold\n";
    return kTruncation;
  }
  for (const auto& b : failures) std::cerr << "identity above ceiling: " << b << "\n";
  return failures.empty() ? kOk : kAudit;
}

int cmd_bounds(const Flags& f) {
  const RunConfig c = load(f);
  const FunctionalReport f0 =
      initial_functionals(c.initial_data, c.dim, c.r_max, c.m, c.alpha, c.tail_threshold);
  json reports = json::array();
  for (double theta : c.thetas) {
    reports.push_back(to_json(make_bounds_report(c.dim, c.alpha, theta, f0.mass, f0.energy,
                                                 c.gn_constant_c)));
  }
  const json doc = make_document("bounds", json{{"reports", reports}});
  write_json(out_dir(c) / "bounds.json", doc);
  std::cout << doc.dump(2) << "\n";
  return kOk;
}

int cmd_weights(const Flags& f) {
  const RunConfig c = load(f, false);
  std::vector<double> eps = c.weights.epsilons;
  if (f.epsilon) {
    if (!(*f.epsilon > 0.0)) throw ConfigError("--epsilon must be positive");
    eps = {*f.epsilon};
  }
  const fs::path dir = out_dir(c);
  const ZetaProfile zeta = ZetaProfile::standard_mollifier();
  json per_eps = json::array();
  for (double e : eps) {
    const WeightFamily w = make_weight(zeta, e, c.dim);
    const auto radii = log_spaced(c.weights.r_min / e, c.weights.r_max / e, c.weights.count);
    const auto rows = tabulate_weight(w, radii);
    char name[64];
    std::snprintf(name, sizeof name, "weights_eps_%g.csv", e);
    std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + (dir / name).string() + " for writing");
    out << "r,psi,psi2,lap_psi,bilap_psi,gamma_eps,identity_residual_hessian,"
           "identity_residual_laplacian\n";
    double max_h = 0, max_l = 0;
    for (const auto& s : rows) {
      out << format_double(s.r) << ',' << format_double(s.psi) << ',' << format_double(s.psi2)
          << ',' << format_double(s.lap_psi) << ',' << format_double(s.bilap_psi) << ','
          << format_double(s.gamma_eps) << ',' << format_double(s.hessian_residual) << ','
          << format_double(s.laplacian_residual) << '\n';
      max_h = std::max(max_h, std::abs(s.hessian_residual));
      max_l = std::max(max_l, std::abs(s.laplacian_residual));
    }
    if (!out) throw std::runtime_error("write to " + (dir / name).string() + " failed");
    const double sup = w.bilap_phi_sup();
    per_eps.push_back(json{{"epsilon", num(e)},
                           {"file", name},
                           {"max_abs_identity_residual_hessian", num(max_h)},
                           {"max_abs_identity_residual_laplacian", num(max_l)},
                           {"bilap_sup", num(sup * e * e)}});
    std::printf("eps %-8s max residuals %s %s\n", fmt(e).c_str(), fmt(max_h).c_str(),
                fmt(max_l).c_str());
  }
  json payload{{"dim", c.dim},
               {"plateau", num(zeta.plateau())},
               {"bilap_phi_sup", num(make_weight(zeta, 1.0, c.dim).bilap_phi_sup())},
               {"weights", per_eps}};
  if (c.weight.mode == WeightConfig::Mode::automatic) {
    SimParams p = make_params(c, c.thetas.front());
    const Field u0 = generate(p.grid, c.initial_data, p.tail_threshold);
    payload["certificate"] = *resolve_auto_weight(c, p, u0);
    std::printf("certified epsilon %s\n",
                fmt(get_num(payload["certificate"], "epsilon")).c_str());
  }
  write_json(dir / "weights.json", make_document("weights", payload));
  return kOk;
}

int cmd_necessity(const Flags& f) {
  const RunConfig c = load(f);
  if (!c.necessity) throw ConfigError("necessity: config has no 'necessity' section");
  NecessityOptions opt;
  opt.dim = c.dim;
  opt.alpha = c.alpha;
  opt.grid = c.necessity->grid;
  opt.tolerance = c.necessity->tolerance;
  const NecessityTable t = necessity_scan(c.necessity->family, c.necessity->lambdas, opt);
  write_json(out_dir(c) / "necessity.json", make_document("necessity", to_json(t)));
  std::printf("%-16s %-10s %-10s\n", "quantity", "predicted", "fitted");
  for (const auto& q : t.quantities) {
    std::printf("%-16s %-10s %-10s\n", q.name.c_str(), fmt(q.predicted).c_str(),
                fmt(q.fitted).c_str());
  }
  std::printf("weighted gap %s  all within %s: %s\n", fmt(t.weighted_gap()).c_str(),
              fmt(t.tolerance).c_str(), t.all_match() ? "yes" : "no");
  return kOk;
}

int cmd_lemma71(const Flags& f) {
  const RunConfig c = load(f);
  if (!c.lemma71) throw ConfigError("lemma71: config has no 'lemma71' section");
  Lemma71Options opt;
  opt.dim = c.dim;
  opt.alpha = c.alpha;
  opt.mass_bound = c.lemma71->mass_bound;
  opt.c_grid = c.lemma71->c_grid;
  opt.override_hypotheses = c.lemma71->override_hypotheses;
  opt.grid = c.lemma71->grid;
  json payload{{"dim", c.dim}, {"alpha", num(c.alpha)}, {"mass_bound", num(opt.mass_bound)}};
  if (!c.lemma71->corpus.empty()) {
    const Lemma71Result r = lemma71_check(c.lemma71->corpus, opt);
    payload["check"] = to_json(r);
    std::printf("C_min_found %s over %zu fields\n", fmt(r.c_min_found).c_str(), r.fields.size());
  }
  if (c.lemma71->sweep) {
    const auto& s = *c.lemma71->sweep;
    const Lemma71Sweep sw = lemma71_lambda_sweep(s.family, s.lambdas, s.r0, opt);
    payload["lambda_sweep"] = to_json(sw);
    for (std::size_t k = 0; k < sw.lambdas.size(); ++k) {
      std::printf("lambda %-10s r0 %-6s C_needed %-12s C_min %s\n", fmt(sw.lambdas[k]).c_str(),
                  fmt(sw.r0[k]).c_str(), fmt(sw.c_needed[k]).c_str(),
                  fmt(sw.c_min_cumulative[k]).c_str());
    }
  }
  write_json(out_dir(c) / "lemma71.json", make_document("lemma71", payload));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Radial complex Ginzburg-Landau blow-up laboratory"};
  app.require_subcommand(1);
  Flags flags;
  struct Sub {
    const char* name;
    const char* help;
    int (*run)(const Flags&);
  };
  const Sub subs[] = {
      {"simulate", "run one trajectory", cmd_simulate},
      {"sweep", "run and audit one trajectory per theta", cmd_sweep},
      {"verify-identities", "run one trajectory and gate on identity residuals", cmd_verify},
      {"bounds", "evaluate the blow-up time bounds for the initial datum", cmd_bounds},
      {"weights", "tabulate truncated variance weights", cmd_weights},
      {"necessity", "fit scaling exponents of a bump family", cmd_necessity},
      {"lemma71", "check the weighted nonlinear inequality on a corpus", cmd_lemma71},
  };
  int (*chosen)(const Flags&) = nullptr;
  for (const auto& s : subs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    sub->add_option("--config", flags.config, "JSON config");
    sub->add_option("--out", flags.out, "output directory (overrides output_dir)");
    sub->add_option("--threads", flags.threads, "sweep workers");
    sub->add_option("--epsilon", flags.epsilon, "weight scale for the weights subcommand");
    sub->add_option("--dim", flags.dim, "space dimension override");
    sub->callback([&chosen, run = s.run] { chosen = run; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }
  try {
    return chosen(flags);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const SchemaError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
}
