#include "cglab/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <numbers>
#include <set>

#include "cglab/variance_weights.hpp"

namespace cglab {

using nlohmann::json;

namespace {

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

void only_keys(const json& j, const std::string& path, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw ConfigError(join(path, "") + ": expected an object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items()) {
    if (!allowed.count(k)) throw ConfigError("unknown key '" + join(path, k) + "'");
  }
}

double as_num(const json& v, const std::string& where) {
  if (!v.is_number()) throw ConfigError(where + ": expected a number");
  return v.get<double>();
}

void read(const json& j, const std::string& path, const char* key, double& out) {
  if (j.contains(key)) out = as_num(j.at(key), join(path, key));
}

void read(const json& j, const std::string& path, const char* key, int& out) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  if (!v.is_number_integer()) throw ConfigError(join(path, key) + ": expected an integer");
  out = v.get<int>();
}

void read(const json& j, const std::string& path, const char* key, bool& out) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  if (!v.is_boolean()) throw ConfigError(join(path, key) + ": expected a boolean");
  out = v.get<bool>();
}

void read(const json& j, const std::string& path, const char* key, std::string& out) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  if (!v.is_string()) throw ConfigError(join(path, key) + ": expected a string");
  out = v.get<std::string>();
}

std::vector<double> num_list(const json& v, const std::string& where) {
  if (!v.is_array()) throw ConfigError(where + ": expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(as_num(v[i], where + "[" + std::to_string(i) + "]"));
  }
  return out;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

AutoGrid parse_auto_grid(const json& j, const std::string& path, AutoGrid g) {
  read(j, path, "nodes_per_width", g.nodes_per_width);
  read(j, path, "r_max", g.r_max);
  require(g.nodes_per_width >= 20.0, join(path, "nodes_per_width") + ": must be >= 20");
  require(g.r_max >= 0.0, join(path, "r_max") + ": must be >= 0 (0 chooses automatically)");
  return g;
}

}  // namespace

CorpusSpec parse_corpus_spec(const json& j, const std::string& path) {
  only_keys(j, path, {"kind", "amplitude", "sigma", "r0", "width", "lambda", "offset"});
  if (!j.contains("kind")) throw ConfigError(join(path, "kind") + ": missing");
  std::string kind;
  read(j, path, "kind", kind);
  CorpusSpec s;
  try {
    s.kind = corpus_kind_from_string(kind);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(join(path, "kind") + ": " + e.what());
  }
  read(j, path, "amplitude", s.amplitude);
  read(j, path, "sigma", s.sigma);
  read(j, path, "r0", s.r0);
  read(j, path, "offset", s.r0);
  read(j, path, "width", s.width);
  read(j, path, "lambda", s.lambda);
  if (j.contains("r0") && j.contains("offset")) {
    throw ConfigError(path + ": give either r0 or offset, not both");
  }
  return s;
}

RunConfig parse_config(const json& j) {
  only_keys(j, "", {"dim", "alpha", "theta", "theta_list", "cos_theta_log_grid", "grid",
                    "integrator", "initial_data", "gn_constant_c", "weight", "output_dir",
                    "audit", "sweep", "necessity", "lemma71", "weights"});
  RunConfig c;
  read(j, "", "dim", c.dim);
  read(j, "", "alpha", c.alpha);
  require(c.dim >= 1, "dim: must be >= 1");
  require(c.alpha > 0.0, "alpha: must be positive");

  const int theta_keys = j.contains("theta") + j.contains("theta_list") +
                         j.contains("cos_theta_log_grid");
  require(theta_keys <= 1, "give at most one of theta, theta_list, cos_theta_log_grid");
  if (j.contains("theta")) {
    c.thetas = {as_num(j.at("theta"), "theta")};
  } else if (j.contains("theta_list")) {
    c.thetas = num_list(j.at("theta_list"), "theta_list");
    require(!c.thetas.empty(), "theta_list: must not be empty");
  } else if (j.contains("cos_theta_log_grid")) {
    const json& g = j.at("cos_theta_log_grid");
    only_keys(g, "cos_theta_log_grid", {"start", "factor", "count"});
    double start = 0.5, factor = 0.5;
    int count = 6;
    read(g, "cos_theta_log_grid", "start", start);
    read(g, "cos_theta_log_grid", "factor", factor);
    read(g, "cos_theta_log_grid", "count", count);
    try {
      c.thetas = thetas_from_cos_log_grid(start, factor, count);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  for (double t : c.thetas) {
    require(std::isfinite(t) && std::abs(t) <= 0.5 * std::numbers::pi + 1e-12,
            "theta values must lie in [-pi/2, pi/2]");
  }

  if (j.contains("grid")) {
    const json& g = j.at("grid");
    only_keys(g, "grid", {"r_max", "m"});
    read(g, "grid", "r_max", c.r_max);
    read(g, "grid", "m", c.m);
  }
  require(c.r_max > 0.0, "grid.r_max: must be positive");
  require(c.m >= 16 && c.m % 2 == 0, "grid.m: must be even and >= 16");

  if (j.contains("integrator")) {
    const json& g = j.at("integrator");
    only_keys(g, "integrator", {"dt0", "dt_min", "u_max", "tol", "t_end", "record_every",
                                "tail_threshold", "nonlinear"});
    read(g, "integrator", "dt0", c.dt0);
    read(g, "integrator", "dt_min", c.dt_min);
    read(g, "integrator", "u_max", c.u_max);
    read(g, "integrator", "tol", c.tol);
    read(g, "integrator", "t_end", c.t_end);
    read(g, "integrator", "record_every", c.record_every);
    read(g, "integrator", "tail_threshold", c.tail_threshold);
    read(g, "integrator", "nonlinear", c.nonlinear);
  }
  require(c.dt0 > 0.0, "integrator.dt0: must be positive");
  require(c.dt_min > 0.0 && c.dt_min <= c.dt0, "integrator.dt_min: must be in (0, dt0]");
  require(c.tol > 0.0, "integrator.tol: must be positive");
  require(c.t_end > 0.0, "integrator.t_end: must be positive");
  require(c.record_every >= 1, "integrator.record_every: must be >= 1");
  require(c.tail_threshold > 0.0, "integrator.tail_threshold: must be positive");

  if (j.contains("initial_data")) c.initial_data = parse_corpus_spec(j.at("initial_data"), "initial_data");
  read(j, "", "gn_constant_c", c.gn_constant_c);
  require(c.gn_constant_c > 0.0, "gn_constant_c: must be positive");

  if (j.contains("weight")) {
    const json& w = j.at("weight");
    only_keys(w, "weight", {"epsilon", "auto"});
    require(w.contains("epsilon") != w.contains("auto"), "weight: give exactly one of epsilon, auto");
    if (w.contains("epsilon")) {
      c.weight.mode = WeightConfig::Mode::fixed;
      c.weight.epsilon = as_num(w.at("epsilon"), "weight.epsilon");
      require(c.weight.epsilon > 0.0, "weight.epsilon: must be positive");
    } else {
      const json& a = w.at("auto");
      only_keys(a, "weight.auto", {"a", "A", "snapshots"});
      c.weight.mode = WeightConfig::Mode::automatic;
      if (a.contains("a")) c.weight.a = as_num(a.at("a"), "weight.auto.a");
      if (a.contains("A")) c.weight.A = as_num(a.at("A"), "weight.auto.A");
      read(a, "weight.auto", "snapshots", c.weight.snapshots);
      require(!c.weight.A || *c.weight.A > 0.0, "weight.auto.A: must be positive");
      require(c.weight.snapshots >= 0, "weight.auto.snapshots: must be >= 0");
    }
  }
  read(j, "", "output_dir", c.output_dir);

  if (j.contains("audit")) {
    const json& a = j.at("audit");
    only_keys(a, "audit", {"fraction", "ceilings"});
    read(a, "audit", "fraction", c.audit_fraction);
    require(c.audit_fraction > 0.0 && c.audit_fraction <= 1.0, "audit.fraction: must be in (0, 1]");
    if (a.contains("ceilings")) {
      const json& cl = a.at("ceilings");
      if (!cl.is_object()) throw ConfigError("audit.ceilings: expected an object");
      for (const auto& [k, v] : cl.items()) {
        if (!c.ceilings.count(k)) throw ConfigError("unknown key 'audit.ceilings." + k + "'");
        c.ceilings[k] = as_num(v, "audit.ceilings." + k);
      }
    }
  }

  if (j.contains("sweep")) {
    const json& s = j.at("sweep");
    only_keys(s, "sweep", {"threads", "tail_speed"});
    read(s, "sweep", "threads", c.threads);
    read(s, "sweep", "tail_speed", c.tail_speed);
    require(c.threads >= 1, "sweep.threads: must be >= 1");
    require(c.tail_speed >= 0.0, "sweep.tail_speed: must be >= 0");
  }

  if (j.contains("necessity")) {
    const json& n = j.at("necessity");
    only_keys(n, "necessity", {"family", "lambdas", "grid", "tolerance"});
    NecessityConfig nc;
    if (!n.contains("family")) throw ConfigError("necessity.family: missing");
    if (!n.contains("lambdas")) throw ConfigError("necessity.lambdas: missing");
    nc.family = parse_corpus_spec(n.at("family"), "necessity.family");
    nc.lambdas = num_list(n.at("lambdas"), "necessity.lambdas");
    if (n.contains("grid")) {
      only_keys(n.at("grid"), "necessity.grid", {"nodes_per_width", "r_max"});
      nc.grid = parse_auto_grid(n.at("grid"), "necessity.grid", nc.grid);
    }
    read(n, "necessity", "tolerance", nc.tolerance);
    c.necessity = nc;
  }

  if (j.contains("lemma71")) {
    const json& l = j.at("lemma71");
    only_keys(l, "lemma71",
              {"corpus", "mass_bound", "c_grid", "override_hypotheses", "grid", "lambda_sweep"});
    Lemma71Config lc;
    if (l.contains("corpus")) {
      const json& cs = l.at("corpus");
      if (!cs.is_array()) throw ConfigError("lemma71.corpus: expected an array");
      for (std::size_t i = 0; i < cs.size(); ++i) {
        lc.corpus.push_back(parse_corpus_spec(cs[i], "lemma71.corpus[" + std::to_string(i) + "]"));
      }
    }
    read(l, "lemma71", "mass_bound", lc.mass_bound);
    if (l.contains("c_grid")) lc.c_grid = num_list(l.at("c_grid"), "lemma71.c_grid");
    read(l, "lemma71", "override_hypotheses", lc.override_hypotheses);
    if (l.contains("grid")) {
      only_keys(l.at("grid"), "lemma71.grid", {"nodes_per_width", "r_max"});
      lc.grid = parse_auto_grid(l.at("grid"), "lemma71.grid", lc.grid);
    }
    if (l.contains("lambda_sweep")) {
      const json& s = l.at("lambda_sweep");
      only_keys(s, "lemma71.lambda_sweep", {"family", "lambdas", "r0"});
      Lemma71SweepConfig sc;
      if (!s.contains("family") || !s.contains("lambdas") || !s.contains("r0")) {
        throw ConfigError("lemma71.lambda_sweep: needs family, lambdas and r0");
      }
      sc.family = parse_corpus_spec(s.at("family"), "lemma71.lambda_sweep.family");
      sc.lambdas = num_list(s.at("lambdas"), "lemma71.lambda_sweep.lambdas");
      sc.r0 = num_list(s.at("r0"), "lemma71.lambda_sweep.r0");
      lc.sweep = sc;
    }
    require(lc.mass_bound > 0.0, "lemma71.mass_bound: must be positive");
    c.lemma71 = lc;
  }

  if (j.contains("weights")) {
    const json& w = j.at("weights");
    only_keys(w, "weights", {"epsilons", "count", "r_min", "r_max"});
    if (w.contains("epsilons")) c.weights.epsilons = num_list(w.at("epsilons"), "weights.epsilons");
    read(w, "weights", "count", c.weights.count);
    read(w, "weights", "r_min", c.weights.r_min);
    read(w, "weights", "r_max", c.weights.r_max);
    require(c.weights.count >= 2, "weights.count: must be >= 2");
    require(c.weights.r_min > 0.0 && c.weights.r_max > c.weights.r_min,
            "weights: need 0 < r_min < r_max");
    for (double e : c.weights.epsilons) require(e > 0.0, "weights.epsilons: must be positive");
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": malformed JSON: " + e.what());
  }
  return parse_config(j);
}

SimParams make_params(const RunConfig& c, double theta) {
  SimParams p;
  p.dim = c.dim;
  p.alpha = c.alpha;
  p.theta = theta;
  p.grid = build_grid(c.dim, c.r_max, c.m);
  p.dt0 = c.dt0;
  p.dt_min = c.dt_min;
  p.u_max = c.u_max;
  p.t_end = c.t_end;
  p.tol = c.tol;
  p.record_every = c.record_every;
  p.tail_threshold = c.tail_threshold;
  p.nonlinear = c.nonlinear;
  if (c.weight.mode == WeightConfig::Mode::fixed) {
    p.weight = sample_weight(p.grid, make_weight(ZetaProfile::standard_mollifier(), c.weight.epsilon,
                                                 c.dim));
  }
  return p;
}

}  // namespace cglab
