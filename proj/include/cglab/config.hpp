#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cglab/corpus.hpp"
#include "cglab/experiments.hpp"
#include "cglab/integrator.hpp"

namespace cglab {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct WeightConfig {
  enum class Mode { none, fixed, automatic };
  Mode mode = Mode::none;
  double epsilon = 0.0;
  // automatic: find_epsilon(a, A); unset values come from the initial datum
  // as a = −NαE(u0) and A = sqrt(K)‖u0‖.
  std::optional<double> a;
  std::optional<double> A;
  int snapshots = 0;  // solution states up to τ added to the certification corpus
};

struct NecessityConfig {
  CorpusSpec family;
  std::vector<double> lambdas;
  AutoGrid grid;
  double tolerance = 0.05;
};

struct Lemma71SweepConfig {
  CorpusSpec family;
  std::vector<double> lambdas;
  std::vector<double> r0;
};

struct Lemma71Config {
  std::vector<CorpusSpec> corpus;
  double mass_bound = 3.0;
  std::vector<double> c_grid;
  bool override_hypotheses = false;
  AutoGrid grid;
  std::optional<Lemma71SweepConfig> sweep;
};

struct WeightsTableConfig {
  std::vector<double> epsilons{1.0, 0.1, 0.01};
  int count = 1000;
  // radii are log-spaced on [r_min, r_max]/ε
  double r_min = 1e-3;
  double r_max = 10.0;
};

struct RunConfig {
  int dim = 2;
  double alpha = 2.0;
  std::vector<double> thetas{0.0};

  double r_max = 12.0;
  int m = 2048;

  double dt0 = 1e-4;
  double dt_min = 1e-12;
  double u_max = 0.0;
  double tol = 1e-8;
  double t_end = 1.0;
  int record_every = 1;
  double tail_threshold = 1e-10;
  bool nonlinear = true;

  CorpusSpec initial_data;
  double gn_constant_c = 1.0;
  WeightConfig weight;
  std::string output_dir = "out";

  double audit_fraction = 0.9;
  std::map<std::string, double> ceilings = default_identity_ceilings();

  int threads = 1;
  double tail_speed = 0.0;

  std::optional<NecessityConfig> necessity;
  std::optional<Lemma71Config> lemma71;
  WeightsTableConfig weights;
};

/// Strict parse: unknown keys, wrong types and out-of-range values raise
/// ConfigError naming the key path.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);

CorpusSpec parse_corpus_spec(const nlohmann::json& j, const std::string& path);

/// Simulation parameters for one θ (grid built from r_max, m). The weight is
/// attached only for Mode::fixed; automatic weights are resolved by the caller.
SimParams make_params(const RunConfig& c, double theta);

}  // namespace cglab
