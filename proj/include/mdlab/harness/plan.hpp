#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "mdlab/ampute/ampute.hpp"
#include "mdlab/analyze/model.hpp"
#include "mdlab/analyze/rubin.hpp"
#include "mdlab/common/json_util.hpp"
#include "mdlab/impute/spec.hpp"
#include "mdlab/metrics/panels.hpp"
#include "mdlab/synthgen/specs.hpp"

namespace mdlab::harness {

struct SimPlan {
  std::string preset = "custom";
  std::size_t n_individuals = 300;
  int n_waves = 5;
  int first_wave = 2;
  int replications = 150;
  int r_max = 400;
  std::vector<double> rates{0.10, 0.30, 0.50};
  std::vector<impute::Method> methods = impute::all_methods();
  int m = 5;
  double alpha = 0.05;
  std::uint64_t seed = 1;
  int workers = 1;

  // Learner settings for every engine; method and m are set per cell.
  impute::ImputerSpec imputer;
  std::string anchor = "education";
  ampute::BudgetMode budget = ampute::BudgetMode::GlobalCount;
  bool listwise = true;
  analyze::DfMethod df_method = analyze::DfMethod::Classic;
  metrics::BiasMode bias_mode = metrics::BiasMode::AbsoluteOfMean;

  synthgen::MarginalSpec marginals = synthgen::default_marginals();
  synthgen::OutcomeModel outcome = synthgen::default_outcome();
  // Endogenous-model JSON file; empty selects the built-in models.
  std::string endogenous_models;

  std::vector<int> waves() const;
  void validate() const;  // throws ConfigError
  Json to_json() const;
  static SimPlan from_json(const Json& j);

  // n = 300 x 5 waves, R = 150, m = 5, with engine sizes trimmed for a
  // desk machine.
  static SimPlan desk();
  // n = 2482 x 5 waves, R = 1000 of 1200, m = 10, package-default engines.
  static SimPlan paper();
  static SimPlan named(std::string_view preset);
};

// Base seeds shipped for the stochastic acceptance checks.
const std::vector<std::uint64_t>& desk_seeds();

// Outcome on every other column with the shared reference levels and wave
// dummies against the first wave.
analyze::ModelSpec analysis_model(const SimPlan& plan);

}  // namespace mdlab::harness
