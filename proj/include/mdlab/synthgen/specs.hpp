#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "mdlab/common/json_util.hpp"
#include "mdlab/tabular/dataset.hpp"
#include "mdlab/treelearn/forest.hpp"
#include "mdlab/treelearn/tree.hpp"

namespace mdlab::synthgen {

inline constexpr const char* kOutcomeColumn = "ln_real_inc";

// The 22 panel variables in canonical order: metric, binary, ordinal,
// nominal (id and wave travel as panel keys).
const std::vector<tabular::ColumnInfo>& panel_columns();
const tabular::ColumnInfo& panel_column(const std::string& name);

// Reference level of every categorical panel variable in the analysis
// model; the waves' reference is the first wave.
const std::map<std::string, std::string>& reference_levels();

struct PanelConfig {
  std::size_t n_individuals = 2482;
  int n_waves = 5;
  int first_wave = 2;
  std::uint64_t seed = 1;

  std::vector<int> waves() const;
  void validate() const;
};

struct CategoricalMarginal {
  std::string column;
  std::vector<double> probs;  // over the column's levels, or values 0..K-1 for metric counts
};

struct TruncatedNormal {
  double mean = 0.0;
  double sd = 1.0;
  double low = 0.0;
  double high = 1.0;
};

struct MarginalSpec {
  // Constant independent variables, drawn once per individual.
  std::vector<CategoricalMarginal> constant;
  // Age at wave 1 is drawn from `age` narrowed so that the final wave stays
  // inside [low, high]; later waves add one year each.
  TruncatedNormal age;
  // contactattempts = min(max, shift + round(Exp(rate[w]))).
  std::vector<double> contact_rates;
  double contact_shift = 1.0;
  double contact_max = 200.0;
  std::vector<double> wb_p;
  std::vector<double> ilearn_p;
  std::vector<double> marital_initial;
  double marital_forward = 0.05;
  double fixedterm_initial = 0.0;
  double fixedterm_exit = 0.30;

  void validate(int n_waves) const;
};

MarginalSpec default_marginals();

// One endogenous variable: a fitted model over named predictors, read at
// the individual's first wave.
struct TreeVariable {
  std::vector<std::string> predictors;
  treelearn::TreeModel model;
};

struct ForestVariable {
  std::vector<std::string> predictors;
  treelearn::ForestModel model;
};

struct EndogenousModelSpec {
  TreeVariable kldb;
  TreeVariable workinghrs;
  TreeVariable work_experience;
  ForestVariable childhh;

  double workinghrs_min = 0.0;
  double workinghrs_max = 90.0;
  int workinghrs_decimals = 1;
  // Wave-1 experience is clamped to [experience_min, age - experience_entry_age];
  // each later wave adds Uniform(increment_low, increment_high).
  double experience_min = 0.17;
  double experience_entry_age = 15.0;
  double experience_increment_low = 0.0;
  double experience_increment_high = 1.0;
  int experience_decimals = 2;
  // Per wave, a household with children loses one with this probability.
  double child_ageout = 0.20;

  void validate() const;
};

// Generation order of the endogenous variables; each may only use
// predictors generated before it.
const std::vector<std::string>& endogenous_order();

// Feature layout of a predictor list, typed from the panel schema.
std::vector<treelearn::FeatureInfo> predictor_features(const std::vector<std::string>& predictors);

struct OutcomeModel {
  double intercept = 0.0;
  // Term label as produced by dummy encoding ("workinghrs", "kldb[Low]",
  // "wave[3]") with its coefficient.
  std::vector<std::pair<std::string, double>> coefficients;
  double noise_mean = 0.0;
  double noise_sd = 0.0;

  void validate() const;
};

OutcomeModel default_outcome();

Json to_json(const PanelConfig& cfg);
Json to_json(const MarginalSpec& spec);
Json to_json(const EndogenousModelSpec& spec);
Json to_json(const OutcomeModel& model);
PanelConfig panel_config_from_json(const Json& j);
MarginalSpec marginals_from_json(const Json& j);
EndogenousModelSpec endogenous_from_json(const Json& j);
OutcomeModel outcome_from_json(const Json& j);

}  // namespace mdlab::synthgen
