#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "mdlab/common/json_util.hpp"
#include "mdlab/tabular/dataset.hpp"

namespace mdlab::impute {

enum class Method { MicePmm, MiceRf, MissRanger, MissRangerPmm, MixGb };

std::string_view to_string(Method method);
Method parse_method(std::string_view text);  // throws ConfigError
const std::vector<Method>& all_methods();

struct ImputerSpec {
  Method method = Method::MicePmm;
  int m = 10;
  int iters = 0;  // 0 = method default: MICE 5, missRanger 10 (early stop), mixgb 1
  int k = 5;

  // Forest learners. mtry 0 = floor(sqrt(p)), min_leaf 0 = 5 regression / 1 classification.
  int rf_trees = 10;       // MICE-RF
  int ranger_trees = 100;  // missRanger
  int mtry = 0;
  int min_leaf = 0;
  int max_bins = 256;

  // Boosting (mixgb).
  int gbm_rounds = 100;
  double gbm_eta = 0.3;
  int gbm_max_depth = 3;
  double gbm_subsample = 0.7;
  double gbm_lambda = 1.0;
  double gbm_min_child_weight = 1.0;

  // Adds the panel wave as a predictor when the dataset has panel keys.
  bool use_wave = true;
  int threads = 1;

  int effective_iters() const;
  void validate() const;
  Json to_json() const;
  static ImputerSpec from_json(const Json& j);
};

// One variable visit inside one chain.
struct IterationTrace {
  int imputation = 0;
  int iteration = 0;
  std::string column;
  std::size_t n_imputed = 0;
  double oob_error = -1.0;  // missRanger only; -1 when not computed
};

struct Provenance {
  Method method = Method::MicePmm;
  ImputerSpec spec;
  std::uint64_t seed = 0;
  std::vector<IterationTrace> traces;
  std::vector<int> sweeps;                // per imputation, sweeps whose result was kept
  std::vector<double> imputation_seconds; // per imputation
  double seconds = 0.0;                   // wall clock for all m
  std::vector<std::string> warnings;

  Json to_json() const;
};

struct MultipleImputation {
  std::vector<tabular::Dataset> completions;
  Provenance provenance;

  std::size_t m() const { return completions.size(); }
};

}  // namespace mdlab::impute
