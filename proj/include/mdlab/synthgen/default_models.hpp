#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "mdlab/synthgen/specs.hpp"
#include "mdlab/tabular/dataset.hpp"

namespace mdlab::synthgen {

// Fits the four endogenous models on the first-wave rows of a complete
// seed panel (any dataset carrying the panel variables).
struct EndogenousFitOptions {
  std::vector<std::string> kldb_predictors = {"age", "federalstate", "education", "parentsEd", "comp_size"};
  std::vector<std::string> workinghrs_predictors = {"age",          "birthcountry", "woman",  "comp_size",
                                                    "federalstate", "kldb",         "sector", "parentsEd"};
  std::vector<std::string> experience_predictors = {"age",   "education",    "maritalstatus",
                                                    "woman", "federalstate", "kldb"};
  std::vector<std::string> child_predictors = {"age", "woman", "maritalstatus", "education", "kldb"};
  int tree_max_depth = 6;
  int tree_min_leaf = 100;
  int forest_trees = 25;
  int forest_mtry = 3;
  int forest_min_leaf = 100;
  std::uint64_t seed = 7;
};

EndogenousModelSpec fit_endogenous_models(const tabular::Dataset& seed_panel,
                                          const EndogenousFitOptions& options = {});

// Synthetic seed panel: independent variables from `marg`, endogenous
// variables from fixed hand-calibrated conditional rules.
tabular::Dataset calibration_panel(const MarginalSpec& marg, std::size_t n_individuals, std::uint64_t seed);

// Models fitted once per process on calibration_panel(default_marginals()).
const EndogenousModelSpec& default_endogenous_models();

}  // namespace mdlab::synthgen
