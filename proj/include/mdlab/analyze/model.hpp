#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mdlab/analyze/ols.hpp"
#include "mdlab/common/json_util.hpp"
#include "mdlab/tabular/dataset.hpp"
#include "mdlab/tabular/encoding.hpp"

namespace mdlab::analyze {

// Regression of one metric outcome on dummy-encoded regressors.
struct ModelSpec {
  std::string outcome;
  std::vector<std::string> regressors;  // empty = every other column
  std::map<std::string, std::string> refs;
  bool wave_dummies = false;
  std::vector<int> waves;
  int wave_ref = -1;

  std::vector<std::string> regressor_names(const tabular::Dataset& ds) const;
  tabular::EncodeOptions encode_options(const tabular::Dataset& ds) const;
  Json to_json() const;
  static ModelSpec from_json(const Json& j);
};

// Encodes and fits on every row; all model cells must be observed.
FitResult fit_model(const tabular::Dataset& ds, const ModelSpec& spec);

struct ListwiseResult {
  std::optional<FitResult> fit;
  std::size_t complete_rows = 0;
  std::size_t min_rows = 0;
  std::string skipped_reason;  // empty when fitted

  bool skipped() const { return !fit.has_value(); }
};

// Complete-case analysis over the model's columns. Fewer than `min_rows`
// complete rows (0 = ten per design column), or a complete-case design
// that is rank deficient, yields a skipped marker.
ListwiseResult listwise_fit(const tabular::Dataset& ds, const ModelSpec& spec, std::size_t min_rows = 0);

}  // namespace mdlab::analyze
