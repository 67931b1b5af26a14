#pragma once

#include <cstddef>
#include <vector>

#include "mdlab/common/random.hpp"
#include "mdlab/tabular/dataset.hpp"
#include "mdlab/treelearn/features.hpp"

namespace mdlab::impute {

// Working state of one imputation run. `current` has no mask bits set;
// `original` remembers which cells may be rewritten.
struct ChainState {
  tabular::Dataset current;
  tabular::MissMask original;
  std::vector<std::size_t> visit_order;
  int iteration = 0;

  bool was_missing(std::size_t row, std::size_t col) const { return original.at(row, col); }
  std::vector<std::size_t> observed_rows(std::size_t col) const;
  std::vector<std::size_t> missing_rows(std::size_t col) const;
};

// Columns with at least one missing cell, ascending by missing count,
// ties by column index.
std::vector<std::size_t> visit_order(const tabular::Dataset& ds);

// Fills every missing cell with a uniform draw from the column's observed
// values. Throws UnimputableError naming any fully missing column.
ChainState initialize(const tabular::Dataset& ds, Rng& rng);

// Predictor matrix for `target`: every other column (binary and nominal as
// nominal features) plus the panel wave when requested and available.
// Restricted to `rows` when non-null.
treelearn::FeatureMatrix predictor_matrix(const tabular::Dataset& ds, std::size_t target, bool with_wave,
                                          const std::vector<std::size_t>* rows = nullptr);

// The completed dataset: mask cleared, values from the chain.
tabular::Dataset completed(const ChainState& state);

}  // namespace mdlab::impute
