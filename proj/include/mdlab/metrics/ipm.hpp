#pragma once

#include <string>
#include <vector>

#include "mdlab/tabular/dataset.hpp"

namespace mdlab::metrics {

struct IpmResult {
  double value = 0.0;
  std::size_t n_mis = 0;
  // Columns whose combined range was zero or not finite while a cell still
  // differed; each such cell contributed 1.
  std::vector<std::string> flagged_columns;
};

// Mean per-cell discrepancy over the cells flagged in `mask`. Metric cells
// contribute |truth - imputed| divided by the column range over both
// datasets; categorical cells contribute 1 when the levels differ.
// Mask bits of `truth` and `imputed` are ignored.
IpmResult ipm(const tabular::Dataset& truth, const tabular::Dataset& imputed, const tabular::MissMask& mask);

// Mean IPM over the completions of one multiple imputation.
double ipm_mean(const tabular::Dataset& truth, const std::vector<tabular::Dataset>& completions,
                const tabular::MissMask& mask);

}  // namespace mdlab::metrics
