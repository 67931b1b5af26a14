#pragma once

#include <string>
#include <vector>

#include "mdlab/common/random.hpp"
#include "mdlab/impute/spec.hpp"

namespace mdlab::impute::detail {

struct RunLog {
  int imputation = 0;
  int sweeps = 0;
  std::vector<IterationTrace> traces;
  std::vector<std::string> warnings;

  void visit(int iteration, const std::string& column, std::size_t n_imputed, double oob_error = -1.0) {
    traces.push_back({imputation, iteration, column, n_imputed, oob_error});
  }
};

tabular::Dataset run_mice_pmm(const tabular::Dataset& ds, const ImputerSpec& spec, Rng& rng, RunLog& log);
tabular::Dataset run_mice_rf(const tabular::Dataset& ds, const ImputerSpec& spec, Rng& rng, RunLog& log);
tabular::Dataset run_missranger(const tabular::Dataset& ds, const ImputerSpec& spec, bool use_pmm, Rng& rng,
                                RunLog& log);
tabular::Dataset run_mixgb(const tabular::Dataset& ds, const ImputerSpec& spec, Rng& rng, RunLog& log);

// floor(sqrt(p)) unless the spec overrides it, clamped to [1, p].
int forest_mtry(const ImputerSpec& spec, std::size_t num_features);

}  // namespace mdlab::impute::detail
