#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mdlab/common/json_util.hpp"
#include "mdlab/tabular/dataset.hpp"

namespace mdlab::synthgen {

struct MetricTarget {
  std::string column;
  double mean = 0.0;
  std::optional<double> sd;
};

struct CategoricalTarget {
  std::string column;
  std::vector<double> freqs;  // per level, proportions
};

struct MarginalTargets {
  std::vector<MetricTarget> metric;
  std::vector<CategoricalTarget> categorical;
  double category_tolerance = 0.03;     // absolute, proportion scale
  double metric_relative_tolerance = 0.10;
};

// The summary statistics of the reference survey table.
MarginalTargets table1_targets();

struct MarginalCheck {
  std::string column;
  std::string statistic;  // "mean", "sd" or "freq[level]"
  double target = 0.0;
  double achieved = 0.0;
  bool pass = false;
};

struct MarginalReport {
  std::vector<MarginalCheck> checks;
  bool pass = true;
  Json to_json() const;
};

// Statistics over every observed cell of the long-format data. A target
// column absent from the dataset yields a failing check.
MarginalReport validate_marginals(const tabular::Dataset& ds, const MarginalTargets& targets);

}  // namespace mdlab::synthgen
