#pragma once

#include <string>
#include <vector>

#include "mdlab/ampute/ampute.hpp"

namespace mdlab::ampute {

struct ColumnDiagnostic {
  std::string column;
  std::vector<double> eta;       // observed anchor values, descending
  std::vector<double> rates;     // empirical missing rate per group
  std::vector<double> expected;  // min(1, c * tau_hat), c fitted on uncapped groups
  double max_deviation = 0.0;
  std::string monotone;  // "yes", "no" or "not applicable"
  double dependence_p = 1.0;  // chi-square test of missingness vs anchor group
};

struct MarDiagnostic {
  std::string anchor;
  std::vector<ColumnDiagnostic> columns;
  bool monotone = true;
  double max_deviation = 0.0;
  Json to_json() const;
};

// Empirical check of an amputation against its construction. With a MAR
// report the group rates are compared with tau_hat and checked to fall
// (within one cell) as the anchor value rises; otherwise only the
// dependence test is reported.
MarDiagnostic mar_diagnostic(const tabular::Dataset& amputed, const std::string& anchor,
                             const AmputeReport* report = nullptr);

}  // namespace mdlab::ampute
