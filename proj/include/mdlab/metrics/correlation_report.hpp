#pragma once

#include <array>
#include <vector>

#include "mdlab/common/json_util.hpp"
#include "mdlab/tabular/correlation.hpp"

namespace mdlab::metrics {

// Rows: Pearson, Spearman, Kendall. Columns: Frobenius, MAE, RMSE.
struct DistanceTable {
  std::array<std::array<double, 3>, 3> values{};

  double at(tabular::CorrelationMethod method, tabular::DistanceMetric metric) const {
    return values[static_cast<int>(method)][static_cast<int>(metric)];
  }
  Json to_json() const;
  std::string to_csv() const;
};

// Reference correlation matrices for the three methods, in row order.
std::vector<tabular::CorrelationMatrix> reference_matrices(const tabular::Dataset& reference);

DistanceTable correlation_report(const tabular::Dataset& sim, const tabular::Dataset& reference);
DistanceTable correlation_report(const tabular::Dataset& sim,
                                 const std::vector<tabular::CorrelationMatrix>& reference);

Json matrices_to_json(const std::vector<tabular::CorrelationMatrix>& matrices);
std::vector<tabular::CorrelationMatrix> matrices_from_json(const Json& j);

}  // namespace mdlab::metrics
