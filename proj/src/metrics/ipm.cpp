#include "mdlab/metrics/ipm.hpp"

#include <algorithm>
#include <cmath>

#include "mdlab/common/errors.hpp"

namespace mdlab::metrics {

using tabular::Dataset;

IpmResult ipm(const Dataset& truth, const Dataset& imputed, const tabular::MissMask& mask) {
  if (truth.columns() != imputed.columns()) throw SchemaError("ipm: truth and imputed schemas differ");
  if (truth.n_rows() != imputed.n_rows() || mask.n_rows() != truth.n_rows() || mask.n_cols() != truth.n_cols()) {
    throw DimensionError("ipm: truth, imputed and mask shapes differ");
  }
  IpmResult out;
  out.n_mis = mask.count();
  if (out.n_mis == 0) throw ConfigError("ipm: no amputed cells, the metric is undefined");

  double total = 0.0;
  for (std::size_t c = 0; c < truth.n_cols(); ++c) {
    if (mask.count_column(c) == 0) continue;
    const bool categorical = truth.column(c).type.is_categorical();
    auto t = truth.values(c), s = imputed.values(c);
    double range = 0.0;
    if (!categorical) {
      auto [tlo, thi] = std::minmax_element(t.begin(), t.end());
      auto [slo, shi] = std::minmax_element(s.begin(), s.end());
      range = std::max(*thi, *shi) - std::min(*tlo, *slo);
    }
    bool flagged = false;
    for (std::size_t r = 0; r < truth.n_rows(); ++r) {
      if (!mask.at(r, c)) continue;
      if (categorical) {
        total += t[r] != s[r] ? 1.0 : 0.0;
      } else if (range > 0 && std::isfinite(range)) {
        total += std::abs(t[r] - s[r]) / range;
      } else if (t[r] != s[r]) {
        total += 1.0;
        flagged = true;
      }
    }
    if (flagged) out.flagged_columns.push_back(truth.column(c).name);
  }
  out.value = total / static_cast<double>(out.n_mis);
  return out;
}

double ipm_mean(const Dataset& truth, const std::vector<Dataset>& completions, const tabular::MissMask& mask) {
  if (completions.empty()) throw ConfigError("ipm_mean: no completions");
  double sum = 0.0;
  for (const auto& c : completions) sum += ipm(truth, c, mask).value;
  return sum / static_cast<double>(completions.size());
}

}  // namespace mdlab::metrics
