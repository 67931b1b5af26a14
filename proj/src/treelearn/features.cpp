#include "mdlab/treelearn/features.hpp"

#include <algorithm>
#include <cmath>

#include "mdlab/common/errors.hpp"

namespace mdlab::treelearn {

FeatureMatrix::FeatureMatrix(std::vector<FeatureInfo> info, std::size_t n_rows)
    : info_(std::move(info)), n_rows_(n_rows), cols_(info_.size(), std::vector<double>(n_rows, 0.0)) {
  for (const auto& f : info_) {
    if (f.kind == FeatureKind::Nominal && (f.num_levels < 1 || f.num_levels > kMaxNominalLevels)) {
      throw ConfigError("feature '" + f.name + "': nominal level count must be in [1, 64]");
    }
  }
}

std::vector<double> FeatureMatrix::row(std::size_t r) const {
  std::vector<double> out(info_.size());
  for (std::size_t j = 0; j < info_.size(); ++j) out[j] = cols_[j][r];
  return out;
}

RankCodes build_rank_codes(const FeatureMatrix& X, int max_bins) {
  RankCodes rc;
  const std::size_t n = X.n_rows();
  const std::size_t p = X.n_features();
  rc.codes.resize(p);
  rc.lower.resize(p);
  rc.upper.resize(p);
  std::vector<double> sorted;
  for (std::size_t j = 0; j < p; ++j) {
    auto col = X.column(j);
    auto& codes = rc.codes[j];
    codes.resize(n);
    if (X.info(j).kind == FeatureKind::Nominal) {
      const int L = X.info(j).num_levels;
      for (int l = 0; l < L; ++l) {
        rc.lower[j].push_back(l);
        rc.upper[j].push_back(l);
      }
      for (std::size_t r = 0; r < n; ++r) {
        double v = col[r];
        if (!(v >= 0 && v < L) || v != std::floor(v)) {
          throw ConfigError("feature '" + X.info(j).name + "': level " + std::to_string(v) + " out of range");
        }
        codes[r] = static_cast<std::uint32_t>(v);
      }
      continue;
    }
    sorted.assign(col.begin(), col.end());
    for (double v : sorted) {
      if (std::isnan(v)) throw ConfigError("feature '" + X.info(j).name + "' contains NaN");
    }
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> uniq;
    std::vector<std::size_t> counts;
    for (double v : sorted) {
      if (uniq.empty() || uniq.back() != v) {
        uniq.push_back(v);
        counts.push_back(0);
      }
      ++counts.back();
    }
    std::vector<std::uint32_t> code_of(uniq.size());
    if (max_bins <= 0 || uniq.size() <= static_cast<std::size_t>(max_bins)) {
      for (std::size_t u = 0; u < uniq.size(); ++u) code_of[u] = static_cast<std::uint32_t>(u);
      rc.lower[j] = uniq;
      rc.upper[j] = uniq;
    } else {
      // Close a bin once its cumulative row count reaches the next
      // equal-frequency target; every bin holds at least one distinct value.
      std::size_t cum = 0;
      std::uint32_t bin = 0;
      rc.lower[j].push_back(uniq[0]);
      for (std::size_t u = 0; u < uniq.size(); ++u) {
        code_of[u] = bin;
        cum += counts[u];
        const double target = static_cast<double>(n) * (bin + 1) / max_bins;
        const bool last = u + 1 == uniq.size();
        if (!last && static_cast<double>(cum) >= target && bin + 1 < static_cast<std::uint32_t>(max_bins)) {
          rc.upper[j].push_back(uniq[u]);
          ++bin;
          rc.lower[j].push_back(uniq[u + 1]);
        }
      }
      rc.upper[j].push_back(uniq.back());
    }
    for (std::size_t r = 0; r < n; ++r) {
      std::size_t u = std::lower_bound(uniq.begin(), uniq.end(), col[r]) - uniq.begin();
      codes[r] = code_of[u];
    }
  }
  return rc;
}

}  // namespace mdlab::treelearn
