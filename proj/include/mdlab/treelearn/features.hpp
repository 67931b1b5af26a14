#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace mdlab::treelearn {

// Ordered features split on thresholds (metric and ordinal columns);
// nominal features split on level subsets.
enum class FeatureKind { Ordered, Nominal };

struct FeatureInfo {
  std::string name;
  FeatureKind kind = FeatureKind::Ordered;
  int num_levels = 0;  // nominal only
};

inline constexpr int kMaxNominalLevels = 64;

class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::vector<FeatureInfo> info, std::size_t n_rows);

  std::size_t n_rows() const { return n_rows_; }
  std::size_t n_features() const { return info_.size(); }
  const FeatureInfo& info(std::size_t j) const { return info_[j]; }
  const std::vector<FeatureInfo>& infos() const { return info_; }

  double at(std::size_t row, std::size_t j) const { return cols_[j][row]; }
  void set(std::size_t row, std::size_t j, double v) { cols_[j][row] = v; }
  std::span<const double> column(std::size_t j) const { return cols_[j]; }
  std::span<double> mutable_column(std::size_t j) { return cols_[j]; }
  std::vector<double> row(std::size_t r) const;

 private:
  std::vector<FeatureInfo> info_;
  std::size_t n_rows_ = 0;
  std::vector<std::vector<double>> cols_;
};

// Per-feature dense codes: code[r] indexes the sorted distinct values of
// the column (for nominal features the code is the level itself). A column
// with more than `max_bins` distinct values is cut into equal-frequency
// bins; lower/upper hold the smallest and largest value inside each code,
// so thresholds remain midpoints between observed values.
struct RankCodes {
  std::vector<std::vector<std::uint32_t>> codes;
  std::vector<std::vector<double>> lower;
  std::vector<std::vector<double>> upper;
  std::size_t num_codes(std::size_t j) const { return lower[j].size(); }
};

inline constexpr int kDefaultMaxBins = 256;

// max_bins <= 0 keeps every distinct value.
RankCodes build_rank_codes(const FeatureMatrix& X, int max_bins = kDefaultMaxBins);

}  // namespace mdlab::treelearn
