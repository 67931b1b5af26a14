#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mdlab/treelearn/tree.hpp"

namespace mdlab::treelearn {

struct ForestConfig {
  Task task = Task::Regression;
  int num_classes = 0;
  int num_trees = 100;
  int mtry = 0;  // 0 = floor(sqrt(p)) for classification, floor(p/3) for regression
  double sample_fraction = 1.0;
  bool replace = true;
  int min_leaf = 0;   // 0 = task default
  int max_depth = 0;  // 0 = unlimited
  int max_bins = kDefaultMaxBins;
  std::uint64_t seed = 0;
  bool keep_members = true;
  bool compute_oob = true;
};

int default_mtry(Task task, std::size_t num_features);

class ForestModel {
 public:
  const ForestConfig& config() const { return config_; }
  Task task() const { return config_.task; }
  int num_classes() const { return num_classes_; }
  const std::vector<TreeModel>& trees() const { return trees_; }
  // In-bag rows of tree t, sorted, with multiplicity.
  const std::vector<std::uint32_t>& bootstrap(std::size_t t) const { return bootstrap_[t]; }
  double oob_error() const { return oob_error_; }
  // Per training row: prediction from the trees that did not see the row.
  // Rows that were in every bootstrap fall back to the full forest.
  const std::vector<double>& oob_predictions() const { return oob_predictions_; }
  const std::vector<std::uint32_t>& oob_counts() const { return oob_counts_; }

  // Mean over trees, or majority vote with ties broken by a hash of
  // (seed, row) so repeated calls agree.
  double predict(const FeatureMatrix& X, std::size_t row) const;
  double predict(std::span<const double> row, std::uint64_t tie_key = 0) const;
  // Average of the trees' leaf class frequencies.
  std::vector<double> class_frequencies(std::span<const double> row) const;

  static ForestModel assemble(ForestConfig config, int num_classes, std::vector<TreeModel> trees);

 private:
  friend ForestModel fit_forest(const FeatureMatrix&, std::span<const double>, const ForestConfig&);
  double vote(std::vector<double>& counts, std::uint64_t tie_key) const;

  ForestConfig config_;
  int num_classes_ = 0;
  std::vector<TreeModel> trees_;
  std::vector<std::vector<std::uint32_t>> bootstrap_;
  double oob_error_ = 0.0;
  std::vector<double> oob_predictions_;
  std::vector<std::uint32_t> oob_counts_;
};

ForestModel fit_forest(const FeatureMatrix& X, std::span<const double> y, const ForestConfig& config);

}  // namespace mdlab::treelearn
