#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "mdlab/treelearn/tree.hpp"

namespace mdlab::treelearn {

enum class GbmLoss { Squared, Logistic, Softmax };

std::string_view to_string(GbmLoss loss);
GbmLoss parse_gbm_loss(std::string_view text);

struct GbmConfig {
  GbmLoss loss = GbmLoss::Squared;
  int num_classes = 0;  // softmax; 0 = 1 + largest label
  double eta = 0.3;
  double lambda = 1.0;
  int max_depth = 6;
  double subsample = 0.7;
  int n_rounds = 100;
  double min_child_weight = 1.0;
  int max_bins = kDefaultMaxBins;
  std::uint64_t seed = 0;
};

class GbmModel {
 public:
  const GbmConfig& config() const { return config_; }
  GbmLoss loss() const { return config_.loss; }
  int num_outputs() const { return static_cast<int>(base_score_.size()); }
  const std::vector<double>& base_score() const { return base_score_; }
  // rounds()[t][k]: the tree for output k in round t.
  const std::vector<std::vector<TreeModel>>& rounds() const { return rounds_; }
  // Training loss after each round (index 0 = base score only).
  const std::vector<double>& training_loss() const { return training_loss_; }

  // Raw margins, one per output.
  std::vector<double> predict_margin(const FeatureMatrix& X, std::size_t row) const;
  // Squared: the prediction; logistic: P(class 1); softmax: argmax class.
  double predict(const FeatureMatrix& X, std::size_t row) const;
  std::vector<double> predict_proba(const FeatureMatrix& X, std::size_t row) const;
  int predict_class(const FeatureMatrix& X, std::size_t row) const;

 private:
  friend GbmModel fit_gbm(const FeatureMatrix&, std::span<const double>, const GbmConfig&);
  GbmConfig config_;
  std::vector<double> base_score_;
  std::vector<std::vector<TreeModel>> rounds_;
  std::vector<double> training_loss_;
};

GbmModel fit_gbm(const FeatureMatrix& X, std::span<const double> y, const GbmConfig& config);

}  // namespace mdlab::treelearn
