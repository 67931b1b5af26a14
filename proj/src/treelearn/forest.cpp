#include "mdlab/treelearn/forest.hpp"

#include <algorithm>
#include <cmath>

#include "mdlab/common/errors.hpp"

namespace mdlab::treelearn {

int default_mtry(Task task, std::size_t p) {
  int m = task == Task::Classification ? static_cast<int>(std::floor(std::sqrt(static_cast<double>(p))))
                                       : static_cast<int>(p / 3);
  return std::max(1, m);
}

double ForestModel::vote(std::vector<double>& counts, std::uint64_t tie_key) const {
  double top = *std::max_element(counts.begin(), counts.end());
  int n_top = 0;
  for (double c : counts) n_top += c == top;
  int pick = 0;
  if (n_top > 1) pick = static_cast<int>(splitmix64(derive_seed(config_.seed, {stream_tag("vote"), tie_key})) % n_top);
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (counts[k] == top && pick-- == 0) return static_cast<double>(k);
  }
  return 0.0;
}

double ForestModel::predict(const FeatureMatrix& X, std::size_t row) const {
  if (config_.task == Task::Regression) {
    double s = 0;
    for (const auto& t : trees_) s += t.predict(X, row);
    return s / static_cast<double>(trees_.size());
  }
  std::vector<double> counts(num_classes_, 0.0);
  for (const auto& t : trees_) counts[static_cast<int>(t.predict(X, row))] += 1.0;
  return vote(counts, row);
}

double ForestModel::predict(std::span<const double> row, std::uint64_t tie_key) const {
  if (config_.task == Task::Regression) {
    double s = 0;
    for (const auto& t : trees_) s += t.predict(row);
    return s / static_cast<double>(trees_.size());
  }
  std::vector<double> counts(num_classes_, 0.0);
  for (const auto& t : trees_) counts[static_cast<int>(t.predict(row))] += 1.0;
  return vote(counts, tie_key);
}

std::vector<double> ForestModel::class_frequencies(std::span<const double> row) const {
  std::vector<double> freq(num_classes_, 0.0);
  for (const auto& t : trees_) {
    const Leaf& lf = t.leaves()[t.leaf_index(row)];
    double total = 0;
    for (double c : lf.class_counts) total += c;
    if (total <= 0) continue;
    for (int k = 0; k < num_classes_; ++k) freq[k] += lf.class_counts[k] / total;
  }
  for (double& f : freq) f /= static_cast<double>(trees_.size());
  return freq;
}

ForestModel ForestModel::assemble(ForestConfig config, int num_classes, std::vector<TreeModel> trees) {
  if (trees.empty()) throw FitError("forest: no trees");
  ForestModel m;
  m.config_ = config;
  m.config_.num_trees = static_cast<int>(trees.size());
  m.num_classes_ = num_classes;
  m.trees_ = std::move(trees);
  m.bootstrap_.resize(m.trees_.size());
  return m;
}

ForestModel fit_forest(const FeatureMatrix& X, std::span<const double> y, const ForestConfig& config) {
  const std::size_t n = X.n_rows();
  if (n == 0) throw FitError("fit_forest: empty data");
  if (y.size() != n) throw DimensionError("fit_forest: target length differs from feature rows");
  if (config.num_trees < 1) throw ConfigError("fit_forest: num_trees must be >= 1");
  if (!(config.sample_fraction > 0 && config.sample_fraction <= 1.0)) {
    throw ConfigError("fit_forest: sample_fraction must be in (0, 1]");
  }
  const int p = static_cast<int>(X.n_features());
  int mtry = config.mtry > 0 ? config.mtry : default_mtry(config.task, X.n_features());
  if (mtry > p) throw ConfigError("fit_forest: mtry exceeds the number of features");

  ForestModel model;
  model.config_ = config;
  model.config_.mtry = mtry;
  int K = 0;
  if (config.task == Task::Classification) {
    K = config.num_classes;
    if (K <= 0) K = static_cast<int>(*std::max_element(y.begin(), y.end())) + 1;
  }
  model.num_classes_ = K;
  model.config_.num_classes = K;

  TreeConfig tc;
  tc.task = config.task;
  tc.num_classes = K;
  tc.max_depth = config.max_depth;
  tc.min_leaf = config.min_leaf;
  tc.mtry = mtry;
  tc.keep_members = config.keep_members;

  RankCodes codes = build_rank_codes(X, config.max_bins);
  const std::size_t draws = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(config.sample_fraction * static_cast<double>(n))));

  std::vector<double> oob_sum(config.compute_oob && config.task == Task::Regression ? n : 0, 0.0);
  std::vector<double> oob_votes(config.compute_oob && config.task == Task::Classification ? n * K : 0, 0.0);
  model.oob_counts_.assign(config.compute_oob ? n : 0, 0);
  std::vector<std::uint8_t> inbag(n);

  model.trees_.reserve(config.num_trees);
  model.bootstrap_.reserve(config.num_trees);
  for (int t = 0; t < config.num_trees; ++t) {
    Rng rng = make_rng(derive_seed(config.seed, {stream_tag("tree"), static_cast<std::uint64_t>(t)}));
    std::vector<std::uint32_t> rows;
    rows.reserve(draws);
    if (config.replace) {
      for (std::size_t i = 0; i < draws; ++i) rows.push_back(static_cast<std::uint32_t>(uniform_index(rng, n)));
    } else {
      for (auto i : sample_without_replacement(rng, n, std::min(draws, n))) rows.push_back(static_cast<std::uint32_t>(i));
    }
    std::sort(rows.begin(), rows.end());
    model.trees_.push_back(fit_tree(X, codes, y, tc, rows, rng));
    if (config.compute_oob) {
      std::fill(inbag.begin(), inbag.end(), 0);
      for (auto r : rows) inbag[r] = 1;
      const TreeModel& tree = model.trees_.back();
      for (std::size_t r = 0; r < n; ++r) {
        if (inbag[r]) continue;
        double pred = tree.predict(X, r);
        ++model.oob_counts_[r];
        if (config.task == Task::Regression) {
          oob_sum[r] += pred;
        } else {
          oob_votes[r * K + static_cast<int>(pred)] += 1.0;
        }
      }
    }
    model.bootstrap_.push_back(std::move(rows));
  }

  if (config.compute_oob) {
    model.oob_predictions_.resize(n);
    double err = 0;
    std::size_t used = 0;
    std::vector<double> counts(K);
    for (std::size_t r = 0; r < n; ++r) {
      const std::uint32_t c = model.oob_counts_[r];
      double pred;
      if (c == 0) {
        pred = model.predict(X, r);
      } else if (config.task == Task::Regression) {
        pred = oob_sum[r] / c;
      } else {
        std::copy(oob_votes.begin() + r * K, oob_votes.begin() + (r + 1) * K, counts.begin());
        pred = model.vote(counts, r);
      }
      model.oob_predictions_[r] = pred;
      if (c == 0) continue;
      ++used;
      err += config.task == Task::Regression ? (pred - y[r]) * (pred - y[r]) : (pred != y[r] ? 1.0 : 0.0);
    }
    model.oob_error_ = used > 0 ? err / static_cast<double>(used) : 0.0;
  }
  return model;
}

}  // namespace mdlab::treelearn
