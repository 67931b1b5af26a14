#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mdlab/common/random.hpp"
#include "mdlab/treelearn/features.hpp"

namespace mdlab::treelearn {

enum class Task { Regression, Classification };

struct TreeConfig {
  Task task = Task::Regression;
  int num_classes = 0;  // classification; 0 = 1 + largest label
  int max_depth = 0;    // 0 = unlimited
  int min_leaf = 0;     // 0 = 5 for regression, 1 for classification
  int mtry = 0;         // features tried per node; 0 = all
  int max_bins = kDefaultMaxBins;
  std::uint64_t seed = 0;
  bool keep_members = true;
};

struct Node {
  int feature = -1;  // -1 marks a leaf
  bool nominal = false;
  double threshold = 0.0;         // ordered: x <= threshold goes left
  std::uint64_t left_levels = 0;  // nominal: bit l set sends level l left
  bool default_left = true;       // for values the split never saw
  int left = -1;
  int right = -1;
  int leaf = -1;
};

struct Leaf {
  double value = 0.0;  // mean, modal class, or boosting weight
  double sd = 0.0;     // regression: sample sd of member targets
  std::vector<double> class_counts;
  std::vector<std::uint32_t> members;  // training rows, with bootstrap multiplicity
  std::uint32_t size = 0;
};

class TreeModel {
 public:
  Task task() const { return task_; }
  int num_classes() const { return num_classes_; }
  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Leaf>& leaves() const { return leaves_; }
  std::size_t num_features() const { return num_features_; }
  int depth() const;

  int leaf_index(const FeatureMatrix& X, std::size_t row) const {
    return route([&](int f) { return X.at(row, f); });
  }
  int leaf_index(std::span<const double> row) const {
    return route([&](int f) { return row[f]; });
  }
  const Leaf& leaf(const FeatureMatrix& X, std::size_t row) const { return leaves_[leaf_index(X, row)]; }
  double predict(const FeatureMatrix& X, std::size_t row) const { return leaf(X, row).value; }
  double predict(std::span<const double> row) const { return leaves_[leaf_index(row)].value; }

  // Generator-style draw: a class sampled from the leaf's class
  // frequencies, or the leaf mean plus Gaussian noise with the leaf sd.
  double sample(std::span<const double> row, Rng& rng) const;

  // Assembly for deserialisation and builders.
  static TreeModel assemble(Task task, int num_classes, std::size_t num_features, std::vector<Node> nodes,
                            std::vector<Leaf> leaves);

 private:
  template <class Get>
  int route(Get&& get) const {
    int i = 0;
    while (nodes_[i].feature >= 0) {
      const Node& n = nodes_[i];
      double v = get(n.feature);
      bool go_left;
      if (n.nominal) {
        if (v >= 0 && v < 64 && v == static_cast<double>(static_cast<int>(v))) {
          go_left = (n.left_levels >> static_cast<int>(v)) & 1u;
        } else {
          go_left = n.default_left;
        }
      } else {
        go_left = v <= n.threshold ? true : (v > n.threshold ? false : n.default_left);
      }
      i = go_left ? n.left : n.right;
    }
    return nodes_[i].leaf;
  }

  friend class TreeBuilder;
  Task task_ = Task::Regression;
  int num_classes_ = 0;
  std::size_t num_features_ = 0;
  std::vector<Node> nodes_;
  std::vector<Leaf> leaves_;
};

// Fits on every row of X, or on the (possibly repeated) row list `rows`.
TreeModel fit_tree(const FeatureMatrix& X, std::span<const double> y, const TreeConfig& config,
                   std::span<const std::uint32_t> rows = {});

// As fit_tree, reusing rank codes already computed for X.
TreeModel fit_tree(const FeatureMatrix& X, const RankCodes& codes, std::span<const double> y,
                   const TreeConfig& config, std::span<const std::uint32_t> rows, Rng& rng);

namespace detail {

// Second-order fit used by boosting: leaf weight -G/(H+lambda).
struct NewtonParams {
  double lambda = 1.0;
  double min_child_weight = 1.0;
  int max_depth = 6;
  int min_leaf = 1;
  int mtry = 0;
};

TreeModel fit_newton_tree(const FeatureMatrix& X, const RankCodes& codes, std::span<const double> grad,
                          std::span<const double> hess, const NewtonParams& params,
                          std::span<const std::uint32_t> rows, Rng& rng);

}  // namespace detail

}  // namespace mdlab::treelearn
