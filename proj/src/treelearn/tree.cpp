#include "mdlab/treelearn/tree.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "mdlab/common/errors.hpp"
#include "split.hpp"

namespace mdlab::treelearn {

int TreeModel::depth() const {
  if (nodes_.empty()) return 0;
  int best = 0;
  std::vector<std::pair<int, int>> stack{{0, 0}};
  while (!stack.empty()) {
    auto [i, d] = stack.back();
    stack.pop_back();
    best = std::max(best, d);
    if (nodes_[i].feature >= 0) {
      stack.push_back({nodes_[i].left, d + 1});
      stack.push_back({nodes_[i].right, d + 1});
    }
  }
  return best;
}

double TreeModel::sample(std::span<const double> row, Rng& rng) const {
  const Leaf& lf = leaves_[leaf_index(row)];
  if (task_ == Task::Classification) return static_cast<double>(draw_weighted(rng, lf.class_counts));
  if (lf.sd <= 0) return lf.value;
  return lf.value + std::normal_distribution<double>(0.0, lf.sd)(rng);
}

TreeModel TreeModel::assemble(Task task, int num_classes, std::size_t num_features, std::vector<Node> nodes,
                              std::vector<Leaf> leaves) {
  if (nodes.empty()) throw FitError("tree: no nodes");
  for (const auto& n : nodes) {
    if (n.feature >= 0) {
      if (n.feature >= static_cast<int>(num_features) || n.left <= 0 || n.right <= 0 ||
          n.left >= static_cast<int>(nodes.size()) || n.right >= static_cast<int>(nodes.size())) {
        throw FitError("tree: malformed split node");
      }
    } else if (n.leaf < 0 || n.leaf >= static_cast<int>(leaves.size())) {
      throw FitError("tree: leaf node without leaf payload");
    }
  }
  TreeModel t;
  t.task_ = task;
  t.num_classes_ = num_classes;
  t.num_features_ = num_features;
  t.nodes_ = std::move(nodes);
  t.leaves_ = std::move(leaves);
  return t;
}

// Depth-first grower shared by CART regression, CART classification and
// boosting. Rows live in one index buffer; each node owns a slice of it.
class TreeBuilder {
 public:
  enum class Mode { Moment, Gini };

  TreeBuilder(const FeatureMatrix& X, const RankCodes& codes) : X_(X), codes_(codes) {}

  Mode mode = Mode::Moment;
  const double* g = nullptr;
  const double* h = nullptr;  // null = unit hessian
  const int* labels = nullptr;
  int num_classes = 0;
  double lambda = 0.0;
  double min_child_weight = 0.0;
  double leaf_sign = 1.0;
  bool check_pure = true;
  int max_depth = 0;
  std::uint32_t min_leaf = 1;
  int mtry = 0;
  bool keep_members = true;
  Task task = Task::Regression;

  TreeModel build(std::span<const std::uint32_t> rows, Rng& rng) {
    if (rows.empty()) throw FitError("tree: no training rows");
    idx_.assign(rows.begin(), rows.end());
    buf_.resize(idx_.size());
    nodes_.clear();
    leaves_.clear();
    nodes_.emplace_back();
    struct Item {
      int node;
      std::size_t begin, end;
      int depth;
    };
    std::vector<Item> stack{{0, 0, idx_.size(), 0}};
    const int p = static_cast<int>(X_.n_features());
    std::vector<int> features(p), pool(p);
    for (int j = 0; j < p; ++j) features[j] = j;
    const int tries = (mtry <= 0 || mtry >= p) ? p : mtry;

    while (!stack.empty()) {
      Item it = stack.back();
      stack.pop_back();
      std::span<const std::uint32_t> node_rows(idx_.data() + it.begin, it.end - it.begin);
      const std::size_t n = node_rows.size();
      double parent = 0.0;
      bool splittable = (max_depth <= 0 || it.depth < max_depth) && n >= 2 * static_cast<std::size_t>(min_leaf);
      if (splittable) splittable = !is_pure(node_rows);
      detail::SplitResult best;
      if (splittable) {
        parent = parent_score(node_rows);
        if (tries < p) {
          // Same draws as sample_without_replacement, without the allocation.
          std::iota(pool.begin(), pool.end(), 0);
          for (int k = 0; k < tries; ++k) {
            int j = k + static_cast<int>(uniform_index(rng, static_cast<std::size_t>(p - k)));
            std::swap(pool[k], pool[j]);
          }
          std::copy(pool.begin(), pool.begin() + tries, features.begin());
          std::sort(features.begin(), features.begin() + tries);
        }
        for (int k = 0; k < tries; ++k) {
          const int f = features[k];
          if (mode == Mode::Moment) {
            searcher_.moment(f, X_.info(f), codes_, node_rows, g, h,
                             {lambda, min_child_weight, min_leaf}, parent, best);
          } else {
            searcher_.gini(f, X_.info(f), codes_, node_rows, labels, num_classes,
                           min_leaf, parent, best);
          }
        }
      }
      if (!best.valid) {
        make_leaf(it.node, node_rows);
        continue;
      }
      std::size_t mid = partition(it.begin, it.end, best);
      Node& nd = nodes_[it.node];
      nd.feature = best.feature;
      nd.nominal = best.nominal;
      nd.threshold = best.threshold;
      nd.left_levels = best.left_levels;
      nd.default_left = best.default_left;
      int left = static_cast<int>(nodes_.size());
      nodes_.emplace_back();
      nodes_.emplace_back();
      nodes_[it.node].left = left;
      nodes_[it.node].right = left + 1;
      stack.push_back({left + 1, mid, it.end, it.depth + 1});
      stack.push_back({left, it.begin, mid, it.depth + 1});
    }
    return TreeModel::assemble(task, num_classes, X_.n_features(), std::move(nodes_), std::move(leaves_));
  }

 private:
  bool is_pure(std::span<const std::uint32_t> rows) const {
    if (mode == Mode::Gini) {
      int first = labels[rows[0]];
      return std::all_of(rows.begin(), rows.end(), [&](std::uint32_t r) { return labels[r] == first; });
    }
    if (!check_pure) return false;
    double first = g[rows[0]];
    return std::all_of(rows.begin(), rows.end(), [&](std::uint32_t r) { return g[r] == first; });
  }

  double parent_score(std::span<const std::uint32_t> rows) {
    if (mode == Mode::Gini) {
      counts_.assign(num_classes, 0.0);
      for (auto r : rows) counts_[labels[r]] += 1.0;
      double s = 0;
      for (double c : counts_) s += c * c;
      return s / static_cast<double>(rows.size());
    }
    double G = 0, H = 0;
    for (auto r : rows) {
      G += g[r];
      H += h ? h[r] : 1.0;
    }
    return G * G / (H + lambda);
  }

  std::size_t partition(std::size_t begin, std::size_t end, const detail::SplitResult& s) {
    const auto& codes = codes_.codes[s.feature];
    std::size_t l = begin, r = 0;
    for (std::size_t i = begin; i < end; ++i) {
      std::uint32_t row = idx_[i];
      std::uint32_t c = codes[row];
      bool left = s.nominal ? ((s.left_levels >> c) & 1u) != 0 : c <= s.code_cut;
      if (left) {
        idx_[l++] = row;
      } else {
        buf_[r++] = row;
      }
    }
    std::copy(buf_.begin(), buf_.begin() + r, idx_.begin() + l);
    return l;
  }

  void make_leaf(int node, std::span<const std::uint32_t> rows) {
    Leaf lf;
    lf.size = static_cast<std::uint32_t>(rows.size());
    const double n = static_cast<double>(rows.size());
    if (mode == Mode::Gini) {
      lf.class_counts.assign(num_classes, 0.0);
      for (auto r : rows) lf.class_counts[labels[r]] += 1.0;
      lf.value = static_cast<double>(std::max_element(lf.class_counts.begin(), lf.class_counts.end()) -
                                     lf.class_counts.begin());
    } else {
      double G = 0, H = 0;
      for (auto r : rows) {
        G += g[r];
        H += h ? h[r] : 1.0;
      }
      lf.value = leaf_sign * G / (H + lambda);
      if (check_pure && rows.size() > 1) {
        double mean = G / n, ss = 0;
        for (auto r : rows) ss += (g[r] - mean) * (g[r] - mean);
        lf.sd = std::sqrt(ss / (n - 1));
      }
    }
    if (keep_members) lf.members.assign(rows.begin(), rows.end());
    nodes_[node].leaf = static_cast<int>(leaves_.size());
    leaves_.push_back(std::move(lf));
  }

  const FeatureMatrix& X_;
  const RankCodes& codes_;
  std::vector<std::uint32_t> idx_, buf_;
  std::vector<Node> nodes_;
  std::vector<Leaf> leaves_;
  std::vector<double> counts_;
  detail::SplitSearcher searcher_;
};

namespace {

std::vector<std::uint32_t> all_rows(std::size_t n) {
  std::vector<std::uint32_t> rows(n);
  for (std::size_t i = 0; i < n; ++i) rows[i] = static_cast<std::uint32_t>(i);
  return rows;
}

}  // namespace

TreeModel fit_tree(const FeatureMatrix& X, const RankCodes& codes, std::span<const double> y,
                   const TreeConfig& config, std::span<const std::uint32_t> rows, Rng& rng) {
  if (X.n_rows() == 0) throw FitError("fit_tree: empty data");
  if (y.size() != X.n_rows()) throw DimensionError("fit_tree: target length differs from feature rows");
  std::vector<std::uint32_t> every;
  if (rows.empty()) {
    every = all_rows(X.n_rows());
    rows = every;
  }
  TreeBuilder b(X, codes);
  b.task = config.task;
  b.max_depth = config.max_depth;
  b.mtry = config.mtry;
  b.keep_members = config.keep_members;
  std::vector<int> labels;
  if (config.task == Task::Classification) {
    int K = config.num_classes;
    if (K <= 0) {
      double mx = 0;
      for (double v : y) mx = std::max(mx, v);
      K = static_cast<int>(mx) + 1;
    }
    labels.resize(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (!(y[i] >= 0 && y[i] < K) || y[i] != std::floor(y[i])) {
        throw FitError("fit_tree: class label " + std::to_string(y[i]) + " outside [0, " + std::to_string(K) + ")");
      }
      labels[i] = static_cast<int>(y[i]);
    }
    b.mode = TreeBuilder::Mode::Gini;
    b.labels = labels.data();
    b.num_classes = K;
    b.min_leaf = config.min_leaf > 0 ? config.min_leaf : 1;
  } else {
    b.mode = TreeBuilder::Mode::Moment;
    b.g = y.data();
    b.min_leaf = config.min_leaf > 0 ? config.min_leaf : 5;
  }
  return b.build(rows, rng);
}

TreeModel fit_tree(const FeatureMatrix& X, std::span<const double> y, const TreeConfig& config,
                   std::span<const std::uint32_t> rows) {
  if (X.n_rows() == 0) throw FitError("fit_tree: empty data");
  RankCodes codes = build_rank_codes(X, config.max_bins);
  Rng rng = make_rng(config.seed);
  return fit_tree(X, codes, y, config, rows, rng);
}

namespace detail {

TreeModel fit_newton_tree(const FeatureMatrix& X, const RankCodes& codes, std::span<const double> grad,
                          std::span<const double> hess, const NewtonParams& params,
                          std::span<const std::uint32_t> rows, Rng& rng) {
  TreeBuilder b(X, codes);
  b.mode = TreeBuilder::Mode::Moment;
  b.g = grad.data();
  b.h = hess.empty() ? nullptr : hess.data();
  b.lambda = params.lambda;
  b.min_child_weight = params.min_child_weight;
  b.leaf_sign = -1.0;
  b.check_pure = false;
  b.max_depth = params.max_depth;
  b.min_leaf = static_cast<std::uint32_t>(std::max(1, params.min_leaf));
  b.mtry = params.mtry;
  b.keep_members = false;
  return b.build(rows, rng);
}

}  // namespace detail

}  // namespace mdlab::treelearn
