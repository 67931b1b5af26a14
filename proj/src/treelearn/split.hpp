#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "mdlab/treelearn/features.hpp"

namespace mdlab::treelearn::detail {

struct SplitResult {
  bool valid = false;
  double gain = 0.0;
  int feature = -1;
  bool nominal = false;
  std::uint32_t code_cut = 0;  // ordered: codes <= cut go left
  double threshold = 0.0;
  std::uint64_t left_levels = 0;
  bool default_left = true;
};

// Sum-of-gradients splitting. With g = y, h = 1 and lambda = 0 the score
// G^2/(H+lambda) is the SSE reduction of CART regression.
struct MomentRule {
  double lambda = 0.0;
  double min_child_weight = 0.0;
  std::uint32_t min_leaf = 1;
};

inline constexpr int kExhaustiveNominalLevels = 12;

// Scans one feature for the best split of a node and replaces `best` when
// strictly better. Holds scratch buffers, so one instance per thread.
class SplitSearcher {
 public:
  void moment(int feature, const FeatureInfo& info, const RankCodes& rc, std::span<const std::uint32_t> rows, const double* g,
              const double* h, const MomentRule& rule, double parent_score, SplitResult& best);

  void gini(int feature, const FeatureInfo& info, const RankCodes& rc, std::span<const std::uint32_t> rows, const int* labels,
            int num_classes, std::uint32_t min_leaf, double parent_score, SplitResult& best);

 private:
  void gather_moment(const std::vector<std::uint32_t>& codes, std::size_t num_codes, bool force_dense,
                     std::span<const std::uint32_t> rows, const double* g, const double* h);
  void gather_counts(const std::vector<std::uint32_t>& codes, std::size_t num_codes, bool force_dense,
                     std::span<const std::uint32_t> rows, const int* labels, int num_classes);

  std::vector<double> dense_g_, dense_h_;
  std::vector<std::uint32_t> dense_n_;
  std::vector<double> dense_counts_;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs_;

  // Present codes of the node in ascending order with their statistics.
  std::vector<std::uint32_t> c_code_, c_n_;
  std::vector<double> c_g_, c_h_, c_counts_;
  std::vector<std::size_t> order_;
  std::vector<double> total_, left_;
  std::size_t n_present_ = 0;
};

}  // namespace mdlab::treelearn::detail
