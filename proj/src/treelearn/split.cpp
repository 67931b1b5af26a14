#include "split.hpp"

#include <algorithm>
#include <bit>
#include <numeric>

namespace mdlab::treelearn::detail {

namespace {

inline double moment_score(double g, double h, double lambda) { return g * g / (h + lambda); }

double midpoint(double a, double b) {
  double m = a + (b - a) / 2.0;
  return m < b ? m : a;
}

}  // namespace

void SplitSearcher::gather_moment(const std::vector<std::uint32_t>& codes, std::size_t num_codes, bool force_dense,
                                  std::span<const std::uint32_t> rows, const double* g, const double* h) {
  const std::size_t cap = std::min(num_codes, rows.size());
  if (c_code_.size() < cap) {
    c_code_.resize(cap);
    c_g_.resize(cap);
    c_h_.resize(cap);
    c_n_.resize(cap);
  }
  std::size_t P = 0;
  if (force_dense || num_codes <= 2 * rows.size()) {
    if (dense_g_.size() < num_codes) {
      dense_g_.assign(num_codes, 0.0);
      dense_h_.assign(num_codes, 0.0);
      dense_n_.assign(num_codes, 0);
    }
    double* dg = dense_g_.data();
    double* dh = dense_h_.data();
    std::uint32_t* dn = dense_n_.data();
    if (h) {
      for (std::uint32_t r : rows) {
        const std::uint32_t c = codes[r];
        dg[c] += g[r];
        dh[c] += h[r];
        ++dn[c];
      }
    } else {
      for (std::uint32_t r : rows) {
        const std::uint32_t c = codes[r];
        dg[c] += g[r];
        ++dn[c];
      }
    }
    for (std::size_t c = 0; c < num_codes; ++c) {
      if (dn[c] == 0) continue;
      c_code_[P] = static_cast<std::uint32_t>(c);
      c_g_[P] = dg[c];
      c_h_[P] = h ? dh[c] : static_cast<double>(dn[c]);
      c_n_[P] = dn[c];
      ++P;
      dg[c] = dh[c] = 0.0;
      dn[c] = 0;
    }
    n_present_ = P;
    return;
  }
  pairs_.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) pairs_[i] = {codes[rows[i]], rows[i]};
  std::sort(pairs_.begin(), pairs_.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::uint32_t last = 0;
  for (std::size_t i = 0; i < pairs_.size(); ++i) {
    auto [c, r] = pairs_[i];
    if (P == 0 || last != c) {
      c_code_[P] = c;
      c_g_[P] = 0.0;
      c_h_[P] = 0.0;
      c_n_[P] = 0;
      ++P;
      last = c;
    }
    c_g_[P - 1] += g[r];
    c_h_[P - 1] += h ? h[r] : 1.0;
    ++c_n_[P - 1];
  }
  n_present_ = P;
}

void SplitSearcher::gather_counts(const std::vector<std::uint32_t>& codes, std::size_t num_codes, bool force_dense,
                                  std::span<const std::uint32_t> rows, const int* labels, int K) {
  const std::size_t cap = std::min(num_codes, rows.size());
  if (c_code_.size() < cap) {
    c_code_.resize(cap);
    c_n_.resize(cap);
  }
  if (c_counts_.size() < cap * K) c_counts_.resize(cap * K);
  std::size_t P = 0;
  if (force_dense || num_codes <= 2 * rows.size()) {
    if (dense_n_.size() < num_codes) dense_n_.assign(num_codes, 0);
    if (dense_counts_.size() < num_codes * K) dense_counts_.assign(num_codes * K, 0.0);
    for (std::uint32_t r : rows) {
      std::uint32_t c = codes[r];
      ++dense_n_[c];
      dense_counts_[static_cast<std::size_t>(c) * K + labels[r]] += 1.0;
    }
    for (std::size_t c = 0; c < num_codes; ++c) {
      if (dense_n_[c] == 0) continue;
      c_code_[P] = static_cast<std::uint32_t>(c);
      c_n_[P] = dense_n_[c];
      double* src = &dense_counts_[c * K];
      std::copy(src, src + K, c_counts_.begin() + P * K);
      std::fill(src, src + K, 0.0);
      dense_n_[c] = 0;
      ++P;
    }
    n_present_ = P;
    return;
  }
  pairs_.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) pairs_[i] = {codes[rows[i]], rows[i]};
  std::sort(pairs_.begin(), pairs_.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::uint32_t last = 0;
  for (auto [c, r] : pairs_) {
    if (P == 0 || last != c) {
      c_code_[P] = c;
      c_n_[P] = 0;
      std::fill(c_counts_.begin() + P * K, c_counts_.begin() + (P + 1) * K, 0.0);
      ++P;
      last = c;
    }
    ++c_n_[P - 1];
    c_counts_[(P - 1) * K + labels[r]] += 1.0;
  }
  n_present_ = P;
}

void SplitSearcher::moment(int feature, const FeatureInfo& info, const RankCodes& rc, std::span<const std::uint32_t> rows,
                           const double* g, const double* h, const MomentRule& rule, double parent_score,
                           SplitResult& best) {
  const bool nominal = info.kind == FeatureKind::Nominal;
  const auto& lower = rc.lower[feature];
  const auto& upper = rc.upper[feature];
  gather_moment(rc.codes[feature], lower.size(), nominal, rows, g, h);
  const std::size_t P = n_present_;
  if (P < 2) return;
  double G = 0, H = 0;
  std::uint32_t N = 0;
  for (std::size_t i = 0; i < P; ++i) {
    G += c_g_[i];
    H += c_h_[i];
    N += c_n_[i];
  }
  auto admissible = [&](std::uint32_t nl, double hl) {
    return nl >= rule.min_leaf && N - nl >= rule.min_leaf && hl >= rule.min_child_weight &&
           H - hl >= rule.min_child_weight;
  };
  auto gain_of = [&](double gl, double hl) {
    return moment_score(gl, hl, rule.lambda) + moment_score(G - gl, H - hl, rule.lambda) - parent_score;
  };

  if (!nominal) {
    double gl = 0, hl = 0;
    std::uint32_t nl = 0;
    for (std::size_t i = 0; i + 1 < P; ++i) {
      gl += c_g_[i];
      hl += c_h_[i];
      nl += c_n_[i];
      if (!admissible(nl, hl)) continue;
      double gain = gain_of(gl, hl);
      if (gain > best.gain) {
        best = {true, gain, feature, false, c_code_[i], midpoint(upper[c_code_[i]], lower[c_code_[i + 1]]), 0,
                nl >= N - nl};
      }
    }
    return;
  }

  std::uint64_t best_left = 0;
  std::uint32_t best_nl = 0;
  bool found = false;
  double best_gain = best.gain;
  if (P <= kExhaustiveNominalLevels) {
    // Gray-code walk over subsets of the first P-1 present levels; the last
    // present level stays right, so every partition is visited once.
    double gl = 0, hl = 0;
    std::uint32_t nl = 0;
    std::uint64_t mask = 0;
    const std::uint64_t total = std::uint64_t{1} << (P - 1);
    for (std::uint64_t i = 1; i < total; ++i) {
      int bit = std::countr_zero(i);
      mask ^= std::uint64_t{1} << bit;
      double sgn = (mask >> bit) & 1u ? 1.0 : -1.0;
      gl += sgn * c_g_[bit];
      hl += sgn * c_h_[bit];
      nl = (mask >> bit) & 1u ? nl + c_n_[bit] : nl - c_n_[bit];
      if (!admissible(nl, hl)) continue;
      double gain = gain_of(gl, hl);
      if (gain > best_gain) {
        best_gain = gain;
        best_left = mask;
        best_nl = nl;
        found = true;
      }
    }
    if (found) {
      std::uint64_t levels = 0;
      for (std::size_t i = 0; i < P; ++i) {
        if ((best_left >> i) & 1u) levels |= std::uint64_t{1} << c_code_[i];
      }
      best_left = levels;
    }
  } else {
    order_.resize(P);
    std::iota(order_.begin(), order_.end(), 0);
    std::stable_sort(order_.begin(), order_.end(),
                     [&](std::size_t a, std::size_t b) { return c_g_[a] / c_h_[a] < c_g_[b] / c_h_[b]; });
    double gl = 0, hl = 0;
    std::uint32_t nl = 0;
    std::uint64_t levels = 0;
    for (std::size_t k = 0; k + 1 < P; ++k) {
      std::size_t i = order_[k];
      gl += c_g_[i];
      hl += c_h_[i];
      nl += c_n_[i];
      levels |= std::uint64_t{1} << c_code_[i];
      if (!admissible(nl, hl)) continue;
      double gain = gain_of(gl, hl);
      if (gain > best_gain) {
        best_gain = gain;
        best_left = levels;
        best_nl = nl;
        found = true;
      }
    }
  }
  if (!found) return;
  const bool majority_left = best_nl >= N - best_nl;
  std::uint64_t present = 0;
  for (std::size_t i = 0; i < P; ++i) present |= std::uint64_t{1} << c_code_[i];
  if (majority_left) best_left |= ~present;
  best = {true, best_gain, feature, true, 0, 0.0, best_left, majority_left};
}

void SplitSearcher::gini(int feature, const FeatureInfo& info, const RankCodes& rc, std::span<const std::uint32_t> rows,
                         const int* labels, int K, std::uint32_t min_leaf, double parent_score,
                         SplitResult& best) {
  const bool nominal = info.kind == FeatureKind::Nominal;
  const auto& lower = rc.lower[feature];
  const auto& upper = rc.upper[feature];
  gather_counts(rc.codes[feature], lower.size(), nominal, rows, labels, K);
  const std::size_t P = n_present_;
  if (P < 2) return;
  total_.assign(K, 0.0);
  left_.assign(K, 0.0);
  std::vector<double>& total = total_;
  std::vector<double>& left = left_;
  std::uint32_t N = 0;
  for (std::size_t i = 0; i < P; ++i) {
    N += c_n_[i];
    for (int k = 0; k < K; ++k) total[k] += c_counts_[i * K + k];
  }
  double sumsq_total = 0;
  for (int k = 0; k < K; ++k) sumsq_total += total[k] * total[k];

  double sumsq_l = 0, sumsq_r = sumsq_total;
  std::uint32_t nl = 0;
  auto move = [&](std::size_t i, double sgn) {
    const double* c = &c_counts_[i * K];
    for (int k = 0; k < K; ++k) {
      if (c[k] == 0) continue;
      double d = sgn * c[k];
      double l_old = left[k], r_old = total[k] - l_old;
      double l_new = l_old + d, r_new = r_old - d;
      sumsq_l += l_new * l_new - l_old * l_old;
      sumsq_r += r_new * r_new - r_old * r_old;
      left[k] = l_new;
    }
    nl = sgn > 0 ? nl + c_n_[i] : nl - c_n_[i];
  };
  auto gain_now = [&]() {
    return sumsq_l / nl + sumsq_r / (N - nl) - parent_score;
  };
  auto admissible = [&]() { return nl >= min_leaf && N - nl >= min_leaf; };

  if (!nominal) {
    for (std::size_t i = 0; i + 1 < P; ++i) {
      move(i, 1.0);
      if (!admissible()) continue;
      double gain = gain_now();
      if (gain > best.gain) {
        best = {true, gain, feature, false, c_code_[i], midpoint(upper[c_code_[i]], lower[c_code_[i + 1]]), 0,
                nl >= N - nl};
      }
    }
    return;
  }

  std::uint64_t best_left = 0;
  std::uint32_t best_nl = 0;
  bool found = false;
  double best_gain = best.gain;
  if (P <= kExhaustiveNominalLevels) {
    std::uint64_t mask = 0;
    const std::uint64_t n_sub = std::uint64_t{1} << (P - 1);
    for (std::uint64_t i = 1; i < n_sub; ++i) {
      int bit = std::countr_zero(i);
      mask ^= std::uint64_t{1} << bit;
      move(bit, (mask >> bit) & 1u ? 1.0 : -1.0);
      if (!admissible()) continue;
      double gain = gain_now();
      if (gain > best_gain) {
        best_gain = gain;
        best_nl = nl;
        found = true;
        best_left = 0;
        for (std::size_t b = 0; b < P; ++b) {
          if ((mask >> b) & 1u) best_left |= std::uint64_t{1} << c_code_[b];
        }
      }
    }
  } else {
    int major = static_cast<int>(std::max_element(total.begin(), total.end()) - total.begin());
    order_.resize(P);
    std::iota(order_.begin(), order_.end(), 0);
    std::stable_sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
      return c_counts_[a * K + major] / c_n_[a] < c_counts_[b * K + major] / c_n_[b];
    });
    std::uint64_t levels = 0;
    for (std::size_t k = 0; k + 1 < P; ++k) {
      std::size_t i = order_[k];
      move(i, 1.0);
      levels |= std::uint64_t{1} << c_code_[i];
      if (!admissible()) continue;
      double gain = gain_now();
      if (gain > best_gain) {
        best_gain = gain;
        best_left = levels;
        best_nl = nl;
        found = true;
      }
    }
  }
  if (!found) return;
  const bool majority_left = best_nl >= N - best_nl;
  std::uint64_t present = 0;
  for (std::size_t i = 0; i < P; ++i) present |= std::uint64_t{1} << c_code_[i];
  if (majority_left) best_left |= ~present;
  best = {true, best_gain, feature, true, 0, 0.0, best_left, majority_left};
}

}  // namespace mdlab::treelearn::detail
