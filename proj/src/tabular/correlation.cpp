#include "mdlab/tabular/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mdlab/common/errors.hpp"

namespace mdlab::tabular {

std::string_view to_string(CorrelationMethod method) {
  switch (method) {
    case CorrelationMethod::Pearson: return "pearson";
    case CorrelationMethod::Spearman: return "spearman";
    case CorrelationMethod::Kendall: return "kendall";
  }
  return "pearson";
}

std::string_view to_string(DistanceMetric metric) {
  switch (metric) {
    case DistanceMetric::Frobenius: return "frobenius";
    case DistanceMetric::Mae: return "mae";
    case DistanceMetric::Rmse: return "rmse";
  }
  return "frobenius";
}

CorrelationMethod parse_correlation_method(std::string_view text) {
  if (text == "pearson") return CorrelationMethod::Pearson;
  if (text == "spearman") return CorrelationMethod::Spearman;
  if (text == "kendall") return CorrelationMethod::Kendall;
  throw ConfigError("unknown correlation method '" + std::string(text) + "'");
}

bool CorrelationMatrix::flagged() const {
  return std::any_of(zero_variance.begin(), zero_variance.end(), [](bool b) { return b; });
}

namespace {

void require_same_length(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DimensionError("correlation: vectors differ in length");
}

bool is_constant(std::span<const double> x) {
  return std::all_of(x.begin(), x.end(), [&](double v) { return v == x.front(); });
}

// Counts inversions while merge-sorting v (Knight's exchange count).
std::uint64_t merge_count(std::vector<double>& v, std::vector<double>& buf, std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  std::size_t mid = lo + (hi - lo) / 2;
  std::uint64_t swaps = merge_count(v, buf, lo, mid) + merge_count(v, buf, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      swaps += mid - i;
      buf[k++] = v[j++];
    } else {
      buf[k++] = v[i++];
    }
  }
  while (i < mid) buf[k++] = v[i++];
  while (j < hi) buf[k++] = v[j++];
  std::copy(buf.begin() + lo, buf.begin() + hi, v.begin() + lo);
  return swaps;
}

std::uint64_t tied_pairs(const std::vector<double>& sorted) {
  std::uint64_t total = 0, run = 1;
  for (std::size_t i = 1; i <= sorted.size(); ++i) {
    if (i < sorted.size() && sorted[i] == sorted[i - 1]) {
      ++run;
    } else {
      total += run * (run - 1) / 2;
      run = 1;
    }
  }
  return total;
}

}  // namespace

double pearson(std::span<const double> x, std::span<const double> y) {
  require_same_length(x, y);
  const std::size_t n = x.size();
  if (n < 2) return 0.0;
  double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0 || syy <= 0 || is_constant(x) || is_constant(y)) return 0.0;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> mid_ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i + 1;
    while (j < order.size() && x[order[j]] == x[order[i]]) ++j;
    double r = 0.5 * static_cast<double>(i + j - 1) + 1.0;
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = r;
    i = j;
  }
  return ranks;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  require_same_length(x, y);
  auto rx = mid_ranks(x);
  auto ry = mid_ranks(y);
  return pearson(rx, ry);
}

double kendall_tau_b(std::span<const double> x, std::span<const double> y) {
  require_same_length(x, y);
  const std::size_t n = x.size();
  if (n < 2 || is_constant(x) || is_constant(y)) return 0.0;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return x[a] < x[b] || (x[a] == x[b] && y[a] < y[b]);
  });

  std::uint64_t ties_x = 0, ties_xy = 0;
  {
    std::uint64_t run_x = 1, run_xy = 1;
    for (std::size_t i = 1; i <= n; ++i) {
      bool same_x = i < n && x[order[i]] == x[order[i - 1]];
      bool same_xy = same_x && y[order[i]] == y[order[i - 1]];
      if (same_x) {
        ++run_x;
      } else {
        ties_x += run_x * (run_x - 1) / 2;
        run_x = 1;
      }
      if (same_xy) {
        ++run_xy;
      } else {
        ties_xy += run_xy * (run_xy - 1) / 2;
        run_xy = 1;
      }
    }
  }

  std::vector<double> ys(n), buf(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = y[order[i]];
  std::uint64_t swaps = merge_count(ys, buf, 0, n);
  std::uint64_t ties_y = tied_pairs(ys);

  const double n0 = static_cast<double>(n) * (n - 1) / 2.0;
  const double s = n0 - static_cast<double>(ties_x) - static_cast<double>(ties_y) +
                   static_cast<double>(ties_xy) - 2.0 * static_cast<double>(swaps);
  const double denom = std::sqrt((n0 - ties_x) * (n0 - ties_y));
  if (denom <= 0) return 0.0;
  return std::clamp(s / denom, -1.0, 1.0);
}

CorrelationMatrix correlation_matrix(const Dataset& ds, CorrelationMethod method) {
  const std::size_t p = ds.n_cols();
  if (ds.mask().count() > 0) throw EncodingError("correlation_matrix: dataset has missing cells");
  CorrelationMatrix out;
  out.values = Eigen::MatrixXd::Identity(p, p);
  out.zero_variance.assign(p, false);
  std::vector<std::vector<double>> cols(p);
  for (std::size_t c = 0; c < p; ++c) {
    auto v = ds.values(c);
    cols[c].assign(v.begin(), v.end());
    out.labels.push_back(ds.column(c).name);
    out.zero_variance[c] = cols[c].empty() || is_constant(cols[c]);
    if (method == CorrelationMethod::Spearman) cols[c] = mid_ranks(cols[c]);
  }
  for (std::size_t a = 0; a < p; ++a) {
    for (std::size_t b = a + 1; b < p; ++b) {
      double r = 0.0;
      if (!out.zero_variance[a] && !out.zero_variance[b]) {
        r = method == CorrelationMethod::Kendall ? kendall_tau_b(cols[a], cols[b]) : pearson(cols[a], cols[b]);
      }
      out.values(a, b) = out.values(b, a) = r;
    }
  }
  return out;
}

double matrix_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, DistanceMetric metric) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("matrix_distance: shapes " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                         " and " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()) + " differ");
  }
  const Eigen::ArrayXXd d = (a - b).array();
  const double count = static_cast<double>(d.size());
  switch (metric) {
    case DistanceMetric::Frobenius: return std::sqrt(d.square().sum());
    case DistanceMetric::Mae: return count > 0 ? d.abs().sum() / count : 0.0;
    case DistanceMetric::Rmse: return count > 0 ? std::sqrt(d.square().sum() / count) : 0.0;
  }
  return 0.0;
}

}  // namespace mdlab::tabular
