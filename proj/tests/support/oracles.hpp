#pragma once

// Independent reference implementations used only by tests. They favour
// directness over speed and share no code with the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <set>
#include <stdexcept>
#include <vector>

namespace oracle {

using Matrix = std::vector<std::vector<double>>;  // row-major

inline double sse(const std::vector<double>& y, const std::vector<std::size_t>& rows) {
  if (rows.empty()) return 0.0;
  double m = 0;
  for (auto r : rows) m += y[r];
  m /= static_cast<double>(rows.size());
  double s = 0;
  for (auto r : rows) s += (y[r] - m) * (y[r] - m);
  return s;
}

// Smallest two-child SSE over every threshold of every ordered column and
// every level bipartition of every nominal column. Returns the parent SSE
// when no admissible split exists.
inline double best_split_sse(const Matrix& cols, const std::vector<bool>& nominal, const std::vector<double>& y,
                             std::size_t min_leaf) {
  const std::size_t n = y.size();
  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;
  double best = sse(y, all);
  for (std::size_t j = 0; j < cols.size(); ++j) {
    std::set<double> uniq(cols[j].begin(), cols[j].end());
    std::vector<double> u(uniq.begin(), uniq.end());
    auto consider = [&](auto&& goes_left) {
      std::vector<std::size_t> l, r;
      for (std::size_t i = 0; i < n; ++i) (goes_left(cols[j][i]) ? l : r).push_back(i);
      if (l.size() < min_leaf || r.size() < min_leaf) return;
      best = std::min(best, sse(y, l) + sse(y, r));
    };
    if (!nominal[j]) {
      for (std::size_t k = 0; k + 1 < u.size(); ++k) consider([&](double v) { return v <= u[k]; });
    } else {
      const std::size_t P = u.size();
      for (std::uint64_t mask = 1; mask + 1 < (std::uint64_t{1} << P); ++mask) {
        consider([&](double v) {
          std::size_t pos = std::lower_bound(u.begin(), u.end(), v) - u.begin();
          return ((mask >> pos) & 1u) != 0;
        });
      }
    }
  }
  return best;
}

// Gauss-Jordan inverse with partial pivoting.
inline Matrix invert(Matrix a) {
  const std::size_t k = a.size();
  Matrix inv(k, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < k; ++i) inv[i][i] = 1.0;
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < k; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    }
    if (std::abs(a[piv][c]) < 1e-300) throw std::runtime_error("singular");
    std::swap(a[c], a[piv]);
    std::swap(inv[c], inv[piv]);
    double d = a[c][c];
    for (std::size_t j = 0; j < k; ++j) {
      a[c][j] /= d;
      inv[c][j] /= d;
    }
    for (std::size_t r = 0; r < k; ++r) {
      if (r == c) continue;
      double f = a[r][c];
      if (f == 0) continue;
      for (std::size_t j = 0; j < k; ++j) {
        a[r][j] -= f * a[c][j];
        inv[r][j] -= f * inv[c][j];
      }
    }
  }
  return inv;
}

struct OlsSolution {
  std::vector<double> beta, se;
};

// beta = (X'X)^-1 X'y, se_j = sqrt(s2 * [(X'X)^-1]_jj), s2 = RSS/(n-k).
inline OlsSolution normal_equations(const Matrix& X, const std::vector<double>& y) {
  const std::size_t n = X.size(), k = X[0].size();
  Matrix xtx(k, std::vector<double>(k, 0.0));
  std::vector<double> xty(k, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < k; ++a) {
      xty[a] += X[i][a] * y[i];
      for (std::size_t b = 0; b < k; ++b) xtx[a][b] += X[i][a] * X[i][b];
    }
  }
  Matrix inv = invert(xtx);
  OlsSolution s;
  s.beta.assign(k, 0.0);
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = 0; b < k; ++b) s.beta[a] += inv[a][b] * xty[b];
  }
  double rss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double fit = 0;
    for (std::size_t a = 0; a < k; ++a) fit += X[i][a] * s.beta[a];
    rss += (y[i] - fit) * (y[i] - fit);
  }
  double s2 = rss / static_cast<double>(n - k);
  for (std::size_t a = 0; a < k; ++a) s.se.push_back(std::sqrt(s2 * inv[a][a]));
  return s;
}

inline double kendall_tau_b(const std::vector<double>& x, const std::vector<double>& y) {
  double nc = 0, nd = 0, tx = 0, ty = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      double dx = x[i] - x[j], dy = y[i] - y[j];
      if (dx == 0 && dy == 0) continue;
      if (dx == 0) {
        ++tx;
      } else if (dy == 0) {
        ++ty;
      } else if ((dx > 0) == (dy > 0)) {
        ++nc;
      } else {
        ++nd;
      }
    }
  }
  double denom = std::sqrt((nc + nd + tx) * (nc + nd + ty));
  return denom > 0 ? (nc - nd) / denom : 0.0;
}

}  // namespace oracle
