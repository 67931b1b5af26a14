#include "mdlab/impute/pmm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mdlab/common/errors.hpp"

namespace mdlab::impute {

std::vector<double> pmm_match(std::span<const double> pred_mis, std::span<const double> pred_obs,
                              std::span<const double> obs_values, int k, Rng& rng,
                              std::vector<std::string>* warnings) {
  if (pred_obs.size() != obs_values.size()) {
    throw DimensionError("pmm_match: " + std::to_string(pred_obs.size()) + " observed predictions but " +
                         std::to_string(obs_values.size()) + " observed values");
  }
  if (k < 1) throw ConfigError("pmm_match: k must be >= 1");
  if (pred_mis.empty()) return {};
  const std::size_t n = pred_obs.size();
  if (n == 0) throw UnimputableError("pmm_match: no donors available");
  std::size_t kk = static_cast<std::size_t>(k);
  if (kk > n) {
    if (warnings) {
      warnings->push_back("pmm: only " + std::to_string(n) + " donors, k lowered from " + std::to_string(k));
    }
    kk = n;
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return pred_obs[a] < pred_obs[b]; });
  std::vector<double> sorted(n);
  for (std::size_t i = 0; i < n; ++i) sorted[i] = pred_obs[order[i]];

  std::vector<double> out(pred_mis.size());
  std::vector<std::size_t> pool(kk);
  for (std::size_t i = 0; i < pred_mis.size(); ++i) {
    const double p = pred_mis[i];
    std::size_t right = static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), p) - sorted.begin());
    std::size_t left = right;  // candidates are [left - 1] and [right]
    for (std::size_t taken = 0; taken < kk; ++taken) {
      bool take_left;
      if (left == 0) {
        take_left = false;
      } else if (right == n) {
        take_left = true;
      } else {
        take_left = std::abs(p - sorted[left - 1]) < std::abs(sorted[right] - p);
      }
      pool[taken] = take_left ? order[--left] : order[right++];
    }
    out[i] = obs_values[pool[uniform_index(rng, kk)]];
  }
  return out;
}

}  // namespace mdlab::impute
