#pragma once

#include <span>
#include <string>
#include <vector>

#include "mdlab/common/random.hpp"

namespace mdlab::impute {

// Predictive mean matching. For each entry of pred_mis the donor pool is
// the k observed rows whose predictions are closest; the result is the
// observed value of one donor drawn uniformly. Equal predictions are
// ordered by a seeded shuffle, so ties do not favour low indices.
// If fewer than k donors exist, k is lowered and a warning is appended.
std::vector<double> pmm_match(std::span<const double> pred_mis, std::span<const double> pred_obs,
                              std::span<const double> obs_values, int k, Rng& rng,
                              std::vector<std::string>* warnings = nullptr);

}  // namespace mdlab::impute
