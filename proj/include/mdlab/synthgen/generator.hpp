#pragma once

#include <vector>

#include "mdlab/common/random.hpp"
#include "mdlab/synthgen/specs.hpp"
#include "mdlab/tabular/dataset.hpp"

namespace mdlab::synthgen {

// Long-format panel: individual-major rows, waves ascending, panel keys
// (id = 1..n, wave). Every individual owns RNG streams derived from
// (seed, id), so the result does not depend on generation order.
tabular::Dataset generate_panel(const PanelConfig& cfg, const MarginalSpec& marg, const EndogenousModelSpec& endo,
                                const OutcomeModel& out);

// Only the independent variables; endogenous and outcome cells are zero
// and flagged missing. Draws are identical to those of generate_panel.
tabular::Dataset generate_independent(const PanelConfig& cfg, const MarginalSpec& marg);

// y = intercept + sum(coef * term) + Normal(noise_mean, noise_sd), one draw
// per row in row order. Throws ConfigError naming unresolvable terms.
std::vector<double> gen_outcome(const tabular::Dataset& ds, const OutcomeModel& out, Rng& rng);

}  // namespace mdlab::synthgen
