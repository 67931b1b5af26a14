#pragma once

#include <cstdint>

#include "mdlab/impute/spec.hpp"

namespace mdlab::impute {

// Each engine runs spec.m independent imputations, seeded by
// derive_seed(seed, {method, i}), so the result does not depend on
// spec.threads.
MultipleImputation impute_mice_pmm(const tabular::Dataset& ds, const ImputerSpec& spec, std::uint64_t seed);
MultipleImputation impute_mice_rf(const tabular::Dataset& ds, const ImputerSpec& spec, std::uint64_t seed);
MultipleImputation impute_missranger(const tabular::Dataset& ds, const ImputerSpec& spec, std::uint64_t seed,
                                     bool use_pmm);
MultipleImputation impute_mixgb(const tabular::Dataset& ds, const ImputerSpec& spec, std::uint64_t seed);

// Dispatches on spec.method.
MultipleImputation run_imputation(const tabular::Dataset& ds, const ImputerSpec& spec, std::uint64_t seed);

}  // namespace mdlab::impute
