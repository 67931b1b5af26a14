#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mdlab/common/json_util.hpp"
#include "mdlab/common/random.hpp"
#include "mdlab/tabular/dataset.hpp"

namespace mdlab::ampute {

// How a group's share pi turns into a count of amputed rows.
//   GlobalCount:  the column budget round(nu * n_rows) is split across
//                 groups in proportion to pi (default).
//   PerGroupRate: group l loses round(nu * pi_l * zeta_l) rows.
enum class BudgetMode { GlobalCount, PerGroupRate };

struct AmputeConfig {
  double nu = 0.1;
  std::string anchor = "education";
  std::vector<std::string> columns;  // empty = every column
  std::vector<std::string> exclude;
  std::uint64_t seed = 0;
  BudgetMode budget = BudgetMode::GlobalCount;

  // Targeted columns after applying `columns` and `exclude`.
  std::vector<std::string> targets(const tabular::Dataset& ds) const;
  void validate(const tabular::Dataset& ds) const;
};

struct GroupRecord {
  double eta = 0.0;         // anchor value
  std::size_t zeta = 0;     // rows with that value
  double tau_hat = 0.0;     // paired random weight
  double pi = 0.0;          // share of the column's missingness
  std::size_t selected = 0; // rows amputed in the group
};

struct ColumnReport {
  std::string column;
  std::string role;  // "anchor", "mcar" or "mar"
  std::size_t missing = 0;
  double rate = 0.0;
  std::vector<GroupRecord> groups;  // mar only, eta descending
};

struct AmputeReport {
  std::string mechanism;  // "MCAR" or "MAR"
  double nu = 0.0;
  std::string anchor;
  std::size_t n_rows = 0;
  std::vector<ColumnReport> columns;
  double overall_rate = 0.0;
  std::vector<std::string> warnings;

  const ColumnReport* find(const std::string& column) const;
  Json to_json() const;
};

struct AmputeResult {
  tabular::Dataset data;
  AmputeReport report;
};

// Sets exactly round(nu * n_rows) cells missing in each column, uniformly.
AmputeResult ampute_mcar(const tabular::Dataset& ds, double nu, const std::vector<std::string>& columns,
                         std::uint64_t seed);

// Anchor MCAR at rate nu, then every other targeted column amputed with
// probabilities that depend on the observed anchor value only.
AmputeResult ampute_mar(const tabular::Dataset& ds, const AmputeConfig& cfg);

// pi_l = tau_hat_l * zeta_l / sum(tau_hat * zeta).
std::vector<double> group_shares(std::span<const std::size_t> zeta, std::span<const double> tau_hat);

// Per-group counts. GlobalCount sums to min(budget, sum(zeta)) exactly:
// groups that would exceed their size are capped and the excess spread
// over the others in proportion to pi, then largest-remainder rounding.
std::vector<std::size_t> allocate_group_counts(std::span<const std::size_t> zeta, std::span<const double> tau_hat,
                                               std::size_t budget, BudgetMode mode, double nu);

// Pairs random weights with anchor values sorted descending, so the largest
// value takes the smallest weight: the weights come back ascending.
std::vector<double> pair_weights(std::vector<double> tau);

// One MAR step on `column` given the already-amputed anchor, with tau_hat
// aligned to the observed anchor values in descending order.
ColumnReport ampute_given_anchor(tabular::Dataset& ds, std::size_t column, std::size_t anchor,
                                 std::span<const double> tau_hat, double nu, BudgetMode mode, Rng& rng);

// Distinct observed anchor values, descending, with their row lists.
struct AnchorGroups {
  std::vector<double> eta;
  std::vector<std::vector<std::size_t>> rows;
};
AnchorGroups anchor_groups(const tabular::Dataset& ds, std::size_t anchor);

}  // namespace mdlab::ampute
