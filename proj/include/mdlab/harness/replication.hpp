#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mdlab/common/json_util.hpp"
#include "mdlab/harness/plan.hpp"
#include "mdlab/synthgen/specs.hpp"

namespace mdlab::harness {

// One regression with per-term test decisions; `ok` is false when the fit
// was skipped or failed, with the reason.
struct FitSummary {
  bool ok = false;
  std::string reason;
  std::vector<double> beta;
  std::vector<bool> reject;
  std::size_t rows = 0;
};

struct CellRecord {
  impute::Method method = impute::Method::MicePmm;
  bool ok = false;
  std::string reason;
  std::vector<double> qbar;
  std::vector<bool> reject;
  double ipm = 0.0;
  double seconds = 0.0;  // wall clock of the m imputations
};

struct RateRecord {
  double rate = 0.0;
  double achieved_rate = 0.0;
  FitSummary listwise;
  std::vector<CellRecord> cells;  // plan.methods order
};

struct ReplicationRecord {
  int index = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string reason;  // first failure, e.g. "missing level: parentsEd[4]"
  std::vector<std::string> terms;
  FitSummary complete;
  std::vector<RateRecord> rates;

  // Timing fields are left out when `with_timing` is false, so records of
  // the same plan and seed compare byte-identical.
  Json to_json(bool with_timing = true) const;
  static ReplicationRecord from_json(const Json& j);
};

// Everything a replication needs that does not change between replications.
struct ReplicationContext {
  SimPlan plan;
  synthgen::EndogenousModelSpec endogenous;
  analyze::ModelSpec model;

  explicit ReplicationContext(const SimPlan& plan);
};

std::uint64_t replication_seed(std::uint64_t base, int index);

// Per-stage seeds derived from the replication seed. Each stage owns its
// stream, so changing one leaves the others untouched.
std::uint64_t generate_seed(std::uint64_t replication);
std::uint64_t ampute_seed(std::uint64_t replication, std::size_t rate_index);
std::uint64_t impute_seed(std::uint64_t replication, std::size_t rate_index, impute::Method method);

// Declared levels with no observation, as "column[level]".
std::vector<std::string> missing_levels(const tabular::Dataset& ds);

// generate -> coverage check -> complete-data fit -> for each rate: ampute,
// listwise fit, then every method: impute, pool, IPM.
ReplicationRecord run_replication(const ReplicationContext& ctx, int index);
ReplicationRecord run_replication(const SimPlan& plan, int index);

}  // namespace mdlab::harness
