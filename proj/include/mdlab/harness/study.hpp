#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "mdlab/common/json_util.hpp"
#include "mdlab/harness/plan.hpp"
#include "mdlab/harness/replication.hpp"
#include "mdlab/metrics/panels.hpp"

namespace mdlab::harness {

inline constexpr const char* kCompleteLabel = "complete";
inline constexpr const char* kListwiseLabel = "listwise";

// Aggregates for one analysis: the complete-data baseline (rate 0), the
// listwise baseline at a rate, or an imputation method at a rate.
struct StudyCell {
  std::string label;     // "complete", "listwise" or a method name
  double rate = 0.0;
  std::size_t n = 0;     // replications that contributed; 0 = skipped
  std::string skipped_reason;
  metrics::PanelReport bias;
  metrics::PanelReport rejection;
  bool has_ipm = false;
  double ipm_mean = 0.0, ipm_sd = 0.0;
  double seconds_mean = 0.0, seconds_total = 0.0;

  bool skipped() const { return n == 0; }
};

struct StudyReport {
  SimPlan plan;
  bool complete = false;  // R ok records found within R_max
  int attempted = 0;
  std::vector<int> selected;                                // replication indices, ascending
  std::vector<std::pair<int, std::string>> failures;        // index, reason
  metrics::CoefficientTable table;                          // every slope; intercept excluded
  std::vector<StudyCell> cells;  // complete, then per rate: listwise, then methods
  std::vector<ReplicationRecord> records;                   // the selected records

  const StudyCell& cell(const std::string& label, double rate = 0.0) const;
  // Timing is omitted when `with_timing` is false; the rest is a pure
  // function of the plan.
  Json to_json(bool with_timing = true) const;
};

using ReplicationFn = std::function<ReplicationRecord(int index)>;

// Replication indices 1..R_max are scheduled in batches across
// plan.workers; the first R ok records by index are aggregated. `fn`
// replaces the default pipeline (tests inject failures this way).
StudyReport run_plan(const SimPlan& plan, const ReplicationFn& fn = {});

// Selected records (ok, ascending index) into panels.
StudyReport aggregate(const SimPlan& plan, const std::vector<ReplicationRecord>& selected);

// Panel classification of a model term: metric columns are Metric, dummies
// of binary columns are Binary, everything else is Other.
metrics::VariableKind term_kind(const std::string& term);
metrics::CoefficientTable coefficient_table(const SimPlan& plan, const std::vector<std::string>& terms);

}  // namespace mdlab::harness
