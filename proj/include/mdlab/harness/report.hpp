#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mdlab/common/json_util.hpp"
#include "mdlab/harness/study.hpp"

namespace mdlab::harness {

inline constexpr const char* kVersion = "0.1.0";

// Panel statistics in table layout: one row per
// (label, rate, panel, statistic), label "complete" and "listwise" first.
std::string panels_csv(const StudyReport& study, bool rejection);
// One row per (coefficient, label, rate) with bias and rejection rate.
std::string coefficients_csv(const StudyReport& study);
// One row per (method, rate): IPM mean and sd, seconds per replication.
std::string ipm_timing_csv(const StudyReport& study);

// Plan, base seed, selected and failed indices, replication seeds and
// library versions. Loading the "plan" member re-runs the study.
Json manifest(const StudyReport& study);

// Accepts a plan, or a manifest holding one.
SimPlan plan_from_file(const std::filesystem::path& path);

struct ReportFiles {
  std::filesystem::path bias_panels, rejection_panels, coefficients, ipm_timing, study, manifest, records;
};

// Writes every file under `dir` (created if needed). study.json carries no
// timing; ipm_timing.csv and replications.jsonl are the only files that do,
// and everything else is byte-identical across reruns of the same plan.
// Throws IoError naming the path.
ReportFiles emit_report(const StudyReport& study, const std::filesystem::path& dir);

// Re-aggregates a study emitted to `dir` from its manifest and records.
// `plan` overrides the manifest's plan when given (e.g. another bias mode).
StudyReport load_study(const std::filesystem::path& dir, const SimPlan* plan = nullptr);

}  // namespace mdlab::harness
