#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mdlab/common/json_util.hpp"

namespace mdlab::metrics {

// Measurement scale of the variable behind a coefficient. Ordinal,
// nominal and wave dummies count as Other.
enum class VariableKind { Metric, Binary, Other };

struct CoefficientInfo {
  std::string term;
  double truth = 0.0;
  VariableKind kind = VariableKind::Other;
  bool true_zero() const { return truth == 0.0; }
};

// The coefficients a study evaluates. Built from the analysis model's
// terms; any term the truth does not mention is a true zero.
class CoefficientTable {
 public:
  CoefficientTable() = default;
  // Throws AlignmentError when a truth term is not among `terms`.
  CoefficientTable(const std::vector<std::string>& terms, const std::vector<VariableKind>& kinds,
                   const std::vector<std::pair<std::string, double>>& truth);

  const std::vector<CoefficientInfo>& coefficients() const { return coefs_; }
  std::size_t size() const { return coefs_.size(); }
  std::vector<std::string> terms() const;
  // Position of each of `terms` in this table; AlignmentError if any is unknown.
  std::vector<std::size_t> positions(const std::vector<std::string>& terms) const;

 private:
  std::vector<CoefficientInfo> coefs_;
};

enum class Panel { Overall, TrueZero, NonTrueZero, Metric, Binary };

const std::vector<Panel>& all_panels();
char panel_letter(Panel p);             // A..E
std::string panel_name(Panel p);        // overall, true_zero, ...
bool panel_contains(Panel p, const CoefficientInfo& c);

struct PanelStats {
  Panel panel = Panel::Overall;
  std::size_t n_terms = 0;
  double mean = 0.0, median = 0.0, sd = 0.0;  // sd uses n - 1; 0 for fewer than two terms
};

PanelStats summarize(Panel panel, const std::vector<double>& values);

struct PanelReport {
  std::vector<CoefficientInfo> coefficients;
  std::vector<double> per_coefficient;
  std::vector<PanelStats> panels;  // in all_panels() order

  const PanelStats& at(Panel p) const;
  Json to_json() const;
};

// AbsoluteOfMean: b_k = |mean_r(beta_rk - beta_k)| (default).
// MeanOfAbsolute: b_k = mean_r |beta_rk - beta_k|.
enum class BiasMode { AbsoluteOfMean, MeanOfAbsolute };

// estimates[r][j] is the estimate of terms[j] in replication r.
PanelReport bias_panels(const CoefficientTable& table, const std::vector<std::string>& terms,
                        const std::vector<std::vector<double>>& estimates,
                        BiasMode mode = BiasMode::AbsoluteOfMean);

// decisions[r][j] is whether H0: beta = 0 was rejected for terms[j].
PanelReport rejection_panels(const CoefficientTable& table, const std::vector<std::string>& terms,
                             const std::vector<std::vector<bool>>& decisions);

// Panels from per-coefficient values already computed, aligned to `table`.
PanelReport panels_from_values(const CoefficientTable& table, std::vector<double> per_coefficient);

}  // namespace mdlab::metrics
