#include "mdlab/metrics/panels.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "mdlab/common/errors.hpp"

namespace mdlab::metrics {

CoefficientTable::CoefficientTable(const std::vector<std::string>& terms, const std::vector<VariableKind>& kinds,
                                   const std::vector<std::pair<std::string, double>>& truth) {
  if (terms.size() != kinds.size()) throw DimensionError("coefficient table: terms and kinds differ in length");
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (!index.emplace(terms[i], i).second) throw AlignmentError("coefficient table: duplicate term '" + terms[i] + "'");
    coefs_.push_back({terms[i], 0.0, kinds[i]});
  }
  std::string unknown;
  for (const auto& [term, value] : truth) {
    auto it = index.find(term);
    if (it == index.end()) {
      unknown += (unknown.empty() ? "'" : ", '") + term + "'";
      continue;
    }
    coefs_[it->second].truth = value;
  }
  if (!unknown.empty()) throw AlignmentError("coefficient table: truth terms not estimated: " + unknown);
}

std::vector<std::string> CoefficientTable::terms() const {
  std::vector<std::string> out;
  for (const auto& c : coefs_) out.push_back(c.term);
  return out;
}

std::vector<std::size_t> CoefficientTable::positions(const std::vector<std::string>& terms) const {
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < coefs_.size(); ++i) index.emplace(coefs_[i].term, i);
  std::vector<std::size_t> out;
  std::string unknown;
  for (const auto& t : terms) {
    auto it = index.find(t);
    if (it == index.end()) {
      unknown += (unknown.empty() ? "'" : ", '") + t + "'";
    } else {
      out.push_back(it->second);
    }
  }
  if (!unknown.empty()) throw AlignmentError("estimates carry terms without a truth entry: " + unknown);
  if (terms.size() != coefs_.size()) {
    throw AlignmentError("estimates cover " + std::to_string(terms.size()) + " of " + std::to_string(coefs_.size()) +
                         " coefficients");
  }
  return out;
}

const std::vector<Panel>& all_panels() {
  static const std::vector<Panel> panels{Panel::Overall, Panel::TrueZero, Panel::NonTrueZero, Panel::Metric,
                                         Panel::Binary};
  return panels;
}

char panel_letter(Panel p) { return static_cast<char>('A' + static_cast<int>(p)); }

std::string panel_name(Panel p) {
  switch (p) {
    case Panel::Overall: return "overall";
    case Panel::TrueZero: return "true_zero";
    case Panel::NonTrueZero: return "non_true_zero";
    case Panel::Metric: return "metric";
    case Panel::Binary: return "binary";
  }
  return "unknown";
}

bool panel_contains(Panel p, const CoefficientInfo& c) {
  switch (p) {
    case Panel::Overall: return true;
    case Panel::TrueZero: return c.true_zero();
    case Panel::NonTrueZero: return !c.true_zero();
    case Panel::Metric: return c.kind == VariableKind::Metric;
    case Panel::Binary: return c.kind == VariableKind::Binary;
  }
  return false;
}

PanelStats summarize(Panel panel, const std::vector<double>& values) {
  PanelStats s;
  s.panel = panel;
  s.n_terms = values.size();
  if (values.empty()) return s;
  const double n = static_cast<double>(values.size());
  double sum = 0;
  for (double v : values) sum += v;
  s.mean = sum / n;
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t h = sorted.size() / 2;
  s.median = sorted.size() % 2 ? sorted[h] : (sorted[h - 1] + sorted[h]) / 2.0;
  bool constant = std::all_of(values.begin(), values.end(), [&](double v) { return v == values[0]; });
  if (values.size() > 1 && !constant) {
    double ss = 0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / (n - 1));
  }
  return s;
}

const PanelStats& PanelReport::at(Panel p) const {
  for (const auto& s : panels) {
    if (s.panel == p) return s;
  }
  throw ConfigError("panel report: panel " + panel_name(p) + " not computed");
}

Json PanelReport::to_json() const {
  Json panels_json = Json::array();
  for (const auto& s : panels) {
    panels_json.push_back(Json{{"panel", std::string(1, panel_letter(s.panel))},
                               {"name", panel_name(s.panel)},
                               {"n_terms", s.n_terms},
                               {"mean", s.mean},
                               {"median", s.median},
                               {"sd", s.sd}});
  }
  Json coefs = Json::array();
  for (std::size_t i = 0; i < coefficients.size(); ++i) {
    coefs.push_back(Json{{"term", coefficients[i].term}, {"truth", coefficients[i].truth},
                         {"value", per_coefficient[i]}});
  }
  return Json{{"panels", std::move(panels_json)}, {"coefficients", std::move(coefs)}};
}

PanelReport panels_from_values(const CoefficientTable& table, std::vector<double> per_coefficient) {
  if (per_coefficient.size() != table.size()) throw AlignmentError("panel values do not match the coefficient table");
  PanelReport rep;
  rep.coefficients = table.coefficients();
  rep.per_coefficient = std::move(per_coefficient);
  for (Panel p : all_panels()) {
    std::vector<double> subset;
    for (std::size_t i = 0; i < rep.coefficients.size(); ++i) {
      if (panel_contains(p, rep.coefficients[i])) subset.push_back(rep.per_coefficient[i]);
    }
    rep.panels.push_back(summarize(p, subset));
  }
  return rep;
}

namespace {

template <class Row>
void check_rows(const std::vector<Row>& rows, std::size_t width, const char* what) {
  if (rows.empty()) throw ConfigError(std::string(what) + ": no replications");
  for (const auto& r : rows) {
    if (r.size() != width) throw AlignmentError(std::string(what) + ": replication row width differs from terms");
  }
}

}  // namespace

PanelReport bias_panels(const CoefficientTable& table, const std::vector<std::string>& terms,
                        const std::vector<std::vector<double>>& estimates, BiasMode mode) {
  auto pos = table.positions(terms);
  check_rows(estimates, terms.size(), "bias_panels");
  const auto& coefs = table.coefficients();
  std::vector<double> values(table.size(), 0.0);
  const double R = static_cast<double>(estimates.size());
  for (std::size_t j = 0; j < terms.size(); ++j) {
    const double truth = coefs[pos[j]].truth;
    double acc = 0;
    for (const auto& row : estimates) {
      double e = row[j] - truth;
      acc += mode == BiasMode::AbsoluteOfMean ? e : std::abs(e);
    }
    values[pos[j]] = std::abs(acc / R);
  }
  return panels_from_values(table, std::move(values));
}

PanelReport rejection_panels(const CoefficientTable& table, const std::vector<std::string>& terms,
                             const std::vector<std::vector<bool>>& decisions) {
  auto pos = table.positions(terms);
  check_rows(decisions, terms.size(), "rejection_panels");
  std::vector<double> values(table.size(), 0.0);
  for (std::size_t j = 0; j < terms.size(); ++j) {
    std::size_t hits = 0;
    for (const auto& row : decisions) hits += row[j] ? 1 : 0;
    values[pos[j]] = static_cast<double>(hits) / static_cast<double>(decisions.size());
  }
  return panels_from_values(table, std::move(values));
}

}  // namespace mdlab::metrics
