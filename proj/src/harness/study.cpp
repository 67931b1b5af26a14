#include "mdlab/harness/study.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>

#include "mdlab/common/errors.hpp"
#include "mdlab/common/parallel.hpp"
#include "mdlab/synthgen/specs.hpp"

namespace mdlab::harness {

namespace {

constexpr const char* kIntercept = "(Intercept)";

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double m = mean_of(v), ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

// Positions of the table's terms inside a record's term list.
std::vector<std::size_t> slope_positions(const metrics::CoefficientTable& table, const std::vector<std::string>& terms) {
  std::map<std::string, std::size_t> at;
  for (std::size_t j = 0; j < terms.size(); ++j) at[terms[j]] = j;
  std::vector<std::size_t> pos;
  for (const auto& c : table.coefficients()) {
    auto it = at.find(c.term);
    if (it == at.end()) throw AlignmentError("term '" + c.term + "' missing from a replication");
    pos.push_back(it->second);
  }
  return pos;
}

struct Collector {
  std::vector<std::vector<double>> beta;
  std::vector<std::vector<bool>> reject;
  std::vector<double> ipm, seconds;
  std::string reason;

  void add(const std::vector<double>& b, const std::vector<bool>& r, const std::vector<std::size_t>& pos) {
    std::vector<double> bb;
    std::vector<bool> rr;
    for (auto p : pos) {
      bb.push_back(b.at(p));
      rr.push_back(r.at(p));
    }
    beta.push_back(std::move(bb));
    reject.push_back(std::move(rr));
  }

  StudyCell finish(const metrics::CoefficientTable& table, metrics::BiasMode mode, std::string label, double rate,
                   bool with_ipm) const {
    StudyCell cell;
    cell.label = std::move(label);
    cell.rate = rate;
    cell.n = beta.size();
    if (cell.n == 0) {
      cell.skipped_reason = reason.empty() ? "no replication produced this fit" : reason;
      return cell;
    }
    auto terms = table.terms();
    cell.bias = metrics::bias_panels(table, terms, beta, mode);
    cell.rejection = metrics::rejection_panels(table, terms, reject);
    if (with_ipm) {
      cell.has_ipm = true;
      cell.ipm_mean = mean_of(ipm);
      cell.ipm_sd = sd_of(ipm);
      cell.seconds_mean = mean_of(seconds);
      for (double s : seconds) cell.seconds_total += s;
    }
    return cell;
  }
};

}  // namespace

metrics::VariableKind term_kind(const std::string& term) {
  auto bracket = term.find('[');
  std::string column = term.substr(0, bracket);
  if (column == "wave") return metrics::VariableKind::Other;
  const auto& info = synthgen::panel_column(column);
  if (bracket == std::string::npos) {
    return info.type.is_categorical() ? metrics::VariableKind::Other : metrics::VariableKind::Metric;
  }
  return info.type.kind() == tabular::ColumnKind::Binary ? metrics::VariableKind::Binary
                                                         : metrics::VariableKind::Other;
}

metrics::CoefficientTable coefficient_table(const SimPlan& plan, const std::vector<std::string>& terms) {
  std::vector<std::string> slopes;
  std::vector<metrics::VariableKind> kinds;
  for (const auto& t : terms) {
    if (t == kIntercept) continue;
    slopes.push_back(t);
    kinds.push_back(term_kind(t));
  }
  return metrics::CoefficientTable(slopes, kinds, plan.outcome.coefficients);
}

StudyReport aggregate(const SimPlan& plan, const std::vector<ReplicationRecord>& selected) {
  StudyReport rep;
  rep.plan = plan;
  for (const auto& r : selected) rep.selected.push_back(r.index);
  if (selected.empty()) return rep;

  rep.table = coefficient_table(plan, selected.front().terms);
  const std::size_t n_rates = plan.rates.size(), n_methods = plan.methods.size();
  Collector complete;
  std::vector<Collector> listwise(n_rates), cells(n_rates * n_methods);

  for (const auto& rec : selected) {
    if (!rec.ok) throw ConfigError("aggregate: replication " + std::to_string(rec.index) + " is not ok");
    if (rec.rates.size() != n_rates) throw DimensionError("aggregate: record rate count differs from the plan");
    auto pos = slope_positions(rep.table, rec.terms);
    complete.add(rec.complete.beta, rec.complete.reject, pos);
    for (std::size_t ri = 0; ri < n_rates; ++ri) {
      const auto& rr = rec.rates[ri];
      if (rr.listwise.ok) {
        listwise[ri].add(rr.listwise.beta, rr.listwise.reject, pos);
      } else if (listwise[ri].reason.empty()) {
        listwise[ri].reason = rr.listwise.reason;
      }
      if (rr.cells.size() != n_methods) throw DimensionError("aggregate: record method count differs from the plan");
      for (std::size_t mi = 0; mi < n_methods; ++mi) {
        const auto& c = rr.cells[mi];
        auto& col = cells[ri * n_methods + mi];
        col.add(c.qbar, c.reject, pos);
        col.ipm.push_back(c.ipm);
        col.seconds.push_back(c.seconds);
      }
    }
  }

  rep.cells.push_back(complete.finish(rep.table, plan.bias_mode, kCompleteLabel, 0.0, false));
  for (std::size_t ri = 0; ri < n_rates; ++ri) {
    rep.cells.push_back(listwise[ri].finish(rep.table, plan.bias_mode, kListwiseLabel, plan.rates[ri], false));
    for (std::size_t mi = 0; mi < n_methods; ++mi) {
      rep.cells.push_back(
          cells[ri * n_methods + mi].finish(rep.table, plan.bias_mode, std::string(impute::to_string(plan.methods[mi])), plan.rates[ri], true));
    }
  }
  rep.records = selected;
  return rep;
}

StudyReport run_plan(const SimPlan& plan, const ReplicationFn& fn) {
  plan.validate();
  ReplicationFn run = fn;
  std::shared_ptr<ReplicationContext> ctx;
  if (!run) {
    ctx = std::make_shared<ReplicationContext>(plan);
    run = [ctx](int index) { return run_replication(*ctx, index); };
  }

  // Batches only ever cover the indices still needed, so the selection is
  // the same for any worker count.
  std::vector<ReplicationRecord> records;
  int next = 1, ok = 0;
  while (ok < plan.replications && next <= plan.r_max) {
    int batch = std::min(plan.replications - ok, plan.r_max - next + 1);
    std::vector<ReplicationRecord> out(static_cast<std::size_t>(batch));
    parallel_for(out.size(), plan.workers, [&](std::size_t i) { out[i] = run(next + static_cast<int>(i)); });
    for (auto& r : out) {
      if (r.ok) ++ok;
      records.push_back(std::move(r));
    }
    next += batch;
  }

  std::vector<ReplicationRecord> selected;
  std::vector<std::pair<int, std::string>> failures;
  for (auto& r : records) {
    if (r.ok) {
      if (static_cast<int>(selected.size()) < plan.replications) selected.push_back(std::move(r));
    } else {
      failures.emplace_back(r.index, r.reason);
    }
  }
  StudyReport rep = aggregate(plan, selected);
  rep.attempted = next - 1;
  rep.failures = std::move(failures);
  rep.complete = static_cast<int>(rep.selected.size()) == plan.replications;
  return rep;
}

const StudyCell& StudyReport::cell(const std::string& label, double rate) const {
  for (const auto& c : cells) {
    if (c.label == label && std::abs(c.rate - rate) < 1e-12) return c;
  }
  throw ConfigError("study has no cell '" + label + "' at rate " + format_real(rate, 4));
}

Json StudyReport::to_json(bool with_timing) const {
  Json fails = Json::array();
  for (const auto& [index, reason] : failures) fails.push_back(Json{{"index", index}, {"reason", reason}});
  Json cj = Json::array();
  for (const auto& c : cells) {
    Json j{{"label", c.label}, {"rate", c.rate}, {"n", c.n}};
    if (c.skipped()) {
      j["skipped_reason"] = c.skipped_reason;
    } else {
      j["bias"] = c.bias.to_json();
      j["rejection"] = c.rejection.to_json();
    }
    if (c.has_ipm) {
      j["ipm_mean"] = c.ipm_mean;
      j["ipm_sd"] = c.ipm_sd;
      if (with_timing) {
        j["seconds_mean"] = c.seconds_mean;
        j["seconds_total"] = c.seconds_total;
      }
    }
    cj.push_back(std::move(j));
  }
  return Json{{"complete", complete}, {"attempted", attempted}, {"selected", selected},
              {"failures", std::move(fails)}, {"cells", std::move(cj)}};
}

}  // namespace mdlab::harness
