#include "mdlab/ampute/ampute.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "mdlab/common/errors.hpp"

namespace mdlab::ampute {

using tabular::Dataset;

namespace {

std::size_t round_count(double x) { return static_cast<std::size_t>(std::llround(x)); }

void require_observed(const Dataset& ds, std::size_t col) {
  if (ds.missing_count(col) > 0) {
    throw ConfigError("column '" + ds.column(col).name + "' already contains missing cells");
  }
}

void mark_random(Dataset& ds, std::size_t col, const std::vector<std::size_t>& candidates, std::size_t k,
                 Rng& rng) {
  for (std::size_t idx : sample_without_replacement(rng, candidates.size(), k)) {
    ds.set_missing(candidates[idx], col, true);
  }
}

ColumnReport mcar_column(Dataset& ds, std::size_t col, double nu, Rng& rng, std::vector<std::string>& warnings) {
  require_observed(ds, col);
  std::size_t k = round_count(nu * static_cast<double>(ds.n_rows()));
  if (nu > 0 && nu * static_cast<double>(ds.n_rows()) < 1.0) {
    warnings.push_back("column '" + ds.column(col).name + "': nu * n_rows < 1, nothing amputed");
    k = 0;
  }
  std::vector<std::size_t> rows(ds.n_rows());
  std::iota(rows.begin(), rows.end(), 0);
  mark_random(ds, col, rows, k, rng);
  return {ds.column(col).name, "mcar", k, static_cast<double>(k) / static_cast<double>(ds.n_rows()), {}};
}

void finish(AmputeReport& rep, const Dataset& ds) {
  std::size_t cells = 0, missing = 0;
  for (const auto& c : rep.columns) {
    missing += c.missing;
    cells += ds.n_rows();
  }
  rep.overall_rate = cells ? static_cast<double>(missing) / static_cast<double>(cells) : 0.0;
}

}  // namespace

std::vector<std::string> AmputeConfig::targets(const Dataset& ds) const {
  std::vector<std::string> out;
  std::set<std::string> skip(exclude.begin(), exclude.end());
  if (columns.empty()) {
    for (const auto& c : ds.columns()) {
      if (!skip.count(c.name)) out.push_back(c.name);
    }
  } else {
    for (const auto& c : columns) {
      ds.index_of(c);
      if (!skip.count(c)) out.push_back(c);
    }
  }
  for (const auto& e : exclude) ds.index_of(e);
  return out;
}

void AmputeConfig::validate(const Dataset& ds) const {
  if (!(nu > 0.0 && nu < 1.0)) throw ConfigError("missing rate nu must lie in (0, 1)");
  auto t = targets(ds);
  if (std::find(t.begin(), t.end(), anchor) == t.end()) {
    throw ConfigError("anchor '" + anchor + "' is not among the amputed columns");
  }
}

const ColumnReport* AmputeReport::find(const std::string& column) const {
  for (const auto& c : columns) {
    if (c.column == column) return &c;
  }
  return nullptr;
}

Json AmputeReport::to_json() const {
  Json cols = Json::array();
  for (const auto& c : columns) {
    Json groups = Json::array();
    for (const auto& g : c.groups) {
      groups.push_back(Json{{"eta", g.eta},
                            {"zeta", g.zeta},
                            {"tau_hat", g.tau_hat},
                            {"pi", g.pi},
                            {"selected", g.selected}});
    }
    Json entry{{"column", c.column}, {"role", c.role}, {"missing", c.missing}, {"rate", c.rate}};
    if (!c.groups.empty()) entry["groups"] = groups;
    cols.push_back(entry);
  }
  return Json{{"mechanism", mechanism}, {"nu", nu},          {"anchor", anchor},
              {"n_rows", n_rows},       {"overall_rate", overall_rate}, {"warnings", warnings},
              {"columns", cols}};
}

std::vector<double> group_shares(std::span<const std::size_t> zeta, std::span<const double> tau_hat) {
  if (zeta.size() != tau_hat.size()) throw DimensionError("zeta and tau_hat differ in length");
  double total = 0.0;
  for (std::size_t l = 0; l < zeta.size(); ++l) total += tau_hat[l] * static_cast<double>(zeta[l]);
  std::vector<double> pi(zeta.size(), 0.0);
  if (total <= 0.0) return pi;
  for (std::size_t l = 0; l < zeta.size(); ++l) pi[l] = tau_hat[l] * static_cast<double>(zeta[l]) / total;
  return pi;
}

std::vector<std::size_t> allocate_group_counts(std::span<const std::size_t> zeta, std::span<const double> tau_hat,
                                               std::size_t budget, BudgetMode mode, double nu) {
  const std::size_t m = zeta.size();
  std::vector<double> pi = group_shares(zeta, tau_hat);
  std::vector<std::size_t> counts(m, 0);
  if (mode == BudgetMode::PerGroupRate) {
    for (std::size_t l = 0; l < m; ++l) {
      counts[l] = std::min(zeta[l], round_count(nu * pi[l] * static_cast<double>(zeta[l])));
    }
    return counts;
  }

  std::size_t capacity = std::accumulate(zeta.begin(), zeta.end(), std::size_t{0});
  budget = std::min(budget, capacity);
  // Water-filling: groups whose share exceeds their size are capped and the
  // remaining budget is split over the others in proportion to pi.
  std::vector<double> ideal(m, 0.0);
  std::vector<bool> capped(m, false);
  for (bool changed = true; changed;) {
    changed = false;
    double rest = static_cast<double>(budget), weight = 0.0;
    for (std::size_t l = 0; l < m; ++l) {
      if (capped[l]) {
        rest -= static_cast<double>(zeta[l]);
      } else {
        weight += pi[l];
      }
    }
    for (std::size_t l = 0; l < m; ++l) {
      if (capped[l]) {
        ideal[l] = static_cast<double>(zeta[l]);
      } else {
        ideal[l] = weight > 0 ? rest * pi[l] / weight : 0.0;
        if (ideal[l] > static_cast<double>(zeta[l])) {
          capped[l] = true;
          changed = true;
        }
      }
    }
  }
  // Largest-remainder rounding, never beyond a group's size.
  std::size_t assigned = 0;
  for (std::size_t l = 0; l < m; ++l) {
    counts[l] = std::min(zeta[l], static_cast<std::size_t>(std::floor(ideal[l] + 1e-9)));
    assigned += counts[l];
  }
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return ideal[a] - std::floor(ideal[a]) > ideal[b] - std::floor(ideal[b]);
  });
  while (assigned < budget) {
    bool progressed = false;
    for (std::size_t l : order) {
      if (assigned == budget) break;
      if (counts[l] < zeta[l]) {
        ++counts[l];
        ++assigned;
        progressed = true;
      }
    }
    if (!progressed) break;
  }
  return counts;
}

std::vector<double> pair_weights(std::vector<double> tau) {
  std::sort(tau.begin(), tau.end());
  return tau;
}

AnchorGroups anchor_groups(const Dataset& ds, std::size_t anchor) {
  std::map<double, std::vector<std::size_t>, std::greater<double>> by_value;
  for (std::size_t r = 0; r < ds.n_rows(); ++r) {
    if (!ds.is_missing(r, anchor)) by_value[ds.value(r, anchor)].push_back(r);
  }
  AnchorGroups g;
  for (auto& [v, rows] : by_value) {
    g.eta.push_back(v);
    g.rows.push_back(std::move(rows));
  }
  return g;
}

ColumnReport ampute_given_anchor(Dataset& ds, std::size_t column, std::size_t anchor,
                                 std::span<const double> tau_hat, double nu, BudgetMode mode, Rng& rng) {
  require_observed(ds, column);
  AnchorGroups groups = anchor_groups(ds, anchor);
  if (tau_hat.size() != groups.eta.size()) {
    throw DimensionError("tau_hat has " + std::to_string(tau_hat.size()) + " entries for " +
                         std::to_string(groups.eta.size()) + " anchor values");
  }
  std::vector<std::size_t> zeta;
  for (const auto& rows : groups.rows) zeta.push_back(rows.size());
  std::vector<double> pi = group_shares(zeta, tau_hat);
  std::size_t budget = round_count(nu * static_cast<double>(ds.n_rows()));
  std::vector<std::size_t> counts = allocate_group_counts(zeta, tau_hat, budget, mode, nu);

  ColumnReport rep{ds.column(column).name, "mar", 0, 0.0, {}};
  for (std::size_t l = 0; l < groups.eta.size(); ++l) {
    mark_random(ds, column, groups.rows[l], counts[l], rng);
    rep.groups.push_back({groups.eta[l], zeta[l], tau_hat[l], pi[l], counts[l]});
    rep.missing += counts[l];
  }
  rep.rate = static_cast<double>(rep.missing) / static_cast<double>(ds.n_rows());
  return rep;
}

AmputeResult ampute_mcar(const Dataset& ds, double nu, const std::vector<std::string>& columns,
                         std::uint64_t seed) {
  if (!(nu >= 0.0 && nu < 1.0)) throw ConfigError("missing rate nu must lie in [0, 1)");
  AmputeResult out{ds, {}};
  out.report.mechanism = "MCAR";
  out.report.nu = nu;
  out.report.n_rows = ds.n_rows();
  std::vector<std::string> cols = columns;
  if (cols.empty()) {
    for (const auto& c : ds.columns()) cols.push_back(c.name);
  }
  for (const auto& name : cols) {
    std::size_t c = ds.index_of(name);
    Rng rng = make_rng(derive_seed(seed, {stream_tag("mcar"), stream_tag(name)}));
    out.report.columns.push_back(mcar_column(out.data, c, nu, rng, out.report.warnings));
  }
  finish(out.report, out.data);
  return out;
}

AmputeResult ampute_mar(const Dataset& ds, const AmputeConfig& cfg) {
  cfg.validate(ds);
  AmputeResult out{ds, {}};
  AmputeReport& rep = out.report;
  rep.mechanism = "MAR";
  rep.nu = cfg.nu;
  rep.anchor = cfg.anchor;
  rep.n_rows = ds.n_rows();
  std::vector<std::string> targets = cfg.targets(ds);
  for (const auto& name : targets) require_observed(ds, ds.index_of(name));

  std::size_t anchor = ds.index_of(cfg.anchor);
  Rng anchor_rng = make_rng(derive_seed(cfg.seed, {stream_tag("mcar"), stream_tag(cfg.anchor)}));
  ColumnReport a = mcar_column(out.data, anchor, cfg.nu, anchor_rng, rep.warnings);
  a.role = "anchor";
  rep.columns.push_back(a);

  AnchorGroups groups = anchor_groups(out.data, anchor);
  if (groups.eta.size() == 1) {
    rep.warnings.push_back("anchor '" + cfg.anchor + "' has a single observed value; MAR degenerates to MCAR");
  }
  std::size_t observed_anchor = ds.n_rows() - out.data.missing_count(anchor);
  if (static_cast<double>(observed_anchor) < cfg.nu * static_cast<double>(ds.n_rows()) - 0.5 &&
      cfg.budget == BudgetMode::GlobalCount) {
    rep.warnings.push_back("budget exceeds the rows with an observed anchor; rates are capped");
  }

  for (const auto& name : targets) {
    if (name == cfg.anchor) continue;
    Rng rng = make_rng(derive_seed(cfg.seed, {stream_tag("mar"), stream_tag(name)}));
    std::vector<double> tau(groups.eta.size());
    for (double& t : tau) t = uniform01(rng);
    std::vector<double> tau_hat = pair_weights(std::move(tau));
    rep.columns.push_back(
        ampute_given_anchor(out.data, ds.index_of(name), anchor, tau_hat, cfg.nu, cfg.budget, rng));
  }
  finish(rep, out.data);
  return out;
}

}  // namespace mdlab::ampute
