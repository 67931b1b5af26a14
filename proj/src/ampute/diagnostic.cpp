#include "mdlab/ampute/diagnostic.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>

namespace mdlab::ampute {

using tabular::Dataset;

namespace {

// Pearson chi-square test of independence for a groups x {observed, missing}
// table; groups or outcomes that never occur are dropped.
double independence_p(const std::vector<double>& missing, const std::vector<double>& size) {
  double n = 0, miss = 0;
  std::size_t groups = 0;
  for (std::size_t l = 0; l < size.size(); ++l) {
    if (size[l] > 0) ++groups;
    n += size[l];
    miss += missing[l];
  }
  if (groups < 2 || miss == 0 || miss == n) return 1.0;
  double stat = 0;
  for (std::size_t l = 0; l < size.size(); ++l) {
    if (size[l] == 0) continue;
    double e_miss = size[l] * miss / n, e_obs = size[l] * (n - miss) / n;
    stat += (missing[l] - e_miss) * (missing[l] - e_miss) / e_miss;
    double obs = size[l] - missing[l];
    stat += (obs - e_obs) * (obs - e_obs) / e_obs;
  }
  boost::math::chi_squared dist(static_cast<double>(groups - 1));
  return boost::math::cdf(boost::math::complement(dist, stat));
}

}  // namespace

Json MarDiagnostic::to_json() const {
  Json cols = Json::array();
  for (const auto& c : columns) {
    cols.push_back(Json{{"column", c.column},
                        {"eta", c.eta},
                        {"rates", c.rates},
                        {"expected", c.expected},
                        {"max_deviation", c.max_deviation},
                        {"monotone", c.monotone},
                        {"dependence_p", c.dependence_p}});
  }
  return Json{{"anchor", anchor}, {"monotone", monotone}, {"max_deviation", max_deviation}, {"columns", cols}};
}

MarDiagnostic mar_diagnostic(const Dataset& ds, const std::string& anchor, const AmputeReport* report) {
  MarDiagnostic diag;
  diag.anchor = anchor;
  std::size_t a = ds.index_of(anchor);
  AnchorGroups groups = anchor_groups(ds, a);
  bool mar = report && report->mechanism == "MAR" && report->anchor == anchor;

  for (std::size_t c = 0; c < ds.n_cols(); ++c) {
    if (c == a || ds.missing_count(c) == 0) continue;
    ColumnDiagnostic cd;
    cd.column = ds.column(c).name;
    cd.eta = groups.eta;
    std::vector<double> missing, size;
    for (const auto& rows : groups.rows) {
      double k = 0;
      for (std::size_t r : rows) k += ds.is_missing(r, c);
      missing.push_back(k);
      size.push_back(static_cast<double>(rows.size()));
      cd.rates.push_back(k / static_cast<double>(rows.size()));
    }
    cd.dependence_p = independence_p(missing, size);

    const ColumnReport* cr = mar ? report->find(cd.column) : nullptr;
    if (cr && cr->groups.size() == groups.eta.size()) {
      // Scale c from the groups that stayed below their size.
      double sel = 0, weight = 0;
      for (std::size_t l = 0; l < groups.eta.size(); ++l) {
        if (missing[l] < size[l]) {
          sel += missing[l];
          weight += cr->groups[l].tau_hat * size[l];
        }
      }
      double scale = weight > 0 ? sel / weight : 0.0;
      bool monotone = true;
      for (std::size_t l = 0; l < groups.eta.size(); ++l) {
        double e = std::min(1.0, scale * cr->groups[l].tau_hat);
        // A fully amputed group is consistent with any share at or above its size.
        if (missing[l] == size[l] && (weight == 0 || e >= 1.0 - 1.0 / size[l])) e = 1.0;
        cd.expected.push_back(e);
        cd.max_deviation = std::max(cd.max_deviation, std::abs(cd.rates[l] - e));
        // eta descends with l, so rates may only rise, up to one cell.
        if (l > 0 && cd.rates[l] + 1.0 / size[l] < cd.rates[l - 1] - 1.0 / size[l - 1]) monotone = false;
      }
      cd.monotone = monotone ? "yes" : "no";
      diag.monotone = diag.monotone && monotone;
      diag.max_deviation = std::max(diag.max_deviation, cd.max_deviation);
    } else {
      cd.monotone = "not applicable";
    }
    diag.columns.push_back(std::move(cd));
  }
  return diag;
}

}  // namespace mdlab::ampute
