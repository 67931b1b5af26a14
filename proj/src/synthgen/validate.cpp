#include "mdlab/synthgen/validate.hpp"

#include <cmath>

#include "mdlab/common/errors.hpp"

namespace mdlab::synthgen {

MarginalTargets table1_targets() {
  MarginalTargets t;
  t.metric = {
      {"age", 46.97, 8.36},
      {"childhh1_number", 0.12, 0.39},
      {"contactattempts", 7.43, 10.84},
      {"leftright_2013", 5.51, 1.75},
      {"siblings", 1.81, 1.54},
      {"workinghrs", 37.06, 11.56},
      {"work_experience", 24.01, 8.99},
  };
  t.categorical = {
      {"birthcountry", {0.05, 0.95}},
      {"fixedterm", {0.96, 0.04}},
      {"ilearn", {0.26, 0.74}},
      {"music_classic", {0.46, 0.54}},
      {"wb", {0.63, 0.37}},
      {"woman", {0.52, 0.48}},
      {"comp_size", {0.13, 0.11, 0.38, 0.38}},
      {"education", {0.14, 0.36, 0.17, 0.33}},
      {"kldb", {0.05, 0.48, 0.16, 0.31}},
      {"parentsEd", {0.01, 0.56, 0.20, 0.22, 0.00}},
      {"volunteering", {0.48, 0.13, 0.39}},
      {"federalstate",
       {0.030, 0.215, 0.110, 0.055, 0.044, 0.088, 0.031, 0.161, 0.118, 0.036, 0.033, 0.031, 0.014, 0.007,
        0.015, 0.012}},
      {"maritalstatus", {0.19, 0.73, 0.06, 0.01}},
      {"sector", {0.30, 0.30, 0.39, 0.01}},
  };
  return t;
}

Json MarginalReport::to_json() const {
  Json rows = Json::array();
  for (const auto& c : checks) {
    rows.push_back(Json{{"column", c.column},
                        {"statistic", c.statistic},
                        {"target", c.target},
                        {"achieved", c.achieved},
                        {"pass", c.pass}});
  }
  return Json{{"pass", pass}, {"checks", rows}};
}

MarginalReport validate_marginals(const tabular::Dataset& ds, const MarginalTargets& targets) {
  MarginalReport report;
  auto add = [&](MarginalCheck c) {
    report.pass = report.pass && c.pass;
    report.checks.push_back(std::move(c));
  };

  for (const auto& m : targets.metric) {
    auto col = ds.find(m.column);
    if (!col) {
      add({m.column, "mean", m.mean, std::nan(""), false});
      continue;
    }
    double sum = 0.0, sq = 0.0;
    std::size_t n = 0;
    for (std::size_t r = 0; r < ds.n_rows(); ++r) {
      if (ds.is_missing(r, *col)) continue;
      double v = ds.value(r, *col);
      sum += v;
      sq += v * v;
      ++n;
    }
    double mean = n ? sum / n : std::nan("");
    double sd = n > 1 ? std::sqrt(std::max(0.0, (sq - n * mean * mean) / (n - 1))) : std::nan("");
    double tol = targets.metric_relative_tolerance;
    add({m.column, "mean", m.mean, mean, std::abs(mean - m.mean) <= tol * std::abs(m.mean)});
    if (m.sd) add({m.column, "sd", *m.sd, sd, std::abs(sd - *m.sd) <= tol * std::abs(*m.sd)});
  }

  for (const auto& t : targets.categorical) {
    auto col = ds.find(t.column);
    if (!col || !ds.column(*col).type.is_categorical() || ds.column(*col).type.num_levels() != t.freqs.size()) {
      add({t.column, "freq", 0.0, std::nan(""), false});
      continue;
    }
    std::vector<double> counts(t.freqs.size(), 0.0);
    std::size_t n = 0;
    for (std::size_t r = 0; r < ds.n_rows(); ++r) {
      if (ds.is_missing(r, *col)) continue;
      counts[ds.level(r, *col)] += 1.0;
      ++n;
    }
    const auto& levels = ds.column(*col).type.levels();
    for (std::size_t l = 0; l < t.freqs.size(); ++l) {
      double achieved = n ? counts[l] / n : std::nan("");
      // A small epsilon keeps boundary cases such as a 100% category exact.
      add({t.column, "freq[" + levels[l] + "]", t.freqs[l], achieved,
           std::abs(achieved - t.freqs[l]) <= targets.category_tolerance + 1e-12});
    }
  }
  return report;
}

}  // namespace mdlab::synthgen
