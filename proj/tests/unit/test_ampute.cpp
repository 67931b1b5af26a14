#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "mdlab/ampute/ampute.hpp"
#include "mdlab/ampute/diagnostic.hpp"
#include "mdlab/common/errors.hpp"

using namespace mdlab;
using namespace mdlab::ampute;
using tabular::ColumnType;
using tabular::Dataset;

namespace {

// Anchor with `levels` values of unequal frequency plus metric and
// categorical companions.
Dataset sample_data(std::size_t n, int levels, std::uint64_t seed) {
  Dataset ds({{"g", ColumnType::metric()},
              {"x", ColumnType::metric()},
              {"z", ColumnType::metric()},
              {"c", ColumnType::nominal({"a", "b", "c"})}},
             n);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  for (std::size_t r = 0; r < n; ++r) {
    double u = std::uniform_real_distribution<double>(0, 1)(rng);
    ds.set_value(r, 0, std::floor(levels * u * u));
    ds.set_value(r, 1, normal(rng));
    ds.set_value(r, 2, normal(rng) + ds.value(r, 0));
    ds.set_value(r, 3, static_cast<double>(r % 3));
  }
  return ds;
}

double chi_square_p(const std::vector<std::vector<double>>& table) {
  std::size_t R = table.size(), C = table[0].size();
  std::vector<double> rows(R, 0), cols(C, 0);
  double n = 0;
  for (std::size_t i = 0; i < R; ++i) {
    for (std::size_t j = 0; j < C; ++j) {
      rows[i] += table[i][j];
      cols[j] += table[i][j];
      n += table[i][j];
    }
  }
  double stat = 0;
  for (std::size_t i = 0; i < R; ++i) {
    for (std::size_t j = 0; j < C; ++j) {
      double e = rows[i] * cols[j] / n;
      stat += (table[i][j] - e) * (table[i][j] - e) / e;
    }
  }
  boost::math::chi_squared dist(static_cast<double>((R - 1) * (C - 1)));
  return boost::math::cdf(boost::math::complement(dist, stat));
}

}  // namespace

TEST_CASE("MCAR sets exact per-column counts") {
  Dataset ds = sample_data(1000, 4, 1);
  auto res = ampute_mcar(ds, 0.10, {}, 3);
  for (std::size_t c = 0; c < ds.n_cols(); ++c) CHECK(res.data.missing_count(c) == 100);
  CHECK(res.report.overall_rate == doctest::Approx(0.10));

  auto none = ampute_mcar(ds, 0.0, {}, 3);
  CHECK(none.data == ds);

  Dataset tiny = sample_data(5, 2, 1);
  auto small = ampute_mcar(tiny, 0.1, {"x"}, 3);
  CHECK(small.data.mask().count() == 0);
  CHECK(small.report.warnings.size() == 1);
}

TEST_CASE("MCAR masks are independent of the values") {
  int significant = 0;
  Dataset ds = sample_data(1000, 4, 11);
  std::vector<double> sorted(ds.values(1).begin(), ds.values(1).end());
  std::sort(sorted.begin(), sorted.end());
  double q1 = sorted[250], q2 = sorted[500], q3 = sorted[750];
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto res = ampute_mcar(ds, 0.3, {"x"}, seed);
    std::vector<std::vector<double>> table(4, std::vector<double>(2, 0.0));
    for (std::size_t r = 0; r < ds.n_rows(); ++r) {
      double v = ds.value(r, 1);
      int q = v < q1 ? 0 : v < q2 ? 1 : v < q3 ? 2 : 3;
      table[q][res.data.is_missing(r, 1) ? 1 : 0] += 1;
    }
    significant += chi_square_p(table) < 0.01;
  }
  CHECK(significant <= 2);
}

TEST_CASE("hand-evaluated group shares and counts") {
  std::vector<std::size_t> zeta = {5, 5};
  std::vector<double> tau_hat = {0.2, 0.8};
  auto pi = group_shares(zeta, tau_hat);
  CHECK(pi[0] == doctest::Approx(0.2));
  CHECK(pi[1] == doctest::Approx(0.8));
  auto counts = allocate_group_counts(zeta, tau_hat, 4, BudgetMode::GlobalCount, 0.4);
  CHECK(counts == std::vector<std::size_t>{1, 3});

  // Overflow: ideal (2.14, 3.86) caps the second group at 2 and moves the
  // excess to the first.
  std::vector<std::size_t> z2 = {10, 2};
  std::vector<double> t2 = {0.1, 0.9};
  CHECK(allocate_group_counts(z2, t2, 6, BudgetMode::GlobalCount, 0.5) == std::vector<std::size_t>{4, 2});
  CHECK(allocate_group_counts(z2, t2, 50, BudgetMode::GlobalCount, 0.5) == std::vector<std::size_t>{10, 2});

  // Per-group rates: round(nu * pi * zeta) = round(0.4 * 0.2 * 5), round(0.4 * 0.8 * 5).
  CHECK(allocate_group_counts(zeta, tau_hat, 4, BudgetMode::PerGroupRate, 0.4) == std::vector<std::size_t>{0, 2});
}

TEST_CASE("tiny MAR step matches the hand case") {
  Dataset ds({{"anchor", ColumnType::metric()}, {"y", ColumnType::metric()}}, 10);
  for (std::size_t r = 0; r < 10; ++r) {
    ds.set_value(r, 0, r < 5 ? 1.0 : 2.0);
    ds.set_value(r, 1, static_cast<double>(r));
  }
  Rng rng = make_rng(5);
  std::vector<double> tau_hat = {0.2, 0.8};  // eta = 2, then eta = 1
  ColumnReport rep = ampute_given_anchor(ds, 1, 0, tau_hat, 0.4, BudgetMode::GlobalCount, rng);
  REQUIRE(rep.groups.size() == 2);
  CHECK(rep.groups[0].eta == 2.0);
  CHECK(rep.groups[0].pi == doctest::Approx(0.2));
  CHECK(rep.groups[1].pi == doctest::Approx(0.8));
  CHECK(rep.groups[0].selected == 1);
  CHECK(rep.groups[1].selected == 3);
  CHECK(rep.missing == 4);

  AmputeReport full;
  full.mechanism = "MAR";
  full.anchor = "anchor";
  full.columns.push_back(rep);
  MarDiagnostic diag = mar_diagnostic(ds, "anchor", &full);
  REQUIRE(diag.columns.size() == 1);
  CHECK(diag.columns[0].rates[0] == doctest::Approx(0.2));
  CHECK(diag.columns[0].rates[1] == doctest::Approx(0.6));
  CHECK(diag.columns[0].monotone == "yes");
}

TEST_CASE("larger anchor values take smaller weights") {
  auto tau_hat = pair_weights({0.9, 0.1, 0.5});
  CHECK(tau_hat == std::vector<double>{0.1, 0.5, 0.9});

  Dataset ds({{"anchor", ColumnType::metric()}, {"y", ColumnType::metric()}}, 200);
  for (std::size_t r = 0; r < 200; ++r) ds.set_value(r, 0, r % 2 ? 7.0 : 3.0);
  Rng rng = make_rng(2);
  std::vector<double> t = {0.3, 0.6};
  ColumnReport rep = ampute_given_anchor(ds, 1, 0, t, 0.3, BudgetMode::GlobalCount, rng);
  double rate_a = static_cast<double>(rep.groups[0].selected) / rep.groups[0].zeta;
  double rate_b = static_cast<double>(rep.groups[1].selected) / rep.groups[1].zeta;
  CHECK(rep.groups[0].eta == 7.0);
  CHECK(rate_b >= rate_a);
}

TEST_CASE("MAR amputation on a panel-sized table hits the rate") {
  Dataset ds = sample_data(12410, 4, 3);
  AmputeConfig cfg;
  cfg.nu = 0.30;
  cfg.anchor = "g";
  cfg.seed = 9;
  auto res = ampute_mar(ds, cfg);
  CHECK(std::abs(res.report.overall_rate - 0.30) <= 0.005);
  for (std::size_t c = 0; c < ds.n_cols(); ++c) CHECK(res.data.missing_count(c) == 3723);
  CHECK(res.report.columns.front().role == "anchor");
}

TEST_CASE("MAR construction properties over rates and seeds") {
  Dataset ds = sample_data(1500, 5, 21);
  for (double nu : {0.10, 0.30, 0.50}) {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      AmputeConfig cfg;
      cfg.nu = nu;
      cfg.anchor = "g";
      cfg.seed = seed;
      auto res = ampute_mar(ds, cfg);
      const std::size_t budget = static_cast<std::size_t>(std::llround(nu * 1500));
      for (std::size_t c = 0; c < ds.n_cols(); ++c) {
        std::size_t k = res.data.missing_count(c);
        REQUIRE(k + 1 >= budget);
        REQUIRE(k <= budget + 1);
      }
      // Mask-only mutation.
      for (std::size_t c = 0; c < ds.n_cols(); ++c) {
        for (std::size_t r = 0; r < ds.n_rows(); ++r) REQUIRE(res.data.value(r, c) == ds.value(r, c));
      }
      for (const auto& col : res.report.columns) {
        if (col.role != "mar") continue;
        double pi_sum = 0;
        std::size_t selected = 0;
        for (const auto& g : col.groups) {
          REQUIRE(g.pi >= 0);
          pi_sum += g.pi;
          selected += g.selected;
        }
        REQUIRE(std::abs(pi_sum - 1.0) < 1e-9);
        REQUIRE(selected == budget);
      }
      MarDiagnostic diag = mar_diagnostic(res.data, "g", &res.report);
      CHECK(diag.monotone);
      for (const auto& cd : diag.columns) {
        auto groups = anchor_groups(res.data, res.data.index_of("g"));
        for (std::size_t l = 0; l < cd.rates.size(); ++l) {
          INFO("nu " << nu << " seed " << seed << " column " << cd.column << " group " << l);
          REQUIRE(std::abs(cd.rates[l] - cd.expected[l]) <= 2.0 / groups.rows[l].size());
        }
      }
    }
  }
}

TEST_CASE("MAR rejects bad input and reports degenerate anchors") {
  Dataset ds = sample_data(200, 4, 5);
  AmputeConfig cfg;
  cfg.anchor = "g";
  cfg.nu = 0.0;
  CHECK_THROWS_AS(ampute_mar(ds, cfg), ConfigError);
  cfg.nu = 0.2;
  cfg.exclude = {"g"};
  CHECK_THROWS_AS(ampute_mar(ds, cfg), ConfigError);
  cfg.exclude = {};
  Dataset holed = ds;
  holed.set_missing(0, 1, true);
  CHECK_THROWS_AS(ampute_mar(holed, cfg), ConfigError);

  Dataset flat = ds;
  for (std::size_t r = 0; r < flat.n_rows(); ++r) flat.set_value(r, 0, 1.0);
  auto res = ampute_mar(flat, cfg);
  CHECK_FALSE(res.report.warnings.empty());
  CHECK(res.data.missing_count(1) == 40);

  cfg.exclude = {"z"};
  auto partial = ampute_mar(ds, cfg);
  CHECK(partial.data.missing_count(2) == 0);
  CHECK(partial.report.find("z") == nullptr);
}

TEST_CASE("amputation is deterministic and MCAR diagnostics are not applicable") {
  Dataset ds = sample_data(600, 4, 8);
  AmputeConfig cfg;
  cfg.anchor = "g";
  cfg.nu = 0.3;
  cfg.seed = 4;
  CHECK(ampute_mar(ds, cfg).data == ampute_mar(ds, cfg).data);
  cfg.seed = 5;
  CHECK_FALSE(ampute_mar(ds, cfg).data == ampute_mar(ds, AmputeConfig{0.3, "g", {}, {}, 4}).data);

  auto mcar = ampute_mcar(ds, 0.3, {"x", "z"}, 1);
  MarDiagnostic diag = mar_diagnostic(mcar.data, "g", &mcar.report);
  REQUIRE(diag.columns.size() == 2);
  for (const auto& c : diag.columns) CHECK(c.monotone == "not applicable");

  // Under MCAR the dependence p-value is roughly uniform over seeds.
  int low = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    auto r = ampute_mcar(ds, 0.3, {"x"}, seed);
    low += mar_diagnostic(r.data, "g").columns[0].dependence_p < 0.5;
  }
  CHECK(low > 70);
  CHECK(low < 130);
  CHECK(ampute_mcar(ds, 0.3, {"x"}, 1).report.to_json()["mechanism"] == "MCAR");
}
