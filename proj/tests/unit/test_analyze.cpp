#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "mdlab/ampute/ampute.hpp"
#include "mdlab/analyze/model.hpp"
#include "mdlab/analyze/ols.hpp"
#include "mdlab/analyze/rubin.hpp"
#include "mdlab/common/errors.hpp"
#include "mdlab/synthgen/default_models.hpp"
#include "mdlab/synthgen/generator.hpp"
#include "oracles.hpp"

using namespace mdlab;
using namespace mdlab::analyze;
using tabular::ColumnType;
using tabular::Dataset;

namespace {

FitResult fit_of(std::vector<double> beta, std::vector<double> se, double df = 100) {
  FitResult f;
  for (std::size_t k = 0; k < beta.size(); ++k) f.terms.push_back("t" + std::to_string(k));
  f.beta = std::move(beta);
  f.se = std::move(se);
  f.df = df;
  return f;
}

Dataset wide_metric(std::size_t n, std::size_t p, std::uint64_t seed) {
  std::vector<tabular::ColumnInfo> cols{{"y", ColumnType::metric()}};
  for (std::size_t j = 0; j < p; ++j) cols.push_back({"x" + std::to_string(j), ColumnType::metric()});
  Dataset ds(cols, n);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  for (std::size_t r = 0; r < n; ++r) {
    double y = 1.0;
    for (std::size_t j = 0; j < p; ++j) {
      double x = z(rng);
      ds.set_value(r, j + 1, x);
      y += 0.1 * static_cast<double>(j) * x;
    }
    ds.set_value(r, 0, y + z(rng));
  }
  return ds;
}

}  // namespace

TEST_CASE("exact line is recovered") {
  Eigen::MatrixXd X(5, 2);
  Eigen::VectorXd y(5);
  for (int i = 0; i < 5; ++i) {
    X(i, 0) = 1;
    X(i, 1) = i;
    y(i) = 1 + 2 * i;
  }
  FitResult f = ols_fit(y, X, {"(Intercept)", "x"});
  CHECK(f.beta[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(f.beta[1] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(f.rss < 1e-16);
  CHECK(f.df == 3);
}

TEST_CASE("noise-free response has zero residual") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> z;
  Eigen::MatrixXd X(30, 3);
  Eigen::VectorXd y(30);
  for (int i = 0; i < 30; ++i) {
    X(i, 0) = 1;
    X(i, 1) = z(rng);
    X(i, 2) = z(rng);
    y(i) = 0.5 - X(i, 1) + 3 * X(i, 2);
  }
  FitResult f = ols_fit(y, X, {"a", "b", "c"});
  CHECK(f.rss < 1e-16);
  CHECK(f.beta[2] == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("OLS agrees with the normal-equations oracle") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z;
    oracle::Matrix rows(50, std::vector<double>(4));
    Eigen::MatrixXd X(50, 4);
    std::vector<double> yv(50);
    Eigen::VectorXd y(50);
    for (int i = 0; i < 50; ++i) {
      for (int j = 0; j < 4; ++j) X(i, j) = rows[i][j] = j == 0 ? 1.0 : z(rng) * (j + 1);
      y(i) = yv[i] = 2 * X(i, 1) - X(i, 3) + z(rng);
    }
    FitResult f = ols_fit(y, X, {"a", "b", "c", "d"});
    auto ref = oracle::normal_equations(rows, yv);
    for (int j = 0; j < 4; ++j) {
      CHECK(std::abs(f.beta[j] - ref.beta[j]) < 1e-8);
      CHECK(std::abs(f.se[j] - ref.se[j]) < 1e-8);
    }
  }
}

TEST_CASE("rank deficiency names the dependent column") {
  Eigen::MatrixXd X(20, 3);
  Eigen::VectorXd y(20);
  for (int i = 0; i < 20; ++i) {
    X(i, 0) = 1;
    X(i, 1) = i;
    X(i, 2) = 2 * i;
    y(i) = i % 3;
  }
  try {
    ols_fit(y, X, {"(Intercept)", "x", "twice_x"});
    FAIL("expected RankDeficientError");
  } catch (const RankDeficientError& e) {
    std::string msg = e.what();
    bool named = msg.find("'x'") != std::string::npos || msg.find("'twice_x'") != std::string::npos;
    CHECK(named);
  }
  CHECK_THROWS_AS(ols_fit(y.head(2), X.topRows(2), {"a", "b", "c"}), RankDeficientError);
}

TEST_CASE("Rubin pooling by hand") {
  PooledResult r = rubin_pool({fit_of({1.0}, {1.0}), fit_of({3.0}, {1.0})});
  CHECK(r.qbar[0] == doctest::Approx(2.0));
  CHECK(r.w[0] == doctest::Approx(1.0));
  CHECK(r.b[0] == doctest::Approx(2.0));
  CHECK(r.t_var[0] == doctest::Approx(4.0));
  // df = (m-1)(1 + w/((1+1/m)b))^2 = (1 + 1/3)^2
  CHECK(r.df[0] == doctest::Approx(16.0 / 9.0));

  PooledResult same = rubin_pool({fit_of({0.5, -1}, {0.2, 0.3}), fit_of({0.5, -1}, {0.2, 0.3}),
                                  fit_of({0.5, -1}, {0.2, 0.3})});
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(same.b[k] == 0.0);
    CHECK(same.t_var[k] == doctest::Approx(same.w[k]));
    CHECK(std::isinf(same.df[k]));
  }
  CHECK(same.qbar[0] == 0.5);
  // Normal reference: p for z = 0.5/0.2 = 2.5.
  CHECK(same.p[0] == doctest::Approx(0.0124193).epsilon(1e-5));

  FitResult other = fit_of({1.0}, {1.0});
  other.terms = {"different"};
  CHECK_THROWS_AS(rubin_pool({fit_of({1.0}, {1.0}), other}), AlignmentError);
  CHECK_THROWS_AS(rubin_pool({fit_of({1.0}, {1.0})}), ConfigError);
}

TEST_CASE("rejection flips exactly at alpha") {
  CHECK_FALSE(reject_at(0.05, 0.05));
  CHECK(reject_at(std::nextafter(0.05, 0.0), 0.05));
  CHECK_FALSE(reject_at(std::nextafter(0.05, 1.0), 0.05));
  // t at the 97.5% normal quantile sits on the boundary.
  double p = two_sided_p(1.959963984540054, INFINITY);
  CHECK(p == doctest::Approx(0.05).epsilon(1e-12));
}

TEST_CASE("pooling properties") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> z;
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<FitResult> fits;
    for (int i = 0; i < 5; ++i) fits.push_back(fit_of({z(rng), z(rng)}, {std::abs(z(rng)) + 0.1, 0.5}, 40));
    PooledResult a = rubin_pool(fits);
    std::shuffle(fits.begin(), fits.end(), rng);
    PooledResult b = rubin_pool(fits);
    PooledResult br = rubin_pool(fits, 0.05, DfMethod::BarnardRubin);
    for (std::size_t k = 0; k < 2; ++k) {
      CHECK(a.qbar[k] == doctest::Approx(b.qbar[k]).epsilon(1e-14));
      CHECK(a.t_var[k] == doctest::Approx(b.t_var[k]).epsilon(1e-14));
      CHECK(a.t_var[k] >= a.w[k]);
      CHECK(a.b[k] >= 0);
      CHECK((a.p[k] >= 0 && a.p[k] <= 1));
      CHECK(a.reject[k] == (a.p[k] < 0.05));
      CHECK(br.df[k] <= a.df[k] + 1e-9);
      CHECK(br.df[k] <= 40);
    }
  }
  double last = 1.0;
  for (double t = 0.0; t < 6; t += 0.25) {
    double p = two_sided_p(t, 12);
    CHECK(p <= last);
    last = p;
  }
  CHECK(two_sided_p(0, 5) == doctest::Approx(1.0));
}

TEST_CASE("scaling the outcome scales SEs and keeps decisions") {
  Dataset ds = wide_metric(200, 4, 12);
  ModelSpec spec;
  spec.outcome = "y";
  FitResult base = fit_model(ds, spec);
  Dataset scaled = ds;
  for (std::size_t r = 0; r < ds.n_rows(); ++r) scaled.set_value(r, 0, -3.0 * ds.value(r, 0));
  FitResult s = fit_model(scaled, spec);
  PooledResult t0 = single_fit_tests(base), t1 = single_fit_tests(s);
  for (std::size_t k = 0; k < base.size(); ++k) {
    CHECK(s.se[k] == doctest::Approx(3.0 * base.se[k]).epsilon(1e-10));
    CHECK(s.beta[k] == doctest::Approx(-3.0 * base.beta[k]).epsilon(1e-10));
    CHECK(t0.reject[k] == t1.reject[k]);
  }
  CHECK(t0.df[0] == 195);
}

TEST_CASE("listwise deletion") {
  Dataset ds = wide_metric(5000, 19, 2);
  ModelSpec spec;
  spec.outcome = "y";
  ListwiseResult full = listwise_fit(ds, spec);
  REQUIRE_FALSE(full.skipped());
  FitResult direct = fit_model(ds, spec);
  for (std::size_t k = 0; k < direct.size(); ++k) CHECK(full.fit->beta[k] == direct.beta[k]);
  CHECK(full.min_rows == 200);

  auto amp = ampute::ampute_mcar(ds, 0.10, {"x3", "x11"}, 5);
  std::size_t expected = 0;
  for (std::size_t r = 0; r < ds.n_rows(); ++r) {
    expected += !amp.data.mask().at(r, amp.data.index_of("x3")) && !amp.data.mask().at(r, amp.data.index_of("x11"));
  }
  ListwiseResult part = listwise_fit(amp.data, spec);
  REQUIRE_FALSE(part.skipped());
  CHECK(part.complete_rows == expected);
  CHECK(part.fit->n == expected);

  ListwiseResult tiny = listwise_fit(amp.data, spec, 100000);
  CHECK(tiny.skipped());
  CHECK(tiny.skipped_reason.find("insufficient complete cases") != std::string::npos);
}

TEST_CASE("listwise deletion collapses on a heavily amputed panel") {
  synthgen::PanelConfig cfg;
  cfg.n_individuals = 300;
  Dataset ds = synthgen::generate_panel(cfg, synthgen::default_marginals(), synthgen::default_endogenous_models(),
                                        synthgen::default_outcome());
  ModelSpec spec;
  spec.outcome = synthgen::kOutcomeColumn;
  spec.refs = synthgen::reference_levels();
  spec.wave_dummies = true;
  ampute::AmputeConfig acfg;
  acfg.nu = 0.5;
  acfg.seed = 3;
  auto amp = ampute::ampute_mar(ds, acfg);
  ListwiseResult res = listwise_fit(amp.data, spec);
  CHECK(res.skipped());
  CHECK(res.complete_rows == 0);
}
