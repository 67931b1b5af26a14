#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>

#include "doctest.h"
#include "mdlab/common/errors.hpp"
#include "mdlab/synthgen/default_models.hpp"
#include "mdlab/synthgen/generator.hpp"
#include "mdlab/synthgen/validate.hpp"
#include "mdlab/tabular/encoding.hpp"

using namespace mdlab;
using namespace mdlab::synthgen;
using tabular::Dataset;

namespace {

Dataset panel(std::size_t n, std::uint64_t seed, const MarginalSpec& marg = default_marginals(),
              const OutcomeModel& out = default_outcome()) {
  PanelConfig cfg;
  cfg.n_individuals = n;
  cfg.seed = seed;
  return generate_panel(cfg, marg, default_endogenous_models(), out);
}

// One row, every categorical at its reference level and every metric at 0.
Dataset reference_row(int wave) {
  Dataset ds(panel_columns(), 1);
  for (std::size_t c = 0; c < ds.n_cols(); ++c) {
    const auto& col = ds.column(c);
    if (col.type.is_categorical()) ds.set_value(0, c, *col.type.level_index(reference_levels().at(col.name)));
  }
  ds.set_panel_keys({{1, wave}});
  return ds;
}

double freq(const Dataset& ds, const std::string& column, int level, bool first_wave_only) {
  std::size_t c = ds.index_of(column);
  double hits = 0, n = 0;
  for (std::size_t r = 0; r < ds.n_rows(); ++r) {
    if (first_wave_only && ds.panel_keys()[r].wave != 2) continue;
    n += 1;
    hits += ds.level(r, c) == level;
  }
  return hits / n;
}

}  // namespace

TEST_CASE("panel schema has the survey's variable mix") {
  std::map<tabular::ColumnKind, int> kinds;
  for (const auto& c : panel_columns()) ++kinds[c.type.kind()];
  CHECK(panel_columns().size() == 22);
  CHECK(kinds[tabular::ColumnKind::Metric] == 8);
  CHECK(kinds[tabular::ColumnKind::Binary] == 6);
  CHECK(kinds[tabular::ColumnKind::Ordinal] == 5);
  CHECK(kinds[tabular::ColumnKind::Nominal] == 3);
  for (const auto& [name, level] : reference_levels()) CHECK(panel_column(name).type.level_index(level));
}

TEST_CASE("full-size panel has 12,410 rows in long format") {
  Dataset ds = panel(2482, 1);
  CHECK(ds.n_rows() == 12410);
  CHECK(ds.mask().count() == 0);
  CHECK(ds.panel_keys().front() == tabular::PanelKey{1, 2});
  CHECK(ds.panel_keys().back() == tabular::PanelKey{2482, 6});
  ds.validate();
}

TEST_CASE("a single individual ages one year per wave") {
  Dataset ds = panel(1, 99);
  REQUIRE(ds.n_rows() == 5);
  std::size_t c = ds.index_of("age");
  for (std::size_t w = 1; w < 5; ++w) CHECK(ds.value(w, c) == ds.value(w - 1, c) + 1.0);
  CHECK(ds.value(0, c) >= 23);
  CHECK(ds.value(4, c) <= 67);
}

TEST_CASE("frozen transitions keep status variables constant") {
  MarginalSpec m = default_marginals();
  m.marital_forward = 0.0;
  m.fixedterm_exit = 0.0;
  m.fixedterm_initial = 0.5;
  Dataset ds = panel(400, 5, m);
  for (const char* name : {"maritalstatus", "fixedterm"}) {
    std::size_t c = ds.index_of(name);
    for (std::size_t i = 0; i < 400; ++i) {
      for (std::size_t w = 1; w < 5; ++w) CHECK(ds.value(i * 5 + w, c) == ds.value(i * 5, c));
    }
  }
}

TEST_CASE("outcome of a reference row is the intercept") {
  OutcomeModel out = default_outcome();
  out.noise_sd = 0.0;
  Rng rng = make_rng(1);
  Dataset ds = reference_row(2);
  CHECK(gen_outcome(ds, out, rng)[0] == doctest::Approx(7.1481521).epsilon(1e-12));

  ds = reference_row(6);
  ds.set_value(0, ds.index_of("workinghrs"), 40.0);
  CHECK(gen_outcome(ds, out, rng)[0] == doctest::Approx(7.1481521 + 0.048 + 0.031 * 40).epsilon(1e-12));
  CHECK(gen_outcome(ds, out, rng)[0] == doctest::Approx(8.4361521).epsilon(1e-12));
}

TEST_CASE("outcome terms that do not resolve are reported") {
  OutcomeModel out = default_outcome();
  out.coefficients.emplace_back("kldb[Medium]", 0.1);
  out.coefficients.emplace_back("income", 0.1);
  Rng rng = make_rng(1);
  Dataset ds = reference_row(2);
  try {
    gen_outcome(ds, out, rng);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    std::string msg = e.what();
    CHECK(msg.find("kldb[Medium]") != std::string::npos);
    CHECK(msg.find("income") != std::string::npos);
  }
  ds.set_missing(0, ds.index_of("workinghrs"), true);
  CHECK_THROWS_AS(gen_outcome(ds, default_outcome(), rng), EncodingError);
}

TEST_CASE("noise-free outcome is exactly identified by its own design") {
  OutcomeModel out = default_outcome();
  out.noise_sd = 0.0;
  Dataset ds = panel(3000, 17, default_marginals(), out);

  tabular::EncodeOptions opt;
  opt.columns = {};
  for (const auto& c : panel_columns()) {
    if (c.name != kOutcomeColumn) opt.columns.push_back(c.name);
  }
  opt.refs = reference_levels();
  opt.wave_dummies = true;
  tabular::DesignMatrix full = tabular::dummy_encode(ds, opt);

  Eigen::MatrixXd X(ds.n_rows(), out.coefficients.size() + 1);
  X.col(0) = full.values.col(0);
  for (std::size_t k = 0; k < out.coefficients.size(); ++k) {
    auto it = std::find(full.column_labels.begin(), full.column_labels.end(), out.coefficients[k].first);
    REQUIRE(it != full.column_labels.end());
    X.col(k + 1) = full.values.col(it - full.column_labels.begin());
  }
  auto yv = ds.values(ds.index_of(kOutcomeColumn));
  Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(yv.data(), yv.size());
  Eigen::VectorXd beta = X.colPivHouseholderQr().solve(y);
  CHECK(std::abs(beta[0] - out.intercept) < 1e-8);
  for (std::size_t k = 0; k < out.coefficients.size(); ++k) {
    CHECK(std::abs(beta[k + 1] - out.coefficients[k].second) < 1e-8);
  }
}

TEST_CASE("generated outcome mean is near the survey's") {
  Dataset ds = panel(10000, 23);
  auto y = ds.values(ds.index_of(kOutcomeColumn));
  double mean = 0;
  for (double v : y) mean += v;
  mean /= y.size();
  CHECK(y.size() == 50000);
  CHECK(std::abs(mean - 7.99) <= 0.3);
}

TEST_CASE("default specs reproduce the survey marginals") {
  Dataset ds = panel(10000, 31);
  MarginalReport rep = validate_marginals(ds, table1_targets());
  for (const auto& c : rep.checks) {
    INFO(c.column << " " << c.statistic << " target " << c.target << " achieved " << c.achieved);
    CHECK(c.pass);
  }
  CHECK(rep.pass);
  double woman = freq(ds, "woman", 1, false);
  CHECK(woman >= 0.45);
  CHECK(woman <= 0.51);
  auto find = [&](const std::string& col, const std::string& stat) {
    for (const auto& c : rep.checks) {
      if (c.column == col && c.statistic == stat) return c.achieved;
    }
    return std::nan("");
  };
  CHECK(std::abs(find("age", "mean") - 46.97) <= 0.1 * 46.97);
  CHECK(std::abs(find("age", "sd") - 8.36) <= 0.1 * 8.36);
}

TEST_CASE("degenerate categorical marginals are reproduced exactly") {
  MarginalSpec m = default_marginals();
  for (auto& c : m.constant) {
    if (c.column == "woman") c.probs = {1.0, 0.0};
  }
  Dataset ds = panel(300, 2, m);
  MarginalTargets t;
  t.categorical = {{"woman", {1.0, 0.0}}};
  MarginalReport rep = validate_marginals(ds, t);
  REQUIRE(rep.checks.size() == 2);
  CHECK(rep.checks[0].achieved == 1.0);
  CHECK(rep.checks[1].achieved == 0.0);
  CHECK(rep.pass);

  t.metric = {{"not_a_column", 1.0, std::nullopt}};
  CHECK_FALSE(validate_marginals(ds, t).pass);
}

TEST_CASE("stochastic leaf draws track the calibration distributions") {
  Dataset cal = calibration_panel(default_marginals(), 20000, 20240601);
  Dataset gen = panel(20000, 41);
  for (int k = 0; k < 4; ++k) {
    auto count_freq = [&](const Dataset& ds) {
      std::size_t c = ds.index_of("childhh1_number");
      double hits = 0, n = 0;
      for (std::size_t r = 0; r < ds.n_rows(); r += 5) {
        n += 1;
        hits += ds.value(r, c) == k;
      }
      return hits / n;
    };
    INFO("children = " << k);
    CHECK(std::abs(count_freq(gen) - count_freq(cal)) <= 0.05);
  }
  for (int k = 0; k < 4; ++k) {
    INFO("kldb level " << k);
    CHECK(std::abs(freq(gen, "kldb", k, true) - freq(cal, "kldb", k, true)) <= 0.05);
  }
}

TEST_CASE("generation is reproducible and seed-sensitive") {
  Dataset a = panel(200, 77);
  Dataset b = panel(200, 77);
  Dataset c = panel(200, 78);
  CHECK(a == b);
  CHECK_FALSE(a == c);

  // Each individual's draws depend only on (seed, id).
  Dataset big = panel(400, 77);
  for (std::size_t col = 0; col < a.n_cols(); ++col) {
    for (std::size_t r = 0; r < a.n_rows(); ++r) REQUIRE(a.value(r, col) == big.value(r, col));
  }
}

TEST_CASE("panel consistency holds across seeds") {
  const std::vector<std::string> constant = {"leftright_2013", "siblings",  "birthcountry", "music_classic",
                                             "woman",          "comp_size", "education",    "parentsEd",
                                             "volunteering",   "federalstate", "sector",    "kldb",
                                             "workinghrs"};
  for (std::uint64_t seed = 100; seed < 105; ++seed) {
    Dataset ds = panel(300, seed);
    for (std::size_t i = 0; i < 300; ++i) {
      std::size_t r0 = i * 5;
      for (const auto& name : constant) {
        std::size_t c = ds.index_of(name);
        for (std::size_t w = 1; w < 5; ++w) REQUIRE(ds.value(r0 + w, c) == ds.value(r0, c));
      }
      std::size_t ce = ds.index_of("work_experience"), cc = ds.index_of("childhh1_number");
      std::size_t cm = ds.index_of("maritalstatus"), cf = ds.index_of("fixedterm");
      REQUIRE(ds.value(r0, cc) >= 0);
      for (std::size_t w = 1; w < 5; ++w) {
        REQUIRE(ds.value(r0 + w, ce) >= ds.value(r0 + w - 1, ce));
        REQUIRE(ds.value(r0 + w, cc) <= ds.value(r0 + w - 1, cc));
        REQUIRE(ds.value(r0 + w, cc) >= 0);
        double step = ds.value(r0 + w, cm) - ds.value(r0 + w - 1, cm);
        REQUIRE((step == 0 || step == 1));
        REQUIRE(ds.value(r0 + w, cf) <= ds.value(r0 + w - 1, cf));
      }
      for (std::size_t w = 0; w < 5; ++w) {
        double hrs = ds.value(r0 + w, ds.index_of("workinghrs"));
        double att = ds.value(r0 + w, ds.index_of("contactattempts"));
        REQUIRE((hrs >= 0 && hrs <= 90));
        REQUIRE((att >= 1 && att <= 200 && att == std::round(att)));
      }
    }
  }
}

TEST_CASE("spec invariants are enforced") {
  PanelConfig cfg;
  cfg.n_waves = 1;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = PanelConfig{};
  cfg.n_individuals = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  MarginalSpec m = default_marginals();
  m.constant[2].probs = {0.5, 0.6};
  CHECK_THROWS_AS(m.validate(5), ConfigError);
  m = default_marginals();
  m.age.low = 70;
  CHECK_THROWS_AS(m.validate(5), ConfigError);
  m = default_marginals();
  m.contact_rates[1] = 0.0;
  CHECK_THROWS_AS(m.validate(5), ConfigError);
  m = default_marginals();
  m.constant.push_back({"woman", {0.5, 0.5}});
  CHECK_THROWS_AS(m.validate(5), ConfigError);

  EndogenousModelSpec e = default_endogenous_models();
  e.kldb.predictors[0] = "workinghrs";
  CHECK_THROWS_AS(e.validate(), ConfigError);
  e = default_endogenous_models();
  e.workinghrs.predictors.pop_back();
  CHECK_THROWS_AS(e.validate(), ConfigError);

  OutcomeModel o = default_outcome();
  o.noise_sd = -1;
  CHECK_THROWS_AS(o.validate(), ConfigError);
}

TEST_CASE("specs survive a JSON round trip") {
  MarginalSpec m = marginals_from_json(to_json(default_marginals()));
  OutcomeModel o = outcome_from_json(to_json(default_outcome()));
  EndogenousModelSpec e = endogenous_from_json(to_json(default_endogenous_models()));
  PanelConfig cfg = panel_config_from_json(to_json(PanelConfig{150, 5, 2, 9}));
  CHECK(cfg.n_individuals == 150);
  Dataset a = generate_panel(cfg, m, e, o);
  Dataset b = generate_panel(cfg, default_marginals(), default_endogenous_models(), default_outcome());
  CHECK(a == b);
  CHECK_THROWS_AS(marginals_from_json(Json::object()), ConfigError);
}

TEST_CASE("models can be refitted from any complete seed panel") {
  Dataset seed = panel(3000, 8);
  EndogenousModelSpec e = fit_endogenous_models(seed);
  PanelConfig cfg;
  cfg.n_individuals = 2000;
  Dataset ds = generate_panel(cfg, default_marginals(), e, default_outcome());
  CHECK(std::abs(freq(ds, "kldb", 1, true) - freq(seed, "kldb", 1, true)) <= 0.05);

  Dataset partial = generate_independent(cfg, default_marginals());
  CHECK(partial.missing_count(partial.index_of("kldb")) == partial.n_rows());
  CHECK_THROWS_AS(fit_endogenous_models(partial), ConfigError);
}

TEST_CASE("shipped model files match the built-in defaults") {
  const std::string dir = MDLAB_MODELS_DIR;
  CHECK(read_json_file(dir + "/marginals.json") == to_json(default_marginals()));
  CHECK(read_json_file(dir + "/outcome.json") == to_json(default_outcome()));
  CHECK(read_json_file(dir + "/endogenous.json") == to_json(default_endogenous_models()));
  auto endo = endogenous_from_json(read_json_file(dir + "/endogenous.json"));
  PanelConfig pc;
  pc.n_individuals = 40;
  pc.seed = 9;
  CHECK(generate_panel(pc, default_marginals(), endo, default_outcome()) ==
        generate_panel(pc, default_marginals(), default_endogenous_models(), default_outcome()));
}
