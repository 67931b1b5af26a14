#include <cmath>
#include <filesystem>
#include <set>
#include <sstream>

#include "doctest.h"
#include "mdlab/common/errors.hpp"
#include "mdlab/harness/report.hpp"
#include "mdlab/synthgen/default_models.hpp"
#include "mdlab/synthgen/generator.hpp"
#include "mdlab/tabular/encoding.hpp"

using namespace mdlab;
using namespace mdlab::harness;
namespace fs = std::filesystem;

namespace {

// Flat marginals so that small panels usually observe every level.
SimPlan small_plan() {
  SimPlan plan;
  plan.n_individuals = 50;
  plan.rates = {0.10};
  plan.methods = {impute::Method::MicePmm};
  plan.m = 2;
  plan.replications = 2;
  plan.r_max = 40;
  for (auto& c : plan.marginals.constant) {
    for (auto& p : c.probs) p = 1.0 / static_cast<double>(c.probs.size());
  }
  plan.marginals.marital_initial = {0.25, 0.25, 0.25, 0.25};
  return plan;
}

int first_ok(const ReplicationContext& ctx) {
  for (int i = 1; i <= 40; ++i) {
    if (run_replication(ctx, i).ok) return i;
  }
  return -1;
}

// Analysis terms of the default panel schema.
std::vector<std::string> study_terms(const SimPlan& plan) {
  synthgen::PanelConfig pc;
  pc.n_individuals = 5;
  auto ds = synthgen::generate_independent(pc, plan.marginals);
  return tabular::DummyLayout(ds, analysis_model(plan).encode_options(ds)).labels();
}

// Cheap records: estimates are truth plus an index-dependent shift.
ReplicationFn fake_pipeline(const SimPlan& plan, std::set<int> failing) {
  auto terms = study_terms(plan);
  std::map<std::string, double> truth(plan.outcome.coefficients.begin(), plan.outcome.coefficients.end());
  return [=](int index) {
    ReplicationRecord rec;
    rec.index = index;
    rec.seed = replication_seed(plan.seed, index);
    if (failing.count(index)) {
      rec.reason = "missing level: forced";
      return rec;
    }
    rec.ok = true;
    rec.terms = terms;
    auto fit = [&](double shift) {
      FitSummary f;
      f.ok = true;
      for (const auto& t : terms) {
        auto it = truth.find(t);
        double b = (it == truth.end() ? 0.0 : it->second) + shift;
        f.beta.push_back(b);
        f.reject.push_back(std::abs(b) > 0.05);
      }
      return f;
    };
    rec.complete = fit(0.001 * index);
    for (double r : plan.rates) {
      RateRecord rr;
      rr.rate = r;
      rr.listwise.reason = "skipped";
      for (auto m : plan.methods) {
        CellRecord c;
        c.method = m;
        c.ok = true;
        auto f = fit(0.01 * index * r);
        c.qbar = f.beta;
        c.reject = f.reject;
        c.ipm = 0.1 * r + 0.001 * index;
        c.seconds = 0.5;
        rr.cells.push_back(c);
      }
      rec.rates.push_back(rr);
    }
    return rec;
  };
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("mdlab_harness_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("minimal plan yields one pooled result, one IPM and one timing") {
  ReplicationContext ctx(small_plan());
  int index = first_ok(ctx);
  REQUIRE(index > 0);
  auto rec = run_replication(ctx, index);
  REQUIRE(rec.ok);
  REQUIRE(rec.rates.size() == 1);
  REQUIRE(rec.rates[0].cells.size() == 1);
  const auto& cell = rec.rates[0].cells[0];
  CHECK(cell.ok);
  CHECK(cell.qbar.size() == rec.terms.size());
  CHECK(cell.reject.size() == rec.terms.size());
  CHECK(cell.ipm > 0.0);
  CHECK(cell.seconds > 0.0);
  CHECK(rec.complete.ok);
  CHECK(!rec.rates[0].listwise.ok);  // 250 rows fall short of ten per design column
}

TEST_CASE("same plan and index give identical records") {
  ReplicationContext ctx(small_plan());
  int index = first_ok(ctx);
  REQUIRE(index > 0);
  auto a = run_replication(ctx, index).to_json(false).dump();
  auto b = run_replication(ctx, index).to_json(false).dump();
  CHECK(a == b);
  auto c = run_replication(ctx, index + 1).to_json(false).dump();
  CHECK(a != c);
}

TEST_CASE("a 0.1 percent category is usually absent from 100 individuals") {
  SimPlan plan = small_plan();
  plan.n_individuals = 100;
  for (auto& c : plan.marginals.constant) {
    if (c.column != "volunteering") continue;
    c.probs = {0.5, 0.499, 0.001};
  }
  ReplicationContext ctx(plan);
  int absent = 0;
  for (int i = 1; i <= 100; ++i) {
    auto rec = run_replication(ctx, i);
    if (!rec.ok && rec.reason.rfind("missing level", 0) == 0 &&
        rec.reason.find("volunteering[2]") != std::string::npos)
      ++absent;
  }
  // Drawn once per individual: P(absent) = 0.999^100 = 0.905 (sd 0.03 over 100 seeds).
  CHECK(absent > 50);
  CHECK(absent >= 81);
  CHECK(absent <= 99);
}

TEST_CASE("missing_levels names every unobserved declared level") {
  tabular::Dataset ds({{"c", tabular::ColumnType::nominal({"a", "b", "c"})}, {"x", tabular::ColumnType::metric()}},
                      3);
  for (std::size_t r = 0; r < 3; ++r) {
    ds.set_value(r, 0, 0.0);
    ds.set_value(r, 1, 1.0);
  }
  ds.set_value(2, 0, 2.0);
  CHECK(missing_levels(ds) == std::vector<std::string>{"c[b]"});
  ds.set_missing(2, 0, true);
  CHECK(missing_levels(ds) == std::vector<std::string>{"c[b]", "c[c]"});
}

TEST_CASE("run_plan takes the first R ok records by index and logs failures") {
  SimPlan plan;
  plan.replications = 10;
  plan.r_max = 12;
  plan.rates = {0.1, 0.5};
  plan.methods = {impute::Method::MicePmm, impute::Method::MixGb};
  auto study = run_plan(plan, fake_pipeline(plan, {4}));
  CHECK(study.complete);
  CHECK(study.attempted == 11);
  CHECK(study.selected == std::vector<int>{1, 2, 3, 5, 6, 7, 8, 9, 10, 11});
  REQUIRE(study.failures.size() == 1);
  CHECK(study.failures[0].first == 4);
  CHECK(study.failures[0].second == "missing level: forced");
  CHECK(study.cell("mice_pmm", 0.1).n == 10);
  CHECK(study.cell("listwise", 0.5).skipped());

  auto short_study = run_plan(plan, fake_pipeline(plan, {2, 5, 9}));
  CHECK(!short_study.complete);
  CHECK(short_study.attempted == 12);
  CHECK(short_study.selected.size() == 9);
  CHECK(short_study.failures.size() == 3);
}

TEST_CASE("aggregated bias matches hand arithmetic on the fake pipeline") {
  SimPlan plan;
  plan.replications = 4;
  plan.r_max = 4;
  plan.rates = {0.5};
  plan.methods = {impute::Method::MicePmm};
  auto study = run_plan(plan, fake_pipeline(plan, {}));
  // Shift 0.005 * index over indices 1..4: mean 0.0125 on every coefficient.
  const auto& cell = study.cell("mice_pmm", 0.5);
  for (double b : cell.bias.per_coefficient) CHECK(b == doctest::Approx(0.0125).epsilon(1e-12));
  CHECK(cell.bias.at(metrics::Panel::Overall).sd < 1e-12);
  CHECK(cell.ipm_mean == doctest::Approx(0.0525));
  CHECK(cell.seconds_mean == doctest::Approx(0.5));
  CHECK(study.table.size() == study_terms(plan).size() - 1);  // intercept excluded
}

TEST_CASE("worker count does not change the study") {
  SimPlan plan;
  plan.replications = 20;
  plan.r_max = 30;
  std::set<int> failing{3, 7, 8, 15};
  plan.workers = 1;
  auto one = run_plan(plan, fake_pipeline(plan, failing)).to_json(false).dump();
  plan.workers = 4;
  auto four = run_plan(plan, fake_pipeline(plan, failing)).to_json(false).dump();
  CHECK(one == four);
}

TEST_CASE("real pipeline: identical report files for 1 and 2 workers, and from the manifest") {
  SimPlan plan = small_plan();
  plan.replications = 2;
  plan.workers = 1;
  auto dir1 = scratch("w1"), dir2 = scratch("w2"), dir3 = scratch("manifest");
  auto s1 = run_plan(plan);
  REQUIRE(s1.complete);
  emit_report(s1, dir1);
  plan.workers = 2;
  emit_report(run_plan(plan), dir2);
  auto rerun = plan_from_file(dir1 / "manifest.json");
  emit_report(run_plan(rerun), dir3);
  for (const char* f : {"bias_panels.csv", "rejection_panels.csv", "coefficients.csv", "study.json"}) {
    CAPTURE(f);
    auto a = read_text_file(dir1 / f);
    CHECK(a == read_text_file(dir2 / f));
    CHECK(a == read_text_file(dir3 / f));
  }
}

TEST_CASE("changing imputation streams leaves generation and amputation alone") {
  SimPlan a = small_plan();
  SimPlan b = a;
  b.methods = {impute::Method::MiceRf, impute::Method::MicePmm};
  b.imputer.rf_trees = 3;
  ReplicationContext ca(a), cb(b);
  int index = first_ok(ca);
  REQUIRE(index > 0);
  auto ra = run_replication(ca, index), rb = run_replication(cb, index);
  REQUIRE(rb.ok);
  CHECK(ra.complete.beta == rb.complete.beta);
  CHECK(ra.rates[0].achieved_rate == rb.rates[0].achieved_rate);
  // MICE-PMM owns its stream, so adding another method leaves it unchanged.
  CHECK(ra.rates[0].cells[0].qbar == rb.rates[0].cells[1].qbar);
  CHECK(ra.rates[0].cells[0].ipm == rb.rates[0].cells[1].ipm);
  CHECK(impute_seed(1, 0, impute::Method::MicePmm) != impute_seed(1, 0, impute::Method::MiceRf));
  CHECK(impute_seed(1, 0, impute::Method::MicePmm) != impute_seed(1, 1, impute::Method::MicePmm));
  CHECK(generate_seed(1) != ampute_seed(1, 0));
}

TEST_CASE("plan validation") {
  CHECK_NOTHROW(SimPlan::desk().validate());
  auto paper = SimPlan::paper();
  CHECK_NOTHROW(paper.validate());
  CHECK(paper.replications == 1000);
  CHECK(paper.r_max == 1200);
  CHECK(paper.m == 10);
  CHECK(paper.n_individuals == 2482);
  CHECK(paper.rates == std::vector<double>{0.10, 0.30, 0.50});
  CHECK(paper.methods.size() == 5);

  SimPlan p;
  p.methods.clear();
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = SimPlan();
  p.r_max = p.replications - 1;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = SimPlan();
  p.rates = {0.1, 1.0};
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = SimPlan();
  p.m = 1;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  CHECK_THROWS_AS(SimPlan::named("huge"), ConfigError);
  CHECK_THROWS_AS(run_plan(p), ConfigError);
}

TEST_CASE("plan JSON round trip and preset seeding") {
  auto desk = SimPlan::desk();
  desk.bias_mode = metrics::BiasMode::MeanOfAbsolute;
  desk.imputer.k = 7;
  auto back = SimPlan::from_json(desk.to_json());
  CHECK(back.to_json().dump() == desk.to_json().dump());
  auto seeded = SimPlan::from_json(Json{{"preset", "paper"}, {"replications", 5}, {"r_max", 6}});
  CHECK(seeded.n_individuals == 2482);
  CHECK(seeded.imputer.ranger_trees == 500);
  CHECK(seeded.replications == 5);
  CHECK_THROWS_AS(SimPlan::from_json(Json{{"methods", Json::array()}}), ConfigError);
  CHECK_THROWS_AS(SimPlan::from_json(Json{{"df_method", "satterthwaite"}}), ConfigError);
}

TEST_CASE("panel CSV has methods x rates x panels x 3 rows plus baselines") {
  SimPlan plan;
  plan.replications = 3;
  plan.r_max = 3;
  auto study = run_plan(plan, fake_pipeline(plan, {}));
  const std::size_t methods = plan.methods.size(), rates = plan.rates.size();
  const std::size_t baselines = 1 + rates;  // complete, listwise per rate
  auto count_rows = [](const std::string& text) {
    std::size_t n = 0;
    for (char c : text) n += c == '\n';
    return n - 1;
  };
  CHECK(count_rows(panels_csv(study, false)) == (methods * rates + baselines) * 5 * 3);
  CHECK(count_rows(panels_csv(study, true)) == (methods * rates + baselines) * 5 * 3);
  CHECK(count_rows(ipm_timing_csv(study)) == methods * rates);
  CHECK(count_rows(coefficients_csv(study)) == study.table.size() * (methods * rates + baselines));
}

TEST_CASE("emitted study reloads to the same aggregates") {
  SimPlan plan;
  plan.replications = 5;
  plan.r_max = 6;
  auto study = run_plan(plan, fake_pipeline(plan, {2}));
  auto dir = scratch("reload");
  emit_report(study, dir);
  auto back = load_study(dir);
  CHECK(back.to_json(true).dump() == study.to_json(true).dump());
  auto man = read_json_file(dir / "manifest.json");
  CHECK(man.at("replications").size() == 5);
  CHECK(man.at("failures").size() == 1);
  CHECK(man.at("versions").contains("eigen"));
  CHECK_THROWS_AS(load_study(scratch("nothing")), IoError);
}

TEST_CASE("replication record JSON round trip") {
  SimPlan plan;
  auto rec = fake_pipeline(plan, {})(3);
  auto back = ReplicationRecord::from_json(rec.to_json());
  CHECK(back.to_json().dump() == rec.to_json().dump());
  CHECK(!rec.to_json(false).dump().empty());
  CHECK(rec.to_json(false).dump().find("seconds") == std::string::npos);
}

TEST_CASE("term kinds follow the variable's scale") {
  CHECK(term_kind("workinghrs") == metrics::VariableKind::Metric);
  CHECK(term_kind("woman[1]") == metrics::VariableKind::Binary);
  CHECK(term_kind("fixedterm[yes]") == metrics::VariableKind::Binary);
  CHECK(term_kind("education[Abitur]") == metrics::VariableKind::Other);
  CHECK(term_kind("wave[3]") == metrics::VariableKind::Other);
}
