// mdlab: command-line front end for the missing-data lab.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mdlab/ampute/ampute.hpp"
#include "mdlab/analyze/model.hpp"
#include "mdlab/analyze/rubin.hpp"
#include "mdlab/common/errors.hpp"
#include "mdlab/common/json_util.hpp"
#include "mdlab/harness/report.hpp"
#include "mdlab/impute/engines.hpp"
#include "mdlab/synthgen/default_models.hpp"
#include "mdlab/synthgen/generator.hpp"
#include "mdlab/tabular/io.hpp"

namespace fs = std::filesystem;
using namespace mdlab;

namespace {

constexpr int kExitError = 2;
constexpr int kExitIncomplete = 3;

fs::path schema_for(const fs::path& csv, const std::string& given) {
  return given.empty() ? tabular::default_schema_path(csv) : fs::path(given);
}

tabular::Dataset load(const fs::path& csv, const std::string& schema) {
  return tabular::read_dataset(csv, schema_for(csv, schema));
}

void save(const tabular::Dataset& ds, const fs::path& csv) {
  if (csv.has_parent_path()) fs::create_directories(csv.parent_path());
  tabular::write_dataset(ds, csv, tabular::default_schema_path(csv));
}

// The study's analysis model over the waves present in `ds`.
analyze::ModelSpec default_model(const tabular::Dataset& ds) {
  std::set<int> waves;
  for (const auto& k : ds.panel_keys()) waves.insert(k.wave);
  harness::SimPlan plan;
  analyze::ModelSpec spec = harness::analysis_model(plan);
  spec.wave_dummies = !waves.empty();
  spec.waves.assign(waves.begin(), waves.end());
  spec.wave_ref = waves.empty() ? -1 : *waves.begin();
  return spec;
}

analyze::DfMethod parse_df(const std::string& s) {
  if (s == "classic") return analyze::DfMethod::Classic;
  if (s == "barnard_rubin") return analyze::DfMethod::BarnardRubin;
  throw ConfigError("unknown df method '" + s + "' (classic, barnard_rubin)");
}

ampute::BudgetMode parse_budget(const std::string& s) {
  if (s == "global_count") return ampute::BudgetMode::GlobalCount;
  if (s == "per_group_rate") return ampute::BudgetMode::PerGroupRate;
  throw ConfigError("unknown budget '" + s + "' (global_count, per_group_rate)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mdlab: synthetic panels, amputation, multiple imputation and Monte Carlo evaluation"};
  app.require_subcommand(1);
  int exit_code = 0;

  // generate
  auto* gen = app.add_subcommand("generate", "Generate a synthetic panel (CSV + schema)");
  synthgen::PanelConfig pc;
  pc.n_individuals = 300;
  std::string gen_out, gen_marg, gen_outcome, gen_models;
  gen->add_option("--n", pc.n_individuals, "Individuals")->capture_default_str();
  gen->add_option("--waves", pc.n_waves, "Waves per individual")->capture_default_str();
  gen->add_option("--first-wave", pc.first_wave, "Label of the first wave")->capture_default_str();
  gen->add_option("--seed", pc.seed, "Seed")->capture_default_str();
  gen->add_option("--marginals", gen_marg, "Marginal spec JSON");
  gen->add_option("--outcome", gen_outcome, "Outcome model JSON");
  gen->add_option("--models", gen_models, "Endogenous model JSON");
  gen->add_option("--out", gen_out, "Output CSV")->required();
  gen->callback([&] {
    auto marg = gen_marg.empty() ? synthgen::default_marginals() : synthgen::marginals_from_json(read_json_file(gen_marg));
    auto outcome =
        gen_outcome.empty() ? synthgen::default_outcome() : synthgen::outcome_from_json(read_json_file(gen_outcome));
    auto endo = gen_models.empty() ? synthgen::default_endogenous_models()
                                   : synthgen::endogenous_from_json(read_json_file(gen_models));
    save(synthgen::generate_panel(pc, marg, endo, outcome), gen_out);
  });

  // ampute
  auto* amp = app.add_subcommand("ampute", "Delete cells MAR on an anchor (or MCAR)");
  std::string amp_in, amp_schema, amp_out, amp_report, amp_budget = "global_count";
  ampute::AmputeConfig ac;
  bool amp_mcar = false;
  amp->add_option("--in", amp_in, "Complete CSV")->required();
  amp->add_option("--schema", amp_schema, "Schema JSON (default: next to the CSV)");
  amp->add_option("--rate", ac.nu, "Missing rate per column")->capture_default_str();
  amp->add_option("--anchor", ac.anchor, "Anchor column for MAR")->capture_default_str();
  amp->add_option("--columns", ac.columns, "Columns to ampute (default: all)");
  amp->add_option("--exclude", ac.exclude, "Columns never amputed");
  amp->add_option("--seed", ac.seed, "Seed")->capture_default_str();
  amp->add_option("--budget", amp_budget, "global_count or per_group_rate")->capture_default_str();
  amp->add_flag("--mcar", amp_mcar, "Completely at random instead of MAR");
  amp->add_option("--out", amp_out, "Amputed CSV")->required();
  amp->add_option("--report", amp_report, "Amputation report JSON");
  amp->callback([&] {
    auto ds = load(amp_in, amp_schema);
    ac.budget = parse_budget(amp_budget);
    auto res = amp_mcar ? ampute::ampute_mcar(ds, ac.nu, ac.targets(ds), ac.seed) : ampute::ampute_mar(ds, ac);
    save(res.data, amp_out);
    if (!amp_report.empty()) write_json_file(amp_report, res.report.to_json());
  });

  // impute
  auto* imp = app.add_subcommand("impute", "Multiply impute a CSV");
  std::string imp_in, imp_schema, imp_out, imp_method = "mice_pmm", imp_config;
  impute::ImputerSpec is;
  std::uint64_t imp_seed = 1;
  imp->add_option("--in", imp_in, "Incomplete CSV")->required();
  imp->add_option("--schema", imp_schema, "Schema JSON (default: next to the CSV)");
  imp->add_option("--config", imp_config, "Imputer spec JSON; flags override it");
  auto* o_method = imp->add_option("--method", imp_method, "mice_pmm, mice_rf, missranger, missranger_pmm, mixgb");
  auto* o_m = imp->add_option("--m", is.m, "Number of imputations");
  auto* o_k = imp->add_option("--k", is.k, "PMM donor pool size");
  auto* o_iters = imp->add_option("--iters", is.iters, "Iterations (0 = method default)");
  auto* o_threads = imp->add_option("--threads", is.threads, "Imputations run in parallel");
  imp->add_option("--seed", imp_seed, "Seed")->capture_default_str();
  imp->add_option("--out", imp_out, "Output directory")->required();
  imp->callback([&] {
    impute::ImputerSpec spec = imp_config.empty() ? impute::ImputerSpec{} : impute::ImputerSpec::from_json(read_json_file(imp_config));
    if (imp_config.empty() || o_method->count()) spec.method = impute::parse_method(imp_method);
    if (o_m->count()) spec.m = is.m;
    if (o_k->count()) spec.k = is.k;
    if (o_iters->count()) spec.iters = is.iters;
    if (o_threads->count()) spec.threads = is.threads;
    auto ds = load(imp_in, imp_schema);
    auto mi = impute::run_imputation(ds, spec, imp_seed);
    fs::path dir(imp_out);
    for (int i = 0; i < mi.m(); ++i) save(mi.completions[i], dir / ("imputed_" + std::to_string(i + 1) + ".csv"));
    write_json_file(dir / "provenance.json", mi.provenance.to_json());
    for (const auto& w : mi.provenance.warnings) std::cerr << "mdlab: warning: " << w << '\n';
  });

  // analyze
  auto* ana = app.add_subcommand("analyze", "Fit the model on each completion and pool with Rubin's rules");
  std::vector<std::string> ana_in;
  std::string ana_schema, ana_model, ana_out, ana_df = "classic";
  double ana_alpha = 0.05;
  ana->add_option("--in", ana_in, "Completion CSVs (one fit only when a single file)")->required();
  ana->add_option("--schema", ana_schema, "Schema JSON (default: next to each CSV)");
  ana->add_option("--model", ana_model, "Model spec JSON (default: the study model)");
  ana->add_option("--alpha", ana_alpha, "Test level")->capture_default_str();
  ana->add_option("--df", ana_df, "classic or barnard_rubin")->capture_default_str();
  ana->add_option("--out", ana_out, "PooledResult JSON (default: stdout)");
  ana->callback([&] {
    std::vector<analyze::FitResult> fits;
    analyze::ModelSpec spec;
    for (std::size_t i = 0; i < ana_in.size(); ++i) {
      auto ds = load(ana_in[i], ana_schema);
      if (i == 0) spec = ana_model.empty() ? default_model(ds) : analyze::ModelSpec::from_json(read_json_file(ana_model));
      fits.push_back(analyze::fit_model(ds, spec));
    }
    auto pooled = fits.size() == 1 ? analyze::single_fit_tests(fits[0], ana_alpha)
                                   : analyze::rubin_pool(fits, ana_alpha, parse_df(ana_df));
    if (ana_out.empty()) {
      std::cout << pooled.to_json().dump(2) << '\n';
    } else {
      write_json_file(ana_out, pooled.to_json());
    }
  });

  // report
  auto* rep = app.add_subcommand("report", "Re-aggregate an emitted study into panel tables");
  std::string rep_in, rep_out, rep_bias;
  rep->add_option("--in", rep_in, "Study directory written by simulate")->required();
  rep->add_option("--out", rep_out, "Output directory (default: --in)");
  rep->add_option("--bias-mode", rep_bias, "absolute_of_mean or mean_of_absolute");
  rep->callback([&] {
    auto plan = harness::plan_from_file(fs::path(rep_in) / "manifest.json");
    if (!rep_bias.empty()) {
      Json j = plan.to_json();
      j["bias_mode"] = rep_bias;
      plan = harness::SimPlan::from_json(j);
    }
    auto study = harness::load_study(rep_in, &plan);
    harness::emit_report(study, rep_out.empty() ? rep_in : rep_out);
  });

  // simulate
  auto* sim = app.add_subcommand("simulate", "Run the Monte Carlo study");
  std::string sim_plan, sim_out, sim_preset;
  int sim_workers = 0, sim_reps = 0;
  std::uint64_t sim_seed = 0;
  std::vector<double> sim_rates;
  sim->add_option("--plan", sim_plan, "Plan JSON, or a manifest to re-run");
  sim->add_option("--preset", sim_preset, "desk or paper")->check(CLI::IsMember({"desk", "paper"}));
  sim->add_option("--out", sim_out, "Output directory")->required();
  sim->add_option("--workers", sim_workers, "Replications run in parallel");
  auto* o_reps = sim->add_option("--replications", sim_reps, "Override R (R_max grows to keep the plan's ratio)");
  auto* o_seed = sim->add_option("--seed", sim_seed, "Override the base seed");
  sim->add_option("--rates", sim_rates, "Override the missing rates");
  sim->callback([&] {
    if (sim_plan.empty() == sim_preset.empty()) throw ConfigError("simulate: give exactly one of --plan and --preset");
    auto plan = sim_plan.empty() ? harness::SimPlan::named(sim_preset) : harness::plan_from_file(sim_plan);
    if (sim_workers > 0) plan.workers = sim_workers;
    if (o_reps->count()) {
      double ratio = static_cast<double>(plan.r_max) / plan.replications;
      plan.replications = sim_reps;
      plan.r_max = std::max(sim_reps, static_cast<int>(std::ceil(ratio * sim_reps)));
    }
    if (o_seed->count()) plan.seed = sim_seed;
    if (!sim_rates.empty()) plan.rates = sim_rates;
    plan.validate();
    auto study = harness::run_plan(plan);
    harness::emit_report(study, sim_out);
    std::cerr << "mdlab: " << study.selected.size() << " of " << plan.replications << " replications ok after "
              << study.attempted << " attempts (" << study.failures.size() << " failed)\n";
    if (!study.complete) {
      std::cerr << "mdlab: study incomplete: fewer than R ok replications within R_max\n";
      exit_code = kExitIncomplete;
    }
  });

  // export-models
  auto* exp = app.add_subcommand("export-models", "Write the built-in generator specs and presets as JSON");
  std::string exp_out;
  exp->add_option("--out", exp_out, "Output directory")->required();
  exp->callback([&] {
    fs::path dir(exp_out);
    fs::create_directories(dir);
    write_json_file(dir / "marginals.json", synthgen::to_json(synthgen::default_marginals()));
    write_json_file(dir / "outcome.json", synthgen::to_json(synthgen::default_outcome()));
    write_json_file(dir / "endogenous.json", synthgen::to_json(synthgen::default_endogenous_models()));
    write_json_file(dir / "plan_desk.json", harness::SimPlan::desk().to_json());
    write_json_file(dir / "plan_paper.json", harness::SimPlan::paper().to_json());
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const Error& e) {
    std::cerr << "mdlab: " << e.category() << ": " << e.what() << '\n';
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "mdlab: error: " << e.what() << '\n';
    return kExitError;
  }
  return exit_code;
}
