#include "mdlab/harness/plan.hpp"

#include <algorithm>
#include <set>

#include "mdlab/common/errors.hpp"

namespace mdlab::harness {

std::vector<int> SimPlan::waves() const {
  std::vector<int> w;
  for (int i = 0; i < n_waves; ++i) w.push_back(first_wave + i);
  return w;
}

void SimPlan::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError("simulation plan: " + msg); };
  if (n_individuals < 2) fail("n_individuals must be >= 2");
  if (n_waves < 1) fail("n_waves must be >= 1");
  if (replications < 1) fail("replications must be >= 1");
  if (r_max < replications) fail("r_max must be >= replications");
  if (rates.empty()) fail("rates must not be empty");
  for (double r : rates) {
    if (!(r > 0 && r < 1)) fail("every missing rate must lie in (0, 1)");
  }
  if (std::set<double>(rates.begin(), rates.end()).size() != rates.size()) fail("rates must be distinct");
  if (methods.empty()) fail("methods must not be empty");
  if (std::set<impute::Method>(methods.begin(), methods.end()).size() != methods.size()) {
    fail("methods must be distinct");
  }
  if (m < 2) fail("m must be >= 2 for pooling");
  if (!(alpha > 0 && alpha < 1)) fail("alpha must lie in (0, 1)");
  if (workers < 1) fail("workers must be >= 1");
  impute::ImputerSpec probe = imputer;
  probe.m = m;
  probe.validate();
  marginals.validate(n_waves);
  outcome.validate();
}

Json SimPlan::to_json() const {
  Json methods_json = Json::array();
  for (auto mth : methods) methods_json.push_back(std::string(impute::to_string(mth)));
  Json imp = imputer.to_json();
  imp.erase("method");
  imp.erase("m");
  imp["iters"] = imputer.iters;  // keep 0 = per-method default
  return Json{{"preset", preset},
              {"n_individuals", n_individuals},
              {"n_waves", n_waves},
              {"first_wave", first_wave},
              {"replications", replications},
              {"r_max", r_max},
              {"rates", rates},
              {"methods", std::move(methods_json)},
              {"m", m},
              {"alpha", alpha},
              {"seed", seed},
              {"workers", workers},
              {"imputer", std::move(imp)},
              {"anchor", anchor},
              {"budget", budget == ampute::BudgetMode::GlobalCount ? "global_count" : "per_group_rate"},
              {"listwise", listwise},
              {"df_method", df_method == analyze::DfMethod::Classic ? "classic" : "barnard_rubin"},
              {"bias_mode", bias_mode == metrics::BiasMode::AbsoluteOfMean ? "absolute_of_mean" : "mean_of_absolute"},
              {"marginals", synthgen::to_json(marginals)},
              {"outcome", synthgen::to_json(outcome)},
              {"endogenous_models", endogenous_models}};
}

SimPlan SimPlan::from_json(const Json& j) {
  SimPlan p;
  if (j.contains("preset") && j.at("preset").is_string()) {
    const auto name = j.at("preset").get<std::string>();
    if (name == "desk" || name == "paper") p = named(name);
    p.preset = name;
  }
  try {
    p.n_individuals = j.value("n_individuals", p.n_individuals);
    p.n_waves = j.value("n_waves", p.n_waves);
    p.first_wave = j.value("first_wave", p.first_wave);
    p.replications = j.value("replications", p.replications);
    p.r_max = j.value("r_max", p.r_max);
    if (j.contains("rates")) p.rates = j.at("rates").get<std::vector<double>>();
    if (j.contains("methods")) {
      p.methods.clear();
      for (const auto& s : j.at("methods")) p.methods.push_back(impute::parse_method(s.get<std::string>()));
    }
    p.m = j.value("m", p.m);
    p.alpha = j.value("alpha", p.alpha);
    p.seed = j.value("seed", p.seed);
    p.workers = j.value("workers", p.workers);
    if (j.contains("imputer")) {
      Json imp = p.imputer.to_json();
      imp["iters"] = p.imputer.iters;
      for (const auto& [k, v] : j.at("imputer").items()) imp[k] = v;
      imp["m"] = p.m;
      p.imputer = impute::ImputerSpec::from_json(imp);
    }
    p.anchor = j.value("anchor", p.anchor);
    if (j.contains("budget")) {
      auto b = j.at("budget").get<std::string>();
      if (b == "global_count") {
        p.budget = ampute::BudgetMode::GlobalCount;
      } else if (b == "per_group_rate") {
        p.budget = ampute::BudgetMode::PerGroupRate;
      } else {
        throw ConfigError("simulation plan: unknown budget '" + b + "'");
      }
    }
    p.listwise = j.value("listwise", p.listwise);
    if (j.contains("df_method")) {
      auto d = j.at("df_method").get<std::string>();
      if (d == "classic") {
        p.df_method = analyze::DfMethod::Classic;
      } else if (d == "barnard_rubin") {
        p.df_method = analyze::DfMethod::BarnardRubin;
      } else {
        throw ConfigError("simulation plan: unknown df_method '" + d + "'");
      }
    }
    if (j.contains("bias_mode")) {
      auto b = j.at("bias_mode").get<std::string>();
      if (b == "absolute_of_mean") {
        p.bias_mode = metrics::BiasMode::AbsoluteOfMean;
      } else if (b == "mean_of_absolute") {
        p.bias_mode = metrics::BiasMode::MeanOfAbsolute;
      } else {
        throw ConfigError("simulation plan: unknown bias_mode '" + b + "'");
      }
    }
    if (j.contains("marginals")) p.marginals = synthgen::marginals_from_json(j.at("marginals"));
    if (j.contains("outcome")) p.outcome = synthgen::outcome_from_json(j.at("outcome"));
    p.endogenous_models = j.value("endogenous_models", p.endogenous_models);
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("simulation plan: ") + e.what());
  }
  p.validate();
  return p;
}

SimPlan SimPlan::desk() {
  SimPlan p;
  p.preset = "desk";
  p.n_individuals = 300;
  p.replications = 150;
  p.r_max = 400;
  p.m = 5;
  p.imputer.rf_trees = 10;
  p.imputer.ranger_trees = 25;
  p.imputer.gbm_rounds = 30;
  return p;
}

SimPlan SimPlan::paper() {
  SimPlan p;
  p.preset = "paper";
  p.n_individuals = 2482;
  p.replications = 1000;
  p.r_max = 1200;
  p.m = 10;
  p.imputer.rf_trees = 10;
  p.imputer.ranger_trees = 500;
  p.imputer.gbm_rounds = 100;
  return p;
}

SimPlan SimPlan::named(std::string_view preset) {
  if (preset == "desk") return desk();
  if (preset == "paper") return paper();
  throw ConfigError("unknown preset '" + std::string(preset) + "' (known: desk, paper)");
}

const std::vector<std::uint64_t>& desk_seeds() {
  static const std::vector<std::uint64_t> seeds{1, 2, 3};
  return seeds;
}

analyze::ModelSpec analysis_model(const SimPlan& plan) {
  analyze::ModelSpec spec;
  spec.outcome = synthgen::kOutcomeColumn;
  spec.refs = synthgen::reference_levels();
  spec.wave_dummies = true;
  spec.waves = plan.waves();
  spec.wave_ref = plan.first_wave;
  return spec;
}

}  // namespace mdlab::harness
