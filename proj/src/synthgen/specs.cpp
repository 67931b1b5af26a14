#include "mdlab/synthgen/specs.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "mdlab/common/errors.hpp"
#include "mdlab/treelearn/serialize.hpp"

namespace mdlab::synthgen {

using tabular::ColumnInfo;
using tabular::ColumnKind;
using tabular::ColumnType;

namespace {

std::vector<std::string> digits(int n) {
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) out.push_back(std::to_string(i));
  return out;
}

std::vector<std::string> one_to(int n) {
  std::vector<std::string> out;
  for (int i = 1; i <= n; ++i) out.push_back(std::to_string(i));
  return out;
}

void check_probs(const std::string& what, const std::vector<double>& p, std::size_t expected) {
  if (p.size() != expected) {
    throw ConfigError(what + ": expected " + std::to_string(expected) + " probabilities, got " +
                      std::to_string(p.size()));
  }
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0) || v > 1.0) throw ConfigError(what + ": probability outside [0, 1]");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ConfigError(what + ": probabilities sum to " + std::to_string(sum));
}

void check_unit(const std::string& what, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(what + " must lie in [0, 1]");
}

void check_per_wave(const std::string& what, const std::vector<double>& v, int n_waves) {
  if (v.size() < static_cast<std::size_t>(n_waves)) {
    throw ConfigError(what + ": " + std::to_string(v.size()) + " values for " + std::to_string(n_waves) +
                      " waves");
  }
}

}  // namespace

const std::vector<ColumnInfo>& panel_columns() {
  static const std::vector<ColumnInfo> columns = {
      {"age", ColumnType::metric()},
      {"childhh1_number", ColumnType::metric()},
      {"contactattempts", ColumnType::metric()},
      {"leftright_2013", ColumnType::metric()},
      {"ln_real_inc", ColumnType::metric()},
      {"siblings", ColumnType::metric()},
      {"workinghrs", ColumnType::metric()},
      {"work_experience", ColumnType::metric()},
      {"birthcountry", ColumnType::binary({"Abroad", "in Germany"})},
      {"fixedterm", ColumnType::binary({"no", "yes"})},
      {"ilearn", ColumnType::binary(digits(2))},
      {"music_classic", ColumnType::binary(digits(2))},
      {"wb", ColumnType::binary(digits(2))},
      {"woman", ColumnType::binary(digits(2))},
      {"comp_size", ColumnType::ordinal(one_to(4))},
      {"education", ColumnType::ordinal({"Lower Secondary", "Secondary", "Abitur", "University"})},
      {"kldb", ColumnType::ordinal({"Low", "Skilled", "Complex", "Highly Complex"})},
      {"parentsEd", ColumnType::ordinal(digits(5))},
      {"volunteering", ColumnType::ordinal(digits(3))},
      {"federalstate",
       ColumnType::nominal({"Schleswig-Holstein", "Nordrhein-Westfalen", "Niedersachsen", "Rheinland-Pfalz",
                            "Sachsen", "Hessen", "Brandenburg", "Bayern", "Baden-Wuerttemberg",
                            "Berlin (Gesamt)", "Sachsen-Anhalt", "Thueringen", "Mecklenburg-Vorpommern",
                            "Bremen", "Hamburg", "Saarland"})},
      {"maritalstatus", ColumnType::nominal({"single", "married", "divorced", "widowed"})},
      {"sector", ColumnType::nominal(one_to(4))},
  };
  return columns;
}

const ColumnInfo& panel_column(const std::string& name) {
  for (const auto& c : panel_columns()) {
    if (c.name == name) return c;
  }
  throw ConfigError("unknown panel variable '" + name + "'");
}

const std::map<std::string, std::string>& reference_levels() {
  static const std::map<std::string, std::string> refs = {
      {"birthcountry", "Abroad"},  {"fixedterm", "no"},          {"ilearn", "0"},
      {"music_classic", "0"},      {"wb", "0"},                  {"woman", "0"},
      {"comp_size", "3"},          {"education", "Secondary"},   {"kldb", "Skilled"},
      {"parentsEd", "1"},          {"volunteering", "0"},        {"federalstate", "Nordrhein-Westfalen"},
      {"maritalstatus", "married"}, {"sector", "3"},
  };
  return refs;
}

std::vector<int> PanelConfig::waves() const {
  std::vector<int> w(static_cast<std::size_t>(n_waves));
  for (int i = 0; i < n_waves; ++i) w[i] = first_wave + i;
  return w;
}

void PanelConfig::validate() const {
  if (n_individuals < 1) throw ConfigError("n_individuals must be at least 1");
  if (n_waves < 2) throw ConfigError("n_waves must be at least 2");
}

void MarginalSpec::validate(int n_waves) const {
  std::set<std::string> seen;
  for (const auto& m : constant) {
    const ColumnInfo& col = panel_column(m.column);
    if (!seen.insert(m.column).second) throw ConfigError("duplicate marginal for '" + m.column + "'");
    if (col.type.is_categorical()) {
      check_probs(m.column, m.probs, col.type.num_levels());
    } else {
      check_probs(m.column, m.probs, m.probs.size());
      if (m.probs.empty()) throw ConfigError(m.column + ": empty probability vector");
    }
  }
  if (!(age.sd > 0.0)) throw ConfigError("age: sd must be positive");
  if (!(age.low < age.high)) throw ConfigError("age: truncation bounds need low < high");
  if (age.high - (n_waves - 1) < age.low) {
    throw ConfigError("age: bounds leave no room for " + std::to_string(n_waves) + " waves");
  }
  check_per_wave("contactattempts rates", contact_rates, n_waves);
  for (double r : contact_rates) {
    if (!(r > 0.0)) throw ConfigError("contactattempts: rates must be positive");
  }
  if (!(contact_max >= contact_shift)) throw ConfigError("contactattempts: max below shift");
  check_per_wave("wb", wb_p, n_waves);
  check_per_wave("ilearn", ilearn_p, n_waves);
  for (double p : wb_p) check_unit("wb probability", p);
  for (double p : ilearn_p) check_unit("ilearn probability", p);
  check_probs("maritalstatus initial", marital_initial, panel_column("maritalstatus").type.num_levels());
  check_unit("maritalstatus forward transition", marital_forward);
  check_unit("fixedterm initial", fixedterm_initial);
  check_unit("fixedterm exit transition", fixedterm_exit);
}

MarginalSpec default_marginals() {
  MarginalSpec m;
  m.constant = {
      {"leftright_2013", {0.005, 0.01, 0.03, 0.09, 0.11, 0.30, 0.16, 0.17, 0.09, 0.025, 0.01}},
      {"siblings", {0.18, 0.33, 0.24, 0.11, 0.06, 0.04, 0.02, 0.02}},
      {"birthcountry", {0.05, 0.95}},
      {"music_classic", {0.46, 0.54}},
      {"woman", {0.52, 0.48}},
      {"comp_size", {0.13, 0.11, 0.38, 0.38}},
      {"education", {0.14, 0.36, 0.17, 0.33}},
      {"parentsEd", {0.012, 0.562, 0.20, 0.222, 0.004}},
      {"volunteering", {0.48, 0.13, 0.39}},
      {"federalstate",
       {0.030, 0.215, 0.110, 0.055, 0.044, 0.088, 0.031, 0.161, 0.118, 0.036, 0.033, 0.031, 0.014, 0.007,
        0.015, 0.012}},
      {"sector", {0.30, 0.30, 0.39, 0.01}},
  };
  // Underlying normal chosen so that the rounded, truncated wave-1 age has
  // mean 44.97 and, over five waves, mean 46.97 and SD 8.36.
  m.age = {45.35, 9.03, 23.0, 67.0};
  for (double mean : {16.15, 9.0, 4.0, 2.0, 1.0}) m.contact_rates.push_back(1.0 / mean);
  m.wb_p = {0.33, 0.35, 0.37, 0.39, 0.41};
  m.ilearn_p = {0.70, 0.72, 0.74, 0.76, 0.78};
  m.marital_initial = {0.21, 0.78, 0.005, 0.005};
  m.fixedterm_initial = 0.0721;
  return m;
}

const std::vector<std::string>& endogenous_order() {
  static const std::vector<std::string> order = {"kldb", "workinghrs", "work_experience", "childhh1_number"};
  return order;
}

std::vector<treelearn::FeatureInfo> predictor_features(const std::vector<std::string>& predictors) {
  std::vector<treelearn::FeatureInfo> out;
  for (const auto& name : predictors) {
    const ColumnInfo& col = panel_column(name);
    treelearn::FeatureInfo f;
    f.name = name;
    if (col.type.kind() == ColumnKind::Nominal || col.type.kind() == ColumnKind::Binary) {
      f.kind = treelearn::FeatureKind::Nominal;
      f.num_levels = static_cast<int>(col.type.num_levels());
    }
    out.push_back(f);
  }
  return out;
}

namespace {

void check_predictors(const std::string& target, const std::vector<std::string>& predictors,
                      std::size_t num_features) {
  const auto& order = endogenous_order();
  auto pos = std::find(order.begin(), order.end(), target) - order.begin();
  if (predictors.size() != num_features) {
    throw ConfigError(target + ": model expects " + std::to_string(num_features) + " features, " +
                      std::to_string(predictors.size()) + " predictors listed");
  }
  for (const auto& p : predictors) {
    panel_column(p);
    if (p == kOutcomeColumn) throw ConfigError(target + ": the outcome cannot be a predictor");
    auto q = std::find(order.begin(), order.end(), p) - order.begin();
    if (q < static_cast<std::ptrdiff_t>(order.size()) && q >= pos) {
      throw ConfigError(target + ": predictor '" + p + "' is generated later");
    }
  }
}

void check_classes(const std::string& target, treelearn::Task task, int num_classes, int expected) {
  if (task != treelearn::Task::Classification || num_classes != expected) {
    throw ConfigError(target + ": expected a classifier over " + std::to_string(expected) + " classes");
  }
}

}  // namespace

void EndogenousModelSpec::validate() const {
  check_predictors("kldb", kldb.predictors, kldb.model.num_features());
  check_predictors("workinghrs", workinghrs.predictors, workinghrs.model.num_features());
  check_predictors("work_experience", work_experience.predictors, work_experience.model.num_features());
  if (childhh.model.trees().empty()) throw ConfigError("childhh1_number: forest has no trees");
  check_predictors("childhh1_number", childhh.predictors, childhh.model.trees().front().num_features());
  check_classes("kldb", kldb.model.task(), kldb.model.num_classes(),
                static_cast<int>(panel_column("kldb").type.num_levels()));
  if (workinghrs.model.task() != treelearn::Task::Regression ||
      work_experience.model.task() != treelearn::Task::Regression) {
    throw ConfigError("workinghrs and work_experience need regression trees");
  }
  if (childhh.model.task() != treelearn::Task::Classification) {
    throw ConfigError("childhh1_number: expected a classification forest");
  }
  if (!(workinghrs_min <= workinghrs_max)) throw ConfigError("workinghrs: min above max");
  if (!(experience_increment_low <= experience_increment_high)) {
    throw ConfigError("work_experience: increment bounds reversed");
  }
  check_unit("childhh1_number aging-out probability", child_ageout);
}

void OutcomeModel::validate() const {
  if (!(noise_sd >= 0.0)) throw ConfigError("outcome noise_sd must be non-negative");
  std::set<std::string> seen;
  for (const auto& [term, coef] : coefficients) {
    if (!seen.insert(term).second) throw ConfigError("duplicate outcome term '" + term + "'");
    if (!std::isfinite(coef)) throw ConfigError("outcome term '" + term + "' has a non-finite coefficient");
  }
}

OutcomeModel default_outcome() {
  OutcomeModel m;
  m.intercept = 7.1481521;
  m.coefficients = {
      {"wave[3]", 0.015},
      {"wave[4]", 0.028},
      {"wave[5]", 0.037},
      {"wave[6]", 0.048},
      {"contactattempts", 0.001},
      {"workinghrs", 0.031},
      {"kldb[Low]", -0.266},
      {"kldb[Complex]", 0.155},
      {"kldb[Highly Complex]", 0.237},
      {"fixedterm[yes]", -0.166},
      {"maritalstatus[single]", -0.058},
      {"education[Lower Secondary]", -0.067},
      {"education[Abitur]", 0.067},
      {"education[University]", 0.204},
      {"woman[1]", -0.172},
      {"age", -0.006},
      {"federalstate[Hamburg]", -0.058},
      {"federalstate[Bayern]", -0.033},
      {"federalstate[Berlin (Gesamt)]", -0.107},
      {"federalstate[Brandenburg]", -0.237},
      {"federalstate[Mecklenburg-Vorpommern]", 0.301},
      {"federalstate[Sachsen]", -0.276},
      {"federalstate[Sachsen-Anhalt]", -0.200},
      {"federalstate[Thueringen]", -0.268},
      {"wb[1]", 0.050},
      {"comp_size[1]", -0.185},
      {"comp_size[2]", -0.077},
      {"comp_size[4]", 0.168},
      {"sector[1]", 0.060},
      {"sector[4]", -0.169},
      {"parentsEd[3]", 0.059},
      {"ilearn[1]", 0.057},
      {"siblings", -0.014},
  };
  m.noise_mean = 0.0;
  m.noise_sd = std::sqrt(0.5);
  return m;
}

// ---- JSON -----------------------------------------------------------------

namespace {

template <class T>
T get_or(const Json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

Json tree_variable_json(const TreeVariable& v) {
  return Json{{"predictors", v.predictors}, {"model", treelearn::tree_to_json(v.model)}};
}

TreeVariable tree_variable_from(const Json& j) {
  return {j.at("predictors").get<std::vector<std::string>>(), treelearn::tree_from_json(j.at("model"))};
}

}  // namespace

Json to_json(const PanelConfig& cfg) {
  return Json{{"n_individuals", cfg.n_individuals},
              {"n_waves", cfg.n_waves},
              {"first_wave", cfg.first_wave},
              {"seed", cfg.seed}};
}

PanelConfig panel_config_from_json(const Json& j) {
  PanelConfig cfg;
  cfg.n_individuals = get_or<std::size_t>(j, "n_individuals", cfg.n_individuals);
  cfg.n_waves = get_or<int>(j, "n_waves", cfg.n_waves);
  cfg.first_wave = get_or<int>(j, "first_wave", cfg.first_wave);
  cfg.seed = get_or<std::uint64_t>(j, "seed", cfg.seed);
  return cfg;
}

Json to_json(const MarginalSpec& spec) {
  Json constant = Json::object();
  for (const auto& m : spec.constant) constant[m.column] = Json{{"family", "categorical"}, {"probs", m.probs}};
  return Json{
      {"constant", constant},
      {"age",
       {{"family", "truncated_normal"},
        {"mean", spec.age.mean},
        {"sd", spec.age.sd},
        {"low", spec.age.low},
        {"high", spec.age.high}}},
      {"contactattempts",
       {{"family", "exponential"},
        {"rates", spec.contact_rates},
        {"shift", spec.contact_shift},
        {"max", spec.contact_max}}},
      {"wb", {{"family", "bernoulli"}, {"p", spec.wb_p}}},
      {"ilearn", {{"family", "bernoulli"}, {"p", spec.ilearn_p}}},
      {"maritalstatus", {{"initial", spec.marital_initial}, {"forward", spec.marital_forward}}},
      {"fixedterm", {{"initial", spec.fixedterm_initial}, {"exit", spec.fixedterm_exit}}},
  };
}

MarginalSpec marginals_from_json(const Json& j) {
  try {
    MarginalSpec m;
    for (const auto& [name, v] : j.at("constant").items()) {
      m.constant.push_back({name, v.at("probs").get<std::vector<double>>()});
    }
    const Json& age = j.at("age");
    m.age = {age.at("mean").get<double>(), age.at("sd").get<double>(), age.at("low").get<double>(),
             age.at("high").get<double>()};
    const Json& c = j.at("contactattempts");
    m.contact_rates = c.at("rates").get<std::vector<double>>();
    m.contact_shift = get_or<double>(c, "shift", 1.0);
    m.contact_max = get_or<double>(c, "max", 200.0);
    m.wb_p = j.at("wb").at("p").get<std::vector<double>>();
    m.ilearn_p = j.at("ilearn").at("p").get<std::vector<double>>();
    m.marital_initial = j.at("maritalstatus").at("initial").get<std::vector<double>>();
    m.marital_forward = j.at("maritalstatus").at("forward").get<double>();
    m.fixedterm_initial = j.at("fixedterm").at("initial").get<double>();
    m.fixedterm_exit = j.at("fixedterm").at("exit").get<double>();
    return m;
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("marginal spec: ") + e.what());
  }
}

Json to_json(const EndogenousModelSpec& spec) {
  return Json{
      {"kldb", tree_variable_json(spec.kldb)},
      {"workinghrs",
       {{"predictors", spec.workinghrs.predictors},
        {"min", spec.workinghrs_min},
        {"max", spec.workinghrs_max},
        {"decimals", spec.workinghrs_decimals},
        {"model", treelearn::tree_to_json(spec.workinghrs.model)}}},
      {"work_experience",
       {{"predictors", spec.work_experience.predictors},
        {"min", spec.experience_min},
        {"entry_age", spec.experience_entry_age},
        {"increment_low", spec.experience_increment_low},
        {"increment_high", spec.experience_increment_high},
        {"decimals", spec.experience_decimals},
        {"model", treelearn::tree_to_json(spec.work_experience.model)}}},
      {"childhh1_number",
       {{"predictors", spec.childhh.predictors},
        {"ageout", spec.child_ageout},
        {"model", treelearn::forest_to_json(spec.childhh.model)}}},
  };
}

EndogenousModelSpec endogenous_from_json(const Json& j) {
  try {
    EndogenousModelSpec s;
    s.kldb = tree_variable_from(j.at("kldb"));
    const Json& wh = j.at("workinghrs");
    s.workinghrs = tree_variable_from(wh);
    s.workinghrs_min = get_or<double>(wh, "min", s.workinghrs_min);
    s.workinghrs_max = get_or<double>(wh, "max", s.workinghrs_max);
    s.workinghrs_decimals = get_or<int>(wh, "decimals", s.workinghrs_decimals);
    const Json& we = j.at("work_experience");
    s.work_experience = tree_variable_from(we);
    s.experience_min = get_or<double>(we, "min", s.experience_min);
    s.experience_entry_age = get_or<double>(we, "entry_age", s.experience_entry_age);
    s.experience_increment_low = get_or<double>(we, "increment_low", s.experience_increment_low);
    s.experience_increment_high = get_or<double>(we, "increment_high", s.experience_increment_high);
    s.experience_decimals = get_or<int>(we, "decimals", s.experience_decimals);
    const Json& ch = j.at("childhh1_number");
    s.childhh.predictors = ch.at("predictors").get<std::vector<std::string>>();
    s.childhh.model = treelearn::forest_from_json(ch.at("model"));
    s.child_ageout = get_or<double>(ch, "ageout", s.child_ageout);
    return s;
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("endogenous model spec: ") + e.what());
  }
}

Json to_json(const OutcomeModel& model) {
  Json coef = Json::object();
  for (const auto& [term, c] : model.coefficients) coef[term] = c;
  return Json{{"intercept", model.intercept},
              {"coefficients", coef},
              {"noise_mean", model.noise_mean},
              {"noise_sd", model.noise_sd}};
}

OutcomeModel outcome_from_json(const Json& j) {
  try {
    OutcomeModel m;
    m.intercept = j.at("intercept").get<double>();
    for (const auto& [term, c] : j.at("coefficients").items()) m.coefficients.emplace_back(term, c.get<double>());
    m.noise_mean = get_or<double>(j, "noise_mean", 0.0);
    m.noise_sd = j.at("noise_sd").get<double>();
    return m;
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("outcome model: ") + e.what());
  }
}

}  // namespace mdlab::synthgen
