#include "mdlab/impute/spec.hpp"

#include <cmath>

#include "mdlab/common/errors.hpp"

namespace mdlab::impute {

namespace {

struct MethodName {
  Method method;
  const char* name;
};

constexpr MethodName kNames[] = {
    {Method::MicePmm, "mice_pmm"},
    {Method::MiceRf, "mice_rf"},
    {Method::MissRanger, "missranger"},
    {Method::MissRangerPmm, "missranger_pmm"},
    {Method::MixGb, "mixgb"},
};

}  // namespace

std::string_view to_string(Method method) {
  for (const auto& n : kNames) {
    if (n.method == method) return n.name;
  }
  return "unknown";
}

Method parse_method(std::string_view text) {
  for (const auto& n : kNames) {
    if (text == n.name) return n.method;
  }
  std::string known;
  for (const auto& n : kNames) known += (known.empty() ? "" : ", ") + std::string(n.name);
  throw ConfigError("unknown imputation method '" + std::string(text) + "' (known: " + known + ")");
}

const std::vector<Method>& all_methods() {
  static const std::vector<Method> methods{Method::MicePmm, Method::MiceRf, Method::MissRanger,
                                           Method::MissRangerPmm, Method::MixGb};
  return methods;
}

int ImputerSpec::effective_iters() const {
  if (iters > 0) return iters;
  switch (method) {
    case Method::MicePmm:
    case Method::MiceRf:
      return 5;
    case Method::MissRanger:
    case Method::MissRangerPmm:
      return 10;
    case Method::MixGb:
      return 1;
  }
  return 1;
}

void ImputerSpec::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError("imputer spec: " + msg); };
  if (m < 1) fail("m must be >= 1");
  if (k < 1) fail("k must be >= 1");
  if (iters < 0) fail("iters must be >= 1 (or 0 for the method default)");
  if (rf_trees < 1 || ranger_trees < 1) fail("forest sizes must be >= 1");
  if (mtry < 0 || min_leaf < 0) fail("mtry and min_leaf must be >= 0");
  if (gbm_rounds < 1) fail("gbm_rounds must be >= 1");
  if (!(gbm_eta > 0)) fail("gbm_eta must be > 0");
  if (gbm_max_depth < 1) fail("gbm_max_depth must be >= 1");
  if (!(gbm_subsample > 0 && gbm_subsample <= 1)) fail("gbm_subsample must lie in (0, 1]");
  if (gbm_lambda < 0 || gbm_min_child_weight < 0) fail("gbm_lambda and gbm_min_child_weight must be >= 0");
  if (threads < 1) fail("threads must be >= 1");
}

Json ImputerSpec::to_json() const {
  return Json{{"method", to_string(method)},
              {"m", m},
              {"iters", effective_iters()},
              {"k", k},
              {"rf_trees", rf_trees},
              {"ranger_trees", ranger_trees},
              {"mtry", mtry},
              {"min_leaf", min_leaf},
              {"max_bins", max_bins},
              {"gbm_rounds", gbm_rounds},
              {"gbm_eta", gbm_eta},
              {"gbm_max_depth", gbm_max_depth},
              {"gbm_subsample", gbm_subsample},
              {"gbm_lambda", gbm_lambda},
              {"gbm_min_child_weight", gbm_min_child_weight},
              {"use_wave", use_wave},
              {"threads", threads}};
}

ImputerSpec ImputerSpec::from_json(const Json& j) {
  ImputerSpec s;
  try {
    if (j.contains("method")) s.method = parse_method(j.at("method").get<std::string>());
    s.m = j.value("m", s.m);
    s.iters = j.value("iters", s.iters);
    s.k = j.value("k", s.k);
    s.rf_trees = j.value("rf_trees", s.rf_trees);
    s.ranger_trees = j.value("ranger_trees", s.ranger_trees);
    s.mtry = j.value("mtry", s.mtry);
    s.min_leaf = j.value("min_leaf", s.min_leaf);
    s.max_bins = j.value("max_bins", s.max_bins);
    s.gbm_rounds = j.value("gbm_rounds", s.gbm_rounds);
    s.gbm_eta = j.value("gbm_eta", s.gbm_eta);
    s.gbm_max_depth = j.value("gbm_max_depth", s.gbm_max_depth);
    s.gbm_subsample = j.value("gbm_subsample", s.gbm_subsample);
    s.gbm_lambda = j.value("gbm_lambda", s.gbm_lambda);
    s.gbm_min_child_weight = j.value("gbm_min_child_weight", s.gbm_min_child_weight);
    s.use_wave = j.value("use_wave", s.use_wave);
    s.threads = j.value("threads", s.threads);
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("imputer spec: ") + e.what());
  }
  s.validate();
  return s;
}

Json Provenance::to_json() const {
  Json traces_json = Json::array();
  for (const auto& t : traces) {
    Json e{{"imputation", t.imputation}, {"iteration", t.iteration}, {"column", t.column},
           {"n_imputed", t.n_imputed}};
    if (t.oob_error >= 0) e["oob_error"] = t.oob_error;
    traces_json.push_back(std::move(e));
  }
  return Json{{"method", to_string(method)},
              {"spec", spec.to_json()},
              {"seed", seed},
              {"seconds", seconds},
              {"imputation_seconds", imputation_seconds},
              {"sweeps", sweeps},
              {"warnings", warnings},
              {"traces", std::move(traces_json)}};
}

}  // namespace mdlab::impute
