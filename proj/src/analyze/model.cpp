#include "mdlab/analyze/model.hpp"

#include <algorithm>

#include "mdlab/common/errors.hpp"

namespace mdlab::analyze {

using tabular::Dataset;

std::vector<std::string> ModelSpec::regressor_names(const Dataset& ds) const {
  if (!regressors.empty()) return regressors;
  std::vector<std::string> out;
  for (const auto& c : ds.columns()) {
    if (c.name != outcome) out.push_back(c.name);
  }
  return out;
}

tabular::EncodeOptions ModelSpec::encode_options(const Dataset& ds) const {
  tabular::EncodeOptions opt;
  opt.columns = regressor_names(ds);
  opt.refs = refs;
  opt.wave_dummies = wave_dummies;
  opt.waves = waves;
  opt.wave_ref = wave_ref;
  return opt;
}

Json ModelSpec::to_json() const {
  Json r = Json::object();
  for (const auto& [k, v] : refs) r[k] = v;
  return Json{{"outcome", outcome},       {"regressors", regressors}, {"refs", r},
              {"wave_dummies", wave_dummies}, {"waves", waves},       {"wave_ref", wave_ref}};
}

ModelSpec ModelSpec::from_json(const Json& j) {
  try {
    ModelSpec s;
    s.outcome = j.at("outcome").get<std::string>();
    if (j.contains("regressors")) s.regressors = j.at("regressors").get<std::vector<std::string>>();
    if (j.contains("refs")) {
      for (const auto& [k, v] : j.at("refs").items()) s.refs[k] = v.get<std::string>();
    }
    s.wave_dummies = j.value("wave_dummies", false);
    if (j.contains("waves")) s.waves = j.at("waves").get<std::vector<int>>();
    s.wave_ref = j.value("wave_ref", -1);
    return s;
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("model spec: ") + e.what());
  }
}

namespace {

std::vector<double> outcome_values(const Dataset& ds, std::size_t col, const std::vector<std::size_t>* rows) {
  if (ds.column(col).type.is_categorical()) {
    throw ConfigError("outcome '" + ds.column(col).name + "' must be metric");
  }
  std::vector<double> y;
  auto take = [&](std::size_t r) {
    if (ds.is_missing(r, col)) {
      throw EncodingError("row " + std::to_string(r) + ", column '" + ds.column(col).name + "' is missing");
    }
    y.push_back(ds.value(r, col));
  };
  if (rows) {
    for (std::size_t r : *rows) take(r);
  } else {
    for (std::size_t r = 0; r < ds.n_rows(); ++r) take(r);
  }
  return y;
}

}  // namespace

FitResult fit_model(const Dataset& ds, const ModelSpec& spec) {
  tabular::DummyLayout layout(ds, spec.encode_options(ds));
  Eigen::MatrixXd X = layout.encode(ds);
  std::vector<double> y = outcome_values(ds, ds.index_of(spec.outcome), nullptr);
  Eigen::VectorXd yv = Eigen::Map<Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
  return ols_fit(yv, X, layout.labels());
}

ListwiseResult listwise_fit(const Dataset& ds, const ModelSpec& spec, std::size_t min_rows) {
  tabular::DummyLayout layout(ds, spec.encode_options(ds));
  std::vector<std::size_t> cols;
  cols.push_back(ds.index_of(spec.outcome));
  for (const auto& name : spec.regressor_names(ds)) cols.push_back(ds.index_of(name));

  ListwiseResult out;
  out.min_rows = min_rows ? min_rows : 10 * layout.width();
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < ds.n_rows(); ++r) {
    bool complete = std::none_of(cols.begin(), cols.end(), [&](std::size_t c) { return ds.is_missing(r, c); });
    if (complete) rows.push_back(r);
  }
  out.complete_rows = rows.size();
  if (rows.size() < out.min_rows) {
    out.skipped_reason = "skipped: insufficient complete cases (" + std::to_string(rows.size()) + " < " +
                         std::to_string(out.min_rows) + ")";
    return out;
  }
  Eigen::MatrixXd X = layout.encode(ds, &rows);
  std::vector<double> y = outcome_values(ds, cols[0], &rows);
  Eigen::VectorXd yv = Eigen::Map<Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
  try {
    out.fit = ols_fit(yv, X, layout.labels());
  } catch (const RankDeficientError& e) {
    out.skipped_reason = std::string("skipped: complete cases give a rank-deficient design: ") + e.what();
  }
  return out;
}

}  // namespace mdlab::analyze
