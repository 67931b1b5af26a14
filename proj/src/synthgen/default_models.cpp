#include "mdlab/synthgen/default_models.hpp"

#include <algorithm>
#include <random>
#include <set>

#include "mdlab/common/errors.hpp"
#include "mdlab/common/random.hpp"
#include "mdlab/synthgen/generator.hpp"

namespace mdlab::synthgen {

using tabular::Dataset;
namespace tl = treelearn;

namespace {

// First-wave row of every individual, in order of appearance.
std::vector<std::size_t> first_wave_rows(const Dataset& ds) {
  std::vector<std::size_t> rows;
  if (!ds.has_panel_keys()) {
    rows.resize(ds.n_rows());
    for (std::size_t r = 0; r < rows.size(); ++r) rows[r] = r;
    return rows;
  }
  std::set<std::int64_t> seen;
  for (std::size_t r = 0; r < ds.n_rows(); ++r) {
    if (seen.insert(ds.panel_keys()[r].id).second) rows.push_back(r);
  }
  return rows;
}

tl::FeatureMatrix features_of(const Dataset& ds, const std::vector<std::string>& predictors,
                              const std::vector<std::size_t>& rows) {
  tl::FeatureMatrix X(predictor_features(predictors), rows.size());
  for (std::size_t j = 0; j < predictors.size(); ++j) {
    std::size_t c = ds.index_of(predictors[j]);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (ds.is_missing(rows[i], c)) {
        throw ConfigError("seed panel: '" + predictors[j] + "' missing at row " + std::to_string(rows[i]));
      }
      X.set(i, j, ds.value(rows[i], c));
    }
  }
  return X;
}

std::vector<double> target_of(const Dataset& ds, const std::string& name, const std::vector<std::size_t>& rows) {
  std::size_t c = ds.index_of(name);
  std::vector<double> y(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (ds.is_missing(rows[i], c)) throw ConfigError("seed panel: '" + name + "' missing");
    y[i] = ds.value(rows[i], c);
  }
  return y;
}

TreeVariable fit_tree_variable(const Dataset& ds, const std::vector<std::string>& predictors,
                               const std::string& target, const std::vector<std::size_t>& rows, tl::Task task,
                               int num_classes, const EndogenousFitOptions& opt) {
  tl::FeatureMatrix X = features_of(ds, predictors, rows);
  std::vector<double> y = target_of(ds, target, rows);
  tl::TreeConfig cfg;
  cfg.task = task;
  cfg.num_classes = num_classes;
  cfg.max_depth = opt.tree_max_depth;
  cfg.min_leaf = opt.tree_min_leaf;
  cfg.seed = derive_seed(opt.seed, {stream_tag(target)});
  cfg.keep_members = false;
  return {predictors, tl::fit_tree(X, y, cfg)};
}

}  // namespace

EndogenousModelSpec fit_endogenous_models(const Dataset& seed_panel, const EndogenousFitOptions& opt) {
  std::vector<std::size_t> rows = first_wave_rows(seed_panel);
  if (rows.empty()) throw ConfigError("seed panel has no rows");
  EndogenousModelSpec spec;
  int kldb_levels = static_cast<int>(panel_column("kldb").type.num_levels());
  spec.kldb = fit_tree_variable(seed_panel, opt.kldb_predictors, "kldb", rows, tl::Task::Classification,
                                kldb_levels, opt);
  spec.workinghrs =
      fit_tree_variable(seed_panel, opt.workinghrs_predictors, "workinghrs", rows, tl::Task::Regression, 0, opt);
  spec.work_experience = fit_tree_variable(seed_panel, opt.experience_predictors, "work_experience", rows,
                                           tl::Task::Regression, 0, opt);

  tl::FeatureMatrix X = features_of(seed_panel, opt.child_predictors, rows);
  std::vector<double> y = target_of(seed_panel, "childhh1_number", rows);
  for (double v : y) {
    if (v < 0 || v != static_cast<double>(static_cast<int>(v))) {
      throw ConfigError("seed panel: childhh1_number must hold non-negative counts");
    }
  }
  tl::ForestConfig fc;
  fc.task = tl::Task::Classification;
  fc.num_classes = static_cast<int>(*std::max_element(y.begin(), y.end())) + 1;
  fc.num_trees = opt.forest_trees;
  fc.mtry = opt.forest_mtry;
  fc.min_leaf = opt.forest_min_leaf;
  fc.seed = derive_seed(opt.seed, {stream_tag("childhh1_number")});
  fc.keep_members = false;
  fc.compute_oob = false;
  spec.childhh = {opt.child_predictors, tl::fit_forest(X, y, fc)};
  spec.validate();
  return spec;
}

Dataset calibration_panel(const MarginalSpec& marg, std::size_t n_individuals, std::uint64_t seed) {
  PanelConfig cfg;
  cfg.n_individuals = n_individuals;
  cfg.seed = seed;
  Dataset ds = generate_independent(cfg, marg);
  const std::size_t W = static_cast<std::size_t>(cfg.n_waves);
  const std::size_t c_age = ds.index_of("age"), c_edu = ds.index_of("education"), c_woman = ds.index_of("woman");
  const std::size_t c_comp = ds.index_of("comp_size"), c_mar = ds.index_of("maritalstatus");
  const std::size_t c_kldb = ds.index_of("kldb"), c_hrs = ds.index_of("workinghrs");
  const std::size_t c_exp = ds.index_of("work_experience"), c_child = ds.index_of("childhh1_number");

  // kldb given education (rows: Lower Secondary, Secondary, Abitur, University).
  const double kldb_given_edu[4][4] = {
      {0.20, 0.70, 0.06, 0.04}, {0.05, 0.68, 0.17, 0.10}, {0.02, 0.45, 0.23, 0.30}, {0.005, 0.19, 0.16, 0.645}};
  const double hrs_kldb[4] = {-1.5, 0.0, 1.0, 1.0};
  const double hrs_comp[4] = {-2.0, -1.0, 0.0, 1.0};
  const double exp_edu[4] = {0.0, 1.0, 3.0, 6.0};
  const double child_counts[3] = {0.80, 0.17, 0.03};

  for (std::size_t i = 0; i < n_individuals; ++i) {
    Rng rng = make_rng(derive_seed(seed, {stream_tag("calibration"), i}));
    std::normal_distribution<double> z(0.0, 1.0);
    std::size_t r0 = i * W;
    double age = ds.value(r0, c_age);
    int edu = ds.level(r0, c_edu);
    bool woman = ds.level(r0, c_woman) == 1;
    bool married = ds.level(r0, c_mar) == 1;

    int kldb = static_cast<int>(draw_weighted(rng, kldb_given_edu[edu]));
    double hrs = (woman ? 32.3 : 41.5) + hrs_kldb[kldb] + hrs_comp[ds.level(r0, c_comp)] - 0.4 + 10.3 * z(rng);
    hrs = std::clamp(hrs, 0.0, 90.0);
    double exp = age - 18.0 - exp_edu[edu] - (woman && married ? 3.0 : 0.0) + 4.0 * z(rng);
    exp = std::clamp(exp, 0.17, std::max(0.17, age - 15.0));
    double p_child = age < 30 ? 0.27 : age < 40 ? 0.34 : age < 50 ? 0.09 : 0.0135;
    int children = uniform01(rng) < p_child ? 1 + static_cast<int>(draw_weighted(rng, child_counts)) : 0;

    for (std::size_t w = 0; w < W; ++w) {
      std::size_t r = r0 + w;
      ds.set_value(r, c_kldb, kldb);
      ds.set_value(r, c_hrs, hrs);
      ds.set_value(r, c_exp, exp);
      ds.set_value(r, c_child, children);
      for (std::size_t c : {c_kldb, c_hrs, c_exp, c_child}) ds.set_missing(r, c, false);
    }
  }
  return ds;
}

const EndogenousModelSpec& default_endogenous_models() {
  static const EndogenousModelSpec spec =
      fit_endogenous_models(calibration_panel(default_marginals(), 20000, 20240601));
  return spec;
}

}  // namespace mdlab::synthgen
