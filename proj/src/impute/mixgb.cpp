#include <algorithm>
#include <map>

#include "mdlab/impute/chain.hpp"
#include "mdlab/impute/pmm.hpp"
#include "mdlab/treelearn/gbm.hpp"
#include "runners.hpp"

namespace mdlab::impute::detail {

using tabular::Dataset;

// One bootstrap of all rows per imputation; each variable trains on the
// bootstrap rows where it was observed. Metric targets are matched
// against the bootstrap model's predictions on every observed row;
// categorical targets take the predicted class.
Dataset run_mixgb(const Dataset& ds, const ImputerSpec& spec, Rng& rng, RunLog& log) {
  ChainState state = initialize(ds, rng);
  if (state.visit_order.empty()) return completed(state);
  const bool wave = spec.use_wave && ds.has_panel_keys();

  std::vector<std::size_t> boot(ds.n_rows());
  for (auto& r : boot) r = uniform_index(rng, ds.n_rows());
  std::sort(boot.begin(), boot.end());

  for (int it = 1; it <= spec.effective_iters(); ++it) {
    state.iteration = it;
    for (std::size_t col : state.visit_order) {
      const auto& type = ds.column(col).type;
      std::vector<std::size_t> train, obs = state.observed_rows(col), mis = state.missing_rows(col);
      for (std::size_t r : boot) {
        if (!state.was_missing(r, col)) train.push_back(r);
      }
      if (train.empty()) train = obs;  // tiny data: the bootstrap missed every observed row

      auto Xt = predictor_matrix(state.current, col, wave, &train);
      auto Xm = predictor_matrix(state.current, col, wave, &mis);
      std::vector<double> y(train.size());
      for (std::size_t i = 0; i < y.size(); ++i) y[i] = state.current.value(train[i], col);

      treelearn::GbmConfig cfg;
      cfg.eta = spec.gbm_eta;
      cfg.lambda = spec.gbm_lambda;
      cfg.max_depth = spec.gbm_max_depth;
      cfg.subsample = spec.gbm_subsample;
      cfg.n_rounds = spec.gbm_rounds;
      cfg.min_child_weight = spec.gbm_min_child_weight;
      cfg.max_bins = spec.max_bins;
      cfg.seed = rng();

      std::vector<double> imputed(mis.size());
      if (!type.is_categorical()) {
        cfg.loss = treelearn::GbmLoss::Squared;
        auto model = treelearn::fit_gbm(Xt, y, cfg);
        auto Xo = predictor_matrix(state.current, col, wave, &obs);
        std::vector<double> pred_obs(obs.size()), pred_mis(mis.size()), obs_values(obs.size());
        for (std::size_t i = 0; i < obs.size(); ++i) {
          pred_obs[i] = model.predict(Xo, i);
          obs_values[i] = state.current.value(obs[i], col);
        }
        for (std::size_t i = 0; i < mis.size(); ++i) pred_mis[i] = model.predict(Xm, i);
        imputed = pmm_match(pred_mis, pred_obs, obs_values, spec.k, rng, &log.warnings);
      } else {
        // Train on compressed labels so absent levels never reach the learner.
        std::map<int, int> to_label;
        for (double v : y) to_label.emplace(static_cast<int>(v), 0);
        std::vector<int> classes;
        for (auto& [level, label] : to_label) {
          label = static_cast<int>(classes.size());
          classes.push_back(level);
        }
        if (classes.size() == 1) {
          std::fill(imputed.begin(), imputed.end(), classes[0]);
        } else {
          std::vector<double> labels(y.size());
          for (std::size_t i = 0; i < y.size(); ++i) labels[i] = to_label[static_cast<int>(y[i])];
          cfg.loss = classes.size() == 2 ? treelearn::GbmLoss::Logistic : treelearn::GbmLoss::Softmax;
          cfg.num_classes = classes.size() == 2 ? 0 : static_cast<int>(classes.size());
          auto model = treelearn::fit_gbm(Xt, labels, cfg);
          for (std::size_t i = 0; i < mis.size(); ++i) imputed[i] = classes[model.predict_class(Xm, i)];
        }
      }
      for (std::size_t i = 0; i < mis.size(); ++i) state.current.set_value(mis[i], col, imputed[i]);
      log.visit(it, ds.column(col).name, mis.size());
    }
  }
  log.sweeps = spec.effective_iters();
  return completed(state);
}

}  // namespace mdlab::impute::detail
