#include <cmath>
#include <limits>

#include "mdlab/impute/chain.hpp"
#include "mdlab/impute/pmm.hpp"
#include "mdlab/treelearn/forest.hpp"
#include "runners.hpp"

namespace mdlab::impute::detail {

using tabular::Dataset;

namespace {

double variance(const std::vector<double>& y) {
  if (y.size() < 2) return 0.0;
  double mean = 0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double ss = 0;
  for (double v : y) ss += (v - mean) * (v - mean);
  return ss / static_cast<double>(y.size() - 1);
}

}  // namespace

// Chained forests. Each sweep refits every incomplete variable on its
// originally observed rows; the sweep error is the mean OOB error, with
// regression MSE divided by the target variance. Iteration stops at the
// first sweep that fails to improve, and the previous sweep is kept.
Dataset run_missranger(const Dataset& ds, const ImputerSpec& spec, bool use_pmm, Rng& rng, RunLog& log) {
  ChainState state = initialize(ds, rng);
  if (state.visit_order.empty()) return completed(state);
  const bool wave = spec.use_wave && ds.has_panel_keys();

  std::vector<std::vector<std::size_t>> obs, mis;
  for (std::size_t col : state.visit_order) {
    obs.push_back(state.observed_rows(col));
    mis.push_back(state.missing_rows(col));
  }

  Dataset kept = state.current;
  double previous = std::numeric_limits<double>::infinity();
  int kept_sweeps = 0;
  for (int it = 1; it <= spec.effective_iters(); ++it) {
    state.iteration = it;
    double total = 0;
    for (std::size_t v = 0; v < state.visit_order.size(); ++v) {
      const std::size_t col = state.visit_order[v];
      const auto& type = ds.column(col).type;
      auto Xo = predictor_matrix(state.current, col, wave, &obs[v]);
      auto Xm = predictor_matrix(state.current, col, wave, &mis[v]);
      std::vector<double> y(obs[v].size());
      for (std::size_t i = 0; i < y.size(); ++i) y[i] = state.current.value(obs[v][i], col);

      treelearn::ForestConfig cfg;
      cfg.task = type.is_categorical() ? treelearn::Task::Classification : treelearn::Task::Regression;
      cfg.num_classes = type.is_categorical() ? static_cast<int>(type.num_levels()) : 0;
      cfg.num_trees = spec.ranger_trees;
      cfg.mtry = forest_mtry(spec, Xo.n_features());
      cfg.min_leaf = spec.min_leaf;
      cfg.max_bins = spec.max_bins;
      cfg.seed = rng();
      cfg.keep_members = false;
      cfg.compute_oob = true;
      auto forest = treelearn::fit_forest(Xo, y, cfg);

      double err = forest.oob_error();
      if (!type.is_categorical()) {
        double var = variance(y);
        err = var > 0 ? err / var : 0.0;
      }
      total += err;

      std::vector<double> pred(mis[v].size());
      for (std::size_t i = 0; i < pred.size(); ++i) pred[i] = forest.predict(Xm, i);
      if (use_pmm) pred = pmm_match(pred, forest.oob_predictions(), y, spec.k, rng, &log.warnings);
      for (std::size_t i = 0; i < pred.size(); ++i) state.current.set_value(mis[v][i], col, pred[i]);
      log.visit(it, ds.column(col).name, mis[v].size(), err);
    }
    double mean_err = total / static_cast<double>(state.visit_order.size());
    if (it > 1 && !(mean_err < previous)) {
      break;
    }
    kept = state.current;
    kept_sweeps = it;
    previous = mean_err;
  }
  log.sweeps = kept_sweeps;
  state.current = std::move(kept);
  return completed(state);
}

}  // namespace mdlab::impute::detail
