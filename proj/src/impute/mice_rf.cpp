#include <cmath>

#include "mdlab/impute/chain.hpp"
#include "mdlab/treelearn/forest.hpp"
#include "runners.hpp"

namespace mdlab::impute::detail {

using tabular::Dataset;

int forest_mtry(const ImputerSpec& spec, std::size_t num_features) {
  int p = static_cast<int>(num_features);
  int m = spec.mtry > 0 ? spec.mtry : static_cast<int>(std::floor(std::sqrt(static_cast<double>(p))));
  return std::max(1, std::min(m, p));
}

// Donor-leaf sampling: each missing row gets the observed target of a
// member drawn uniformly from its leaf in a uniformly drawn tree.
Dataset run_mice_rf(const Dataset& ds, const ImputerSpec& spec, Rng& rng, RunLog& log) {
  ChainState state = initialize(ds, rng);
  if (state.visit_order.empty()) return completed(state);
  const bool wave = spec.use_wave && ds.has_panel_keys();

  std::vector<std::vector<std::size_t>> obs, mis;
  for (std::size_t col : state.visit_order) {
    obs.push_back(state.observed_rows(col));
    mis.push_back(state.missing_rows(col));
  }

  for (int it = 1; it <= spec.effective_iters(); ++it) {
    state.iteration = it;
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
      cfg.num_trees = spec.rf_trees;
      cfg.mtry = forest_mtry(spec, Xo.n_features());
      cfg.min_leaf = spec.min_leaf;
      cfg.max_bins = spec.max_bins;
      cfg.seed = rng();
      cfg.keep_members = true;
      cfg.compute_oob = false;
      auto forest = treelearn::fit_forest(Xo, y, cfg);

      const auto& trees = forest.trees();
      for (std::size_t i = 0; i < mis[v].size(); ++i) {
        const auto& tree = trees[uniform_index(rng, trees.size())];
        const auto& members = tree.leaves()[tree.leaf_index(Xm, i)].members;
        state.current.set_value(mis[v][i], col, y[members[uniform_index(rng, members.size())]]);
      }
      log.visit(it, ds.column(col).name, mis[v].size());
    }
  }
  log.sweeps = spec.effective_iters();
  return completed(state);
}

}  // namespace mdlab::impute::detail
