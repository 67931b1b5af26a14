#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <optional>
#include <random>

#include "mdlab/impute/chain.hpp"
#include "mdlab/impute/pmm.hpp"
#include "mdlab/tabular/encoding.hpp"
#include "runners.hpp"

namespace mdlab::impute::detail {

using tabular::Dataset;

namespace {

constexpr double kRidge = 1e-8;

struct Target {
  std::size_t col = 0;
  std::vector<std::size_t> obs;
  std::vector<std::size_t> mis;
  std::optional<tabular::DummyLayout> layout;
};

// Linear predictor draw in the style of mice's norm.draw: sigma* from the
// scaled inverse chi-square, beta* = beta_hat + sigma* L^{-T} z where
// X'X = L L'. Returns predictions for observed rows (beta_hat) and missing
// rows (beta*). Columns constant over the observed rows are dropped.
void predict_pair(const Eigen::MatrixXd& X, const Target& t, const Dataset& cur, Rng& rng, RunLog& log,
                  std::vector<double>& pred_obs, std::vector<double>& pred_mis) {
  const Eigen::Index p_all = X.cols();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index j = 0; j < p_all; ++j) {
    double first = X(static_cast<Eigen::Index>(t.obs[0]), j);
    bool constant = true;
    for (std::size_t r : t.obs) {
      if (X(static_cast<Eigen::Index>(r), j) != first) {
        constant = false;
        break;
      }
    }
    // The intercept is the one constant column worth keeping.
    if (!constant || (j == 0 && first == 1.0)) keep.push_back(j);
  }
  const Eigen::Index p = static_cast<Eigen::Index>(keep.size());
  const Eigen::Index no = static_cast<Eigen::Index>(t.obs.size());
  const Eigen::Index nm = static_cast<Eigen::Index>(t.mis.size());

  Eigen::MatrixXd Xo(no, p), Xm(nm, p);
  Eigen::VectorXd yo(no);
  for (Eigen::Index i = 0; i < no; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) Xo(i, j) = X(static_cast<Eigen::Index>(t.obs[i]), keep[j]);
    yo(i) = cur.value(t.obs[i], t.col);
  }
  for (Eigen::Index i = 0; i < nm; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) Xm(i, j) = X(static_cast<Eigen::Index>(t.mis[i]), keep[j]);
  }

  Eigen::MatrixXd xtx = Xo.transpose() * Xo;
  Eigen::LLT<Eigen::MatrixXd> llt(xtx);
  bool singular = llt.info() != Eigen::Success;
  if (!singular) {
    Eigen::VectorXd d = llt.matrixLLT().diagonal();
    double dmax = d.cwiseAbs().maxCoeff();
    singular = d.cwiseAbs().minCoeff() <= 1e-7 * dmax;
  }
  if (singular) {
    double scale = std::max(xtx.diagonal().maxCoeff(), 1.0);
    xtx.diagonal().array() += kRidge * scale;
    llt.compute(xtx);
    log.warnings.push_back("mice_pmm: singular design for '" + cur.column(t.col).name +
                           "', ridge fallback applied");
  }
  Eigen::VectorXd beta = llt.solve(Xo.transpose() * yo);
  double rss = (yo - Xo * beta).squaredNorm();
  double df = std::max<double>(static_cast<double>(no - p), 1.0);
  double sigma = std::sqrt(rss / std::chi_squared_distribution<double>(df)(rng));

  std::normal_distribution<double> normal;
  Eigen::VectorXd z(p);
  for (Eigen::Index j = 0; j < p; ++j) z(j) = normal(rng);
  Eigen::VectorXd beta_star = beta + sigma * llt.matrixU().solve(z);

  Eigen::VectorXd po = Xo * beta, pm = Xm * beta_star;
  pred_obs.assign(po.data(), po.data() + no);
  pred_mis.assign(pm.data(), pm.data() + nm);
}

}  // namespace

Dataset run_mice_pmm(const Dataset& ds, const ImputerSpec& spec, Rng& rng, RunLog& log) {
  ChainState state = initialize(ds, rng);
  if (state.visit_order.empty()) return completed(state);

  const bool wave = spec.use_wave && ds.has_panel_keys();
  std::vector<Target> targets;
  for (std::size_t col : state.visit_order) {
    Target t;
    t.col = col;
    t.obs = state.observed_rows(col);
    t.mis = state.missing_rows(col);
    tabular::EncodeOptions opt;
    for (std::size_t c = 0; c < ds.n_cols(); ++c) {
      if (c != col) opt.columns.push_back(ds.column(c).name);
    }
    opt.intercept = true;
    opt.wave_dummies = wave;
    opt.require_observed = false;
    t.layout.emplace(ds, opt);
    targets.push_back(std::move(t));
  }

  std::vector<double> pred_obs, pred_mis, obs_values;
  for (int it = 1; it <= spec.effective_iters(); ++it) {
    state.iteration = it;
    for (const Target& t : targets) {
      Eigen::MatrixXd X = t.layout->encode(state.current);
      predict_pair(X, t, state.current, rng, log, pred_obs, pred_mis);
      obs_values.resize(t.obs.size());
      for (std::size_t i = 0; i < t.obs.size(); ++i) obs_values[i] = state.current.value(t.obs[i], t.col);
      auto drawn = pmm_match(pred_mis, pred_obs, obs_values, spec.k, rng, &log.warnings);
      for (std::size_t i = 0; i < t.mis.size(); ++i) state.current.set_value(t.mis[i], t.col, drawn[i]);
      log.visit(it, ds.column(t.col).name, t.mis.size());
    }
  }
  log.sweeps = spec.effective_iters();
  return completed(state);
}

}  // namespace mdlab::impute::detail
