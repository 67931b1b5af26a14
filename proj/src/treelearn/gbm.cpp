#include "mdlab/treelearn/gbm.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mdlab/common/errors.hpp"

namespace mdlab::treelearn {

std::string_view to_string(GbmLoss loss) {
  switch (loss) {
    case GbmLoss::Squared: return "squared";
    case GbmLoss::Logistic: return "logistic";
    case GbmLoss::Softmax: return "softmax";
  }
  return "squared";
}

GbmLoss parse_gbm_loss(std::string_view text) {
  if (text == "squared") return GbmLoss::Squared;
  if (text == "logistic") return GbmLoss::Logistic;
  if (text == "softmax") return GbmLoss::Softmax;
  throw ConfigError("unknown boosting loss '" + std::string(text) + "'");
}

namespace {

constexpr double kProbFloor = 1e-6;
constexpr double kHessFloor = 1e-16;

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

void softmax_inplace(std::vector<double>& z) {
  double mx = *std::max_element(z.begin(), z.end());
  double s = 0;
  for (double& v : z) {
    v = std::exp(v - mx);
    s += v;
  }
  for (double& v : z) v /= s;
}

}  // namespace

std::vector<double> GbmModel::predict_margin(const FeatureMatrix& X, std::size_t row) const {
  std::vector<double> f = base_score_;
  for (const auto& round : rounds_) {
    for (std::size_t k = 0; k < round.size(); ++k) f[k] += config_.eta * round[k].predict(X, row);
  }
  return f;
}

double GbmModel::predict(const FeatureMatrix& X, std::size_t row) const {
  auto f = predict_margin(X, row);
  switch (config_.loss) {
    case GbmLoss::Squared: return f[0];
    case GbmLoss::Logistic: return sigmoid(f[0]);
    case GbmLoss::Softmax: return static_cast<double>(std::max_element(f.begin(), f.end()) - f.begin());
  }
  return f[0];
}

std::vector<double> GbmModel::predict_proba(const FeatureMatrix& X, std::size_t row) const {
  auto f = predict_margin(X, row);
  if (config_.loss == GbmLoss::Logistic) return {1.0 - sigmoid(f[0]), sigmoid(f[0])};
  if (config_.loss == GbmLoss::Softmax) softmax_inplace(f);
  return f;
}

int GbmModel::predict_class(const FeatureMatrix& X, std::size_t row) const {
  auto f = predict_margin(X, row);
  if (config_.loss == GbmLoss::Logistic) return f[0] > 0 ? 1 : 0;
  return static_cast<int>(std::max_element(f.begin(), f.end()) - f.begin());
}

GbmModel fit_gbm(const FeatureMatrix& X, std::span<const double> y, const GbmConfig& config) {
  const std::size_t n = X.n_rows();
  if (n == 0) throw FitError("fit_gbm: empty data");
  if (y.size() != n) throw DimensionError("fit_gbm: target length differs from feature rows");
  if (config.n_rounds < 0) throw ConfigError("fit_gbm: n_rounds must be >= 0");
  if (!(config.subsample > 0 && config.subsample <= 1)) throw ConfigError("fit_gbm: subsample must be in (0, 1]");
  if (!(config.eta > 0)) throw ConfigError("fit_gbm: eta must be positive");
  if (config.lambda < 0) throw ConfigError("fit_gbm: lambda must be >= 0");

  GbmModel model;
  model.config_ = config;
  int K = 1;
  std::vector<int> labels;
  if (config.loss != GbmLoss::Squared) {
    labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (y[i] < 0 || y[i] != std::floor(y[i])) throw FitError("fit_gbm: labels must be non-negative integers");
      labels[i] = static_cast<int>(y[i]);
    }
  }
  if (config.loss == GbmLoss::Squared) {
    double s = 0;
    for (double v : y) s += v;
    model.base_score_ = {s / static_cast<double>(n)};
  } else if (config.loss == GbmLoss::Logistic) {
    double s = 0;
    for (int l : labels) {
      if (l > 1) throw FitError("fit_gbm: logistic loss needs 0/1 labels");
      s += l;
    }
    double p = std::clamp(s / static_cast<double>(n), kProbFloor, 1 - kProbFloor);
    model.base_score_ = {std::log(p / (1 - p))};
  } else {
    K = config.num_classes > 0 ? config.num_classes : *std::max_element(labels.begin(), labels.end()) + 1;
    std::vector<double> freq(K, 0.0);
    for (int l : labels) {
      if (l >= K) throw FitError("fit_gbm: label " + std::to_string(l) + " outside declared classes");
      freq[l] += 1.0;
    }
    std::string absent;
    for (int k = 0; k < K; ++k) {
      if (freq[k] == 0) absent += (absent.empty() ? "" : ", ") + std::to_string(k);
    }
    if (!absent.empty()) throw FitError("fit_gbm: softmax classes absent from training data: " + absent);
    model.base_score_.resize(K);
    for (int k = 0; k < K; ++k) model.base_score_[k] = std::log(freq[k] / static_cast<double>(n));
  }
  model.config_.num_classes = config.loss == GbmLoss::Softmax ? K : 0;

  std::vector<double> F(n * K);
  for (std::size_t i = 0; i < n; ++i) {
    for (int k = 0; k < K; ++k) F[i * K + k] = model.base_score_[k];
  }
  auto loss_now = [&]() {
    double L = 0;
    std::vector<double> z(K);
    for (std::size_t i = 0; i < n; ++i) {
      switch (config.loss) {
        case GbmLoss::Squared: L += (F[i] - y[i]) * (F[i] - y[i]); break;
        case GbmLoss::Logistic: {
          double p = std::clamp(sigmoid(F[i]), 1e-15, 1 - 1e-15);
          L -= labels[i] ? std::log(p) : std::log(1 - p);
          break;
        }
        case GbmLoss::Softmax: {
          std::copy(F.begin() + i * K, F.begin() + (i + 1) * K, z.begin());
          softmax_inplace(z);
          L -= std::log(std::max(z[labels[i]], 1e-15));
          break;
        }
      }
    }
    return L / static_cast<double>(n);
  };
  model.training_loss_.push_back(loss_now());

  RankCodes codes = build_rank_codes(X, config.max_bins);
  detail::NewtonParams np{config.lambda, config.min_child_weight, config.max_depth, 1, 0};
  const std::size_t n_sub =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(config.subsample * static_cast<double>(n))));
  std::vector<double> grad(n), hess(n), z(K);
  std::vector<std::uint32_t> rows(n);
  Rng rng = make_rng(derive_seed(config.seed, {stream_tag("gbm")}));

  for (int t = 0; t < config.n_rounds; ++t) {
    if (n_sub < n) {
      auto pick = sample_without_replacement(rng, n, n_sub);
      rows.assign(pick.begin(), pick.end());
      std::sort(rows.begin(), rows.end());
    } else {
      rows.resize(n);
      for (std::size_t i = 0; i < n; ++i) rows[i] = static_cast<std::uint32_t>(i);
    }
    std::vector<TreeModel> round;
    round.reserve(K);
    // Gradients for every output use the margins from the start of the round.
    std::vector<double> probs;
    if (config.loss == GbmLoss::Softmax) {
      probs.resize(n * K);
      for (std::size_t i = 0; i < n; ++i) {
        std::copy(F.begin() + i * K, F.begin() + (i + 1) * K, z.begin());
        softmax_inplace(z);
        std::copy(z.begin(), z.end(), probs.begin() + i * K);
      }
    }
    for (int k = 0; k < K; ++k) {
      for (std::size_t i = 0; i < n; ++i) {
        switch (config.loss) {
          case GbmLoss::Squared:
            grad[i] = F[i] - y[i];
            hess[i] = 1.0;
            break;
          case GbmLoss::Logistic: {
            double p = sigmoid(F[i]);
            grad[i] = p - labels[i];
            hess[i] = std::max(p * (1 - p), kHessFloor);
            break;
          }
          case GbmLoss::Softmax: {
            double p = probs[i * K + k];
            grad[i] = p - (labels[i] == k ? 1.0 : 0.0);
            hess[i] = std::max(p * (1 - p), kHessFloor);
            break;
          }
        }
      }
      std::span<const double> h_span = config.loss == GbmLoss::Squared ? std::span<const double>() : hess;
      round.push_back(detail::fit_newton_tree(X, codes, grad, h_span, np, rows, rng));
    }
    for (int k = 0; k < K; ++k) {
      for (std::size_t i = 0; i < n; ++i) F[i * K + k] += config.eta * round[k].predict(X, i);
    }
    model.rounds_.push_back(std::move(round));
    model.training_loss_.push_back(loss_now());
  }
  return model;
}

}  // namespace mdlab::treelearn
