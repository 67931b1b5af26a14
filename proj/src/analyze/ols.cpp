#include "mdlab/analyze/ols.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <limits>

#include "mdlab/common/errors.hpp"

namespace mdlab::analyze {

std::ptrdiff_t FitResult::index_of(const std::string& term) const {
  for (std::size_t k = 0; k < terms.size(); ++k) {
    if (terms[k] == term) return static_cast<std::ptrdiff_t>(k);
  }
  return -1;
}

double two_sided_p(double t, double df) {
  if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
  double a = std::abs(t);
  if (std::isinf(a)) return 0.0;
  if (!std::isfinite(df) || df > 1e7) {
    return 2.0 * boost::math::cdf(boost::math::complement(boost::math::normal(), a));
  }
  return 2.0 * boost::math::cdf(boost::math::complement(boost::math::students_t(df), a));
}

FitResult ols_fit(const Eigen::VectorXd& y, const Eigen::MatrixXd& X, std::vector<std::string> labels) {
  const Eigen::Index n = X.rows(), k = X.cols();
  if (y.size() != n) throw DimensionError("outcome length differs from design rows");
  if (static_cast<Eigen::Index>(labels.size()) != k) throw DimensionError("label count differs from design columns");
  if (n <= k) {
    throw RankDeficientError("design has " + std::to_string(n) + " rows for " + std::to_string(k) + " columns");
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  qr.setThreshold(kRankTolerance);
  if (qr.rank() < k) {
    std::string msg = "design is rank deficient (rank " + std::to_string(qr.rank()) + " of " + std::to_string(k) +
                      "); dependent columns:";
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index j = qr.rank(); j < k; ++j) msg += " '" + labels[perm[j]] + "'";
    throw RankDeficientError(msg);
  }

  FitResult fit;
  fit.terms = std::move(labels);
  Eigen::VectorXd beta = qr.solve(y);
  Eigen::VectorXd resid = y - X * beta;
  fit.n = static_cast<std::size_t>(n);
  fit.df = static_cast<double>(n - k);
  fit.rss = resid.squaredNorm();
  fit.sigma2 = fit.rss / fit.df;

  // (X'X)^-1 = P R^-1 R^-T P'; its diagonal is the squared row norms of R^-1.
  Eigen::MatrixXd R = qr.matrixR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
  Eigen::MatrixXd Rinv =
      R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
  const auto& perm = qr.colsPermutation().indices();
  fit.beta.assign(beta.data(), beta.data() + k);
  fit.se.assign(static_cast<std::size_t>(k), 0.0);
  for (Eigen::Index j = 0; j < k; ++j) {
    fit.se[perm[j]] = std::sqrt(fit.sigma2 * Rinv.row(j).squaredNorm());
  }
  return fit;
}

FitResult ols_fit(std::span<const double> y, const tabular::DesignMatrix& X) {
  Eigen::VectorXd yv = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
  return ols_fit(yv, X.values, X.column_labels);
}

}  // namespace mdlab::analyze
