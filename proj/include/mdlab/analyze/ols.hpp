#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "mdlab/tabular/encoding.hpp"

namespace mdlab::analyze {

inline constexpr double kRankTolerance = 1e-10;

struct FitResult {
  std::vector<std::string> terms;
  std::vector<double> beta;
  std::vector<double> se;
  double df = 0.0;  // n - k
  std::size_t n = 0;
  double rss = 0.0;
  double sigma2 = 0.0;

  std::size_t size() const { return beta.size(); }
  std::ptrdiff_t index_of(const std::string& term) const;
};

// Least squares by column-pivoted QR. A design whose numerical rank falls
// short (relative pivot below kRankTolerance) raises RankDeficientError
// naming the dependent columns.
FitResult ols_fit(const Eigen::VectorXd& y, const Eigen::MatrixXd& X, std::vector<std::string> labels);
FitResult ols_fit(std::span<const double> y, const tabular::DesignMatrix& X);

// Two-sided p-value of a t statistic; infinite df uses the normal.
double two_sided_p(double t, double df);

}  // namespace mdlab::analyze
