#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mdlab/tabular/dataset.hpp"

namespace mdlab::tabular {

enum class CorrelationMethod { Pearson, Spearman, Kendall };
enum class DistanceMetric { Frobenius, Mae, Rmse };

std::string_view to_string(CorrelationMethod method);
std::string_view to_string(DistanceMetric metric);
CorrelationMethod parse_correlation_method(std::string_view text);

struct CorrelationMatrix {
  Eigen::MatrixXd values;
  std::vector<std::string> labels;
  // Columns with zero variance; their off-diagonal entries are 0.
  std::vector<bool> zero_variance;
  bool flagged() const;
};

// Pairwise statistics on complete vectors. They return 0 when either side
// has zero variance.
double pearson(std::span<const double> x, std::span<const double> y);
double spearman(std::span<const double> x, std::span<const double> y);
double kendall_tau_b(std::span<const double> x, std::span<const double> y);

// Average ranks, 1-based, ties sharing the mean of their positions.
std::vector<double> mid_ranks(std::span<const double> x);

// Categorical columns enter through their level index.
CorrelationMatrix correlation_matrix(const Dataset& ds, CorrelationMethod method);

double matrix_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, DistanceMetric metric);

}  // namespace mdlab::tabular
