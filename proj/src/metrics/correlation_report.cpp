#include "mdlab/metrics/correlation_report.hpp"

#include <sstream>

#include "mdlab/common/errors.hpp"

namespace mdlab::metrics {

using tabular::CorrelationMatrix;
using tabular::CorrelationMethod;
using tabular::DistanceMetric;

namespace {

constexpr CorrelationMethod kMethods[] = {CorrelationMethod::Pearson, CorrelationMethod::Spearman,
                                          CorrelationMethod::Kendall};
constexpr DistanceMetric kMetrics[] = {DistanceMetric::Frobenius, DistanceMetric::Mae, DistanceMetric::Rmse};

}  // namespace

std::vector<CorrelationMatrix> reference_matrices(const tabular::Dataset& reference) {
  std::vector<CorrelationMatrix> out;
  for (auto m : kMethods) out.push_back(tabular::correlation_matrix(reference, m));
  return out;
}

DistanceTable correlation_report(const tabular::Dataset& sim, const std::vector<CorrelationMatrix>& reference) {
  if (reference.size() != 3) throw ConfigError("correlation report: expected 3 reference matrices");
  DistanceTable table;
  for (int i = 0; i < 3; ++i) {
    if (reference[i].labels.size() != sim.n_cols()) {
      throw SchemaError("correlation report: reference has " + std::to_string(reference[i].labels.size()) +
                        " columns, data has " + std::to_string(sim.n_cols()));
    }
    for (std::size_t c = 0; c < sim.n_cols(); ++c) {
      if (reference[i].labels[c] != sim.column(c).name) {
        throw SchemaError("correlation report: column " + std::to_string(c) + " is '" + sim.column(c).name +
                          "' but the reference has '" + reference[i].labels[c] + "'");
      }
    }
    auto mine = tabular::correlation_matrix(sim, kMethods[i]);
    for (int j = 0; j < 3; ++j) table.values[i][j] = tabular::matrix_distance(mine.values, reference[i].values, kMetrics[j]);
  }
  return table;
}

DistanceTable correlation_report(const tabular::Dataset& sim, const tabular::Dataset& reference) {
  if (sim.columns() != reference.columns()) throw SchemaError("correlation report: schemas differ");
  return correlation_report(sim, reference_matrices(reference));
}

Json DistanceTable::to_json() const {
  Json out = Json::object();
  for (int i = 0; i < 3; ++i) {
    Json row = Json::object();
    for (int j = 0; j < 3; ++j) row[std::string(tabular::to_string(kMetrics[j]))] = values[i][j];
    out[std::string(tabular::to_string(kMethods[i]))] = std::move(row);
  }
  return out;
}

std::string DistanceTable::to_csv() const {
  std::ostringstream os;
  os << "method";
  for (auto m : kMetrics) os << ',' << tabular::to_string(m);
  os << '\n';
  for (int i = 0; i < 3; ++i) {
    os << tabular::to_string(kMethods[i]);
    for (int j = 0; j < 3; ++j) os << ',' << format_real(values[i][j]);
    os << '\n';
  }
  return os.str();
}

Json matrices_to_json(const std::vector<CorrelationMatrix>& matrices) {
  Json out = Json::array();
  for (std::size_t i = 0; i < matrices.size(); ++i) {
    const auto& m = matrices[i];
    Json rows = Json::array();
    for (Eigen::Index r = 0; r < m.values.rows(); ++r) {
      Json row = Json::array();
      for (Eigen::Index c = 0; c < m.values.cols(); ++c) row.push_back(m.values(r, c));
      rows.push_back(std::move(row));
    }
    out.push_back(Json{{"method", i < 3 ? std::string(tabular::to_string(kMethods[i])) : std::string("?")},
                       {"labels", m.labels},
                       {"values", std::move(rows)}});
  }
  return out;
}

std::vector<CorrelationMatrix> matrices_from_json(const Json& j) {
  std::vector<CorrelationMatrix> out;
  try {
    for (const auto& e : j) {
      CorrelationMatrix m;
      m.labels = e.at("labels").get<std::vector<std::string>>();
      const auto& rows = e.at("values");
      const auto n = static_cast<Eigen::Index>(m.labels.size());
      if (static_cast<Eigen::Index>(rows.size()) != n) throw ParseError("correlation matrix: row count differs from labels");
      m.values.resize(n, n);
      for (Eigen::Index r = 0; r < n; ++r) {
        if (static_cast<Eigen::Index>(rows[r].size()) != n) throw ParseError("correlation matrix: ragged row");
        for (Eigen::Index c = 0; c < n; ++c) m.values(r, c) = rows[r][c].get<double>();
      }
      m.zero_variance.assign(m.labels.size(), false);
      out.push_back(std::move(m));
    }
  } catch (const Json::exception& e) {
    throw ParseError(std::string("correlation matrices: ") + e.what());
  }
  return out;
}

}  // namespace mdlab::metrics
