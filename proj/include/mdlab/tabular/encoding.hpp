#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "mdlab/tabular/dataset.hpp"

namespace mdlab::tabular {

inline constexpr const char* kInterceptLabel = "(Intercept)";

// Where a design column came from.
struct TermSource {
  enum class Kind { Intercept, Metric, Dummy, Wave };
  Kind kind = Kind::Metric;
  std::size_t column = 0;  // dataset column (Metric, Dummy)
  int level = 0;           // level index (Dummy) or wave number (Wave)
};

struct EncodeOptions {
  // Columns to encode, in order; empty means every dataset column.
  std::vector<std::string> columns;
  // Reference level label per categorical column; absent means level 0.
  std::map<std::string, std::string> refs;
  bool intercept = true;
  // Adds one dummy per non-reference wave taken from the panel keys.
  bool wave_dummies = false;
  std::vector<int> waves;  // declared waves; empty = sorted unique in data
  int wave_ref = -1;       // -1 = smallest declared wave
  // When false, mask bits are ignored and stored values are encoded.
  bool require_observed = true;
};

struct DesignMatrix {
  Eigen::MatrixXd values;
  std::vector<std::string> column_labels;
  std::map<std::string, std::string> reference_levels;
  std::vector<TermSource> sources;

  std::size_t n_rows() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t n_cols() const { return static_cast<std::size_t>(values.cols()); }
};

std::string dummy_label(const std::string& column, const std::string& level);
std::string wave_label(int wave);

// Precomputed column layout for a schema, reusable across datasets that
// share it. The imputation chains encode the same predictors thousands of
// times, so the label and reference bookkeeping is done once here.
class DummyLayout {
 public:
  DummyLayout(const Dataset& schema, const EncodeOptions& options);

  std::size_t width() const { return sources_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::vector<TermSource>& sources() const { return sources_; }
  const std::map<std::string, std::string>& reference_levels() const { return refs_; }

  // Encodes every row, or only `rows` when non-null.
  Eigen::MatrixXd encode(const Dataset& ds, const std::vector<std::size_t>* rows = nullptr) const;
  DesignMatrix encode_design(const Dataset& ds) const;

 private:
  std::vector<TermSource> sources_;
  std::vector<std::string> labels_;
  std::map<std::string, std::string> refs_;
  std::vector<std::size_t> encoded_columns_;
  bool require_observed_ = true;
};

DesignMatrix dummy_encode(const Dataset& ds, const EncodeOptions& options = {});

}  // namespace mdlab::tabular
