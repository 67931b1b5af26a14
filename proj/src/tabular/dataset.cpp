#include "mdlab/tabular/dataset.hpp"

#include <set>

#include "mdlab/common/errors.hpp"

namespace mdlab::tabular {

std::string_view to_string(ColumnKind kind) {
  switch (kind) {
    case ColumnKind::Metric: return "metric";
    case ColumnKind::Binary: return "binary";
    case ColumnKind::Ordinal: return "ordinal";
    case ColumnKind::Nominal: return "nominal";
  }
  return "metric";
}

ColumnKind parse_column_kind(std::string_view text) {
  if (text == "metric") return ColumnKind::Metric;
  if (text == "binary") return ColumnKind::Binary;
  if (text == "ordinal") return ColumnKind::Ordinal;
  if (text == "nominal") return ColumnKind::Nominal;
  throw SchemaError("unknown column kind '" + std::string(text) + "'");
}

ColumnType::ColumnType(ColumnKind kind, std::vector<std::string> levels)
    : kind_(kind), levels_(std::move(levels)) {
  switch (kind_) {
    case ColumnKind::Metric:
      if (!levels_.empty()) throw SchemaError("metric column cannot declare levels");
      break;
    case ColumnKind::Binary:
      if (levels_.size() != 2) throw SchemaError("binary column needs exactly 2 levels");
      break;
    default:
      if (levels_.size() < 2) throw SchemaError("categorical column needs at least 2 levels");
      break;
  }
  std::set<std::string> seen(levels_.begin(), levels_.end());
  if (seen.size() != levels_.size()) throw SchemaError("duplicate level label");
}

ColumnType ColumnType::metric() { return ColumnType(ColumnKind::Metric, {}); }
ColumnType ColumnType::binary(std::vector<std::string> levels) {
  return ColumnType(ColumnKind::Binary, std::move(levels));
}
ColumnType ColumnType::ordinal(std::vector<std::string> levels) {
  return ColumnType(ColumnKind::Ordinal, std::move(levels));
}
ColumnType ColumnType::nominal(std::vector<std::string> levels) {
  return ColumnType(ColumnKind::Nominal, std::move(levels));
}
ColumnType ColumnType::make(ColumnKind kind, std::vector<std::string> levels) {
  return ColumnType(kind, std::move(levels));
}

std::optional<int> ColumnType::level_index(std::string_view label) const {
  for (std::size_t i = 0; i < levels_.size(); ++i) {
    if (levels_[i] == label) return static_cast<int>(i);
  }
  return std::nullopt;
}

MissMask::MissMask(std::size_t n_rows, std::size_t n_cols)
    : n_rows_(n_rows), n_cols_(n_cols), bits_(n_rows * n_cols, 0), per_column_(n_cols, 0) {}

void MissMask::set(std::size_t row, std::size_t col, bool missing) {
  auto& bit = bits_[col * n_rows_ + row];
  if ((bit != 0) == missing) return;
  bit = missing ? 1 : 0;
  if (missing) {
    ++per_column_[col];
    ++total_;
  } else {
    --per_column_[col];
    --total_;
  }
}

double MissMask::rate() const {
  if (n_rows_ == 0 || n_cols_ == 0) return 0.0;
  return static_cast<double>(total_) / static_cast<double>(n_rows_ * n_cols_);
}

Dataset::Dataset(std::vector<ColumnInfo> columns, std::size_t n_rows)
    : columns_(std::move(columns)),
      n_rows_(n_rows),
      cells_(columns_.size(), std::vector<double>(n_rows, 0.0)),
      mask_(n_rows, columns_.size()) {
  std::set<std::string> names;
  for (const auto& c : columns_) {
    if (!names.insert(c.name).second) throw SchemaError("duplicate column name '" + c.name + "'");
  }
}

std::optional<std::size_t> Dataset::find(std::string_view name) const {
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    if (columns_[c].name == name) return c;
  }
  return std::nullopt;
}

std::size_t Dataset::index_of(std::string_view name) const {
  auto c = find(name);
  if (!c) throw SchemaError("no column named '" + std::string(name) + "'");
  return *c;
}

void Dataset::set_panel_keys(std::vector<PanelKey> keys) {
  if (!keys.empty() && keys.size() != n_rows_) {
    throw DimensionError("panel keys: expected " + std::to_string(n_rows_) + " rows, got " +
                         std::to_string(keys.size()));
  }
  panel_keys_ = std::move(keys);
}

void Dataset::validate() const {
  if (cells_.size() != columns_.size()) throw SchemaError("cell storage does not match columns");
  if (mask_.n_rows() != n_rows_ || mask_.n_cols() != columns_.size()) {
    throw SchemaError("mask dimensions do not match dataset");
  }
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    if (cells_[c].size() != n_rows_) throw SchemaError("column '" + columns_[c].name + "' has wrong length");
    const auto& type = columns_[c].type;
    if (!type.is_categorical()) continue;
    for (std::size_t r = 0; r < n_rows_; ++r) {
      if (mask_.at(r, c)) continue;
      double v = cells_[c][r];
      if (v < 0 || v >= static_cast<double>(type.num_levels()) || v != static_cast<int>(v)) {
        throw SchemaError("row " + std::to_string(r) + ", column '" + columns_[c].name +
                          "': level index out of range");
      }
    }
  }
}

bool Dataset::same_observed(const Dataset& other) const {
  if (columns_ != other.columns_ || n_rows_ != other.n_rows_) return false;
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    for (std::size_t r = 0; r < n_rows_; ++r) {
      if (mask_.at(r, c) != other.mask_.at(r, c)) return false;
      if (!mask_.at(r, c) && cells_[c][r] != other.cells_[c][r]) return false;
    }
  }
  return true;
}

}  // namespace mdlab::tabular
