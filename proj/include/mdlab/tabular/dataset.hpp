#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mdlab::tabular {

enum class ColumnKind { Metric, Binary, Ordinal, Nominal };

std::string_view to_string(ColumnKind kind);
ColumnKind parse_column_kind(std::string_view text);

// Measurement scale of a column plus the ordered level labels of a
// categorical column. Categorical cells store the level index.
class ColumnType {
 public:
  static ColumnType metric();
  static ColumnType binary(std::vector<std::string> levels);
  static ColumnType ordinal(std::vector<std::string> levels);
  static ColumnType nominal(std::vector<std::string> levels);
  static ColumnType make(ColumnKind kind, std::vector<std::string> levels);

  ColumnKind kind() const { return kind_; }
  const std::vector<std::string>& levels() const { return levels_; }
  std::size_t num_levels() const { return levels_.size(); }
  bool is_categorical() const { return kind_ != ColumnKind::Metric; }
  std::optional<int> level_index(std::string_view label) const;

  bool operator==(const ColumnType&) const = default;

 private:
  ColumnType(ColumnKind kind, std::vector<std::string> levels);
  ColumnKind kind_ = ColumnKind::Metric;
  std::vector<std::string> levels_;
};

struct ColumnInfo {
  std::string name;
  ColumnType type;
  bool operator==(const ColumnInfo&) const = default;
};

// n_rows x n_cols missingness indicator, true = missing.
class MissMask {
 public:
  MissMask() = default;
  MissMask(std::size_t n_rows, std::size_t n_cols);

  std::size_t n_rows() const { return n_rows_; }
  std::size_t n_cols() const { return n_cols_; }
  bool at(std::size_t row, std::size_t col) const { return bits_[col * n_rows_ + row] != 0; }
  void set(std::size_t row, std::size_t col, bool missing);
  std::size_t count() const { return total_; }
  std::size_t count_column(std::size_t col) const { return per_column_[col]; }
  double rate() const;
  std::span<const std::uint8_t> column(std::size_t col) const {
    return {bits_.data() + col * n_rows_, n_rows_};
  }

  bool operator==(const MissMask&) const = default;

 private:
  std::size_t n_rows_ = 0;
  std::size_t n_cols_ = 0;
  std::vector<std::uint8_t> bits_;
  std::vector<std::size_t> per_column_;
  std::size_t total_ = 0;
};

struct PanelKey {
  std::int64_t id = 0;
  int wave = 0;
  bool operator==(const PanelKey&) const = default;
};

// Column-major mixed-type table with an explicit missingness mask.
//
// Metric cells hold the real value, categorical cells hold the level index
// as a double. A cell flagged in the mask is missing whatever its stored
// value; amputation only flips mask bits and leaves the value in place, so
// consumers must consult the mask before reading.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<ColumnInfo> columns, std::size_t n_rows);

  std::size_t n_rows() const { return n_rows_; }
  std::size_t n_cols() const { return columns_.size(); }
  const std::vector<ColumnInfo>& columns() const { return columns_; }
  const ColumnInfo& column(std::size_t c) const { return columns_.at(c); }
  std::optional<std::size_t> find(std::string_view name) const;
  std::size_t index_of(std::string_view name) const;  // throws SchemaError

  double value(std::size_t row, std::size_t col) const { return cells_[col][row]; }
  int level(std::size_t row, std::size_t col) const { return static_cast<int>(cells_[col][row]); }
  void set_value(std::size_t row, std::size_t col, double v) { cells_[col][row] = v; }
  std::span<const double> values(std::size_t col) const { return cells_.at(col); }
  std::span<double> mutable_values(std::size_t col) { return cells_.at(col); }

  bool is_missing(std::size_t row, std::size_t col) const { return mask_.at(row, col); }
  void set_missing(std::size_t row, std::size_t col, bool missing) { mask_.set(row, col, missing); }
  const MissMask& mask() const { return mask_; }
  std::size_t missing_count(std::size_t col) const { return mask_.count_column(col); }

  bool has_panel_keys() const { return !panel_keys_.empty(); }
  const std::vector<PanelKey>& panel_keys() const { return panel_keys_; }
  void set_panel_keys(std::vector<PanelKey> keys);

  // Checks every structural invariant; throws SchemaError on violation.
  void validate() const;

  // Same schema, observed cells equal, and same mask.
  bool same_observed(const Dataset& other) const;
  bool operator==(const Dataset&) const = default;

 private:
  std::vector<ColumnInfo> columns_;
  std::size_t n_rows_ = 0;
  std::vector<std::vector<double>> cells_;
  MissMask mask_;
  std::vector<PanelKey> panel_keys_;
};

}  // namespace mdlab::tabular
