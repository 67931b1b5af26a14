#include "mdlab/impute/chain.hpp"

#include <algorithm>
#include <numeric>

#include "mdlab/common/errors.hpp"

namespace mdlab::impute {

using tabular::ColumnKind;
using tabular::Dataset;

std::vector<std::size_t> ChainState::observed_rows(std::size_t col) const {
  std::vector<std::size_t> rows;
  rows.reserve(original.n_rows() - original.count_column(col));
  for (std::size_t r = 0; r < original.n_rows(); ++r) {
    if (!original.at(r, col)) rows.push_back(r);
  }
  return rows;
}

std::vector<std::size_t> ChainState::missing_rows(std::size_t col) const {
  std::vector<std::size_t> rows;
  rows.reserve(original.count_column(col));
  for (std::size_t r = 0; r < original.n_rows(); ++r) {
    if (original.at(r, col)) rows.push_back(r);
  }
  return rows;
}

std::vector<std::size_t> visit_order(const Dataset& ds) {
  std::vector<std::size_t> cols;
  for (std::size_t c = 0; c < ds.n_cols(); ++c) {
    if (ds.missing_count(c) > 0) cols.push_back(c);
  }
  std::stable_sort(cols.begin(), cols.end(),
                   [&](std::size_t a, std::size_t b) { return ds.missing_count(a) < ds.missing_count(b); });
  return cols;
}

ChainState initialize(const Dataset& ds, Rng& rng) {
  std::vector<std::string> empty;
  for (std::size_t c = 0; c < ds.n_cols(); ++c) {
    if (ds.n_rows() > 0 && ds.missing_count(c) == ds.n_rows()) empty.push_back(ds.column(c).name);
  }
  if (!empty.empty()) {
    std::string names;
    for (const auto& n : empty) names += (names.empty() ? "'" : ", '") + n + "'";
    throw UnimputableError("no observed values to impute from in column(s) " + names);
  }

  ChainState state{ds, ds.mask(), visit_order(ds), 0};
  for (std::size_t c : state.visit_order) {
    std::vector<double> pool;
    pool.reserve(ds.n_rows() - ds.missing_count(c));
    for (std::size_t r = 0; r < ds.n_rows(); ++r) {
      if (!ds.is_missing(r, c)) pool.push_back(ds.value(r, c));
    }
    for (std::size_t r = 0; r < ds.n_rows(); ++r) {
      if (ds.is_missing(r, c)) {
        state.current.set_value(r, c, pool[uniform_index(rng, pool.size())]);
        state.current.set_missing(r, c, false);
      }
    }
  }
  return state;
}

treelearn::FeatureMatrix predictor_matrix(const Dataset& ds, std::size_t target, bool with_wave,
                                          const std::vector<std::size_t>* rows) {
  using treelearn::FeatureInfo;
  using treelearn::FeatureKind;
  std::vector<FeatureInfo> infos;
  std::vector<std::size_t> cols;
  for (std::size_t c = 0; c < ds.n_cols(); ++c) {
    if (c == target) continue;
    const auto& type = ds.column(c).type;
    bool nominal = type.kind() == ColumnKind::Binary || type.kind() == ColumnKind::Nominal;
    infos.push_back({ds.column(c).name, nominal ? FeatureKind::Nominal : FeatureKind::Ordered,
                     nominal ? static_cast<int>(type.num_levels()) : 0});
    cols.push_back(c);
  }
  bool wave = with_wave && ds.has_panel_keys();
  if (wave) infos.push_back({"wave", FeatureKind::Ordered, 0});

  std::size_t n = rows ? rows->size() : ds.n_rows();
  treelearn::FeatureMatrix X(std::move(infos), n);
  for (std::size_t j = 0; j < cols.size(); ++j) {
    auto src = ds.values(cols[j]);
    auto dst = X.mutable_column(j);
    for (std::size_t i = 0; i < n; ++i) dst[i] = src[rows ? (*rows)[i] : i];
  }
  if (wave) {
    auto dst = X.mutable_column(cols.size());
    const auto& keys = ds.panel_keys();
    for (std::size_t i = 0; i < n; ++i) dst[i] = keys[rows ? (*rows)[i] : i].wave;
  }
  return X;
}

Dataset completed(const ChainState& state) {
  Dataset out = state.current;
  for (std::size_t c = 0; c < out.n_cols(); ++c) {
    if (out.missing_count(c) == 0) continue;
    for (std::size_t r = 0; r < out.n_rows(); ++r) out.set_missing(r, c, false);
  }
  return out;
}

}  // namespace mdlab::impute
