#include "mdlab/tabular/encoding.hpp"

#include <algorithm>
#include <set>

#include "mdlab/common/errors.hpp"

namespace mdlab::tabular {

std::string dummy_label(const std::string& column, const std::string& level) {
  return column + "[" + level + "]";
}

std::string wave_label(int wave) { return "wave[" + std::to_string(wave) + "]"; }

DummyLayout::DummyLayout(const Dataset& schema, const EncodeOptions& options)
    : require_observed_(options.require_observed) {
  std::vector<std::size_t> cols;
  if (options.columns.empty()) {
    for (std::size_t c = 0; c < schema.n_cols(); ++c) cols.push_back(c);
  } else {
    for (const auto& name : options.columns) {
      auto c = schema.find(name);
      if (!c) throw ConfigError("encode: unknown column '" + name + "'");
      cols.push_back(*c);
    }
  }
  for (const auto& [name, level] : options.refs) {
    auto c = schema.find(name);
    if (!c) continue;  // refs may cover columns not encoded here
    const auto& type = schema.column(*c).type;
    if (!type.is_categorical()) throw ConfigError("encode: reference given for metric column '" + name + "'");
    if (!type.level_index(level)) {
      throw ConfigError("encode: unknown reference level '" + level + "' for column '" + name + "'");
    }
  }

  if (options.intercept) {
    sources_.push_back({TermSource::Kind::Intercept, 0, 0});
    labels_.push_back(kInterceptLabel);
  }
  if (options.wave_dummies) {
    std::vector<int> waves = options.waves;
    if (waves.empty()) {
      if (!schema.has_panel_keys()) throw ConfigError("encode: wave dummies need panel keys");
      std::set<int> seen;
      for (const auto& k : schema.panel_keys()) seen.insert(k.wave);
      waves.assign(seen.begin(), seen.end());
    }
    std::sort(waves.begin(), waves.end());
    int ref = options.wave_ref >= 0 ? options.wave_ref : waves.front();
    if (std::find(waves.begin(), waves.end(), ref) == waves.end()) {
      throw ConfigError("encode: reference wave " + std::to_string(ref) + " not declared");
    }
    refs_["wave"] = std::to_string(ref);
    for (int w : waves) {
      if (w == ref) continue;
      sources_.push_back({TermSource::Kind::Wave, 0, w});
      labels_.push_back(wave_label(w));
    }
  }
  for (std::size_t c : cols) {
    const auto& info = schema.column(c);
    encoded_columns_.push_back(c);
    if (!info.type.is_categorical()) {
      sources_.push_back({TermSource::Kind::Metric, c, 0});
      labels_.push_back(info.name);
      continue;
    }
    int ref = 0;
    if (auto it = options.refs.find(info.name); it != options.refs.end()) {
      ref = *info.type.level_index(it->second);
    }
    refs_[info.name] = info.type.levels()[ref];
    for (std::size_t l = 0; l < info.type.num_levels(); ++l) {
      if (static_cast<int>(l) == ref) continue;
      sources_.push_back({TermSource::Kind::Dummy, c, static_cast<int>(l)});
      labels_.push_back(dummy_label(info.name, info.type.levels()[l]));
    }
  }
}

Eigen::MatrixXd DummyLayout::encode(const Dataset& ds, const std::vector<std::size_t>* rows) const {
  const std::size_t n = rows ? rows->size() : ds.n_rows();
  auto row_at = [&](std::size_t i) { return rows ? (*rows)[i] : i; };
  if (require_observed_) {
    for (std::size_t c : encoded_columns_) {
      if (ds.missing_count(c) == 0) continue;
      for (std::size_t i = 0; i < n; ++i) {
        if (ds.is_missing(row_at(i), c)) {
          throw EncodingError("encode: missing cell at row " + std::to_string(row_at(i)) +
                              ", column '" + ds.column(c).name + "'");
        }
      }
    }
  }
  Eigen::MatrixXd out(n, sources_.size());
  for (std::size_t j = 0; j < sources_.size(); ++j) {
    const auto& src = sources_[j];
    switch (src.kind) {
      case TermSource::Kind::Intercept:
        out.col(j).setOnes();
        break;
      case TermSource::Kind::Metric: {
        auto v = ds.values(src.column);
        for (std::size_t i = 0; i < n; ++i) out(i, j) = v[row_at(i)];
        break;
      }
      case TermSource::Kind::Dummy: {
        auto v = ds.values(src.column);
        const double lvl = src.level;
        for (std::size_t i = 0; i < n; ++i) out(i, j) = v[row_at(i)] == lvl ? 1.0 : 0.0;
        break;
      }
      case TermSource::Kind::Wave: {
        const auto& keys = ds.panel_keys();
        if (keys.size() != ds.n_rows()) throw ConfigError("encode: wave dummies need panel keys");
        for (std::size_t i = 0; i < n; ++i) out(i, j) = keys[row_at(i)].wave == src.level ? 1.0 : 0.0;
        break;
      }
    }
  }
  return out;
}

DesignMatrix DummyLayout::encode_design(const Dataset& ds) const {
  DesignMatrix dm;
  dm.values = encode(ds);
  dm.column_labels = labels_;
  dm.reference_levels = refs_;
  dm.sources = sources_;
  return dm;
}

DesignMatrix dummy_encode(const Dataset& ds, const EncodeOptions& options) {
  return DummyLayout(ds, options).encode_design(ds);
}

}  // namespace mdlab::tabular
