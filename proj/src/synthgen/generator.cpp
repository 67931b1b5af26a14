#include "mdlab/synthgen/generator.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "mdlab/common/errors.hpp"

namespace mdlab::synthgen {

using tabular::Dataset;

namespace {

double round_to(double v, int decimals) {
  double scale = std::pow(10.0, decimals);
  return std::round(v * scale) / scale;
}

Rng individual_rng(std::uint64_t seed, const char* stage, std::size_t id) {
  return make_rng(derive_seed(seed, {stream_tag("individual"), stream_tag(stage), id}));
}

double truncated_normal(Rng& rng, double mean, double sd, double low, double high) {
  std::normal_distribution<double> normal(mean, sd);
  for (int attempt = 0; attempt < 10000; ++attempt) {
    double x = normal(rng);
    if (x >= low && x <= high) return x;
  }
  return std::clamp(mean, low, high);
}

Dataset empty_panel(const PanelConfig& cfg) {
  std::size_t n = cfg.n_individuals * static_cast<std::size_t>(cfg.n_waves);
  Dataset ds(panel_columns(), n);
  std::vector<tabular::PanelKey> keys(n);
  for (std::size_t i = 0; i < cfg.n_individuals; ++i) {
    for (int w = 0; w < cfg.n_waves; ++w) {
      keys[i * cfg.n_waves + w] = {static_cast<std::int64_t>(i + 1), cfg.first_wave + w};
    }
  }
  ds.set_panel_keys(std::move(keys));
  return ds;
}

void draw_independent(Dataset& ds, const PanelConfig& cfg, const MarginalSpec& marg, std::size_t i) {
  Rng rng = individual_rng(cfg.seed, "independent", i + 1);
  const std::size_t W = static_cast<std::size_t>(cfg.n_waves);
  const std::size_t r0 = i * W;
  auto fill = [&](std::size_t col, double v) {
    for (std::size_t w = 0; w < W; ++w) ds.set_value(r0 + w, col, v);
  };

  for (const auto& m : marg.constant) {
    fill(ds.index_of(m.column), static_cast<double>(draw_weighted(rng, m.probs)));
  }

  double age0 = std::round(truncated_normal(rng, marg.age.mean, marg.age.sd, marg.age.low,
                                            marg.age.high - static_cast<double>(W - 1)));
  std::size_t c_age = ds.index_of("age");
  for (std::size_t w = 0; w < W; ++w) ds.set_value(r0 + w, c_age, age0 + static_cast<double>(w));

  std::size_t c_contact = ds.index_of("contactattempts");
  for (std::size_t w = 0; w < W; ++w) {
    double e = std::exponential_distribution<double>(marg.contact_rates[w])(rng);
    ds.set_value(r0 + w, c_contact, std::min(marg.contact_max, marg.contact_shift + std::round(e)));
  }
  std::size_t c_wb = ds.index_of("wb");
  std::size_t c_il = ds.index_of("ilearn");
  for (std::size_t w = 0; w < W; ++w) {
    ds.set_value(r0 + w, c_wb, uniform01(rng) < marg.wb_p[w] ? 1.0 : 0.0);
    ds.set_value(r0 + w, c_il, uniform01(rng) < marg.ilearn_p[w] ? 1.0 : 0.0);
  }

  std::size_t c_mar = ds.index_of("maritalstatus");
  int last_status = static_cast<int>(marg.marital_initial.size()) - 1;
  int status = static_cast<int>(draw_weighted(rng, marg.marital_initial));
  for (std::size_t w = 0; w < W; ++w) {
    if (w > 0 && uniform01(rng) < marg.marital_forward && status < last_status) ++status;
    ds.set_value(r0 + w, c_mar, status);
  }

  std::size_t c_ft = ds.index_of("fixedterm");
  bool fixed = uniform01(rng) < marg.fixedterm_initial;
  for (std::size_t w = 0; w < W; ++w) {
    if (w > 0 && fixed && uniform01(rng) < marg.fixedterm_exit) fixed = false;
    ds.set_value(r0 + w, c_ft, fixed ? 1.0 : 0.0);
  }
}

struct ResolvedPredictors {
  std::vector<std::size_t> columns;
  std::vector<double> row;

  ResolvedPredictors(const Dataset& ds, const std::vector<std::string>& names) : row(names.size()) {
    for (const auto& n : names) columns.push_back(ds.index_of(n));
  }
  std::span<const double> at(const Dataset& ds, std::size_t r) {
    for (std::size_t j = 0; j < columns.size(); ++j) row[j] = ds.value(r, columns[j]);
    return row;
  }
};

void draw_endogenous(Dataset& ds, const PanelConfig& cfg, const EndogenousModelSpec& endo, std::size_t i,
                     ResolvedPredictors& p_kldb, ResolvedPredictors& p_hrs, ResolvedPredictors& p_exp,
                     ResolvedPredictors& p_child) {
  Rng rng = individual_rng(cfg.seed, "endogenous", i + 1);
  const std::size_t W = static_cast<std::size_t>(cfg.n_waves);
  const std::size_t r0 = i * W;
  auto fill = [&](std::size_t col, double v) {
    for (std::size_t w = 0; w < W; ++w) ds.set_value(r0 + w, col, v);
  };

  std::size_t c_kldb = ds.index_of("kldb");
  fill(c_kldb, endo.kldb.model.sample(p_kldb.at(ds, r0), rng));

  std::size_t c_hrs = ds.index_of("workinghrs");
  double hrs = endo.workinghrs.model.sample(p_hrs.at(ds, r0), rng);
  hrs = round_to(std::clamp(hrs, endo.workinghrs_min, endo.workinghrs_max), endo.workinghrs_decimals);
  fill(c_hrs, hrs);

  std::size_t c_exp = ds.index_of("work_experience");
  double age0 = ds.value(r0, ds.index_of("age"));
  double cap = std::max(endo.experience_min, age0 - endo.experience_entry_age);
  double exp = endo.work_experience.model.sample(p_exp.at(ds, r0), rng);
  exp = round_to(std::clamp(exp, endo.experience_min, cap), endo.experience_decimals);
  std::uniform_real_distribution<double> increment(endo.experience_increment_low, endo.experience_increment_high);
  for (std::size_t w = 0; w < W; ++w) {
    if (w > 0) exp = round_to(exp + increment(rng), endo.experience_decimals);
    ds.set_value(r0 + w, c_exp, exp);
  }

  std::size_t c_child = ds.index_of("childhh1_number");
  std::vector<double> freqs = endo.childhh.model.class_frequencies(p_child.at(ds, r0));
  int children = static_cast<int>(draw_weighted(rng, freqs));
  for (std::size_t w = 0; w < W; ++w) {
    if (w > 0 && children > 0 && uniform01(rng) < endo.child_ageout) --children;
    ds.set_value(r0 + w, c_child, children);
  }
}

// One outcome term, evaluated on a row.
struct Term {
  enum class Kind { Metric, Level, Wave } kind = Kind::Metric;
  std::size_t column = 0;
  int level = 0;
  double coef = 0.0;
};

std::vector<Term> resolve_terms(const Dataset& ds, const OutcomeModel& out) {
  std::vector<Term> terms;
  std::vector<std::string> bad;
  for (const auto& [label, coef] : out.coefficients) {
    Term t;
    t.coef = coef;
    auto open = label.find('[');
    if (open == std::string::npos) {
      auto c = ds.find(label);
      if (!c || ds.column(*c).type.is_categorical()) {
        bad.push_back(label);
        continue;
      }
      t.kind = Term::Kind::Metric;
      t.column = *c;
    } else {
      if (label.back() != ']') {
        bad.push_back(label);
        continue;
      }
      std::string base = label.substr(0, open);
      std::string inner = label.substr(open + 1, label.size() - open - 2);
      if (base == "wave") {
        try {
          std::size_t used = 0;
          t.level = std::stoi(inner, &used);
          if (used != inner.size() || !ds.has_panel_keys()) throw std::invalid_argument(inner);
        } catch (const std::exception&) {
          bad.push_back(label);
          continue;
        }
        t.kind = Term::Kind::Wave;
      } else {
        auto c = ds.find(base);
        std::optional<int> lvl;
        if (c && ds.column(*c).type.is_categorical()) lvl = ds.column(*c).type.level_index(inner);
        if (!lvl) {
          bad.push_back(label);
          continue;
        }
        t.kind = Term::Kind::Level;
        t.column = *c;
        t.level = *lvl;
      }
    }
    terms.push_back(t);
  }
  if (!bad.empty()) {
    std::ostringstream msg;
    msg << "unresolvable outcome terms:";
    for (const auto& b : bad) msg << " '" << b << "'";
    throw ConfigError(msg.str());
  }
  return terms;
}

double linear_predictor(const Dataset& ds, const std::vector<Term>& terms, double intercept, std::size_t r) {
  double y = intercept;
  for (const Term& t : terms) {
    switch (t.kind) {
      case Term::Kind::Metric:
      case Term::Kind::Level:
        if (ds.is_missing(r, t.column)) {
          throw EncodingError("outcome regressor '" + ds.column(t.column).name + "' missing at row " +
                              std::to_string(r));
        }
        if (t.kind == Term::Kind::Metric) {
          y += t.coef * ds.value(r, t.column);
        } else if (ds.level(r, t.column) == t.level) {
          y += t.coef;
        }
        break;
      case Term::Kind::Wave:
        if (ds.panel_keys()[r].wave == t.level) y += t.coef;
        break;
    }
  }
  return y;
}

}  // namespace

Dataset generate_independent(const PanelConfig& cfg, const MarginalSpec& marg) {
  cfg.validate();
  marg.validate(cfg.n_waves);
  Dataset ds = empty_panel(cfg);
  for (std::size_t i = 0; i < cfg.n_individuals; ++i) draw_independent(ds, cfg, marg, i);
  for (const auto& name : endogenous_order()) {
    std::size_t c = ds.index_of(name);
    for (std::size_t r = 0; r < ds.n_rows(); ++r) ds.set_missing(r, c, true);
  }
  std::size_t c_y = ds.index_of(kOutcomeColumn);
  for (std::size_t r = 0; r < ds.n_rows(); ++r) ds.set_missing(r, c_y, true);
  return ds;
}

Dataset generate_panel(const PanelConfig& cfg, const MarginalSpec& marg, const EndogenousModelSpec& endo,
                       const OutcomeModel& out) {
  cfg.validate();
  marg.validate(cfg.n_waves);
  endo.validate();
  out.validate();
  Dataset ds = empty_panel(cfg);
  ResolvedPredictors p_kldb(ds, endo.kldb.predictors);
  ResolvedPredictors p_hrs(ds, endo.workinghrs.predictors);
  ResolvedPredictors p_exp(ds, endo.work_experience.predictors);
  ResolvedPredictors p_child(ds, endo.childhh.predictors);
  std::vector<Term> terms = resolve_terms(ds, out);
  std::size_t c_y = ds.index_of(kOutcomeColumn);
  const std::size_t W = static_cast<std::size_t>(cfg.n_waves);

  for (std::size_t i = 0; i < cfg.n_individuals; ++i) {
    draw_independent(ds, cfg, marg, i);
    draw_endogenous(ds, cfg, endo, i, p_kldb, p_hrs, p_exp, p_child);
    Rng rng = individual_rng(cfg.seed, "outcome", i + 1);
    std::normal_distribution<double> noise(out.noise_mean, out.noise_sd);
    for (std::size_t w = 0; w < W; ++w) {
      std::size_t r = i * W + w;
      double e = out.noise_sd > 0.0 ? noise(rng) : out.noise_mean;
      ds.set_value(r, c_y, linear_predictor(ds, terms, out.intercept, r) + e);
    }
  }
  return ds;
}

std::vector<double> gen_outcome(const Dataset& ds, const OutcomeModel& out, Rng& rng) {
  out.validate();
  std::vector<Term> terms = resolve_terms(ds, out);
  std::normal_distribution<double> noise(out.noise_mean, out.noise_sd);
  std::vector<double> y(ds.n_rows());
  for (std::size_t r = 0; r < ds.n_rows(); ++r) {
    double e = out.noise_sd > 0.0 ? noise(rng) : out.noise_mean;
    y[r] = linear_predictor(ds, terms, out.intercept, r) + e;
  }
  return y;
}

}  // namespace mdlab::synthgen
