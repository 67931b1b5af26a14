#include "mdlab/harness/replication.hpp"

#include "mdlab/ampute/ampute.hpp"
#include "mdlab/analyze/model.hpp"
#include "mdlab/analyze/rubin.hpp"
#include "mdlab/common/errors.hpp"
#include "mdlab/impute/engines.hpp"
#include "mdlab/metrics/ipm.hpp"
#include "mdlab/synthgen/default_models.hpp"
#include "mdlab/synthgen/generator.hpp"

namespace mdlab::harness {

using tabular::Dataset;

namespace {

FitSummary summarize_fit(const analyze::FitResult& fit, double alpha) {
  auto tests = analyze::single_fit_tests(fit, alpha);
  FitSummary s;
  s.ok = true;
  s.beta = fit.beta;
  s.reject = tests.reject;
  s.rows = fit.n;
  return s;
}

Json fit_json(const FitSummary& f) {
  Json j{{"ok", f.ok}, {"rows", f.rows}};
  if (!f.ok) j["reason"] = f.reason;
  if (f.ok) {
    j["beta"] = f.beta;
    j["reject"] = f.reject;
  }
  return j;
}

FitSummary fit_from_json(const Json& j) {
  FitSummary f;
  f.ok = j.at("ok").get<bool>();
  f.rows = j.value("rows", std::size_t{0});
  f.reason = j.value("reason", std::string());
  if (f.ok) {
    f.beta = j.at("beta").get<std::vector<double>>();
    f.reject = j.at("reject").get<std::vector<bool>>();
  }
  return f;
}

void fail_record(ReplicationRecord& rec, const std::string& reason) {
  if (rec.ok) {
    rec.ok = false;
    rec.reason = reason;
  }
}

CellRecord run_cell(const ReplicationContext& ctx, const Dataset& truth, const Dataset& amputed,
                    const std::vector<std::string>& terms, std::uint64_t seed, impute::Method method) {
  CellRecord cell;
  cell.method = method;
  try {
    impute::ImputerSpec spec = ctx.plan.imputer;
    spec.method = method;
    spec.m = ctx.plan.m;
    spec.threads = 1;
    auto mi = impute::run_imputation(amputed, spec, seed);
    cell.seconds = mi.provenance.seconds;
    std::vector<analyze::FitResult> fits;
    for (const auto& c : mi.completions) fits.push_back(analyze::fit_model(c, ctx.model));
    if (fits.front().terms != terms) throw AlignmentError("completion design differs from the complete-data design");
    auto pooled = analyze::rubin_pool(fits, ctx.plan.alpha, ctx.plan.df_method);
    cell.qbar = pooled.qbar;
    cell.reject = pooled.reject;
    cell.ipm = metrics::ipm_mean(truth, mi.completions, amputed.mask());
    cell.ok = true;
  } catch (const Error& e) {
    cell.ok = false;
    cell.reason = std::string(e.category()) + ": " + e.what();
  }
  return cell;
}

}  // namespace

ReplicationContext::ReplicationContext(const SimPlan& p)
    : plan(p),
      endogenous(p.endogenous_models.empty() ? synthgen::default_endogenous_models()
                                             : synthgen::endogenous_from_json(read_json_file(p.endogenous_models))),
      model(analysis_model(p)) {
  plan.validate();
}

std::uint64_t replication_seed(std::uint64_t base, int index) {
  return derive_seed(base, {stream_tag("replication"), static_cast<std::uint64_t>(index)});
}

std::uint64_t generate_seed(std::uint64_t replication) { return derive_seed(replication, {stream_tag("generate")}); }

std::uint64_t ampute_seed(std::uint64_t replication, std::size_t rate_index) {
  return derive_seed(replication, {stream_tag("ampute"), rate_index});
}

std::uint64_t impute_seed(std::uint64_t replication, std::size_t rate_index, impute::Method method) {
  return derive_seed(replication, {stream_tag("impute"), rate_index, stream_tag(impute::to_string(method))});
}

std::vector<std::string> missing_levels(const Dataset& ds) {
  std::vector<std::string> out;
  for (std::size_t c = 0; c < ds.n_cols(); ++c) {
    const auto& type = ds.column(c).type;
    if (!type.is_categorical()) continue;
    std::vector<bool> seen(type.num_levels(), false);
    for (std::size_t r = 0; r < ds.n_rows(); ++r) {
      if (!ds.is_missing(r, c)) seen[ds.level(r, c)] = true;
    }
    for (std::size_t l = 0; l < seen.size(); ++l) {
      if (!seen[l]) out.push_back(ds.column(c).name + "[" + type.levels()[l] + "]");
    }
  }
  return out;
}

ReplicationRecord run_replication(const ReplicationContext& ctx, int index) {
  const SimPlan& plan = ctx.plan;
  ReplicationRecord rec;
  rec.index = index;
  rec.seed = replication_seed(plan.seed, index);
  rec.ok = true;

  synthgen::PanelConfig pc;
  pc.n_individuals = plan.n_individuals;
  pc.n_waves = plan.n_waves;
  pc.first_wave = plan.first_wave;
  pc.seed = generate_seed(rec.seed);
  Dataset truth;
  try {
    truth = synthgen::generate_panel(pc, plan.marginals, ctx.endogenous, plan.outcome);
  } catch (const Error& e) {
    fail_record(rec, std::string("generate: ") + e.what());
    return rec;
  }
  auto absent = missing_levels(truth);
  if (!absent.empty()) {
    std::string list;
    for (const auto& a : absent) list += (list.empty() ? "" : ", ") + a;
    fail_record(rec, "missing level: " + list);
    return rec;
  }

  try {
    auto fit = analyze::fit_model(truth, ctx.model);
    rec.terms = fit.terms;
    rec.complete = summarize_fit(fit, plan.alpha);
  } catch (const Error& e) {
    rec.complete.reason = std::string(e.category()) + ": " + e.what();
    fail_record(rec, "complete-data fit: " + rec.complete.reason);
    return rec;
  }

  for (std::size_t ri = 0; ri < plan.rates.size(); ++ri) {
    RateRecord rr;
    rr.rate = plan.rates[ri];
    ampute::AmputeConfig ac;
    ac.nu = rr.rate;
    ac.anchor = plan.anchor;
    ac.seed = ampute_seed(rec.seed, ri);
    ac.budget = plan.budget;
    Dataset amputed;
    try {
      auto res = ampute::ampute_mar(truth, ac);
      amputed = std::move(res.data);
      rr.achieved_rate = res.report.overall_rate;
    } catch (const Error& e) {
      fail_record(rec, std::string("ampute: ") + e.what());
      rec.rates.push_back(std::move(rr));
      continue;
    }

    if (plan.listwise) {
      auto lw = analyze::listwise_fit(amputed, ctx.model);
      if (lw.skipped()) {
        rr.listwise.reason = lw.skipped_reason;
        rr.listwise.rows = lw.complete_rows;
      } else {
        rr.listwise = summarize_fit(*lw.fit, plan.alpha);
      }
    } else {
      rr.listwise.reason = "disabled";
    }

    for (auto method : plan.methods) {
      auto cell = run_cell(ctx, truth, amputed, rec.terms, impute_seed(rec.seed, ri, method), method);
      if (!cell.ok) {
        fail_record(rec, std::string(impute::to_string(method)) + " at rate " + format_real(rr.rate, 4) + ": " +
                             cell.reason);
      }
      rr.cells.push_back(std::move(cell));
    }
    rec.rates.push_back(std::move(rr));
  }
  return rec;
}

ReplicationRecord run_replication(const SimPlan& plan, int index) {
  ReplicationContext ctx(plan);
  return run_replication(ctx, index);
}

Json ReplicationRecord::to_json(bool with_timing) const {
  Json rates_json = Json::array();
  for (const auto& rr : rates) {
    Json cells = Json::array();
    for (const auto& c : rr.cells) {
      Json cj{{"method", impute::to_string(c.method)}, {"ok", c.ok}};
      if (!c.ok) cj["reason"] = c.reason;
      if (c.ok) {
        cj["qbar"] = c.qbar;
        cj["reject"] = c.reject;
        cj["ipm"] = c.ipm;
      }
      if (with_timing) cj["seconds"] = c.seconds;
      cells.push_back(std::move(cj));
    }
    rates_json.push_back(Json{{"rate", rr.rate},
                              {"achieved_rate", rr.achieved_rate},
                              {"listwise", fit_json(rr.listwise)},
                              {"cells", std::move(cells)}});
  }
  return Json{{"index", index},     {"seed", seed},
              {"ok", ok},           {"reason", reason},
              {"terms", terms},     {"complete", fit_json(complete)},
              {"rates", std::move(rates_json)}};
}

ReplicationRecord ReplicationRecord::from_json(const Json& j) {
  ReplicationRecord rec;
  try {
    rec.index = j.at("index").get<int>();
    rec.seed = j.at("seed").get<std::uint64_t>();
    rec.ok = j.at("ok").get<bool>();
    rec.reason = j.value("reason", std::string());
    rec.terms = j.at("terms").get<std::vector<std::string>>();
    rec.complete = fit_from_json(j.at("complete"));
    for (const auto& rj : j.at("rates")) {
      RateRecord rr;
      rr.rate = rj.at("rate").get<double>();
      rr.achieved_rate = rj.value("achieved_rate", 0.0);
      rr.listwise = fit_from_json(rj.at("listwise"));
      for (const auto& cj : rj.at("cells")) {
        CellRecord c;
        c.method = impute::parse_method(cj.at("method").get<std::string>());
        c.ok = cj.at("ok").get<bool>();
        c.reason = cj.value("reason", std::string());
        if (c.ok) {
          c.qbar = cj.at("qbar").get<std::vector<double>>();
          c.reject = cj.at("reject").get<std::vector<bool>>();
          c.ipm = cj.at("ipm").get<double>();
        }
        c.seconds = cj.value("seconds", 0.0);
        rr.cells.push_back(std::move(c));
      }
      rec.rates.push_back(std::move(rr));
    }
  } catch (const Json::exception& e) {
    throw ParseError(std::string("replication record: ") + e.what());
  }
  return rec;
}

}  // namespace mdlab::harness
