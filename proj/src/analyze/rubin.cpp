#include "mdlab/analyze/rubin.hpp"

#include <cmath>
#include <limits>

#include "mdlab/common/errors.hpp"

namespace mdlab::analyze {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void finish_tests(PooledResult& r) {
  const std::size_t K = r.qbar.size();
  r.p.assign(K, 1.0);
  r.reject.assign(K, false);
  for (std::size_t k = 0; k < K; ++k) {
    double p;
    if (r.t_var[k] > 0) {
      p = two_sided_p(r.qbar[k] / std::sqrt(r.t_var[k]), r.df[k]);
    } else {
      p = r.qbar[k] == 0.0 ? 1.0 : 0.0;
    }
    r.p[k] = p;
    r.reject[k] = reject_at(p, r.alpha);
  }
}

}  // namespace

Json PooledResult::to_json() const {
  Json rows = Json::array();
  for (std::size_t k = 0; k < qbar.size(); ++k) {
    rows.push_back(Json{{"term", terms[k]},
                        {"qbar", qbar[k]},
                        {"w", w[k]},
                        {"b", b[k]},
                        {"t_var", t_var[k]},
                        {"df", std::isfinite(df[k]) ? Json(df[k]) : Json("inf")},
                        {"p", p[k]},
                        {"reject", static_cast<bool>(reject[k])}});
  }
  return Json{{"m", m}, {"alpha", alpha}, {"terms", rows}};
}

PooledResult rubin_pool(const std::vector<FitResult>& fits, double alpha, DfMethod method) {
  const std::size_t m = fits.size();
  if (m < 2) throw ConfigError("Rubin pooling needs at least two fits");
  const std::size_t K = fits[0].size();
  for (const auto& f : fits) {
    if (f.terms != fits[0].terms) throw AlignmentError("fits to pool have different term sets");
  }
  PooledResult r;
  r.terms = fits[0].terms;
  r.m = m;
  r.alpha = alpha;
  r.qbar.assign(K, 0.0);
  r.w.assign(K, 0.0);
  r.b.assign(K, 0.0);
  r.t_var.assign(K, 0.0);
  r.df.assign(K, kInf);
  const double dm = static_cast<double>(m);
  for (std::size_t k = 0; k < K; ++k) {
    for (const auto& f : fits) {
      r.qbar[k] += f.beta[k];
      r.w[k] += f.se[k] * f.se[k];
    }
    r.qbar[k] /= dm;
    r.w[k] /= dm;
    for (const auto& f : fits) r.b[k] += (f.beta[k] - r.qbar[k]) * (f.beta[k] - r.qbar[k]);
    r.b[k] /= dm - 1.0;
    double between = (1.0 + 1.0 / dm) * r.b[k];
    r.t_var[k] = r.w[k] + between;
    if (between > 0) {
      double df_old = (dm - 1.0) * std::pow(1.0 + r.w[k] / between, 2);
      if (method == DfMethod::BarnardRubin) {
        double gamma = between / r.t_var[k];
        double df_com = fits[0].df;
        double df_obs = (df_com + 1.0) / (df_com + 3.0) * df_com * (1.0 - gamma);
        r.df[k] = 1.0 / (1.0 / df_old + 1.0 / df_obs);
      } else {
        r.df[k] = df_old;
      }
    } else if (method == DfMethod::BarnardRubin) {
      double df_com = fits[0].df;
      r.df[k] = (df_com + 1.0) / (df_com + 3.0) * df_com;
    }
  }
  finish_tests(r);
  return r;
}

PooledResult single_fit_tests(const FitResult& fit, double alpha) {
  PooledResult r;
  r.terms = fit.terms;
  r.m = 1;
  r.alpha = alpha;
  r.qbar = fit.beta;
  r.b.assign(fit.size(), 0.0);
  r.w.resize(fit.size());
  for (std::size_t k = 0; k < fit.size(); ++k) r.w[k] = fit.se[k] * fit.se[k];
  r.t_var = r.w;
  r.df.assign(fit.size(), fit.df);
  finish_tests(r);
  return r;
}

}  // namespace mdlab::analyze
