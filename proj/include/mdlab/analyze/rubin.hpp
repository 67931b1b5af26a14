#pragma once

#include <vector>

#include "mdlab/analyze/ols.hpp"
#include "mdlab/common/json_util.hpp"

namespace mdlab::analyze {

// Classic: (m-1)(1 + 1/r)^2 with r = (1+1/m)b/w. BarnardRubin adds the
// small-sample correction based on the complete-data df.
enum class DfMethod { Classic, BarnardRubin };

struct PooledResult {
  std::vector<std::string> terms;
  std::vector<double> qbar, w, b, t_var, df, p;
  std::vector<bool> reject;
  std::size_t m = 0;
  double alpha = 0.05;

  std::size_t size() const { return qbar.size(); }
  Json to_json() const;
};

PooledResult rubin_pool(const std::vector<FitResult>& fits, double alpha = 0.05,
                        DfMethod method = DfMethod::Classic);

// t tests of a single fit against zero with its residual df, in the pooled
// layout (m = 1, b = 0).
PooledResult single_fit_tests(const FitResult& fit, double alpha = 0.05);

// H0: beta = 0 is rejected when p < alpha.
inline bool reject_at(double p, double alpha) { return p < alpha; }

}  // namespace mdlab::analyze
