#include "mdlab/impute/engines.hpp"

#include <algorithm>
#include <chrono>

#include "mdlab/common/parallel.hpp"
#include "runners.hpp"

namespace mdlab::impute {

using tabular::Dataset;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

template <class Run>
MultipleImputation run_engine(const Dataset& ds, ImputerSpec spec, Method method, std::uint64_t seed, Run&& run) {
  spec.method = method;
  spec.validate();
  ds.validate();
  const auto start = Clock::now();
  const std::size_t m = static_cast<std::size_t>(spec.m);

  MultipleImputation out;
  out.completions.resize(m);
  std::vector<detail::RunLog> logs(m);
  std::vector<double> secs(m, 0.0);
  const std::uint64_t tag = stream_tag(to_string(method));
  parallel_for(m, spec.threads, [&](std::size_t i) {
    const auto t0 = Clock::now();
    Rng rng = make_rng(derive_seed(seed, {tag, static_cast<std::uint64_t>(i)}));
    logs[i].imputation = static_cast<int>(i) + 1;
    out.completions[i] = run(ds, spec, rng, logs[i]);
    secs[i] = seconds_since(t0);
  });

  auto& prov = out.provenance;
  prov.method = method;
  prov.spec = spec;
  prov.seed = seed;
  prov.imputation_seconds = std::move(secs);
  for (auto& log : logs) {
    prov.traces.insert(prov.traces.end(), log.traces.begin(), log.traces.end());
    prov.sweeps.push_back(log.sweeps);
    for (auto& w : log.warnings) {
      if (std::find(prov.warnings.begin(), prov.warnings.end(), w) == prov.warnings.end()) {
        prov.warnings.push_back(std::move(w));
      }
    }
  }
  prov.seconds = seconds_since(start);
  return out;
}

}  // namespace

MultipleImputation impute_mice_pmm(const Dataset& ds, const ImputerSpec& spec, std::uint64_t seed) {
  return run_engine(ds, spec, Method::MicePmm, seed, detail::run_mice_pmm);
}

MultipleImputation impute_mice_rf(const Dataset& ds, const ImputerSpec& spec, std::uint64_t seed) {
  return run_engine(ds, spec, Method::MiceRf, seed, detail::run_mice_rf);
}

MultipleImputation impute_missranger(const Dataset& ds, const ImputerSpec& spec, std::uint64_t seed, bool use_pmm) {
  return run_engine(ds, spec, use_pmm ? Method::MissRangerPmm : Method::MissRanger, seed,
                    [use_pmm](const Dataset& d, const ImputerSpec& s, Rng& rng, detail::RunLog& log) {
                      return detail::run_missranger(d, s, use_pmm, rng, log);
                    });
}

MultipleImputation impute_mixgb(const Dataset& ds, const ImputerSpec& spec, std::uint64_t seed) {
  return run_engine(ds, spec, Method::MixGb, seed, detail::run_mixgb);
}

MultipleImputation run_imputation(const Dataset& ds, const ImputerSpec& spec, std::uint64_t seed) {
  switch (spec.method) {
    case Method::MicePmm:
      return impute_mice_pmm(ds, spec, seed);
    case Method::MiceRf:
      return impute_mice_rf(ds, spec, seed);
    case Method::MissRanger:
      return impute_missranger(ds, spec, seed, false);
    case Method::MissRangerPmm:
      return impute_missranger(ds, spec, seed, true);
    case Method::MixGb:
      return impute_mixgb(ds, spec, seed);
  }
  return impute_mice_pmm(ds, spec, seed);
}

}  // namespace mdlab::impute
