#include "mdlab/harness/report.hpp"

#include <Eigen/Core>
#include <sstream>

#include "mdlab/common/errors.hpp"

namespace mdlab::harness {

namespace {

std::string kind_name(metrics::VariableKind k) {
  switch (k) {
    case metrics::VariableKind::Metric: return "metric";
    case metrics::VariableKind::Binary: return "binary";
    case metrics::VariableKind::Other: return "other";
  }
  return "other";
}

std::string rate_text(double r) { return format_real(r, 4); }

}  // namespace

std::string panels_csv(const StudyReport& study, bool rejection) {
  std::ostringstream out;
  out << "label,rate,panel,panel_name,statistic,value,n_terms,n_replications\n";
  for (const auto& c : study.cells) {
    for (auto p : metrics::all_panels()) {
      const char* stats[] = {"mean", "median", "sd"};
      for (int s = 0; s < 3; ++s) {
        out << c.label << ',' << rate_text(c.rate) << ',' << metrics::panel_letter(p) << ','
            << metrics::panel_name(p) << ',' << stats[s] << ',';
        if (c.skipped()) {
          out << "NA,NA," << c.n << '\n';
          continue;
        }
        const auto& ps = (rejection ? c.rejection : c.bias).at(p);
        double v = s == 0 ? ps.mean : s == 1 ? ps.median : ps.sd;
        out << format_real(v) << ',' << ps.n_terms << ',' << c.n << '\n';
      }
    }
  }
  return out.str();
}

std::string coefficients_csv(const StudyReport& study) {
  std::ostringstream out;
  out << "term,kind,truth,label,rate,bias,rejection_rate\n";
  const auto& coefs = study.table.coefficients();
  for (std::size_t j = 0; j < coefs.size(); ++j) {
    for (const auto& c : study.cells) {
      out << coefs[j].term << ',' << kind_name(coefs[j].kind) << ',' << format_real(coefs[j].truth) << ','
          << c.label << ',' << rate_text(c.rate) << ',';
      if (c.skipped()) {
        out << "NA,NA\n";
      } else {
        out << format_real(c.bias.per_coefficient[j]) << ',' << format_real(c.rejection.per_coefficient[j]) << '\n';
      }
    }
  }
  return out.str();
}

std::string ipm_timing_csv(const StudyReport& study) {
  std::ostringstream out;
  out << "method,rate,ipm_mean,ipm_sd,seconds_mean,seconds_total,n_replications\n";
  for (const auto& c : study.cells) {
    if (!c.has_ipm) continue;
    out << c.label << ',' << rate_text(c.rate) << ',' << format_real(c.ipm_mean) << ',' << format_real(c.ipm_sd)
        << ',' << format_real(c.seconds_mean) << ',' << format_real(c.seconds_total) << ',' << c.n << '\n';
  }
  return out.str();
}

Json manifest(const StudyReport& study) {
  Json seeds = Json::array();
  for (int i : study.selected) seeds.push_back(Json{{"index", i}, {"seed", replication_seed(study.plan.seed, i)}});
  Json fails = Json::array();
  for (const auto& [index, reason] : study.failures) fails.push_back(Json{{"index", index}, {"reason", reason}});
  std::ostringstream eigen;
  eigen << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.' << EIGEN_MINOR_VERSION;
  std::ostringstream json_version;
  json_version << NLOHMANN_JSON_VERSION_MAJOR << '.' << NLOHMANN_JSON_VERSION_MINOR << '.'
               << NLOHMANN_JSON_VERSION_PATCH;
  return Json{{"mdlab_version", kVersion},
              {"plan", study.plan.to_json()},
              {"base_seed", study.plan.seed},
              {"complete", study.complete},
              {"attempted", study.attempted},
              {"replications", std::move(seeds)},
              {"failures", std::move(fails)},
              {"versions",
               Json{{"compiler", __VERSION__}, {"eigen", eigen.str()}, {"nlohmann_json", json_version.str()}}}};
}

SimPlan plan_from_file(const std::filesystem::path& path) {
  Json j = read_json_file(path);
  if (j.is_object() && j.contains("plan") && j.contains("mdlab_version")) return SimPlan::from_json(j.at("plan"));
  return SimPlan::from_json(j);
}

ReportFiles emit_report(const StudyReport& study, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create report directory '" + dir.string() + "': " + ec.message());
  ReportFiles f{dir / "bias_panels.csv", dir / "rejection_panels.csv", dir / "coefficients.csv",
                dir / "ipm_timing.csv",  dir / "study.json",           dir / "manifest.json",
                dir / "replications.jsonl"};
  write_text_file(f.bias_panels, panels_csv(study, false));
  write_text_file(f.rejection_panels, panels_csv(study, true));
  write_text_file(f.coefficients, coefficients_csv(study));
  write_text_file(f.ipm_timing, ipm_timing_csv(study));
  write_json_file(f.study, study.to_json(false));
  write_json_file(f.manifest, manifest(study));
  std::string lines;
  for (const auto& r : study.records) lines += r.to_json(true).dump() + "\n";
  write_text_file(f.records, lines);
  return f;
}

StudyReport load_study(const std::filesystem::path& dir, const SimPlan* plan) {
  Json man = read_json_file(dir / "manifest.json");
  SimPlan p = plan ? *plan : SimPlan::from_json(man.at("plan"));
  std::vector<ReplicationRecord> records;
  std::istringstream in(read_text_file(dir / "replications.jsonl"));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      records.push_back(ReplicationRecord::from_json(Json::parse(line)));
    } catch (const Json::exception& e) {
      throw ParseError((dir / "replications.jsonl").string() + ": " + e.what());
    }
  }
  StudyReport rep = aggregate(p, records);
  rep.complete = man.value("complete", false);
  rep.attempted = man.value("attempted", 0);
  for (const auto& f : man.at("failures")) rep.failures.emplace_back(f.at("index").get<int>(), f.at("reason").get<std::string>());
  return rep;
}

}  // namespace mdlab::harness
