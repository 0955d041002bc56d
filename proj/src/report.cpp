#include <filesystem>
#include <fstream>
#include <sstream>

#include "json_fields.hpp"
#include "mvtri/bench.hpp"
#include "mvtri/error.hpp"

namespace mvtri {

using nlohmann::json;

namespace {

std::string number(double v) {
  std::ostringstream s;
  s.precision(12);
  s << v;
  return s.str();
}

std::string number(const std::optional<double>& v) { return v ? number(*v) : std::string(); }

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> optional_from(const json& j, const std::string& key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<double>();
}

std::string quote_csv(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path);
}

}  // namespace

std::string report_csv(std::span<const ExperimentReport> reports) {
  std::ostringstream out;
  out << kReportCsvHeader << '\n';
  for (const auto& r : reports) {
    for (const auto& m : r.methods) {
      out << quote_csv(r.config_id) << ',' << to_string(m.method) << ',' << r.trials << ','
          << number(m.points_mean) << ',' << number(m.points_std) << ','
          << number(m.dispersion_mean) << ',' << number(m.dispersion_std) << ','
          << number(m.reproj_mean) << ',' << number(m.disagreement_mean) << ','
          << number(m.runtime_ms_mean) << '\n';
    }
  }
  return out.str();
}

std::string trials_csv(std::span<const ExperimentReport> reports) {
  std::ostringstream out;
  out << kTrialsCsvHeader << '\n';
  for (const auto& r : reports) {
    for (const auto& m : r.methods) {
      for (const auto& t : m.per_trial) {
        out << quote_csv(r.config_id) << ',' << to_string(m.method) << ',' << t.trial << ','
            << t.tracks << ',' << t.points_reconstructed << ',' << t.failures << ','
            << number(t.dispersion) << ',' << number(t.mean_reprojection_error) << ','
            << number(t.pairwise_disagreement) << ',' << number(t.runtime_ms) << '\n';
      }
    }
  }
  return out.str();
}

json report_json(std::span<const ExperimentReport> reports) {
  json list = json::array();
  for (const auto& r : reports) {
    json methods = json::array();
    for (const auto& m : r.methods) {
      json trials = json::array();
      for (const auto& t : m.per_trial) {
        trials.push_back({{"trial", t.trial},
                          {"tracks", t.tracks},
                          {"points", t.points_reconstructed},
                          {"failures", t.failures},
                          {"dispersion", optional_json(t.dispersion)},
                          {"reproj", optional_json(t.mean_reprojection_error)},
                          {"disagreement", t.pairwise_disagreement},
                          {"runtime_ms", t.runtime_ms}});
      }
      methods.push_back({{"method", std::string(to_string(m.method))},
                         {"points_mean", m.points_mean},
                         {"points_std", m.points_std},
                         {"dispersion_mean", optional_json(m.dispersion_mean)},
                         {"dispersion_std", optional_json(m.dispersion_std)},
                         {"reproj_mean", optional_json(m.reproj_mean)},
                         {"disagreement_mean", m.disagreement_mean},
                         {"runtime_ms_mean", m.runtime_ms_mean},
                         {"per_trial", trials}});
    }
    list.push_back({{"config_id", r.config_id},
                    {"trials", r.trials},
                    {"count_ratio", optional_json(r.count_ratio)},
                    {"dispersion_delta_pct", optional_json(r.dispersion_delta_pct)},
                    {"methods", methods}});
  }
  return {{"reports", list}};
}

std::vector<ExperimentReport> reports_from_json(const json& j) {
  std::vector<ExperimentReport> out;
  try {
    for (const auto& r : j.at("reports")) {
      ExperimentReport report;
      report.config_id = r.at("config_id").get<std::string>();
      report.trials = r.at("trials").get<int>();
      report.count_ratio = optional_from(r, "count_ratio");
      report.dispersion_delta_pct = optional_from(r, "dispersion_delta_pct");
      for (const auto& m : r.at("methods")) {
        MethodSummary s;
        s.method = parse_method(m.at("method").get<std::string>());
        s.points_mean = m.at("points_mean").get<double>();
        s.points_std = m.at("points_std").get<double>();
        s.dispersion_mean = optional_from(m, "dispersion_mean");
        s.dispersion_std = optional_from(m, "dispersion_std");
        s.reproj_mean = optional_from(m, "reproj_mean");
        s.disagreement_mean = m.at("disagreement_mean").get<double>();
        s.runtime_ms_mean = m.at("runtime_ms_mean").get<double>();
        for (const auto& t : m.at("per_trial")) {
          MethodMetrics mm;
          mm.trial = t.at("trial").get<int>();
          mm.tracks = t.at("tracks").get<int>();
          mm.points_reconstructed = t.at("points").get<int>();
          mm.failures = t.at("failures").get<int>();
          mm.dispersion = optional_from(t, "dispersion");
          mm.mean_reprojection_error = optional_from(t, "reproj");
          mm.pairwise_disagreement = t.at("disagreement").get<double>();
          mm.runtime_ms = t.at("runtime_ms").get<double>();
          s.per_trial.push_back(std::move(mm));
        }
        report.methods.push_back(std::move(s));
      }
      out.push_back(std::move(report));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("report: ") + e.what());
  }
  return out;
}

void write_report(std::span<const ExperimentReport> reports, const std::string& path,
                  ReportFormat format) {
  if (format == ReportFormat::JSON) {
    write_text(path, report_json(reports).dump(2) + "\n");
    return;
  }
  write_text(path, report_csv(reports));
  std::filesystem::path trials(path);
  trials.replace_extension(".trials.csv");
  write_text(trials.string(), trials_csv(reports));
}

std::vector<ExperimentReport> read_report_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  try {
    return reports_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, path + ": " + e.what());
  }
}

}  // namespace mvtri
