// mvtri command line: scene simulation, calibration, triangulation of scene
// files and the benchmark runner.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure,
// 4 I/O error, 1 anything unexpected.

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mvtri/bench.hpp"
#include "mvtri/calibration.hpp"
#include "mvtri/error.hpp"
#include "mvtri/scene_io.hpp"
#include "mvtri/triangulation.hpp"

namespace {

using namespace mvtri;

int exit_code(const Error& e) {
  switch (category(e.code())) {
    case ErrorCategory::Config: return 2;
    case ErrorCategory::Numerical: return 3;
    case ErrorCategory::Io: return 4;
  }
  return 1;
}

// MVTRI_SEED replaces base_seed of every experiment when set.
void apply_seed_override(std::vector<ExperimentConfig>& configs) {
  const char* env = std::getenv("MVTRI_SEED");
  if (env == nullptr || *env == '\0') return;
  std::uint64_t seed = 0;
  std::size_t used = 0;
  try {
    seed = std::stoull(env, &used, 10);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || env[used] != '\0') {
    throw Error(ErrorCode::ConfigError, std::string("MVTRI_SEED is not an unsigned integer: ") + env);
  }
  for (auto& c : configs) c.base_seed = seed;
}

ReportFormat parse_format(const std::string& name) {
  if (name == "csv") return ReportFormat::CSV;
  if (name == "json") return ReportFormat::JSON;
  throw Error(ErrorCode::ConfigError, "unknown format '" + name + "'");
}

void write_reports(const std::vector<ExperimentReport>& reports, const std::string& prefix,
                   ReportFormat format) {
  const std::string path = prefix + (format == ReportFormat::CSV ? ".csv" : ".json");
  write_report(reports, path, format);
  std::cerr << "wrote " << path << " (" << reports.size() << " configs)\n";
}

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

int cmd_simulate(const std::string& config_path, const std::string& out) {
  auto configs = parse_config(config_path);
  apply_seed_override(configs);
  const SyntheticScene scene = trial_scene(configs.front(), 0);
  write_scene_file(scene, out);
  std::cerr << "wrote " << out << ": " << scene.views.size() << " views, " << scene.tracks.size()
            << " tracks\n";
  return 0;
}

int cmd_calibrate(const std::string& corr_path) {
  const auto corrs = read_correspondences_file(corr_path);
  const CalibrationResult r = calibrate_dlt(corrs);
  std::cout << "P =\n";
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 4; ++j) std::cout << (j == 0 ? "  " : " ") << fmt(r.P.P(i, j));
    std::cout << '\n';
  }
  std::cout << "rms_px = " << fmt(r.rms_reprojection) << '\n';
  std::cout << "algebraic_residual = " << fmt(r.algebraic_residual) << '\n';
  return 0;
}

int cmd_triangulate(const std::string& scene_path, const std::string& method_name,
                    const std::string& out) {
  const TriangulationMethod method = parse_method(method_name);
  const SceneData scene = read_scene_file(scene_path);
  for (const Track& t : scene.tracks) validate_track(scene.views, t);

  std::ostringstream csv;
  csv << "point_id,x,y,z,geometric_error,converged\n";
  int failures = 0;
  for (const Track& track : scene.tracks) {
    TriangulationResult r;
    try {
      if (method == TriangulationMethod::Linear) {
        r = triangulate_linear(scene.views, track);
      } else if (method == TriangulationMethod::TwoViewOptimal) {
        const Observation& a = track.observations[0];
        const Observation& b = track.observations[1];
        r = triangulate_two_view_optimal(scene.views[a.view_index], scene.views[b.view_index],
                                         a.pixel, b.pixel);
      } else {
        r = triangulate_nview_lm(scene.views, track);
      }
    } catch (const Error& e) {
      std::cerr << "point " << track.point_id << ": " << e.what() << '\n';
      r.failure = TriangulationFailure::PointAtInfinity;
    }
    csv << track.point_id << ',';
    if (r.ok()) {
      const Vec3 p = r.point.euclidean();
      csv << fmt(p.x()) << ',' << fmt(p.y()) << ',' << fmt(p.z()) << ',' << fmt(r.geometric_error)
          << ',' << (r.converged ? 1 : 0) << '\n';
    } else {
      ++failures;
      csv << ",,,,0\n";
    }
  }

  std::ofstream file(out, std::ios::binary);
  if (!file) throw Error(ErrorCode::IoError, "cannot open " + out + " for writing");
  file << csv.str();
  if (!file) throw Error(ErrorCode::IoError, "failed writing " + out);
  std::cerr << "triangulated " << scene.tracks.size() - failures << " of " << scene.tracks.size()
            << " tracks with " << to_string(method) << '\n';
  return 0;
}

int cmd_bench(const std::string& config_path, const std::string& out, int parallel,
              const std::string& format, bool timing) {
  auto configs = parse_config(config_path);
  apply_seed_override(configs);
  const auto reports = run_sweep(configs, RunOptions{parallel, timing});
  write_reports(reports, out, parse_format(format));
  return 0;
}

int cmd_sweep(const std::string& preset, const std::string& out, int trials, int parallel,
              const std::string& format, bool timing) {
  ExperimentConfig base;
  base.id = preset;
  base.trials = trials;
  std::vector<ExperimentConfig> configs;
  if (preset == "angles") {
    configs = angle_sweep(base);
  } else if (preset == "distances") {
    base.rig.kind = RigKind::DistanceStudy;
    configs = distance_sweep(base);
  } else if (preset == "resolutions") {
    base.noise.quantize = true;
    configs = resolution_sweep(base);
  } else {
    throw Error(ErrorCode::ConfigError, "unknown preset '" + preset + "'");
  }
  apply_seed_override(configs);
  const auto reports = run_sweep(configs, RunOptions{parallel, timing});
  write_reports(reports, out, parse_format(format));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-view triangulation toolkit and benchmark"};
  app.require_subcommand(1);

  std::string config, out, corr, scene, method, preset;
  std::string format = "csv";
  int parallel = 1;
  int trials = 30;
  bool timing = false;

  auto* simulate = app.add_subcommand("simulate", "Write the trial-0 scene of an experiment config");
  simulate->add_option("--config", config, "Experiment config (JSON)")->required();
  simulate->add_option("--out", out, "Scene file to write")->required();

  auto* calibrate = app.add_subcommand("calibrate", "DLT calibration from X Y Z u v correspondences");
  calibrate->add_option("--corr", corr, "Correspondence file")->required();

  auto* triangulate = app.add_subcommand("triangulate", "Triangulate every track of a scene file");
  triangulate->add_option("--scene", scene, "Scene file (JSON)")->required();
  triangulate->add_option("--method", method, "linear | two-opt | nview-lm")
      ->required()
      ->check(CLI::IsMember({"linear", "two-opt", "nview-lm"}));
  triangulate->add_option("--out", out, "Output CSV")->required();

  auto add_run_options = [&](CLI::App* cmd) {
    cmd->add_option("--out", out, "Output prefix; .csv/.trials.csv or .json is appended")->required();
    cmd->add_option("--parallel", parallel, "Worker threads")->check(CLI::PositiveNumber);
    cmd->add_option("--format", format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
    cmd->add_flag("--timing", timing, "Measure runtime_ms (output is then not reproducible)");
  };

  auto* bench = app.add_subcommand("bench", "Run the experiments of a config file");
  bench->add_option("--config", config, "Experiment config (JSON)")->required();
  add_run_options(bench);

  auto* sweep = app.add_subcommand("sweep", "Run a built-in sweep with default settings");
  sweep->add_option("--preset", preset, "angles | distances | resolutions")
      ->required()
      ->check(CLI::IsMember({"angles", "distances", "resolutions"}));
  sweep->add_option("--trials", trials, "Trials per configuration")->check(CLI::PositiveNumber);
  add_run_options(sweep);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*simulate) return cmd_simulate(config, out);
    if (*calibrate) return cmd_calibrate(corr);
    if (*triangulate) return cmd_triangulate(scene, method, out);
    if (*bench) return cmd_bench(config, out, parallel, format, timing);
    if (*sweep) return cmd_sweep(preset, out, trials, parallel, format, timing);
  } catch (const Error& e) {
    std::cerr << "mvtri: " << e.what() << '\n';
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "mvtri: internal error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
