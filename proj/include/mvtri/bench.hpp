#pragma once

// Experiment runner comparing two-view and n-view triangulation on synthetic
// scenes, the built-in sweeps of the study, and CSV/JSON reporting.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mvtri/scene.hpp"
#include "mvtri/triangulation.hpp"

namespace mvtri {

enum class TwoViewPolicy { AllPairs, FirstPair };

struct ExperimentConfig {
  std::string id = "experiment";
  ObjectModel object;
  RigSpec rig;
  NoiseModel noise{.sigma_px = 0.5, .quantize = false, .detect_prob = 1.0, .seed = 0};
  std::vector<TriangulationMethod> methods{TriangulationMethod::TwoViewOptimal,
                                           TriangulationMethod::NViewLM};
  TwoViewPolicy two_view_policy = TwoViewPolicy::AllPairs;
  int trials = 30;
  std::uint64_t base_seed = 1;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Throws ConfigError naming the violated constraint.
void validate(const ExperimentConfig& config);

/// Metrics of one method in one trial.
struct MethodMetrics {
  int trial = 0;
  int tracks = 0;
  int points_reconstructed = 0;
  int failures = 0;
  std::optional<double> dispersion;               // cm, RMS distance to ground truth
  std::optional<double> mean_reprojection_error;  // px, mean per-result RMS residual
  double pairwise_disagreement = 0.0;             // cm; two-view methods under AllPairs
  double runtime_ms = 0.0;

  bool operator==(const MethodMetrics&) const = default;
};

struct MethodSummary {
  TriangulationMethod method = TriangulationMethod::Linear;
  double points_mean = 0.0;
  double points_std = 0.0;
  std::optional<double> dispersion_mean;
  std::optional<double> dispersion_std;
  std::optional<double> reproj_mean;
  double disagreement_mean = 0.0;
  double runtime_ms_mean = 0.0;
  std::vector<MethodMetrics> per_trial;

  bool operator==(const MethodSummary&) const = default;
};

struct ExperimentReport {
  std::string config_id;
  int trials = 0;
  std::vector<MethodSummary> methods;
  /// Mean two-view count divided by mean n-view count.
  std::optional<double> count_ratio;
  /// (two-view dispersion - n-view dispersion) / two-view dispersion, percent.
  std::optional<double> dispersion_delta_pct;

  const MethodSummary* find(TriangulationMethod m) const;
  bool operator==(const ExperimentReport&) const = default;
};

struct RunOptions {
  int parallelism = 1;
  /// Wall-clock timing makes reports non-reproducible, so it is opt-in;
  /// runtime fields are zero otherwise.
  bool measure_runtime = false;
};

/// RMS Euclidean distance between matched points. Throws EmptyInput.
double dispersion(std::span<const Vec3> estimates, std::span<const Vec3> ground_truth);
double dispersion(std::span<const TriangulationResult> results, std::span<const Vec3> ground_truth);

/// For each track, the mean distance among its pairwise reconstructions; RMS
/// over tracks. Each inner list holds the positions of one track.
double pairwise_disagreement(std::span<const std::vector<Vec3>> per_track_positions);
/// Three per-pair result lists aligned over the same tracks.
double pairwise_disagreement(std::span<const Vec3> pair12, std::span<const Vec3> pair13,
                             std::span<const Vec3> pair23);

/// Scene of trial t: noise seed derived from base_seed + t.
SyntheticScene trial_scene(const ExperimentConfig& config, int trial);

/// Metrics for every configured method on one trial.
std::vector<MethodMetrics> run_trial(const ExperimentConfig& config, int trial,
                                     bool measure_runtime = false);

ExperimentReport aggregate(const ExperimentConfig& config,
                           const std::vector<std::vector<MethodMetrics>>& per_trial);

ExperimentReport run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

/// Reports in input order. Throws ConfigError on duplicate ids.
std::vector<ExperimentReport> run_sweep(std::span<const ExperimentConfig> configs,
                                        const RunOptions& options = {});

/// Left angle in {5.33, 9.46, 10.72} x right angle in {8.74, 13.18, 16.79}.
std::vector<ExperimentConfig> angle_sweep(const ExperimentConfig& base);
/// All 35 ordered placements of three cameras on the seven stations.
std::vector<ExperimentConfig> distance_sweep(const ExperimentConfig& base);
/// The four resolution presets with the field of view held fixed.
std::vector<ExperimentConfig> resolution_sweep(const ExperimentConfig& base);

enum class ReportFormat { CSV, JSON };

inline constexpr const char* kReportCsvHeader =
    "config_id,method,trials,points_mean,points_std,dispersion_mean,dispersion_std,reproj_mean,"
    "disagreement_mean,runtime_ms_mean";
inline constexpr const char* kTrialsCsvHeader =
    "config_id,method,trial,tracks,points,failures,dispersion,reproj,disagreement,runtime_ms";

std::string report_csv(std::span<const ExperimentReport> reports);
std::string trials_csv(std::span<const ExperimentReport> reports);
nlohmann::json report_json(std::span<const ExperimentReport> reports);
std::vector<ExperimentReport> reports_from_json(const nlohmann::json& j);

/// CSV writes `path` plus the per-trial rows next to it (`<stem>.trials.csv`).
/// Throws IoError.
void write_report(std::span<const ExperimentReport> reports, const std::string& path,
                  ReportFormat format);
std::vector<ExperimentReport> read_report_json(const std::string& path);

/// Experiment file: one experiment object or {"experiments": [...]}. An
/// experiment with "sweep": "angles" | "distances" | "resolutions" expands
/// into the corresponding grid.
std::vector<ExperimentConfig> parse_config_json(const nlohmann::json& j);
std::vector<ExperimentConfig> parse_config_text(const std::string& text);
std::vector<ExperimentConfig> parse_config(const std::string& path);

nlohmann::json to_json(const ExperimentConfig& config);

}  // namespace mvtri
