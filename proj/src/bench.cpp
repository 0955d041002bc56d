#include "mvtri/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include "mvtri/error.hpp"

namespace mvtri {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

bool is_two_view(TriangulationMethod m) { return m != TriangulationMethod::NViewLM; }

struct Estimate {
  Vec3 point;
  double rms_px;
};

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

// Runs fn(i) for i in [0, n) on up to `parallelism` threads; rethrows the
// first exception after all workers finish.
template <typename Fn>
void parallel_for(std::size_t n, int parallelism, Fn fn) {
  const std::size_t workers =
      std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, parallelism)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

const MethodSummary* ExperimentReport::find(TriangulationMethod m) const {
  for (const auto& s : methods) {
    if (s.method == m) return &s;
  }
  return nullptr;
}

void validate(const ExperimentConfig& config) {
  auto fail = [&](const std::string& what) {
    throw Error(ErrorCode::ConfigError, "experiment '" + config.id + "': " + what);
  };
  if (config.id.empty()) fail("id must not be empty");
  if (config.methods.empty()) fail("methods must not be empty");
  if (std::set<TriangulationMethod>(config.methods.begin(), config.methods.end()).size() !=
      config.methods.size()) {
    fail("methods must not repeat");
  }
  if (config.trials < 1) fail("trials must be >= 1");
  try {
    validate(config.object);
    validate(config.rig);
    validate(config.noise);
  } catch (const Error& e) {
    fail(e.message());
  }
}

double dispersion(std::span<const Vec3> estimates, std::span<const Vec3> ground_truth) {
  if (estimates.empty()) throw Error(ErrorCode::EmptyInput, "dispersion of an empty set");
  if (estimates.size() != ground_truth.size()) {
    throw Error(ErrorCode::EmptyInput, "dispersion needs matched lists");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    acc += (estimates[i] - ground_truth[i]).squaredNorm();
  }
  return std::sqrt(acc / static_cast<double>(estimates.size()));
}

double dispersion(std::span<const TriangulationResult> results, std::span<const Vec3> ground_truth) {
  std::vector<Vec3> points;
  points.reserve(results.size());
  for (const auto& r : results) points.push_back(r.point.euclidean());
  return dispersion(points, ground_truth);
}

double pairwise_disagreement(std::span<const std::vector<Vec3>> per_track_positions) {
  if (per_track_positions.empty()) {
    throw Error(ErrorCode::EmptyInput, "pairwise disagreement of no tracks");
  }
  double acc = 0.0;
  for (const auto& positions : per_track_positions) {
    double sum = 0.0;
    int pairs = 0;
    for (std::size_t i = 0; i < positions.size(); ++i) {
      for (std::size_t j = i + 1; j < positions.size(); ++j) {
        sum += (positions[i] - positions[j]).norm();
        ++pairs;
      }
    }
    const double mean_distance = pairs > 0 ? sum / pairs : 0.0;
    acc += mean_distance * mean_distance;
  }
  return std::sqrt(acc / static_cast<double>(per_track_positions.size()));
}

double pairwise_disagreement(std::span<const Vec3> pair12, std::span<const Vec3> pair13,
                             std::span<const Vec3> pair23) {
  if (pair12.size() != pair13.size() || pair12.size() != pair23.size()) {
    throw Error(ErrorCode::EmptyInput, "pair lists must cover the same tracks");
  }
  std::vector<std::vector<Vec3>> tracks;
  tracks.reserve(pair12.size());
  for (std::size_t i = 0; i < pair12.size(); ++i) tracks.push_back({pair12[i], pair13[i], pair23[i]});
  return pairwise_disagreement(tracks);
}

SyntheticScene trial_scene(const ExperimentConfig& config, int trial) {
  NoiseModel noise = config.noise;
  noise.seed = splitmix64(config.base_seed + static_cast<std::uint64_t>(trial));
  return simulate_scene(config.object, config.rig, noise);
}

std::vector<MethodMetrics> run_trial(const ExperimentConfig& config, int trial,
                                     bool measure_runtime) {
  const SyntheticScene scene = trial_scene(config, trial);
  const std::vector<ProjectionMatrix> P = scene.projections();
  const std::size_t n_views = P.size();

  std::vector<MethodMetrics> out;
  for (TriangulationMethod method : config.methods) {
    MethodMetrics m;
    m.trial = trial;
    m.tracks = static_cast<int>(scene.tracks.size());

    std::vector<Estimate> estimates;
    std::vector<Vec3> truth;
    std::vector<std::vector<Vec3>> agreement_sets;

    auto record = [&](const TriangulationResult& r, std::int64_t point_id) -> bool {
      if (!r.ok()) {
        ++m.failures;
        return false;
      }
      const double rms = std::sqrt(r.geometric_error / static_cast<double>(r.per_view_residual.size()));
      estimates.push_back({r.point.euclidean(), rms});
      truth.push_back(scene.ground_truth[static_cast<std::size_t>(point_id)].euclidean());
      return true;
    };

    const auto start = std::chrono::steady_clock::now();
    for (const Track& track : scene.tracks) {
      if (!is_two_view(method)) {
        if (track.observations.size() != n_views) continue;
        try {
          record(triangulate_nview_lm(P, track), track.point_id);
        } catch (const Error&) {
          ++m.failures;
        }
        continue;
      }

      std::vector<std::pair<std::size_t, std::size_t>> pairs;
      const std::size_t k = track.observations.size();
      if (config.two_view_policy == TwoViewPolicy::AllPairs) {
        for (std::size_t i = 0; i < k; ++i) {
          for (std::size_t j = i + 1; j < k; ++j) pairs.emplace_back(i, j);
        }
      } else {
        pairs.emplace_back(0, 1);
      }

      std::vector<Vec3> positions;
      for (const auto& [i, j] : pairs) {
        const Observation& a = track.observations[i];
        const Observation& b = track.observations[j];
        try {
          TriangulationResult r;
          if (method == TriangulationMethod::Linear) {
            const Track pair{track.point_id, {a, b}};
            r = triangulate_linear(P, pair);
          } else {
            r = triangulate_two_view_optimal(P[a.view_index], P[b.view_index], a.pixel, b.pixel);
          }
          if (record(r, track.point_id)) positions.push_back(r.point.euclidean());
        } catch (const Error&) {
          ++m.failures;
        }
      }
      if (config.two_view_policy == TwoViewPolicy::AllPairs && k == n_views && n_views >= 3 &&
          positions.size() == pairs.size()) {
        agreement_sets.push_back(std::move(positions));
      }
    }
    if (measure_runtime) {
      m.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    }

    m.points_reconstructed = static_cast<int>(estimates.size());
    if (!estimates.empty()) {
      std::vector<Vec3> points;
      double rms_sum = 0.0;
      for (const auto& e : estimates) {
        points.push_back(e.point);
        rms_sum += e.rms_px;
      }
      m.dispersion = dispersion(points, truth);
      m.mean_reprojection_error = rms_sum / static_cast<double>(estimates.size());
    }
    if (!agreement_sets.empty()) m.pairwise_disagreement = pairwise_disagreement(agreement_sets);
    out.push_back(std::move(m));
  }
  return out;
}

ExperimentReport aggregate(const ExperimentConfig& config,
                           const std::vector<std::vector<MethodMetrics>>& per_trial) {
  ExperimentReport report;
  report.config_id = config.id;
  report.trials = static_cast<int>(per_trial.size());
  for (std::size_t k = 0; k < config.methods.size(); ++k) {
    MethodSummary s;
    s.method = config.methods[k];
    std::vector<double> points, disp, reproj, disagreement, runtime;
    for (const auto& trial : per_trial) {
      const MethodMetrics& m = trial[k];
      s.per_trial.push_back(m);
      points.push_back(m.points_reconstructed);
      if (m.dispersion) disp.push_back(*m.dispersion);
      if (m.mean_reprojection_error) reproj.push_back(*m.mean_reprojection_error);
      disagreement.push_back(m.pairwise_disagreement);
      runtime.push_back(m.runtime_ms);
    }
    if (!points.empty()) {
      s.points_mean = mean(points);
      s.points_std = sample_std(points);
      s.disagreement_mean = mean(disagreement);
      s.runtime_ms_mean = mean(runtime);
    }
    if (!disp.empty()) {
      s.dispersion_mean = mean(disp);
      s.dispersion_std = sample_std(disp);
    }
    if (!reproj.empty()) s.reproj_mean = mean(reproj);
    report.methods.push_back(std::move(s));
  }

  const MethodSummary* two = report.find(TriangulationMethod::TwoViewOptimal);
  if (two == nullptr) two = report.find(TriangulationMethod::Linear);
  const MethodSummary* three = report.find(TriangulationMethod::NViewLM);
  if (two != nullptr && three != nullptr) {
    if (three->points_mean > 0.0) report.count_ratio = two->points_mean / three->points_mean;
    if (two->dispersion_mean && three->dispersion_mean && *two->dispersion_mean > 0.0) {
      report.dispersion_delta_pct =
          100.0 * (*two->dispersion_mean - *three->dispersion_mean) / *two->dispersion_mean;
    }
  }
  return report;
}

ExperimentReport run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  const ExperimentConfig configs[] = {config};
  return run_sweep(configs, options).front();
}

std::vector<ExperimentReport> run_sweep(std::span<const ExperimentConfig> configs,
                                        const RunOptions& options) {
  std::set<std::string> ids;
  for (const auto& c : configs) {
    validate(c);
    if (!ids.insert(c.id).second) {
      throw Error(ErrorCode::ConfigError, "duplicate experiment id '" + c.id + "'");
    }
  }

  // One task per (config, trial); results land in fixed slots so the merge
  // order does not depend on scheduling.
  std::vector<std::pair<std::size_t, int>> tasks;
  std::vector<std::vector<std::vector<MethodMetrics>>> slots(configs.size());
  for (std::size_t c = 0; c < configs.size(); ++c) {
    slots[c].resize(static_cast<std::size_t>(configs[c].trials));
    for (int t = 0; t < configs[c].trials; ++t) tasks.emplace_back(c, t);
  }
  parallel_for(tasks.size(), options.parallelism, [&](std::size_t i) {
    const auto [c, t] = tasks[i];
    slots[c][static_cast<std::size_t>(t)] = run_trial(configs[c], t, options.measure_runtime);
  });

  std::vector<ExperimentReport> reports;
  reports.reserve(configs.size());
  for (std::size_t c = 0; c < configs.size(); ++c) reports.push_back(aggregate(configs[c], slots[c]));
  return reports;
}

namespace {

std::string format_number(double v) {
  std::ostringstream s;
  s.precision(10);
  s << v;
  return s.str();
}

std::string sweep_id(const std::string& base, const std::string& suffix) {
  return base + "/" + suffix;
}

}  // namespace

std::vector<ExperimentConfig> angle_sweep(const ExperimentConfig& base) {
  std::vector<ExperimentConfig> out;
  for (double left : {5.33, 9.46, 10.72}) {
    for (double right : {8.74, 13.18, 16.79}) {
      ExperimentConfig c = base;
      c.rig.kind = RigKind::AngleStudy;
      c.rig.left_angle_deg = left;
      c.rig.right_angle_deg = right;
      c.id = sweep_id(base.id, "left" + format_number(left) + "_right" + format_number(right));
      out.push_back(std::move(c));
    }
  }
  return out;
}

std::vector<ExperimentConfig> distance_sweep(const ExperimentConfig& base) {
  std::vector<ExperimentConfig> out;
  const auto& s = kDistanceStations;
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = i + 1; j < s.size(); ++j) {
      for (std::size_t k = j + 1; k < s.size(); ++k) {
        ExperimentConfig c = base;
        c.rig.kind = RigKind::DistanceStudy;
        c.rig.camera_offsets_cm = {s[i], s[j], s[k]};
        c.id = sweep_id(base.id, format_number(s[i]) + "-" + format_number(s[j]) + "-" +
                                     format_number(s[k]));
        out.push_back(std::move(c));
      }
    }
  }
  return out;
}

std::vector<ExperimentConfig> resolution_sweep(const ExperimentConfig& base) {
  std::vector<ExperimentConfig> out;
  // Focal length per unit image width of the base rig fixes the field of view.
  const double focal_per_width = base.rig.focal_pixels / base.rig.resolution.width;
  for (const char* name : {"low", "fullhd", "ultrahd", "native"}) {
    ExperimentConfig c = base;
    c.rig.resolution = *resolution_preset(name);
    c.rig.focal_pixels = focal_per_width * c.rig.resolution.width;
    c.id = sweep_id(base.id, name);
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace mvtri
