#include "mvtri/scene.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "mvtri/error.hpp"

namespace mvtri {

namespace {

struct NamedResolution {
  std::string_view name;
  Resolution resolution;
};

constexpr std::array<NamedResolution, 4> kPresets{{
    {"low", {480, 320}},
    {"fullhd", {1920, 1080}},
    {"ultrahd", {3840, 2160}},
    {"native", {4032, 3024}},
}};

double radians(double deg) { return deg * std::numbers::pi / 180.0; }

const Vec3 kUp(0.0, 1.0, 0.0);

CameraIntrinsics intrinsics_for(const RigSpec& spec) {
  return CameraIntrinsics::from_focal_pixels(spec.focal_pixels, 0.5 * spec.resolution.width,
                                             0.5 * spec.resolution.height);
}

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::InvalidSpec, what);
}

}  // namespace

std::optional<Resolution> resolution_preset(std::string_view name) {
  for (const auto& p : kPresets) {
    if (p.name == name) return p.resolution;
  }
  return std::nullopt;
}

std::string preset_name(const Resolution& r) {
  for (const auto& p : kPresets) {
    if (p.resolution == r) return std::string(p.name);
  }
  return {};
}

double focal_for_resolution(const Resolution& r, double native_focal) {
  return native_focal * static_cast<double>(r.width) / static_cast<double>(kNativeResolution.width);
}

std::vector<ProjectionMatrix> SyntheticScene::projections() const {
  std::vector<ProjectionMatrix> out;
  out.reserve(views.size());
  for (const auto& v : views) out.push_back(compose_projection(v));
  return out;
}

void validate(const ObjectModel& model) {
  require(model.extents_cm.allFinite() && (model.extents_cm.array() >= 0.0).all(),
          "object extents must be finite and non-negative");
  if (model.kind == ObjectKind::PlanarGrid) {
    require(model.grid_rows >= 2 && model.grid_cols >= 2, "planar grid needs at least 2x2 points");
  } else {
    require(model.point_count >= 0, "point_count must be non-negative");
  }
  require(model.size() >= 8, "object must have at least 8 points");
}

void validate(const NoiseModel& noise) {
  require(std::isfinite(noise.sigma_px) && noise.sigma_px >= 0.0, "sigma_px must be >= 0");
  require(noise.detect_prob >= 0.0 && noise.detect_prob <= 1.0, "detect_prob must lie in [0, 1]");
}

void validate(const RigSpec& spec) {
  require(spec.resolution.width > 0 && spec.resolution.height > 0, "resolution must be positive");
  require(std::isfinite(spec.focal_pixels) && spec.focal_pixels > 0.0,
          "focal_pixels must be positive");
  switch (spec.kind) {
    case RigKind::AngleStudy:
      require(spec.middle_distance_cm > 0.0, "middle_distance_cm must be positive");
      require(spec.left_angle_deg > 0.0 && spec.left_angle_deg < 90.0,
              "left_angle_deg must lie in (0, 90)");
      require(spec.right_angle_deg > 0.0 && spec.right_angle_deg < 90.0,
              "right_angle_deg must lie in (0, 90)");
      break;
    case RigKind::DistanceStudy:
      require(spec.standoff_cm > 0.0, "standoff_cm must be positive");
      require(spec.camera_offsets_cm[0] < spec.camera_offsets_cm[1] &&
                  spec.camera_offsets_cm[1] < spec.camera_offsets_cm[2],
              "camera offsets must be strictly increasing");
      break;
    case RigKind::Custom:
      require(spec.custom_centers_cm.size() >= 2, "custom rig needs at least two cameras");
      break;
  }
}

std::vector<HomoPoint3> make_object(const ObjectModel& model) {
  validate(model);
  std::vector<HomoPoint3> points;
  const Vec3 half = 0.5 * model.extents_cm;
  if (model.kind == ObjectKind::PlanarGrid) {
    points.reserve(static_cast<std::size_t>(model.size()));
    for (int r = 0; r < model.grid_rows; ++r) {
      const double y = -half.y() + model.extents_cm.y() * r / (model.grid_rows - 1);
      for (int c = 0; c < model.grid_cols; ++c) {
        const double x = -half.x() + model.extents_cm.x() * c / (model.grid_cols - 1);
        points.emplace_back(x, y, 0.0, 1.0);
      }
    }
    return points;
  }
  std::mt19937_64 rng(model.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  points.reserve(static_cast<std::size_t>(model.point_count));
  for (int i = 0; i < model.point_count; ++i) {
    const double x = unit(rng);
    const double y = unit(rng);
    const double z = unit(rng);
    points.emplace_back(half.x() * x, half.y() * y, half.z() * z, 1.0);
  }
  return points;
}

std::vector<CameraView> make_angle_rig(const RigSpec& spec) {
  if (spec.kind != RigKind::AngleStudy) throw Error(ErrorCode::InvalidSpec, "not an angle rig");
  validate(spec);
  const CameraIntrinsics k = intrinsics_for(spec);
  const double r = spec.middle_distance_cm;
  std::vector<CameraView> views;
  for (double azimuth : {-spec.left_angle_deg, 0.0, spec.right_angle_deg}) {
    const double phi = radians(azimuth);
    const Vec3 center(r * std::sin(phi), 0.0, r * std::cos(phi));
    views.push_back(CameraView::look_at(k, center, Vec3::Zero(), kUp, spec.resolution.width,
                                        spec.resolution.height));
  }
  return views;
}

std::vector<CameraView> make_distance_rig(const RigSpec& spec) {
  if (spec.kind != RigKind::DistanceStudy) {
    throw Error(ErrorCode::InvalidSpec, "not a distance rig");
  }
  validate(spec);
  const CameraIntrinsics k = intrinsics_for(spec);
  std::vector<CameraView> views;
  for (double offset : spec.camera_offsets_cm) {
    const Vec3 center(offset - spec.bisector_offset_cm, 0.0, spec.standoff_cm);
    views.push_back(CameraView::look_at(k, center, Vec3::Zero(), kUp, spec.resolution.width,
                                        spec.resolution.height));
  }
  return views;
}

std::vector<CameraView> make_custom_rig(const RigSpec& spec) {
  if (spec.kind != RigKind::Custom) throw Error(ErrorCode::InvalidSpec, "not a custom rig");
  validate(spec);
  const CameraIntrinsics k = intrinsics_for(spec);
  std::vector<CameraView> views;
  for (const Vec3& center : spec.custom_centers_cm) {
    views.push_back(CameraView::look_at(k, center, Vec3::Zero(), kUp, spec.resolution.width,
                                        spec.resolution.height));
  }
  return views;
}

std::vector<CameraView> make_rig(const RigSpec& spec) {
  switch (spec.kind) {
    case RigKind::AngleStudy: return make_angle_rig(spec);
    case RigKind::DistanceStudy: return make_distance_rig(spec);
    case RigKind::Custom: return make_custom_rig(spec);
  }
  throw Error(ErrorCode::InvalidSpec, "unknown rig kind");
}

std::vector<Track> render_tracks(std::span<const CameraView> views,
                                 std::span<const HomoPoint3> points, const NoiseModel& noise) {
  validate(noise);
  std::vector<ProjectionMatrix> projections;
  projections.reserve(views.size());
  for (const auto& v : views) projections.push_back(compose_projection(v));

  std::mt19937_64 rng(noise.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  std::vector<Track> tracks;
  for (std::size_t i = 0; i < points.size(); ++i) {
    Track track;
    track.point_id = static_cast<std::int64_t>(i);
    for (std::size_t j = 0; j < views.size(); ++j) {
      const double du = gauss(rng);
      const double dv = gauss(rng);
      const double detect = uniform(rng);

      ImagePoint image;
      try {
        image = project(projections[j], points[i]);
      } catch (const Error&) {
        continue;
      }
      if (!image.in_front) continue;
      Vec2 pixel = image.point.euclidean();
      if (!views[j].contains(pixel)) continue;
      pixel += noise.sigma_px * Vec2(du, dv);
      if (noise.quantize) {
        pixel = Vec2(std::floor(pixel.x()) + 0.5, std::floor(pixel.y()) + 0.5);
      }
      if (!views[j].contains(pixel)) continue;
      if (!(detect < noise.detect_prob)) continue;
      track.observations.push_back({static_cast<int>(j), HomoPoint2::from_euclidean(pixel)});
    }
    if (track.observations.size() >= 2) tracks.push_back(std::move(track));
  }
  return tracks;
}

SyntheticScene simulate_scene(const ObjectModel& object, const RigSpec& rig,
                              const NoiseModel& noise) {
  SyntheticScene scene;
  scene.object = object;
  scene.rig = rig;
  scene.noise = noise;
  scene.ground_truth = make_object(object);
  scene.views = make_rig(rig);
  scene.tracks = render_tracks(scene.views, scene.ground_truth, noise);
  return scene;
}

}  // namespace mvtri
