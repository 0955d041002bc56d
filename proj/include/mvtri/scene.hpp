#pragma once

// Synthetic scenes mimicking the physical rigs of the comparison study: a
// parametric object, three cameras placed by angle or by baseline offset, and
// an observation model with Gaussian noise, pixel quantization and random
// detection dropouts.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mvtri/geometry.hpp"
#include "mvtri/triangulation.hpp"

namespace mvtri {

enum class ObjectKind { PlanarGrid, RandomBox };

struct ObjectModel {
  ObjectKind kind = ObjectKind::PlanarGrid;
  Vec3 extents_cm = Vec3(10.0, 10.0, 0.0);
  int grid_rows = 10;
  int grid_cols = 10;
  int point_count = 100;  // RandomBox only
  std::uint64_t seed = 0;

  int size() const { return kind == ObjectKind::PlanarGrid ? grid_rows * grid_cols : point_count; }
  bool operator==(const ObjectModel&) const = default;
};

struct Resolution {
  int width = 3840;
  int height = 2160;

  bool operator==(const Resolution&) const = default;
};

/// Named presets of the resolution ladder: low, fullhd, ultrahd, native.
std::optional<Resolution> resolution_preset(std::string_view name);
/// Name of a preset matching `r`, empty when custom.
std::string preset_name(const Resolution& r);

inline constexpr Resolution kNativeResolution{4032, 3024};
/// Focal length in pixels at native resolution.
inline constexpr double kNativeFocalPixels = 3200.0;

/// Focal length giving the native field of view at resolution `r`.
double focal_for_resolution(const Resolution& r, double native_focal = kNativeFocalPixels);

enum class RigKind { AngleStudy, DistanceStudy, Custom };

/// The seven camera stations of the distance study, cm from the left-most.
inline constexpr std::array<double, 7> kDistanceStations{0.0, 1.73, 3.46, 5.33, 7.2, 9.16, 10.93};

struct RigSpec {
  RigKind kind = RigKind::AngleStudy;
  double middle_distance_cm = 21.0;
  double left_angle_deg = 5.33;
  double right_angle_deg = 16.79;
  std::array<double, 3> camera_offsets_cm{1.73, 5.33, 7.2};
  double standoff_cm = 21.0;
  /// Station on the perpendicular bisector of the object.
  double bisector_offset_cm = 5.33;
  /// Camera centers for Custom rigs, all aimed at the object centroid.
  std::vector<Vec3> custom_centers_cm;
  Resolution resolution;
  double focal_pixels = focal_for_resolution(Resolution{});

  bool operator==(const RigSpec&) const = default;
};

struct NoiseModel {
  double sigma_px = 0.0;
  bool quantize = false;
  double detect_prob = 1.0;
  std::uint64_t seed = 0;

  bool operator==(const NoiseModel&) const = default;
};

struct SyntheticScene {
  std::vector<HomoPoint3> ground_truth;
  std::vector<CameraView> views;
  std::vector<Track> tracks;
  ObjectModel object;
  RigSpec rig;
  NoiseModel noise;

  std::vector<ProjectionMatrix> projections() const;
};

std::vector<HomoPoint3> make_object(const ObjectModel& model);

/// Throws InvalidSpec when the rig parameters violate their ranges.
void validate(const RigSpec& spec);
void validate(const ObjectModel& model);
void validate(const NoiseModel& noise);

/// Middle camera at azimuth 0 on a circle around the object, left and right
/// cameras rotated by the given angles about the vertical axis.
std::vector<CameraView> make_angle_rig(const RigSpec& spec);
/// Three cameras on a line parallel to the object plane.
std::vector<CameraView> make_distance_rig(const RigSpec& spec);
std::vector<CameraView> make_custom_rig(const RigSpec& spec);
std::vector<CameraView> make_rig(const RigSpec& spec);

/// Images every point in every view. Random draws are made for every
/// (point, view) pair whether or not the point is visible, so scenes that
/// differ only in sigma share the same underlying noise realization.
std::vector<Track> render_tracks(std::span<const CameraView> views,
                                 std::span<const HomoPoint3> points, const NoiseModel& noise);

SyntheticScene simulate_scene(const ObjectModel& object, const RigSpec& rig, const NoiseModel& noise);

}  // namespace mvtri
