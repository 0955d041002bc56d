#pragma once

// JSON form of scenes and of the scene-generation parameters. The scene
// document is also the ingestion format for externally produced data, so it
// carries projection matrices rather than decomposed camera parameters.
//
//   {
//     "views":        [{"P": [12 numbers, row-major], "width": W, "height": H}, ...],
//     "ground_truth": [[x, y, z], ...],            // optional
//     "tracks":       [{"point_id": i, "observations": [[view, u, v], ...]}, ...],
//     "provenance":   {"object": {...}, "rig": {...}, "noise": {...}}   // optional
//   }

#include <string>
#include <vector>

#include <json.hpp>

#include "mvtri/scene.hpp"

namespace mvtri {

/// Scene as read back from a document: cameras are plain projection matrices.
struct SceneData {
  std::vector<ProjectionMatrix> views;
  std::vector<Resolution> image_sizes;
  std::vector<Vec3> ground_truth;  // empty for real data; indexed by point_id
  std::vector<Track> tracks;
  nlohmann::json provenance = nlohmann::json::object();

  bool operator==(const SceneData&) const = default;
};

nlohmann::json to_json(const ObjectModel& model);
nlohmann::json to_json(const RigSpec& spec);
nlohmann::json to_json(const NoiseModel& noise);

/// Strict readers: omitted fields keep their defaults, unknown fields and
/// type mismatches raise ParseError naming the field, range violations raise
/// ValidationError.
ObjectModel object_from_json(const nlohmann::json& j, const std::string& where = "object",
                             const ObjectModel& defaults = {});
RigSpec rig_from_json(const nlohmann::json& j, const std::string& where = "rig",
                      const RigSpec& defaults = {});
NoiseModel noise_from_json(const nlohmann::json& j, const std::string& where = "noise",
                           const NoiseModel& defaults = {});

nlohmann::json scene_to_json(const SyntheticScene& scene);
SceneData to_scene_data(const SyntheticScene& scene);
SceneData scene_from_json(const nlohmann::json& j);

/// Serialized scene text; identical inputs give identical bytes.
std::string dump_scene(const SyntheticScene& scene);
void write_scene_file(const SyntheticScene& scene, const std::string& path);
SceneData read_scene_file(const std::string& path);

}  // namespace mvtri
