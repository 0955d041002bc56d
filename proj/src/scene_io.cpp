#include "mvtri/scene_io.hpp"

#include <fstream>
#include <sstream>
#include <tuple>

#include "json_fields.hpp"
#include "mvtri/error.hpp"

namespace mvtri {

using nlohmann::json;
using detail::FieldReader;

namespace {

json vec3_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec3_from(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) {
    throw Error(ErrorCode::ParseError, where + ": expected [x, y, z]");
  }
  try {
    return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, where + ": " + e.what());
  }
}

json resolution_json(const Resolution& r) {
  if (const std::string name = preset_name(r); !name.empty()) return name;
  return json::array({r.width, r.height});
}

Resolution resolution_from(const json& j, const std::string& where) {
  if (j.is_string()) {
    const auto preset = resolution_preset(j.get<std::string>());
    if (!preset) {
      throw Error(ErrorCode::ValidationError,
                  where + ": unknown resolution preset '" + j.get<std::string>() +
                      "' (expected low, fullhd, ultrahd or native)");
    }
    return *preset;
  }
  if (j.is_array() && j.size() == 2 && j[0].is_number_integer() && j[1].is_number_integer()) {
    return Resolution{j[0].get<int>(), j[1].get<int>()};
  }
  throw Error(ErrorCode::ParseError, where + ": expected a preset name or [width, height]");
}

template <typename T>
void revalidate(const T& value, const std::string& where) {
  try {
    validate(value);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::InvalidSpec) throw;
    throw Error(ErrorCode::ValidationError, where + ": " + e.message());
  }
}

}  // namespace

json to_json(const ObjectModel& model) {
  json j;
  j["kind"] = model.kind == ObjectKind::PlanarGrid ? "planar-grid" : "random-box";
  j["extents_cm"] = vec3_json(model.extents_cm);
  j["grid"] = json::array({model.grid_rows, model.grid_cols});
  j["point_count"] = model.point_count;
  j["seed"] = model.seed;
  return j;
}

json to_json(const RigSpec& spec) {
  json j;
  switch (spec.kind) {
    case RigKind::AngleStudy: j["kind"] = "angle"; break;
    case RigKind::DistanceStudy: j["kind"] = "distance"; break;
    case RigKind::Custom: j["kind"] = "custom"; break;
  }
  j["middle_distance_cm"] = spec.middle_distance_cm;
  j["left_angle_deg"] = spec.left_angle_deg;
  j["right_angle_deg"] = spec.right_angle_deg;
  j["camera_offsets_cm"] = spec.camera_offsets_cm;
  j["standoff_cm"] = spec.standoff_cm;
  j["bisector_offset_cm"] = spec.bisector_offset_cm;
  json centers = json::array();
  for (const auto& c : spec.custom_centers_cm) centers.push_back(vec3_json(c));
  j["centers_cm"] = centers;
  j["resolution"] = resolution_json(spec.resolution);
  j["focal_pixels"] = spec.focal_pixels;
  return j;
}

json to_json(const NoiseModel& noise) {
  json j;
  j["sigma_px"] = noise.sigma_px;
  j["quantize"] = noise.quantize;
  j["detect_prob"] = noise.detect_prob;
  j["seed"] = noise.seed;
  return j;
}

ObjectModel object_from_json(const json& j, const std::string& where,
                             const ObjectModel& defaults) {
  FieldReader r(j, where);
  ObjectModel m = defaults;
  std::string kind;
  if (r.read("kind", kind)) {
    if (kind == "planar-grid") {
      m.kind = ObjectKind::PlanarGrid;
    } else if (kind == "random-box") {
      m.kind = ObjectKind::RandomBox;
      m.extents_cm = Vec3(10.0, 10.0, 10.0);
    } else {
      throw Error(ErrorCode::ValidationError,
                  r.path("kind") + ": expected planar-grid or random-box, got '" + kind + "'");
    }
  }
  if (const json* e = r.raw("extents_cm")) m.extents_cm = vec3_from(*e, r.path("extents_cm"));
  if (const json* g = r.raw("grid")) {
    if (!g->is_array() || g->size() != 2 || !(*g)[0].is_number_integer() ||
        !(*g)[1].is_number_integer()) {
      throw Error(ErrorCode::ParseError, r.path("grid") + ": expected [rows, cols]");
    }
    m.grid_rows = (*g)[0].get<int>();
    m.grid_cols = (*g)[1].get<int>();
  }
  r.read("point_count", m.point_count);
  r.read("seed", m.seed);
  r.finish();
  revalidate(m, where);
  return m;
}

RigSpec rig_from_json(const json& j, const std::string& where, const RigSpec& defaults) {
  FieldReader r(j, where);
  RigSpec s = defaults;
  std::string kind;
  if (r.read("kind", kind)) {
    if (kind == "angle") {
      s.kind = RigKind::AngleStudy;
    } else if (kind == "distance") {
      s.kind = RigKind::DistanceStudy;
    } else if (kind == "custom") {
      s.kind = RigKind::Custom;
    } else {
      throw Error(ErrorCode::ValidationError,
                  r.path("kind") + ": expected angle, distance or custom, got '" + kind + "'");
    }
  }
  r.read("middle_distance_cm", s.middle_distance_cm);
  r.read("left_angle_deg", s.left_angle_deg);
  r.read("right_angle_deg", s.right_angle_deg);
  r.read("camera_offsets_cm", s.camera_offsets_cm);
  r.read("standoff_cm", s.standoff_cm);
  r.read("bisector_offset_cm", s.bisector_offset_cm);
  if (const json* c = r.raw("centers_cm")) {
    if (!c->is_array()) throw Error(ErrorCode::ParseError, r.path("centers_cm") + ": expected a list");
    s.custom_centers_cm.clear();
    for (std::size_t i = 0; i < c->size(); ++i) {
      s.custom_centers_cm.push_back(vec3_from((*c)[i], r.path("centers_cm") + "[" + std::to_string(i) + "]"));
    }
  }
  if (const json* res = r.raw("resolution")) {
    s.resolution = resolution_from(*res, r.path("resolution"));
    s.focal_pixels = focal_for_resolution(s.resolution);
  }
  r.read("focal_pixels", s.focal_pixels);
  r.finish();
  revalidate(s, where);
  return s;
}

NoiseModel noise_from_json(const json& j, const std::string& where,
                           const NoiseModel& defaults) {
  FieldReader r(j, where);
  NoiseModel n = defaults;
  r.read("sigma_px", n.sigma_px);
  r.read("quantize", n.quantize);
  r.read("detect_prob", n.detect_prob);
  r.read("seed", n.seed);
  r.finish();
  revalidate(n, where);
  return n;
}

json scene_to_json(const SyntheticScene& scene) {
  json j;
  json views = json::array();
  for (const auto& v : scene.views) {
    const Mat34 P = compose_projection(v).P;
    json p = json::array();
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 4; ++c) p.push_back(P(r, c));
    }
    views.push_back({{"P", p}, {"width", v.image_width}, {"height", v.image_height}});
  }
  j["views"] = views;

  json truth = json::array();
  for (const auto& X : scene.ground_truth) truth.push_back(vec3_json(X.euclidean()));
  j["ground_truth"] = truth;

  json tracks = json::array();
  for (const auto& t : scene.tracks) {
    json obs = json::array();
    for (const auto& o : t.observations) obs.push_back({o.view_index, o.pixel.u(), o.pixel.v()});
    tracks.push_back({{"point_id", t.point_id}, {"observations", obs}});
  }
  j["tracks"] = tracks;
  j["provenance"] = {{"object", to_json(scene.object)},
                     {"rig", to_json(scene.rig)},
                     {"noise", to_json(scene.noise)}};
  return j;
}

SceneData to_scene_data(const SyntheticScene& scene) { return scene_from_json(scene_to_json(scene)); }

SceneData scene_from_json(const json& j) {
  FieldReader top(j, "scene");
  SceneData data;

  const json* views = top.raw("views");
  if (views == nullptr || !views->is_array()) {
    throw Error(ErrorCode::ParseError, "scene.views: expected a list of views");
  }
  for (std::size_t i = 0; i < views->size(); ++i) {
    const std::string where = "scene.views[" + std::to_string(i) + "]";
    FieldReader r((*views)[i], where);
    std::vector<double> p;
    Resolution size;
    if (!r.read("P", p) || p.size() != 12) {
      throw Error(ErrorCode::ParseError, where + ".P: expected 12 numbers");
    }
    if (!r.read("width", size.width) || !r.read("height", size.height)) {
      throw Error(ErrorCode::ParseError, where + ": width and height are required");
    }
    r.finish();
    if (size.width <= 0 || size.height <= 0) {
      throw Error(ErrorCode::ValidationError, where + ": image size must be positive");
    }
    data.views.emplace_back(Mat34(Eigen::Map<const Mat34>(p.data())));
    data.image_sizes.push_back(size);
  }

  if (const json* truth = top.raw("ground_truth")) {
    if (!truth->is_array()) throw Error(ErrorCode::ParseError, "scene.ground_truth: expected a list");
    for (std::size_t i = 0; i < truth->size(); ++i) {
      data.ground_truth.push_back(
          vec3_from((*truth)[i], "scene.ground_truth[" + std::to_string(i) + "]"));
    }
  }

  const json* tracks = top.raw("tracks");
  if (tracks == nullptr || !tracks->is_array()) {
    throw Error(ErrorCode::ParseError, "scene.tracks: expected a list of tracks");
  }
  for (std::size_t i = 0; i < tracks->size(); ++i) {
    const std::string where = "scene.tracks[" + std::to_string(i) + "]";
    FieldReader r((*tracks)[i], where);
    Track t;
    if (!r.read("point_id", t.point_id)) throw Error(ErrorCode::ParseError, where + ".point_id missing");
    std::vector<std::tuple<int, double, double>> obs;
    if (!r.read("observations", obs)) {
      throw Error(ErrorCode::ParseError, where + ".observations missing");
    }
    r.finish();
    for (const auto& [view, u, v] : obs) t.observations.push_back({view, HomoPoint2(u, v, 1.0)});
    try {
      validate_track(data.views, t);
    } catch (const Error& e) {
      throw Error(ErrorCode::ValidationError, where + ": " + e.message());
    }
    if (!data.ground_truth.empty() &&
        (t.point_id < 0 || static_cast<std::size_t>(t.point_id) >= data.ground_truth.size())) {
      throw Error(ErrorCode::ValidationError, where + ": point_id has no ground truth entry");
    }
    data.tracks.push_back(std::move(t));
  }

  if (const json* prov = top.raw("provenance")) data.provenance = *prov;
  top.finish();
  return data;
}

std::string dump_scene(const SyntheticScene& scene) { return scene_to_json(scene).dump(2) + "\n"; }

void write_scene_file(const SyntheticScene& scene, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
  out << dump_scene(scene);
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path);
}

SceneData read_scene_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, path + ": " + e.what());
  }
  return scene_from_json(j);
}

}  // namespace mvtri
