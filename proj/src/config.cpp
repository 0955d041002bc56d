#include <fstream>
#include <set>
#include <sstream>

#include "json_fields.hpp"
#include "mvtri/bench.hpp"
#include "mvtri/error.hpp"
#include "mvtri/scene_io.hpp"

namespace mvtri {

using nlohmann::json;
using detail::FieldReader;

namespace {

ExperimentConfig experiment_from_json(const json& j, const std::string& where,
                                      std::vector<ExperimentConfig>& out) {
  FieldReader r(j, where);
  ExperimentConfig c;
  r.read("id", c.id);

  if (const json* methods = r.raw("methods")) {
    if (!methods->is_array()) throw Error(ErrorCode::ParseError, r.path("methods") + ": expected a list");
    c.methods.clear();
    for (const auto& m : *methods) {
      if (!m.is_string()) throw Error(ErrorCode::ParseError, r.path("methods") + ": expected strings");
      try {
        c.methods.push_back(parse_method(m.get<std::string>()));
      } catch (const Error& e) {
        throw Error(ErrorCode::ValidationError, r.path("methods") + ": " + e.message());
      }
    }
  }
  std::string policy;
  if (r.read("two_view_policy", policy)) {
    if (policy == "all-pairs") {
      c.two_view_policy = TwoViewPolicy::AllPairs;
    } else if (policy == "first-pair") {
      c.two_view_policy = TwoViewPolicy::FirstPair;
    } else {
      throw Error(ErrorCode::ValidationError,
                  r.path("two_view_policy") + ": expected all-pairs or first-pair");
    }
  }
  r.read("trials", c.trials);
  r.read("base_seed", c.base_seed);
  if (const json* o = r.raw("object")) c.object = object_from_json(*o, r.path("object"), c.object);
  if (const json* g = r.raw("rig")) c.rig = rig_from_json(*g, r.path("rig"), c.rig);
  if (const json* n = r.raw("noise")) c.noise = noise_from_json(*n, r.path("noise"), c.noise);
  std::string sweep;
  r.read("sweep", sweep);
  r.finish();

  try {
    validate(c);
  } catch (const Error& e) {
    throw Error(ErrorCode::ValidationError, where + ": " + e.message());
  }

  if (sweep.empty()) {
    out.push_back(c);
  } else if (sweep == "angles") {
    for (auto& s : angle_sweep(c)) out.push_back(std::move(s));
  } else if (sweep == "distances") {
    for (auto& s : distance_sweep(c)) out.push_back(std::move(s));
  } else if (sweep == "resolutions") {
    for (auto& s : resolution_sweep(c)) out.push_back(std::move(s));
  } else {
    throw Error(ErrorCode::ValidationError,
                r.path("sweep") + ": expected angles, distances or resolutions, got '" + sweep + "'");
  }
  return c;
}

}  // namespace

std::vector<ExperimentConfig> parse_config_json(const json& j) {
  std::vector<ExperimentConfig> out;
  if (j.is_object() && j.contains("experiments")) {
    FieldReader top(j, "config");
    const json* list = top.raw("experiments");
    top.finish();
    if (!list->is_array()) throw Error(ErrorCode::ParseError, "config.experiments: expected a list");
    for (std::size_t i = 0; i < list->size(); ++i) {
      experiment_from_json((*list)[i], "config.experiments[" + std::to_string(i) + "]", out);
    }
  } else {
    experiment_from_json(j, "config", out);
  }
  if (out.empty()) throw Error(ErrorCode::ValidationError, "config: no experiments");

  std::set<std::string> ids;
  for (const auto& c : out) {
    if (!ids.insert(c.id).second) {
      throw Error(ErrorCode::ValidationError, "config: duplicate experiment id '" + c.id + "'");
    }
  }
  return out;
}

std::vector<ExperimentConfig> parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  return parse_config_json(j);
}

std::vector<ExperimentConfig> parse_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_config_text(buffer.str());
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.message());
  }
}

json to_json(const ExperimentConfig& config) {
  json methods = json::array();
  for (auto m : config.methods) methods.push_back(std::string(to_string(m)));
  return {{"id", config.id},
          {"methods", methods},
          {"two_view_policy",
           config.two_view_policy == TwoViewPolicy::AllPairs ? "all-pairs" : "first-pair"},
          {"trials", config.trials},
          {"base_seed", config.base_seed},
          {"object", to_json(config.object)},
          {"rig", to_json(config.rig)},
          {"noise", to_json(config.noise)}};
}

}  // namespace mvtri
