#pragma once

// Patch files: the durable artifact of a synthesis run. A patch names the
// target and lists the predicates to splice; applying a patch is
// instrument(program, patch.predicates). Serialization is deterministic
// (insertion-ordered JSON, 2-space indent) so identical runs produce
// byte-identical files.

#include <string>

#include "json.hpp"
#include "waypoint/minilang/instrument.hpp"

namespace waypoint::minilang {

inline constexpr const char* kPatchFormat = "waypoint-patch-v1";

struct Patch {
  std::string target;  // target name the predicates were synthesized for
  PredicateSet predicates;
};

inline nlohmann::ordered_json patch_to_json(const Patch& patch) {
  nlohmann::ordered_json j;
  j["format"] = kPatchFormat;
  j["target"] = patch.target;
  j["predicates"] = nlohmann::ordered_json::array();
  for (const Predicate& p : patch.predicates) {
    nlohmann::ordered_json e;
    e["id"] = p.id;
    e["function"] = p.location.function;
    e["path"] = path_to_string(p.location.path);
    e["position"] = position_name(p.location.position);
    e["condition"] = p.condition;
    nlohmann::ordered_json prov;
    prov["hypothesis"] = p.hypothesis;
    prov["iteration"] = p.iteration;
    prov["backend"] = p.backend;
    e["origin"] = std::move(prov);
    j["predicates"].push_back(std::move(e));
  }
  return j;
}

inline std::string patch_to_string(const Patch& patch) {
  return patch_to_json(patch).dump(2) + "\n";
}

inline Patch patch_from_json(const nlohmann::ordered_json& j) {
  if (!j.is_object() || j.value("format", "") != kPatchFormat)
    throw ConfigError("not a " + std::string(kPatchFormat) + " document");
  Patch patch;
  patch.target = j.value("target", "");
  if (!j.contains("predicates") || !j["predicates"].is_array())
    throw ConfigError("patch is missing the predicates array");
  for (const auto& e : j["predicates"]) {
    Predicate p;
    try {
      p.id = e.at("id").get<std::string>();
      p.location.function = e.at("function").get<std::string>();
      p.location.path = path_from_string(e.at("path").get<std::string>());
      p.location.position = position_from_string(e.at("position").get<std::string>());
      p.condition = e.at("condition").get<std::string>();
    } catch (const nlohmann::json::exception& ex) {
      throw ConfigError(std::string("malformed patch predicate: ") + ex.what());
    }
    if (e.contains("origin") && e["origin"].is_object()) {
      const auto& prov = e["origin"];
      p.hypothesis = prov.value("hypothesis", "");
      p.iteration = prov.value("iteration", 0);
      p.backend = prov.value("backend", "");
    }
    patch.predicates.push_back(std::move(p));
  }
  return patch;
}

inline Patch patch_from_string(const std::string& text) {
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigError(std::string("invalid patch JSON: ") + ex.what());
  }
  return patch_from_json(j);
}

}  // namespace waypoint::minilang
