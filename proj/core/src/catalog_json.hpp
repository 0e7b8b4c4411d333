#pragma once

#include <cmath>
#include <string>

#include "json_io.hpp"
#include "phenosample/catalog.hpp"

namespace phenosample::detail {

inline json scene_to_json(const SceneRecord& r) {
  json j;
  j["scene_id"] = r.scene_id;
  j["point_id"] = r.point_id;
  j["datetime"] = format_rfc3339(r.acquisition);
  j["cloud_fraction"] = r.cloud_fraction;
  return j;
}

inline SceneRecord scene_from_json(const json& j) {
  if (!j.is_object()) throw DecodeError("scene record is not an object");
  for (const char* key : {"scene_id", "point_id", "datetime", "cloud_fraction"}) {
    if (!j.contains(key)) throw DecodeError(std::string("scene record missing '") + key + "'");
  }
  SceneRecord r;
  r.scene_id = j.at("scene_id").get<std::string>();
  r.point_id = j.at("point_id").get<std::int64_t>();
  r.acquisition = parse_rfc3339(j.at("datetime").get<std::string>());
  r.cloud_fraction = j.at("cloud_fraction").get<double>();
  if (!(r.cloud_fraction >= 0.0 && r.cloud_fraction <= 1.0)) {
    throw DecodeError("scene " + r.scene_id + ": cloud_fraction outside [0, 1]");
  }
  if (r.scene_id.empty()) throw DecodeError("scene record with empty scene_id");
  return r;
}

}  // namespace phenosample::detail
