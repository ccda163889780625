#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "navkit/error.hpp"
#include "navkit/geometry.hpp"
#include "navkit/scene.hpp"

namespace navkit {

using Json = nlohmann::json;

/// Typed member access that reports the JSON path on failure.
template <class T>
T json_get(const Json& j, const char* key, const std::string& location) {
    if (!j.is_object()) throw SchemaError(location, "expected an object");
    const auto it = j.find(key);
    if (it == j.end()) throw SchemaError(location + "." + key, "missing field");
    try {
        return it->get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(location + "." + key, e.what());
    }
}

const Json& json_member(const Json& j, const char* key, const std::string& location);
void check_schema_version(const Json& j, int expected, const std::string& location);

Json pose_to_json(const Pose2D& p);
Pose2D pose_from_json(const Json& j, const std::string& location);
Json vec_to_json(Vec2 v);
Vec2 vec_from_json(const Json& j, const std::string& location);
Json cell_to_json(Cell c);
Cell cell_from_json(const Json& j, const std::string& location);
Json plan_to_json(const WaypointPlan& plan);
WaypointPlan plan_from_json(const Json& j, const std::string& location);

std::string read_text_file(const std::filesystem::path& path);
/// Writes text atomically enough for our purposes: truncates then writes.
void write_text_file(const std::filesystem::path& path, const std::string& text);
Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& j);

}  // namespace navkit
