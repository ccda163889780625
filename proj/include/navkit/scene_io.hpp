#pragma once

#include <filesystem>

#include "navkit/json_io.hpp"
#include "navkit/scene.hpp"

namespace navkit {

inline constexpr int kSceneSchemaVersion = 1;

/// scene.json document. visible_region is derived and therefore not stored;
/// scene_from_json recomputes it.
Json scene_to_json(const Scene& scene);
Scene scene_from_json(const Json& j);

void write_scene(const std::filesystem::path& path, const Scene& scene);
Scene read_scene(const std::filesystem::path& path);

}  // namespace navkit
