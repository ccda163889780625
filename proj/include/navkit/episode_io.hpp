#pragma once

#include <filesystem>
#include <vector>

#include "navkit/episode.hpp"
#include "navkit/json_io.hpp"

namespace navkit {

inline constexpr int kEpisodeSchemaVersion = 1;

Json goal_to_json(const GoalSpec& g);
GoalSpec goal_from_json(const Json& j, const std::string& location);

Json episode_to_json(const Episode& ep);
Episode episode_from_json(const Json& j, const std::string& location = "episode");

/// One compact JSON document per line.
void write_episodes_jsonl(const std::filesystem::path& path, const std::vector<Episode>& episodes);
std::vector<Episode> read_episodes_jsonl(const std::filesystem::path& path);

Json synthesis_log_to_json(const SynthesisLog& log);

}  // namespace navkit
