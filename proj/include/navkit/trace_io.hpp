#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "navkit/json_io.hpp"
#include "navkit/sim.hpp"

namespace navkit {

inline constexpr int kTraceSchemaVersion = 1;

Json velocity_to_json(const VelocityCommand& v);
Json reward_to_json(const RewardBreakdown& r);

/// Trace as JSON lines: a header record, one record per step, one per plan,
/// then an end record carrying the terminal status.
std::string trace_to_jsonl(const EpisodeTrace& trace);
EpisodeTrace trace_from_jsonl(const std::string& text, const std::string& location = "trace");
void write_trace(const std::filesystem::path& path, const EpisodeTrace& trace);
EpisodeTrace read_trace(const std::filesystem::path& path);

struct ManifestEntry {
    std::string episode_id;
    std::string trace;  // path relative to the manifest
    std::string status;
    friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct TraceManifest {
    std::string scene;     // relative path, may be empty
    std::string episodes;  // relative path, may be empty
    std::string policy;
    std::uint64_t seed = 0;
    std::vector<ManifestEntry> entries;
    friend bool operator==(const TraceManifest&, const TraceManifest&) = default;
};

Json manifest_to_json(const TraceManifest& m);
TraceManifest manifest_from_json(const Json& j, const std::string& location = "manifest");

/// Writes traces/<index>_<episode id>.jsonl plus manifest.json under `dir`.
TraceManifest write_batch(const std::filesystem::path& dir, const std::vector<EpisodeTrace>& traces,
                          const std::string& policy, std::uint64_t seed, const std::string& scene_rel = "",
                          const std::string& episodes_rel = "");
/// Loads every trace a manifest lists (paths resolved next to the manifest).
std::vector<EpisodeTrace> read_batch(const std::filesystem::path& manifest_path, TraceManifest* manifest = nullptr);

/// File-name-safe form of an id.
std::string safe_file_name(const std::string& id);

}  // namespace navkit
