#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "navkit/episode.hpp"
#include "navkit/generators.hpp"
#include "navkit/metrics.hpp"
#include "navkit/sim.hpp"

namespace navkit {

/// Episodes requested per task by `episodes synth`.
struct SynthCounts {
    int point = 20;
    int object = 10;
    int door = 10;
    int short_horizon = 10;
    int poi = 10;
    int follow = 5;
    double recovery_fraction = 0.2;
    std::vector<double> follow_distances = {1.0, 1.5, 2.0};
};

struct RunConfig {
    std::uint64_t master_seed = 0;
    std::string scene_kind = "urban";  // urban | apartment
    UrbanParams urban{};
    ApartmentParams apartment{};
    SynthesisConfig synthesis{};
    SynthCounts counts{};
    SimConfig sim{};
    std::vector<double> poi_thresholds = kPoiThresholds;
    std::string policy = "oracle";
    int jobs = 0;  // 0 keeps the OpenMP default
    std::string out_dir = "out";
    int max_retries = 2;

    /// Throws InvalidParams on out-of-range values.
    void validate() const;
};

/// Flat `key = value` lines grouped under `[section]` headers; `#` starts a
/// comment. Sections: run, scene, synth, sim, reward, metrics, mission.
/// Unknown sections or keys and malformed values throw SchemaError with
/// "<location>:<line>".
RunConfig parse_config(const std::string& text, const std::string& location = "config");
RunConfig load_config(const std::filesystem::path& path);
/// Every key with its current value, in a form parse_config reads back
/// to the same configuration.
std::string config_to_text(const RunConfig& cfg);

}  // namespace navkit
