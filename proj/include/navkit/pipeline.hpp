#pragma once

#include <filesystem>
#include <vector>

#include "navkit/config.hpp"
#include "navkit/episode.hpp"
#include "navkit/metrics.hpp"
#include "navkit/scene.hpp"
#include "navkit/sim.hpp"
#include "navkit/viz.hpp"

namespace navkit {

/// Scene of the configured kind, generated from the master seed.
Scene generate_scene(const RunConfig& cfg);

/// Every task the scene supports, in the order point, object, door, short
/// horizon, poi, follow. Each task draws from its own seed stream; tasks the
/// scene cannot host (no doors, POIs or visible objects) are logged with a
/// skip reason.
std::vector<Episode> synthesize_episodes(const Scene& scene, const RunConfig& cfg,
                                         std::vector<SynthesisLog>* logs = nullptr);

/// Loads the manifest's traces and scores them against the scene it names.
/// An empty manifest gives a report with zero counts.
MetricReport evaluate_manifest(const std::filesystem::path& manifest_path, const RunConfig& cfg = {});

void write_metrics(const std::filesystem::path& json_path, const MetricReport& report);

VizLayers layers_from(const std::vector<Episode>& episodes, const std::vector<EpisodeTrace>& traces);

struct PipelineFiles {
    std::filesystem::path scene;
    std::filesystem::path episodes;
    std::filesystem::path manifest;
    std::filesystem::path metrics;
    std::filesystem::path metrics_csv;
    std::filesystem::path svg;
};

/// gen -> synth -> rollout -> eval -> viz under `out`.
PipelineFiles run_pipeline(const RunConfig& cfg, const std::filesystem::path& out);

}  // namespace navkit
