#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "navkit/episode.hpp"
#include "navkit/scene.hpp"
#include "navkit/sim.hpp"

namespace navkit {

/// Seed of episode i's rollout stream.
inline std::uint64_t rollout_seed(std::uint64_t master, std::size_t i) { return derive_seed(master, "rollout", i); }

/// Runs every episode with a fresh policy built from `policy_spec`.
/// Parallel over episodes; the first failing episode's error (lowest index)
/// is rethrown after the loop. Traces equal run_batch_serial's.
std::vector<EpisodeTrace> run_batch(const Scene& scene, const std::vector<Episode>& episodes,
                                    const std::string& policy_spec, const SimConfig& cfg, std::uint64_t master_seed);
std::vector<EpisodeTrace> run_batch_serial(const Scene& scene, const std::vector<Episode>& episodes,
                                           const std::string& policy_spec, const SimConfig& cfg,
                                           std::uint64_t master_seed);

}  // namespace navkit
