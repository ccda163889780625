#include "navkit/batch.hpp"

#include <exception>

namespace navkit {

namespace {

EpisodeTrace run_one(const Scene& scene, const Episode& ep, const std::string& spec, const SimConfig& cfg,
                     std::uint64_t seed) {
    auto policy = make_policy(spec);
    return run_episode(scene, ep, *policy, cfg, seed);
}

}  // namespace

std::vector<EpisodeTrace> run_batch(const Scene& scene, const std::vector<Episode>& episodes, const std::string& policy_spec,
                                    const SimConfig& cfg, std::uint64_t master_seed) {
    make_policy(policy_spec);  // reject a bad spec before spawning work
    cfg.validate();
    std::vector<EpisodeTrace> out(episodes.size());
    std::vector<std::exception_ptr> errors(episodes.size());
    const long n = static_cast<long>(episodes.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (long k = 0; k < n; ++k) {
        const auto i = static_cast<std::size_t>(k);
        try {
            out[i] = run_one(scene, episodes[i], policy_spec, cfg, rollout_seed(master_seed, i));
        } catch (...) {
            errors[i] = std::current_exception();
        }
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return out;
}

std::vector<EpisodeTrace> run_batch_serial(const Scene& scene, const std::vector<Episode>& episodes,
                                           const std::string& policy_spec, const SimConfig& cfg, std::uint64_t master_seed) {
    cfg.validate();
    std::vector<EpisodeTrace> out;
    out.reserve(episodes.size());
    for (std::size_t i = 0; i < episodes.size(); ++i) {
        out.push_back(run_one(scene, episodes[i], policy_spec, cfg, rollout_seed(master_seed, i)));
    }
    return out;
}

}  // namespace navkit
