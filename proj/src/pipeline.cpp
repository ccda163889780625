#include "navkit/pipeline.hpp"

#include "navkit/batch.hpp"
#include "navkit/episode_io.hpp"
#include "navkit/generators.hpp"
#include "navkit/scene_io.hpp"
#include "navkit/trace_io.hpp"

namespace navkit {

Scene generate_scene(const RunConfig& cfg) {
    cfg.validate();
    if (cfg.scene_kind == "apartment") return gen_apartment(cfg.master_seed, cfg.apartment);
    return gen_urban_block(cfg.master_seed, cfg.urban);
}

std::vector<Episode> synthesize_episodes(const Scene& scene, const RunConfig& cfg, std::vector<SynthesisLog>* logs) {
    cfg.validate();
    std::vector<Episode> out;
    auto run = [&](const char* task, int n, auto&& fn) {
        SynthesisLog log;
        log.task = task;
        log.requested = n;
        if (n > 0) {
            Rng rng(derive_seed(cfg.master_seed, std::string("synth_") + task, 0));
            try {
                auto eps = fn(rng, log);
                log.produced = static_cast<int>(eps.size());
                for (auto& e : eps) out.push_back(std::move(e));
            } catch (const Error& e) {
                if (e.code() != ErrorCode::NoDoors && e.code() != ErrorCode::NoPois && e.code() != ErrorCode::SceneTooSmall &&
                    e.code() != ErrorCode::NoVisiblePosition) {
                    throw;
                }
                log.skip(to_string(e.code()));
            }
        }
        if (logs) logs->push_back(log);
    };
    const auto& c = cfg.counts;
    const auto& s = cfg.synthesis;
    run("point", c.point, [&](Rng& r, SynthesisLog& l) { return synth_point_goal(scene, c.point, c.recovery_fraction, r, s, &l); });
    run("object", c.object, [&](Rng& r, SynthesisLog& l) { return synth_object_goal(scene, c.object, r, s, &l); });
    run("door", c.door, [&](Rng& r, SynthesisLog& l) { return synth_door_traversal(scene, c.door, r, s, &l); });
    run("short", c.short_horizon, [&](Rng& r, SynthesisLog& l) { return synth_short_horizon(scene, c.short_horizon, r, s, &l); });
    run("poi", c.poi, [&](Rng& r, SynthesisLog& l) { return synth_poi_goal(scene, c.poi, r, s, &l); });
    run("follow", c.follow,
        [&](Rng& r, SynthesisLog& l) { return synth_person_follow(scene, c.follow, c.follow_distances, r, s, &l); });
    return out;
}

MetricReport evaluate_manifest(const std::filesystem::path& manifest_path, const RunConfig& cfg) {
    TraceManifest m;
    const auto traces = read_batch(manifest_path, &m);
    if (traces.empty()) {
        MetricReport r;
        r.aggregate = aggregate_records({}, cfg.poi_thresholds);
        return r;
    }
    if (m.scene.empty()) throw SchemaError(manifest_path.string() + ".scene", "manifest names no scene");
    const Scene scene = read_scene(manifest_path.parent_path() / m.scene);
    MetricReport r = evaluate(traces, scene.grid);
    r.aggregate = aggregate_records(r.records, cfg.poi_thresholds);
    return r;
}

void write_metrics(const std::filesystem::path& json_path, const MetricReport& report) {
    write_json_file(json_path, report_to_json(report));
}

VizLayers layers_from(const std::vector<Episode>& episodes, const std::vector<EpisodeTrace>& traces) {
    VizLayers layers;
    for (const auto& e : episodes) {
        if (e.gt_path.points().empty()) continue;
        layers.gt_paths.push_back(e.gt_path.points());
    }
    for (const auto& t : traces) {
        Polyline2 line;
        for (const auto& s : t.steps) line.push_back(s.pose.position());
        if (!line.empty()) layers.traces.push_back(std::move(line));
    }
    return layers;
}

PipelineFiles run_pipeline(const RunConfig& cfg, const std::filesystem::path& out) {
    PipelineFiles f;
    f.scene = out / "scene.json";
    f.episodes = out / "episodes.jsonl";
    f.manifest = out / "rollout" / "manifest.json";
    f.metrics = out / "metrics.json";
    f.metrics_csv = out / "metrics.csv";
    f.svg = out / "scene.svg";

    std::filesystem::create_directories(out);
    const Scene scene = generate_scene(cfg);
    write_scene(f.scene, scene);
    const auto episodes = synthesize_episodes(scene, cfg);
    write_episodes_jsonl(f.episodes, episodes);
    const auto traces = run_batch(scene, episodes, cfg.policy, cfg.sim, cfg.master_seed);
    write_batch(out / "rollout", traces, cfg.policy, cfg.master_seed, "../scene.json", "../episodes.jsonl");
    const auto report = evaluate_manifest(f.manifest, cfg);
    write_metrics(f.metrics, report);
    write_text_file(f.metrics_csv, report_to_csv(report));
    write_text_file(f.svg, viz_svg(scene, layers_from(episodes, traces)));
    return f;
}

}  // namespace navkit
