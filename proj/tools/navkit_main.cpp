#include <CLI11.hpp>
#include <omp.h>

#include <filesystem>
#include <iostream>
#include <sstream>

#include "navkit/agentic.hpp"
#include "navkit/batch.hpp"
#include "navkit/config.hpp"
#include "navkit/episode_io.hpp"
#include "navkit/flow.hpp"
#include "navkit/memory.hpp"
#include "navkit/pipeline.hpp"
#include "navkit/scene_io.hpp"
#include "navkit/trace_io.hpp"
#include "navkit/viz.hpp"

namespace fs = std::filesystem;
using namespace navkit;

namespace {

struct Globals {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::string> policy;
    std::optional<int> jobs;
};

RunConfig resolve(const Globals& g) {
    RunConfig cfg = g.config.empty() ? RunConfig{} : load_config(g.config);
    if (g.seed) cfg.master_seed = *g.seed;
    if (g.out) cfg.out_dir = *g.out;
    if (g.policy) cfg.policy = *g.policy;
    if (g.jobs) cfg.jobs = *g.jobs;
    cfg.validate();
    make_policy(cfg.policy);
    if (cfg.jobs > 0) omp_set_num_threads(cfg.jobs);
    return cfg;
}

fs::path or_default(const std::string& given, const RunConfig& cfg, const char* name) {
    return given.empty() ? fs::path(cfg.out_dir) / name : fs::path(given);
}

std::string relative_to(const fs::path& target, const fs::path& dir) {
    return fs::relative(fs::weakly_canonical(target), fs::weakly_canonical(dir)).generic_string();
}

Pose2D parse_pose(const std::string& s) {
    std::stringstream in(s);
    double v[3] = {0.0, 0.0, 0.0};
    char sep = 0;
    if (!(in >> v[0] >> sep >> v[1]) || sep != ',') throw Error(ErrorCode::InvalidParams, "pose must be x,y[,theta]");
    if (in >> sep) {
        if (sep != ',' || !(in >> v[2])) throw Error(ErrorCode::InvalidParams, "pose must be x,y[,theta]");
    }
    return Pose2D(v[0], v[1], v[2]);
}

Pose2D default_start(const Scene& scene) {
    if (scene.spawn_region.empty()) throw Error(ErrorCode::InvalidParams, "scene has no spawn region; pass --start");
    const Vec2 p = scene.grid.grid_to_world(scene.spawn_region.front());
    return Pose2D(p.x, p.y, 0.0);
}

Json flow_demo(const RunConfig& cfg, int samples, VizLayers* layers, Scene* scene_out) {
    const auto scenario = make_bypass_scenario(8, 1.0, 0.05, derive_seed(cfg.master_seed, "flow_demo", 0));
    const FlowConfig fcfg;
    std::vector<std::uint64_t> seeds;
    for (int k = 0; k < samples; ++k) seeds.push_back(derive_seed(cfg.master_seed, "flow_sample", static_cast<std::uint64_t>(k)));
    const auto vecs = sample_vectors(scenario.experts, fcfg, seeds);
    const WaypointPlan left = decode_plan(scenario.mode_centers[0]);
    const WaypointPlan right = decode_plan(scenario.mode_centers[1]);
    int n_left = 0;
    int n_right = 0;
    int unclassified = 0;
    Json plans = Json::array();
    for (const auto& v : vecs) {
        const WaypointPlan p = decode_plan(v);
        const double dl = plan_distance(p, left);
        const double dr = plan_distance(p, right);
        if (std::min(dl, dr) > 0.2) ++unclassified;
        else if (dl <= dr) ++n_left;
        else ++n_right;
        plans.push_back(plan_to_json(p));
        if (layers) {
            Polyline2 line{{0.0, 0.0}};
            for (const auto& w : p) line.push_back(w.position());
            layers->plans.push_back(std::move(line));
        }
    }
    const WaypointPlan mean = mean_regression_plan(scenario.experts);
    if (layers) {
        Polyline2 line{{0.0, 0.0}};
        for (const auto& w : mean) line.push_back(w.position());
        layers->gt_paths.push_back(std::move(line));
    }
    if (scene_out) *scene_out = scenario.scene;
    const double n = samples > 0 ? static_cast<double>(samples) : 1.0;
    return {{"schema_version", 1},
            {"samples", samples},
            {"left", n_left},
            {"right", n_right},
            {"unclassified", unclassified},
            {"left_weight", n_left / n},
            {"right_weight", n_right / n},
            {"mean_plan", plan_to_json(mean)},
            {"mean_plan_collides", plan_collides(mean, Pose2D{}, scenario.scene.grid)},
            {"plans", plans}};
}

Json memory_summary(const TopoStore& m) {
    Json layers = Json::object();
    for (auto k : {LayerKind::Block, LayerKind::Road, LayerKind::Function, LayerKind::ObjectPoi}) {
        layers[layer_name(k)] = m.layer_nodes(k).size();
    }
    std::size_t open = 0;
    for (const auto& [key, e] : m.edges()) open += e.open ? 1 : 0;
    return {{"nodes", m.nodes().size()}, {"layers", layers}, {"edges", m.edges().size()}, {"open_edges", open},
            {"layer_violations", m.layer_violations()}};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"navkit: deterministic embodied-navigation toolkit"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--config", g.config, "key=value configuration file")->check(CLI::ExistingFile);
    app.add_option("--seed", g.seed, "master seed");
    app.add_option("--out", g.out, "output directory");
    app.add_option("--policy", g.policy, "oracle, noisy:<sigma>, greedy or stationary");
    app.add_option("--jobs", g.jobs, "worker threads (0 = default)");

    int status = 0;
    auto guarded = [&](auto&& fn) {
        return [&, fn]() {
            try {
                fn();
            } catch (const Error& e) {
                std::cerr << "error: " << e.what() << "\n";
                status = 1;
            } catch (const std::exception& e) {
                std::cerr << "error: " << e.what() << "\n";
                status = 1;
            }
        };
    };

    // scene gen
    auto* scene_cmd = app.add_subcommand("scene", "scene tools");
    scene_cmd->require_subcommand(1);
    auto* gen = scene_cmd->add_subcommand("gen", "generate a scene");
    std::string kind, scene_out, scene_svg;
    gen->add_option("--kind", kind, "urban or apartment");
    gen->add_option("-o,--output", scene_out, "scene.json path");
    gen->add_option("--svg", scene_svg, "also render the scene");
    gen->callback(guarded([&] {
        RunConfig cfg = resolve(g);
        if (!kind.empty()) cfg.scene_kind = kind;
        const Scene s = generate_scene(cfg);
        const fs::path out = or_default(scene_out, cfg, "scene.json");
        write_scene(out, s);
        if (!scene_svg.empty()) write_text_file(scene_svg, viz_svg(s));
        std::cout << "wrote " << out.generic_string() << " (" << s.id << ", " << s.grid.width() << "x" << s.grid.height() << ")\n";
    }));

    // episodes synth
    auto* eps_cmd = app.add_subcommand("episodes", "episode tools");
    eps_cmd->require_subcommand(1);
    auto* synth = eps_cmd->add_subcommand("synth", "synthesize episodes for a scene");
    std::string synth_scene, synth_out;
    synth->add_option("--scene", synth_scene, "scene.json")->required()->check(CLI::ExistingFile);
    synth->add_option("-o,--output", synth_out, "episodes.jsonl path");
    synth->callback(guarded([&] {
        const RunConfig cfg = resolve(g);
        const Scene s = read_scene(synth_scene);
        std::vector<SynthesisLog> logs;
        const auto eps = synthesize_episodes(s, cfg, &logs);
        const fs::path out = or_default(synth_out, cfg, "episodes.jsonl");
        write_episodes_jsonl(out, eps);
        Json log = Json::array();
        for (const auto& l : logs) log.push_back(synthesis_log_to_json(l));
        std::cout << log.dump(1) << "\nwrote " << eps.size() << " episodes to " << out.generic_string() << "\n";
    }));

    // rollout
    auto* rollout = app.add_subcommand("rollout", "run a policy over episodes");
    std::string ro_scene, ro_eps;
    rollout->add_option("--scene", ro_scene, "scene.json")->required()->check(CLI::ExistingFile);
    rollout->add_option("--episodes", ro_eps, "episodes.jsonl")->required()->check(CLI::ExistingFile);
    rollout->callback(guarded([&] {
        const RunConfig cfg = resolve(g);
        const Scene s = read_scene(ro_scene);
        const auto eps = read_episodes_jsonl(ro_eps);
        const auto traces = run_batch(s, eps, cfg.policy, cfg.sim, cfg.master_seed);
        const fs::path out(cfg.out_dir);
        fs::create_directories(out);
        const auto m = write_batch(out, traces, cfg.policy, cfg.master_seed, relative_to(ro_scene, out), relative_to(ro_eps, out));
        int ok = 0;
        for (const auto& e : m.entries) ok += e.status == "success" ? 1 : 0;
        std::cout << "wrote " << m.entries.size() << " traces (" << ok << " success) to " << (out / "manifest.json").generic_string() << "\n";
    }));

    // eval
    auto* eval = app.add_subcommand("eval", "score a trace manifest");
    std::string ev_manifest, ev_out, ev_csv;
    eval->add_option("--manifest", ev_manifest, "manifest.json")->required()->check(CLI::ExistingFile);
    eval->add_option("-o,--output", ev_out, "metrics.json path");
    eval->add_option("--csv", ev_csv, "per-episode CSV path");
    eval->callback(guarded([&] {
        const RunConfig cfg = resolve(g);
        const auto report = evaluate_manifest(ev_manifest, cfg);
        const fs::path out = or_default(ev_out, cfg, "metrics.json");
        write_metrics(out, report);
        if (!ev_csv.empty()) write_text_file(ev_csv, report_to_csv(report));
        std::cout << report_to_json(report)["aggregate"].dump(1) << "\n";
    }));

    // flow demo
    auto* flow_cmd = app.add_subcommand("flow", "flow sampler tools");
    flow_cmd->require_subcommand(1);
    auto* demo = flow_cmd->add_subcommand("demo", "sample the left/right bypass mixture");
    int samples = 1000;
    std::string flow_out, flow_svg;
    demo->add_option("--samples", samples, "number of sampled plans")->check(CLI::PositiveNumber);
    demo->add_option("-o,--output", flow_out, "flow_demo.json path");
    demo->add_option("--svg", flow_svg, "render samples over the bypass scene");
    demo->callback(guarded([&] {
        const RunConfig cfg = resolve(g);
        VizLayers layers;
        Scene scene;
        Json j = flow_demo(cfg, samples, &layers, &scene);
        const fs::path out = or_default(flow_out, cfg, "flow_demo.json");
        write_json_file(out, j);
        if (!flow_svg.empty()) write_text_file(flow_svg, viz_svg(scene, layers));
        j.erase("plans");
        std::cout << j.dump(1) << "\n";
    }));

    // memory inspect
    auto* mem_cmd = app.add_subcommand("memory", "topological memory tools");
    mem_cmd->require_subcommand(1);
    auto* inspect = mem_cmd->add_subcommand("inspect", "summarize, route and snapshot a memory");
    std::string mem_scene, mem_file, mem_save;
    std::vector<std::string> route;
    inspect->add_option("--scene", mem_scene, "ingest this scene")->check(CLI::ExistingFile);
    inspect->add_option("--memory", mem_file, "load this snapshot first")->check(CLI::ExistingFile);
    inspect->add_option("--route", route, "FROM TO road node ids")->expected(2);
    inspect->add_option("-o,--output", mem_save, "write a snapshot");
    inspect->callback(guarded([&] {
        resolve(g);
        if (mem_scene.empty() && mem_file.empty()) throw Error(ErrorCode::InvalidParams, "give --scene and/or --memory");
        TopoStore m;
        if (!mem_file.empty()) m.load(mem_file);
        if (!mem_scene.empty()) m.ingest_scene(read_scene(mem_scene));
        Json j = memory_summary(m);
        if (route.size() == 2) {
            const auto r = m.route(route[0], route[1]);
            Json nodes = Json::array();
            for (const auto& n : r.road) nodes.push_back(n.id);
            j["route"] = {{"road", nodes}, {"blocks", r.blocks}, {"cost", r.cost}};
        }
        if (!mem_save.empty()) m.snapshot(mem_save);
        std::cout << j.dump(1) << "\n";
    }));

    // mission run
    auto* mission_cmd = app.add_subcommand("mission", "agentic missions");
    mission_cmd->require_subcommand(1);
    auto* mrun = mission_cmd->add_subcommand("run", "parse, plan, execute and reflect on an instruction");
    std::string ms_scene, ms_text, ms_memory, ms_start, ms_out, ms_save;
    mrun->add_option("--scene", ms_scene, "scene.json")->required()->check(CLI::ExistingFile);
    mrun->add_option("--instruction", ms_text, "instruction text")->required();
    mrun->add_option("--memory", ms_memory, "memory snapshot (default: ingest the scene)")->check(CLI::ExistingFile);
    mrun->add_option("--start", ms_start, "x,y[,theta] start pose (default: first spawn cell)");
    mrun->add_option("-o,--output", ms_out, "mission report path");
    mrun->add_option("--save-memory", ms_save, "snapshot the updated memory");
    mrun->callback(guarded([&] {
        const RunConfig cfg = resolve(g);
        const Scene s = read_scene(ms_scene);
        TopoStore m;
        if (ms_memory.empty()) m.ingest_scene(s);
        else m.load(ms_memory);
        MissionConfig mc;
        mc.sim = cfg.sim;
        mc.max_retries = cfg.max_retries;
        auto policy = make_policy(cfg.policy);
        const Pose2D start = ms_start.empty() ? default_start(s) : parse_pose(ms_start);
        const auto report = run_mission(s, ms_text, *policy, m, mc, cfg.master_seed, start);
        const fs::path out = or_default(ms_out, cfg, "mission.json");
        write_json_file(out, mission_to_json(report));
        if (!ms_save.empty()) m.snapshot(ms_save);
        for (const auto& r : report.runs) {
            std::cout << describe_subtask(r.task) << " -> " << r.status << " / " << feedback_name(r.reflection.f.code) << "\n";
        }
        std::cout << (report.success ? "mission success" : "mission failure: " + report.failure) << "\n";
        if (!report.success) status = 1;
    }));

    // viz
    auto* viz = app.add_subcommand("viz", "render a scene with optional overlays as SVG");
    std::string vz_scene, vz_eps, vz_manifest, vz_plans, vz_out;
    viz->add_option("--scene", vz_scene, "scene.json")->required()->check(CLI::ExistingFile);
    viz->add_option("--episodes", vz_eps, "episodes.jsonl (gt paths)")->check(CLI::ExistingFile);
    viz->add_option("--manifest", vz_manifest, "trace manifest (executed traces)")->check(CLI::ExistingFile);
    viz->add_option("--plans", vz_plans, "flow_demo.json (sampled plans)")->check(CLI::ExistingFile);
    viz->add_option("-o,--output", vz_out, "SVG path");
    viz->callback(guarded([&] {
        const RunConfig cfg = resolve(g);
        const Scene s = read_scene(vz_scene);
        std::vector<Episode> eps;
        std::vector<EpisodeTrace> traces;
        if (!vz_eps.empty()) eps = read_episodes_jsonl(vz_eps);
        if (!vz_manifest.empty()) traces = read_batch(vz_manifest);
        VizLayers layers = layers_from(eps, traces);
        if (!vz_plans.empty()) {
            const Json j = read_json_file(vz_plans);
            const auto& plans = json_member(j, "plans", vz_plans);
            for (std::size_t k = 0; k < plans.size(); ++k) {
                const WaypointPlan p = plan_from_json(plans[k], vz_plans + ".plans[" + std::to_string(k) + "]");
                Polyline2 line{{0.0, 0.0}};
                for (const auto& w : p) line.push_back(w.position());
                layers.plans.push_back(std::move(line));
            }
        }
        const fs::path out = or_default(vz_out, cfg, "scene.svg");
        write_text_file(out, viz_svg(s, layers));
        std::cout << "wrote " << out.generic_string() << "\n";
    }));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    return status;
}
