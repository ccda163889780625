#include "navkit/trace_io.hpp"

#include <sstream>

#include "navkit/error.hpp"

namespace navkit {

Json velocity_to_json(const VelocityCommand& v) { return Json::array({v.vx, v.vy, v.vyaw}); }

Json reward_to_json(const RewardBreakdown& r) {
    return {{"r_social", r.r_social}, {"r_expert", r.r_expert}, {"r_smooth", r.r_smooth}, {"r_eff", r.r_eff}, {"total", r.total}};
}

namespace {

VelocityCommand velocity_from_json(const Json& j, const std::string& loc) {
    if (!j.is_array() || j.size() != 3) throw SchemaError(loc, "expected [vx, vy, vyaw]");
    try {
        return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(loc, e.what());
    }
}

RewardBreakdown reward_from_json(const Json& j, const std::string& loc) {
    RewardBreakdown r;
    r.r_social = json_get<double>(j, "r_social", loc);
    r.r_expert = json_get<double>(j, "r_expert", loc);
    r.r_smooth = json_get<double>(j, "r_smooth", loc);
    r.r_eff = json_get<double>(j, "r_eff", loc);
    r.total = json_get<double>(j, "total", loc);
    return r;
}

TaskKind task_from(const std::string& s, const std::string& loc) {
    for (auto k : {TaskKind::PointGoal, TaskKind::ObjectGoal, TaskKind::PoiGoal, TaskKind::Instruction, TaskKind::PersonFollow}) {
        if (s == task_name(k)) return k;
    }
    throw SchemaError(loc, "unknown task '" + s + "'");
}

template <class T>
Json opt(const std::optional<T>& v) {
    return v ? Json(*v) : Json(nullptr);
}

}  // namespace

std::string trace_to_jsonl(const EpisodeTrace& t) {
    std::ostringstream out;
    Json header = {{"record", "header"},
                   {"schema_version", kTraceSchemaVersion},
                   {"episode_id", t.episode_id},
                   {"scene_id", t.scene_id},
                   {"policy", t.policy},
                   {"task", task_name(t.task)},
                   {"seed", t.seed},
                   {"dt", t.dt},
                   {"success_radius", t.success_radius},
                   {"goal_point", t.goal_point ? vec_to_json(*t.goal_point) : Json(nullptr)}};
    out << header.dump() << "\n";
    for (const auto& s : t.steps) {
        Json j = {{"record", "step"},
                  {"index", s.index},
                  {"time", s.time},
                  {"pose", pose_to_json(s.pose)},
                  {"velocity", velocity_to_json(s.velocity)},
                  {"compliant", s.compliant},
                  {"collided", s.collided},
                  {"target_in_view", opt(s.target_in_view)},
                  {"target_gap", opt(s.target_gap)},
                  {"active_plan", s.active_plan},
                  {"goal_distance", opt(s.goal_distance)}};
        out << j.dump() << "\n";
    }
    for (const auto& p : t.plans) {
        Json j = {{"record", "plan"},
                  {"id", p.id},
                  {"step", p.step},
                  {"frame", pose_to_json(p.frame)},
                  {"plan", plan_to_json(p.plan)},
                  {"reference", p.reference ? plan_to_json(*p.reference) : Json(nullptr)},
                  {"reward", p.reward ? reward_to_json(*p.reward) : Json(nullptr)}};
        out << j.dump() << "\n";
    }
    out << Json({{"record", "end"}, {"status", status_name(t.status)}, {"steps", t.steps.size()}}).dump() << "\n";
    return out.str();
}

EpisodeTrace trace_from_jsonl(const std::string& text, const std::string& location) {
    EpisodeTrace t;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    bool have_header = false;
    bool have_end = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::string loc = location + ":" + std::to_string(line_no);
        if (have_end) throw SchemaError(loc, "record after end");
        Json j;
        try {
            j = Json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw SchemaError(loc, std::string("malformed JSON: ") + e.what());
        }
        const std::string kind = json_get<std::string>(j, "record", loc);
        if (!have_header && kind != "header") throw SchemaError(loc, "first record must be the header");
        if (kind == "header") {
            if (have_header) throw SchemaError(loc, "duplicate header");
            check_schema_version(j, kTraceSchemaVersion, loc);
            t.episode_id = json_get<std::string>(j, "episode_id", loc);
            t.scene_id = json_get<std::string>(j, "scene_id", loc);
            t.policy = json_get<std::string>(j, "policy", loc);
            t.task = task_from(json_get<std::string>(j, "task", loc), loc + ".task");
            t.seed = json_get<std::uint64_t>(j, "seed", loc);
            t.dt = json_get<double>(j, "dt", loc);
            t.success_radius = json_get<double>(j, "success_radius", loc);
            const auto& g = json_member(j, "goal_point", loc);
            if (!g.is_null()) t.goal_point = vec_from_json(g, loc + ".goal_point");
            have_header = true;
        } else if (kind == "step") {
            TraceStep s;
            s.index = json_get<int>(j, "index", loc);
            s.time = json_get<double>(j, "time", loc);
            s.pose = pose_from_json(json_member(j, "pose", loc), loc + ".pose");
            s.velocity = velocity_from_json(json_member(j, "velocity", loc), loc + ".velocity");
            s.compliant = json_get<bool>(j, "compliant", loc);
            s.collided = json_get<bool>(j, "collided", loc);
            if (!json_member(j, "target_in_view", loc).is_null()) s.target_in_view = json_get<bool>(j, "target_in_view", loc);
            if (!json_member(j, "target_gap", loc).is_null()) s.target_gap = json_get<double>(j, "target_gap", loc);
            s.active_plan = json_get<int>(j, "active_plan", loc);
            if (!json_member(j, "goal_distance", loc).is_null()) s.goal_distance = json_get<double>(j, "goal_distance", loc);
            if (s.index != static_cast<int>(t.steps.size())) throw SchemaError(loc + ".index", "steps out of order");
            if (!t.steps.empty() && !(s.time > t.steps.back().time)) throw SchemaError(loc + ".time", "time must increase");
            t.steps.push_back(s);
        } else if (kind == "plan") {
            PlanRecord p;
            p.id = json_get<int>(j, "id", loc);
            p.step = json_get<int>(j, "step", loc);
            p.frame = pose_from_json(json_member(j, "frame", loc), loc + ".frame");
            p.plan = plan_from_json(json_member(j, "plan", loc), loc + ".plan");
            if (!json_member(j, "reference", loc).is_null()) p.reference = plan_from_json(j["reference"], loc + ".reference");
            if (!json_member(j, "reward", loc).is_null()) p.reward = reward_from_json(j["reward"], loc + ".reward");
            t.plans.push_back(p);
        } else if (kind == "end") {
            const std::string st = json_get<std::string>(j, "status", loc);
            try {
                t.status = status_from_name(st);
            } catch (const Error& e) {
                throw SchemaError(loc + ".status", e.what());
            }
            if (json_get<std::size_t>(j, "steps", loc) != t.steps.size()) throw SchemaError(loc + ".steps", "step count mismatch");
            have_end = true;
        } else {
            throw SchemaError(loc + ".record", "unknown record '" + kind + "'");
        }
    }
    if (!have_header) throw SchemaError(location, "empty trace");
    if (!have_end) throw SchemaError(location, "missing end record (truncated trace)");
    return t;
}

void write_trace(const std::filesystem::path& path, const EpisodeTrace& trace) { write_text_file(path, trace_to_jsonl(trace)); }

EpisodeTrace read_trace(const std::filesystem::path& path) { return trace_from_jsonl(read_text_file(path), path.string()); }

Json manifest_to_json(const TraceManifest& m) {
    Json entries = Json::array();
    for (const auto& e : m.entries) entries.push_back({{"episode_id", e.episode_id}, {"trace", e.trace}, {"status", e.status}});
    return {{"schema_version", kTraceSchemaVersion},
            {"scene", m.scene},
            {"episodes", m.episodes},
            {"policy", m.policy},
            {"seed", m.seed},
            {"entries", std::move(entries)}};
}

TraceManifest manifest_from_json(const Json& j, const std::string& location) {
    check_schema_version(j, kTraceSchemaVersion, location);
    TraceManifest m;
    m.scene = json_get<std::string>(j, "scene", location);
    m.episodes = json_get<std::string>(j, "episodes", location);
    m.policy = json_get<std::string>(j, "policy", location);
    m.seed = json_get<std::uint64_t>(j, "seed", location);
    const auto& entries = json_member(j, "entries", location);
    if (!entries.is_array()) throw SchemaError(location + ".entries", "expected an array");
    for (std::size_t k = 0; k < entries.size(); ++k) {
        const std::string loc = location + ".entries[" + std::to_string(k) + "]";
        m.entries.push_back({json_get<std::string>(entries[k], "episode_id", loc), json_get<std::string>(entries[k], "trace", loc),
                             json_get<std::string>(entries[k], "status", loc)});
    }
    return m;
}

std::string safe_file_name(const std::string& id) {
    std::string out;
    for (char c : id) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' || c == '_' || c == '.';
        out.push_back(ok ? c : '_');
    }
    return out;
}

TraceManifest write_batch(const std::filesystem::path& dir, const std::vector<EpisodeTrace>& traces, const std::string& policy,
                          std::uint64_t seed, const std::string& scene_rel, const std::string& episodes_rel) {
    TraceManifest m;
    m.scene = scene_rel;
    m.episodes = episodes_rel;
    m.policy = policy;
    m.seed = seed;
    for (std::size_t k = 0; k < traces.size(); ++k) {
        const std::string rel = "traces/" + std::to_string(k) + "_" + safe_file_name(traces[k].episode_id) + ".jsonl";
        write_trace(dir / rel, traces[k]);
        m.entries.push_back({traces[k].episode_id, rel, status_name(traces[k].status)});
    }
    write_json_file(dir / "manifest.json", manifest_to_json(m));
    return m;
}

std::vector<EpisodeTrace> read_batch(const std::filesystem::path& manifest_path, TraceManifest* manifest) {
    const TraceManifest m = manifest_from_json(read_json_file(manifest_path), manifest_path.string());
    std::vector<EpisodeTrace> out;
    const auto base = manifest_path.parent_path();
    for (const auto& e : m.entries) out.push_back(read_trace(base / e.trace));
    if (manifest) *manifest = m;
    return out;
}

}  // namespace navkit
