#include "navkit/episode_io.hpp"

#include <sstream>

namespace navkit {

namespace {

const PrimitiveKind kAllPrimitives[] = {PrimitiveKind::TurnLeft,     PrimitiveKind::TurnRight, PrimitiveKind::TurnAround,
                                        PrimitiveKind::Forward,      PrimitiveKind::Backward,  PrimitiveKind::GoThroughDoor,
                                        PrimitiveKind::GoToRoom,     PrimitiveKind::FindObject, PrimitiveKind::FindPerson};

PrimitiveKind primitive_from(const std::string& s, const std::string& loc) {
    for (auto k : kAllPrimitives) {
        if (s == primitive_name(k)) return k;
    }
    throw SchemaError(loc, "unknown primitive '" + s + "'");
}

FollowCategory category_from(const std::string& s, const std::string& loc) {
    if (s == "STT") return FollowCategory::STT;
    if (s == "DT") return FollowCategory::DT;
    if (s == "AT") return FollowCategory::AT;
    throw SchemaError(loc, "unknown follow category '" + s + "'");
}

Json timed_to_json(const std::vector<TimedPose>& traj) {
    Json out = Json::array();
    for (const auto& p : traj) out.push_back(Json::array({p.t, p.pose.x, p.pose.y, p.pose.theta}));
    return out;
}

std::vector<TimedPose> timed_from_json(const Json& j, const std::string& loc) {
    if (!j.is_array()) throw SchemaError(loc, "expected an array");
    std::vector<TimedPose> out;
    for (std::size_t k = 0; k < j.size(); ++k) {
        const auto& e = j[k];
        const std::string el = loc + "[" + std::to_string(k) + "]";
        if (!e.is_array() || e.size() != 4) throw SchemaError(el, "expected [t, x, y, theta]");
        try {
            out.push_back({e[0].get<double>(), Pose2D(e[1].get<double>(), e[2].get<double>(), e[3].get<double>())});
        } catch (const nlohmann::json::exception& ex) {
            throw SchemaError(el, ex.what());
        }
    }
    return out;
}

Json script_to_json(const PersonScript& s) {
    Json distractors = Json::array();
    for (const auto& d : s.distractors) {
        distractors.push_back({{"descriptor", d.descriptor}, {"trajectory", timed_to_json(d.trajectory)}});
    }
    return {{"target_descriptor", s.target_descriptor},
            {"category", follow_category_name(s.category)},
            {"target_absent", s.target_absent},
            {"target", timed_to_json(s.target)},
            {"follower", timed_to_json(s.follower)},
            {"distractors", std::move(distractors)}};
}

PersonScript script_from_json(const Json& j, const std::string& loc) {
    PersonScript s;
    s.target_descriptor = json_get<std::string>(j, "target_descriptor", loc);
    s.category = category_from(json_get<std::string>(j, "category", loc), loc + ".category");
    s.target_absent = json_get<bool>(j, "target_absent", loc);
    s.target = timed_from_json(json_member(j, "target", loc), loc + ".target");
    s.follower = timed_from_json(json_member(j, "follower", loc), loc + ".follower");
    const Json& ds = json_member(j, "distractors", loc);
    if (!ds.is_array()) throw SchemaError(loc + ".distractors", "expected an array");
    for (std::size_t k = 0; k < ds.size(); ++k) {
        const std::string dl = loc + ".distractors[" + std::to_string(k) + "]";
        s.distractors.push_back({json_get<std::string>(ds[k], "descriptor", dl),
                                 timed_from_json(json_member(ds[k], "trajectory", dl), dl + ".trajectory")});
    }
    return s;
}

}  // namespace

Json goal_to_json(const GoalSpec& g) {
    Json j;
    j["kind"] = task_name(task_of(g));
    if (const auto* p = std::get_if<PointGoal>(&g)) {
        j["target"] = vec_to_json(p->target);
    } else if (const auto* o = std::get_if<ObjectGoal>(&g)) {
        j["category"] = o->category;
        if (o->search_center) {
            j["search_center"] = vec_to_json(*o->search_center);
            j["search_radius"] = o->search_radius;
        }
    } else if (const auto* poi = std::get_if<PoiGoal>(&g)) {
        j["name"] = poi->name;
    } else if (const auto* ins = std::get_if<InstructionGoal>(&g)) {
        Json program = Json::array();
        for (const auto& p : ins->program.steps) {
            program.push_back({{"op", primitive_name(p.kind)}, {"magnitude", p.magnitude}, {"door_id", p.door_id}, {"text", p.text}});
        }
        j["program"] = std::move(program);
        if (ins->implied_target) j["implied_target"] = pose_to_json(*ins->implied_target);
    } else {
        const auto& f = std::get<PersonFollowGoal>(g);
        j["descriptor"] = f.descriptor;
        j["desired_distance"] = f.desired_distance;
    }
    return j;
}

GoalSpec goal_from_json(const Json& j, const std::string& loc) {
    const auto kind = json_get<std::string>(j, "kind", loc);
    if (kind == "point_goal") return PointGoal{vec_from_json(json_member(j, "target", loc), loc + ".target")};
    if (kind == "object_goal") {
        ObjectGoal o;
        o.category = json_get<std::string>(j, "category", loc);
        if (j.contains("search_center")) {
            o.search_center = vec_from_json(j["search_center"], loc + ".search_center");
            o.search_radius = json_get<double>(j, "search_radius", loc);
        }
        return o;
    }
    if (kind == "poi_goal") return PoiGoal{json_get<std::string>(j, "name", loc)};
    if (kind == "instruction") {
        InstructionGoal ins;
        const Json& program = json_member(j, "program", loc);
        if (!program.is_array()) throw SchemaError(loc + ".program", "expected an array");
        for (std::size_t k = 0; k < program.size(); ++k) {
            const std::string pl = loc + ".program[" + std::to_string(k) + "]";
            ins.program.steps.push_back({primitive_from(json_get<std::string>(program[k], "op", pl), pl + ".op"),
                                         json_get<double>(program[k], "magnitude", pl), json_get<int>(program[k], "door_id", pl),
                                         json_get<std::string>(program[k], "text", pl)});
        }
        if (j.contains("implied_target")) ins.implied_target = pose_from_json(j["implied_target"], loc + ".implied_target");
        return ins;
    }
    if (kind == "person_follow") {
        return PersonFollowGoal{json_get<std::string>(j, "descriptor", loc), json_get<double>(j, "desired_distance", loc)};
    }
    throw SchemaError(loc + ".kind", "unknown goal kind '" + kind + "'");
}

Json episode_to_json(const Episode& ep) {
    Json j;
    j["schema_version"] = kEpisodeSchemaVersion;
    j["episode_id"] = ep.episode_id;
    j["scene_id"] = ep.scene_id;
    j["start"] = pose_to_json(ep.start);
    j["goal"] = goal_to_json(ep.goal);
    Json pts = Json::array();
    for (const auto& p : ep.gt_path.points()) pts.push_back(vec_to_json(p));
    j["gt_path"] = {{"points", std::move(pts)}, {"length", ep.gt_path.length()}};
    Json plans = Json::array();
    for (const auto& p : ep.gt_plans) plans.push_back(plan_to_json(p));
    j["gt_plans"] = std::move(plans);
    j["success_radius"] = ep.success_radius;
    j["max_steps"] = ep.max_steps;
    j["tags"] = {{"recovery", ep.tags.recovery},
                 {"truncated", ep.tags.truncated},
                 {"category", ep.tags.category ? Json(follow_category_name(*ep.tags.category)) : Json(nullptr)},
                 {"target_absent", ep.tags.target_absent}};
    if (ep.person_script) j["person_script"] = script_to_json(*ep.person_script);
    return j;
}

Episode episode_from_json(const Json& j, const std::string& loc) {
    check_schema_version(j, kEpisodeSchemaVersion, loc);
    Episode ep;
    ep.episode_id = json_get<std::string>(j, "episode_id", loc);
    ep.scene_id = json_get<std::string>(j, "scene_id", loc);
    ep.start = pose_from_json(json_member(j, "start", loc), loc + ".start");
    ep.goal = goal_from_json(json_member(j, "goal", loc), loc + ".goal");
    const Json& path = json_member(j, "gt_path", loc);
    const Json& pts = json_member(path, "points", loc + ".gt_path");
    if (!pts.is_array()) throw SchemaError(loc + ".gt_path.points", "expected an array");
    std::vector<Vec2> points;
    for (std::size_t k = 0; k < pts.size(); ++k) points.push_back(vec_from_json(pts[k], loc + ".gt_path.points[" + std::to_string(k) + "]"));
    ep.gt_path = PathPolyline(std::move(points), json_get<double>(path, "length", loc + ".gt_path"));
    const Json& plans = json_member(j, "gt_plans", loc);
    if (!plans.is_array()) throw SchemaError(loc + ".gt_plans", "expected an array");
    for (std::size_t k = 0; k < plans.size(); ++k) ep.gt_plans.push_back(plan_from_json(plans[k], loc + ".gt_plans[" + std::to_string(k) + "]"));
    ep.success_radius = json_get<double>(j, "success_radius", loc);
    ep.max_steps = json_get<int>(j, "max_steps", loc);
    const Json& tags = json_member(j, "tags", loc);
    ep.tags.recovery = json_get<bool>(tags, "recovery", loc + ".tags");
    ep.tags.truncated = json_get<bool>(tags, "truncated", loc + ".tags");
    ep.tags.target_absent = json_get<bool>(tags, "target_absent", loc + ".tags");
    const Json& cat = json_member(tags, "category", loc + ".tags");
    if (!cat.is_null()) ep.tags.category = category_from(cat.get<std::string>(), loc + ".tags.category");
    if (j.contains("person_script")) ep.person_script = script_from_json(j["person_script"], loc + ".person_script");
    return ep;
}

void write_episodes_jsonl(const std::filesystem::path& path, const std::vector<Episode>& episodes) {
    std::string text;
    for (const auto& ep : episodes) text += episode_to_json(ep).dump() + "\n";
    write_text_file(path, text);
}

std::vector<Episode> read_episodes_jsonl(const std::filesystem::path& path) {
    std::istringstream in(read_text_file(path));
    std::vector<Episode> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const std::string loc = path.filename().string() + ":" + std::to_string(lineno);
        Json j;
        try {
            j = Json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw SchemaError(loc, e.what());
        }
        out.push_back(episode_from_json(j, loc));
    }
    return out;
}

Json synthesis_log_to_json(const SynthesisLog& log) {
    return {{"task", log.task}, {"requested", log.requested}, {"produced", log.produced}, {"skipped", log.skipped}};
}

}  // namespace navkit
