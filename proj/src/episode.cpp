#include "navkit/episode.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "navkit/error.hpp"

namespace navkit {

const char* task_name(TaskKind k) {
    switch (k) {
        case TaskKind::PointGoal: return "point_goal";
        case TaskKind::ObjectGoal: return "object_goal";
        case TaskKind::PoiGoal: return "poi_goal";
        case TaskKind::Instruction: return "instruction";
        case TaskKind::PersonFollow: return "person_follow";
    }
    return "unknown";
}

const char* primitive_name(PrimitiveKind k) {
    switch (k) {
        case PrimitiveKind::TurnLeft: return "TurnLeft";
        case PrimitiveKind::TurnRight: return "TurnRight";
        case PrimitiveKind::TurnAround: return "TurnAround";
        case PrimitiveKind::Forward: return "Forward";
        case PrimitiveKind::Backward: return "Backward";
        case PrimitiveKind::GoThroughDoor: return "GoThroughDoor";
        case PrimitiveKind::GoToRoom: return "GoToRoom";
        case PrimitiveKind::FindObject: return "FindObject";
        case PrimitiveKind::FindPerson: return "FindPerson";
    }
    return "Unknown";
}

const char* follow_category_name(FollowCategory c) {
    switch (c) {
        case FollowCategory::STT: return "STT";
        case FollowCategory::DT: return "DT";
        case FollowCategory::AT: return "AT";
    }
    return "STT";
}

bool ObjectGoal::admits(const SceneObject& obj) const {
    if (!label_equals(obj.category, category)) return false;
    if (search_center && distance(obj.position, *search_center) > search_radius) return false;
    return true;
}

void validate_program(const InstructionProgram& program) {
    if (program.steps.empty()) throw Error(ErrorCode::InvalidParams, "instruction program is empty");
    for (const auto& p : program.steps) {
        switch (p.kind) {
            case PrimitiveKind::TurnLeft:
            case PrimitiveKind::TurnRight:
            case PrimitiveKind::Forward:
            case PrimitiveKind::Backward:
                if (!(p.magnitude > 0.0) || !std::isfinite(p.magnitude)) {
                    throw Error(ErrorCode::InvalidParams, std::string(primitive_name(p.kind)) + " needs a positive magnitude");
                }
                break;
            case PrimitiveKind::GoToRoom:
            case PrimitiveKind::FindObject:
            case PrimitiveKind::FindPerson:
                if (p.text.empty()) throw Error(ErrorCode::InvalidParams, std::string(primitive_name(p.kind)) + " needs a target");
                break;
            default: break;
        }
    }
}

namespace {

std::string fmt_num(double v) {
    std::ostringstream out;
    out << v;
    return out.str();
}

}  // namespace

std::string render_program(const InstructionProgram& program) {
    std::string out;
    for (const auto& p : program.steps) {
        if (!out.empty()) out += " then ";
        switch (p.kind) {
            case PrimitiveKind::TurnLeft: out += "turn left " + fmt_num(p.magnitude) + " degrees"; break;
            case PrimitiveKind::TurnRight: out += "turn right " + fmt_num(p.magnitude) + " degrees"; break;
            case PrimitiveKind::TurnAround: out += "turn around"; break;
            case PrimitiveKind::Forward: out += "move forward " + fmt_num(p.magnitude) + " meters"; break;
            case PrimitiveKind::Backward: out += "move backward " + fmt_num(p.magnitude) + " meters"; break;
            case PrimitiveKind::GoThroughDoor: out += "go through the door"; break;
            case PrimitiveKind::GoToRoom: out += "go to " + p.text; break;
            case PrimitiveKind::FindObject: out += "find " + p.text; break;
            case PrimitiveKind::FindPerson: out += "follow " + p.text; break;
        }
    }
    return out;
}

TaskKind task_of(const GoalSpec& g) {
    switch (g.index()) {
        case 0: return TaskKind::PointGoal;
        case 1: return TaskKind::ObjectGoal;
        case 2: return TaskKind::PoiGoal;
        case 3: return TaskKind::Instruction;
        default: return TaskKind::PersonFollow;
    }
}

std::string describe_goal(const GoalSpec& g) {
    if (const auto* p = std::get_if<PointGoal>(&g)) return "PointGoal(" + fmt_num(p->target.x) + ", " + fmt_num(p->target.y) + ")";
    if (const auto* o = std::get_if<ObjectGoal>(&g)) return "ObjectGoal(" + o->category + ")";
    if (const auto* p = std::get_if<PoiGoal>(&g)) return "PoiGoal(" + p->name + ")";
    if (const auto* i = std::get_if<InstructionGoal>(&g)) return "Instruction(" + render_program(i->program) + ")";
    const auto& f = std::get<PersonFollowGoal>(g);
    return "PersonFollow(" + f.descriptor + ", " + fmt_num(f.desired_distance) + ")";
}

double PersonScript::duration() const {
    double d = 0.0;
    if (!follower.empty()) d = std::max(d, follower.back().t);
    if (!target.empty()) d = std::max(d, target.back().t);
    return d;
}

Pose2D pose_at(const std::vector<TimedPose>& traj, double t) {
    if (traj.empty()) return {};
    if (t <= traj.front().t) return traj.front().pose;
    if (t >= traj.back().t) return traj.back().pose;
    const auto it = std::upper_bound(traj.begin(), traj.end(), t, [](double v, const TimedPose& p) { return v < p.t; });
    const auto& b = *it;
    const auto& a = *(it - 1);
    const double f = (t - a.t) / (b.t - a.t);
    const Vec2 p = a.pose.position() + (b.pose.position() - a.pose.position()) * f;
    return Pose2D(p, a.pose.theta + f * wrap_angle(b.pose.theta - a.pose.theta));
}

int default_step_budget(double path_length) {
    return 100 + static_cast<int>(std::ceil(4.0 * path_length / 0.15));
}

Traversal expert_traversal(const Scene& scene) { return Traversal{scene.social_planning(), 0}; }

namespace {

Cell random_spawn(const Scene& scene, Rng& rng) {
    if (scene.spawn_region.empty()) throw Error(ErrorCode::SceneTooSmall, "scene has no spawn cells");
    return scene.spawn_region[static_cast<std::size_t>(rng.below(scene.spawn_region.size()))];
}

std::string episode_id(const Scene& scene, const char* task, int index) {
    return scene.id + ":" + task + ":" + std::to_string(index);
}

bool takes_share(int index, double fraction) {
    return std::llround((index + 1) * fraction) - std::llround(index * fraction) == 1;
}

/// Path from the field's source to `to`, as cell centres with the exact cost.
PathPolyline field_path(const OccupancyGrid& grid, const DistanceField& df, Cell to) {
    auto cells = df.cells_to_source(to);
    std::reverse(cells.begin(), cells.end());
    std::vector<Vec2> pts;
    pts.reserve(cells.size());
    for (const auto& c : cells) pts.push_back(grid.grid_to_world(c));
    return PathPolyline(std::move(pts), df.cost(to));
}

double initial_heading(const PathPolyline& path, Rng& rng) {
    return path.size() > 1 ? path.heading_at(0.0) : rng.uniform(-kPi, kPi);
}

void finish(Episode& ep, const SynthesisConfig& cfg, std::optional<double> final_heading) {
    ep.gt_plans = resample_waypoints(ep.gt_path, ep.start, cfg.step, final_heading);
    ep.max_steps = default_step_budget(ep.gt_path.length());
}

}  // namespace

// ------------------------------------------------------------- point goal

std::vector<Episode> synth_point_goal(const Scene& scene, int n, double recovery_fraction, Rng& rng,
                                      const SynthesisConfig& cfg, SynthesisLog* log) {
    if (n <= 0) throw Error(ErrorCode::InvalidParams, "n must be positive");
    if (!(recovery_fraction >= 0.0 && recovery_fraction <= 1.0)) {
        throw Error(ErrorCode::InvalidParams, "recovery_fraction must lie in [0, 1]");
    }
    const auto& grid = scene.grid;
    const Traversal trav = expert_traversal(scene);
    std::vector<Episode> out;
    if (log) {
        log->task = "point_goal";
        log->requested += n;
    }
    for (int i = 0; i < n; ++i) {
        const bool recovery = takes_share(i, recovery_fraction);
        bool done = false;
        for (int attempt = 0; attempt < cfg.attempts_per_episode && !done; ++attempt) {
            const Cell s = random_spawn(scene, rng);
            const Cell g = random_spawn(scene, rng);
            if (s == g) continue;
            PathPolyline path;
            try {
                path = astar_grid(grid, s, g, trav);
            } catch (const Error&) {
                if (log) log->skip("unreachable_pair");
                continue;
            }
            if (path.length() < cfg.min_geodesic || path.length() > cfg.max_geodesic) continue;
            Episode ep;
            ep.episode_id = episode_id(scene, "point", i);
            ep.scene_id = scene.id;
            ep.success_radius = cfg.success_radius;
            if (recovery) {
                Pose2D pert;
                PathPolyline rest;
                try {
                    pert = perturb_offpath(scene, path, rng, trav);
                    rest = astar_grid(grid, grid.world_to_grid(pert.position()), g, trav);
                } catch (const Error&) {
                    if (log) log->skip("recovery_perturbation_failed");
                    continue;
                }
                std::vector<Vec2> pts{pert.position()};
                pts.insert(pts.end(), rest.points().begin(), rest.points().end());
                ep.gt_path = PathPolyline(std::move(pts));
                ep.start = pert;
                ep.tags.recovery = true;
            } else {
                ep.start = Pose2D(grid.grid_to_world(s), initial_heading(path, rng));
                ep.gt_path = path;
            }
            ep.goal = PointGoal{to_local(ep.start, grid.grid_to_world(g))};
            finish(ep, cfg, std::nullopt);
            out.push_back(std::move(ep));
            done = true;
        }
        if (!done) throw Error(ErrorCode::SceneTooSmall, "no start/goal pair within the geodesic band");
    }
    if (log) log->produced += static_cast<int>(out.size());
    return out;
}

// ------------------------------------------------------------ object goal

std::vector<Episode> synth_object_goal(const Scene& scene, int n, Rng& rng, const SynthesisConfig& cfg,
                                       SynthesisLog* log) {
    if (n <= 0) throw Error(ErrorCode::InvalidParams, "n must be positive");
    std::vector<const SceneObject*> candidates;
    for (const auto& o : scene.objects) {
        if (!o.visible_region.empty()) candidates.push_back(&o);
    }
    if (candidates.empty()) throw Error(ErrorCode::NoVisiblePosition, "no object has a visible position");
    const auto& grid = scene.grid;
    const Traversal trav = expert_traversal(scene);
    std::vector<Episode> out;
    if (log) {
        log->task = "object_goal";
        log->requested += n;
    }
    for (int i = 0; i < n; ++i) {
        bool done = false;
        for (int attempt = 0; attempt < cfg.attempts_per_episode && !done; ++attempt) {
            const std::string category = candidates[static_cast<std::size_t>(rng.below(candidates.size()))]->category;
            const Cell s = random_spawn(scene, rng);
            const DistanceField df(grid, s, trav);
            double best = std::numeric_limits<double>::infinity();
            Cell best_cell{};
            const SceneObject* best_obj = nullptr;
            for (const auto& o : scene.objects) {
                if (!label_equals(o.category, category)) continue;
                for (const auto& c : o.visible_region) {
                    if (df.reachable(c) && df.cost(c) < best) {
                        best = df.cost(c);
                        best_cell = c;
                        best_obj = &o;
                    }
                }
            }
            if (best_obj == nullptr) {
                if (log) log->skip("no_reachable_visible_cell");
                continue;
            }
            Episode ep;
            ep.episode_id = episode_id(scene, "object", i);
            ep.scene_id = scene.id;
            ep.success_radius = cfg.success_radius;
            ep.gt_path = field_path(grid, df, best_cell);
            ep.start = Pose2D(grid.grid_to_world(s), initial_heading(ep.gt_path, rng));
            ep.goal = ObjectGoal{category, std::nullopt, 0.0};
            finish(ep, cfg, heading_of(best_obj->position - grid.grid_to_world(best_cell)));
            out.push_back(std::move(ep));
            done = true;
        }
        if (!done) throw Error(ErrorCode::NoVisiblePosition, "no reachable visible position for any sampled start");
    }
    if (log) log->produced += static_cast<int>(out.size());
    return out;
}

// ---------------------------------------------------------- door traversal

std::vector<Episode> synth_door_traversal(const Scene& scene, int n, Rng& rng, const SynthesisConfig& cfg,
                                          SynthesisLog* log) {
    if (n <= 0) throw Error(ErrorCode::InvalidParams, "n must be positive");
    if (scene.doors.empty()) throw Error(ErrorCode::NoDoors, "scene has no doors");
    const auto& grid = scene.grid;
    const Traversal trav = expert_traversal(scene);
    std::vector<Episode> out;
    if (log) {
        log->task = "door_traversal";
        log->requested += n;
    }
    for (int i = 0; i < n; ++i) {
        bool done = false;
        for (int attempt = 0; attempt < cfg.attempts_per_episode && !done; ++attempt) {
            const Door& door = scene.doors[static_cast<std::size_t>(rng.below(scene.doors.size()))];
            const Vec2 normal = unit_from_angle(door.pose.theta) * (rng.coin() ? 1.0 : -1.0);
            const Vec2 tangent{-normal.y, normal.x};
            const Vec2 sp = door.pose.position() - normal * rng.uniform(0.5, 2.0) + tangent * rng.uniform(-0.3, 0.3);
            const Vec2 gp = door.pose.position() + normal * rng.uniform(1.0, 4.0) + tangent * rng.uniform(-0.5, 0.5);
            const double final_heading = rng.uniform(-kPi, kPi);
            if (!grid.contains(sp) || !grid.contains(gp)) continue;
            const Cell sc = grid.world_to_grid(sp);
            const Cell gc = grid.world_to_grid(gp);
            if (!passable(grid, sc, trav) || !passable(grid, gc, trav)) continue;
            if (grid.at(sc) == SemanticClass::Door || grid.at(gc) == SemanticClass::Door) continue;
            if (distance(grid.grid_to_world(sc), door.pose.position()) > 2.0) continue;
            PathPolyline path;
            try {
                path = astar_grid(grid, sc, gc, trav);
            } catch (const Error&) {
                continue;
            }
            bool through = false;
            for (const auto& c : polyline_cells(grid, path.points())) {
                if (grid.in_bounds(c) && grid.at(c) == SemanticClass::Door &&
                    distance(grid.grid_to_world(c), door.pose.position()) <= door.width / 2.0 + grid.resolution()) {
                    through = true;
                }
            }
            if (!through) {
                if (log) log->skip("path_avoids_door");
                continue;
            }
            Episode ep;
            ep.episode_id = episode_id(scene, "door", i);
            ep.scene_id = scene.id;
            ep.success_radius = cfg.success_radius;
            ep.gt_path = path;
            ep.start = Pose2D(grid.grid_to_world(sc), initial_heading(path, rng));
            InstructionGoal goal;
            goal.program.steps.push_back({PrimitiveKind::GoThroughDoor, 0.0, door.id, ""});
            goal.implied_target = to_local(ep.start, Pose2D(grid.grid_to_world(gc), final_heading));
            ep.goal = goal;
            finish(ep, cfg, final_heading);
            out.push_back(std::move(ep));
            done = true;
        }
        if (!done) throw Error(ErrorCode::SceneTooSmall, "no feasible door traversal");
    }
    if (log) log->produced += static_cast<int>(out.size());
    return out;
}

// ----------------------------------------------------------- short horizon

std::vector<Pose2D> execute_program(const InstructionProgram& program, const Pose2D& start, double step) {
    validate_program(program);
    if (!(step > 0.0)) throw Error(ErrorCode::InvalidParams, "step must be positive");
    std::vector<Pose2D> out;
    Pose2D cur = start;
    auto rotate = [&](double total) {
        const int slices = std::max(1, static_cast<int>(std::ceil(std::abs(total) / (kPi / 4.0) - 1e-9)));
        const double base = cur.theta;
        for (int k = 1; k <= slices; ++k) {
            cur = Pose2D(cur.position(), base + total * k / slices);
            out.push_back(cur);
        }
    };
    auto translate = [&](double signed_dist) {
        const double len = std::abs(signed_dist);
        const Vec2 dir = unit_from_angle(cur.theta) * (signed_dist < 0.0 ? -1.0 : 1.0);
        const Vec2 base = cur.position();
        const long count = static_cast<long>(std::ceil(len / step - 1e-9));
        for (long k = 1; k <= count; ++k) {
            const double s = k == count ? len : static_cast<double>(k) * step;
            cur = Pose2D(base + dir * s, cur.theta);
            out.push_back(cur);
        }
    };
    for (const auto& p : program.steps) {
        switch (p.kind) {
            case PrimitiveKind::TurnLeft: rotate(deg_to_rad(p.magnitude)); break;
            case PrimitiveKind::TurnRight: rotate(-deg_to_rad(p.magnitude)); break;
            case PrimitiveKind::TurnAround: rotate(kPi); break;
            case PrimitiveKind::Forward: translate(p.magnitude); break;
            case PrimitiveKind::Backward: translate(-p.magnitude); break;
            default:
                throw Error(ErrorCode::InvalidParams,
                            std::string(primitive_name(p.kind)) + " has no kinematic execution");
        }
    }
    return out;
}

std::vector<Episode> synth_short_horizon(const Scene& scene, int n, Rng& rng, const SynthesisConfig& cfg,
                                         SynthesisLog* log) {
    if (n <= 0) throw Error(ErrorCode::InvalidParams, "n must be positive");
    const auto& grid = scene.grid;
    const Traversal trav = expert_traversal(scene);
    static const double kTurns[] = {30.0, 45.0, 60.0, 90.0};
    static const double kMoves[] = {0.5, 1.0, 1.5, 2.0};
    std::vector<Episode> out;
    if (log) {
        log->task = "short_horizon";
        log->requested += n;
    }
    for (int i = 0; i < n; ++i) {
        bool done = false;
        for (int attempt = 0; attempt < cfg.attempts_per_episode && !done; ++attempt) {
            const Cell s = random_spawn(scene, rng);
            const Pose2D start(grid.grid_to_world(s), rng.uniform(-kPi, kPi));
            InstructionProgram program;
            const int len = 1 + static_cast<int>(rng.below(3));
            for (int k = 0; k < len; ++k) {
                Primitive p;
                switch (rng.below(5)) {
                    case 0: p = {PrimitiveKind::TurnLeft, kTurns[rng.below(4)], -1, ""}; break;
                    case 1: p = {PrimitiveKind::TurnRight, kTurns[rng.below(4)], -1, ""}; break;
                    case 2: p = {PrimitiveKind::TurnAround, 0.0, -1, ""}; break;
                    case 3: p = {PrimitiveKind::Forward, kMoves[rng.below(4)], -1, ""}; break;
                    default: p = {PrimitiveKind::Backward, kMoves[rng.below(4)], -1, ""}; break;
                }
                program.steps.push_back(p);
            }
            const auto poses = execute_program(program, start, cfg.step);
            const Pose2D final_pose = poses.empty() ? start : poses.back();
            std::vector<Vec2> pts{start.position()};
            for (const auto& p : poses) pts.push_back(p.position());
            if (!polyline_passable(grid, pts, trav.social_only)) continue;
            if (distance(final_pose.position(), start.position()) < cfg.short_horizon_radius &&
                std::abs(wrap_angle(final_pose.theta - start.theta)) < kInstructionHeadingTolerance) {
                continue;
            }
            Episode ep;
            ep.episode_id = episode_id(scene, "short", i);
            ep.scene_id = scene.id;
            ep.start = start;
            ep.success_radius = cfg.short_horizon_radius;
            ep.gt_path = PathPolyline(std::move(pts));
            ep.gt_plans = chunk_plans(poses, start);
            ep.goal = InstructionGoal{program, to_local(start, final_pose)};
            ep.max_steps = default_step_budget(ep.gt_path.length()) + 50;
            out.push_back(std::move(ep));
            done = true;
        }
        if (!done) throw Error(ErrorCode::SceneTooSmall, "no collision-free short-horizon program");
    }
    if (log) log->produced += static_cast<int>(out.size());
    return out;
}

// --------------------------------------------------------------- POI goal

std::vector<Episode> synth_poi_goal(const Scene& scene, int n, Rng& rng, const SynthesisConfig& cfg, SynthesisLog* log) {
    if (n <= 0) throw Error(ErrorCode::InvalidParams, "n must be positive");
    if (scene.pois.empty()) throw Error(ErrorCode::NoPois, "scene has no POIs");
    const auto& grid = scene.grid;
    const Traversal trav = expert_traversal(scene);
    std::vector<std::string> names;
    for (const auto& p : scene.pois) {
        if (std::find(names.begin(), names.end(), p.name) == names.end()) names.push_back(p.name);
    }
    std::vector<Episode> out;
    if (log) {
        log->task = "poi_goal";
        log->requested += n;
    }
    for (int i = 0; i < n; ++i) {
        for (int attempt = 0; attempt < cfg.attempts_per_episode; ++attempt) {
            const std::string& name = names[static_cast<std::size_t>(rng.below(names.size()))];
            const Cell s = random_spawn(scene, rng);
            const DistanceField df(grid, s, trav);
            double best = std::numeric_limits<double>::infinity();
            const PoiEntry* target = nullptr;
            for (const auto& p : scene.pois) {
                if (p.name != name || !grid.contains(p.entrance.position())) continue;
                const Cell c = grid.world_to_grid(p.entrance.position());
                if (df.reachable(c) && df.cost(c) < best) {
                    best = df.cost(c);
                    target = &p;
                }
            }
            if (target == nullptr) {
                if (log) log->skip("unreachable_poi");
                break;
            }
            const Cell ec = grid.world_to_grid(target->entrance.position());
            if (ec == s) continue;
            Episode ep;
            ep.episode_id = episode_id(scene, "poi", i);
            ep.scene_id = scene.id;
            ep.success_radius = cfg.poi_success_radius;
            auto pts = field_path(grid, df, ec).points();
            pts.push_back(target->entrance.position());
            ep.gt_path = PathPolyline(std::move(pts));
            ep.start = Pose2D(grid.grid_to_world(s), initial_heading(ep.gt_path, rng));
            ep.goal = PoiGoal{name};
            finish(ep, cfg, target->entrance.theta);
            out.push_back(std::move(ep));
            break;
        }
    }
    if (log) log->produced += static_cast<int>(out.size());
    return out;
}

// ---------------------------------------------------------- person follow

namespace {

const std::vector<std::string> kColors = {"red", "blue", "green", "yellow", "black", "white"};
const std::vector<std::string> kGarments = {"jacket", "shirt", "coat", "hoodie"};
const std::vector<std::string> kAccessories = {"backpack", "hat", "scarf", "glasses"};

template <class T>
const T& pick(const std::vector<T>& v, Rng& rng) {
    return v[static_cast<std::size_t>(rng.below(v.size()))];
}

PersonDescriptor random_descriptor(Rng& rng) { return {pick(kColors, rng), pick(kGarments, rng), pick(kAccessories, rng)}; }

PersonDescriptor similar_to(const PersonDescriptor& d, Rng& rng) {
    PersonDescriptor out = d;
    const auto& pool = rng.coin() ? kGarments : kAccessories;
    std::string& slot = (&pool == &kGarments) ? out.garment : out.accessory;
    std::string next = slot;
    while (next == slot) next = pick(pool, rng);
    slot = next;
    return out;
}

/// A* route through `legs` random spawn cells, as one polyline.
std::optional<PathPolyline> random_route(const Scene& scene, Rng& rng, const Traversal& trav, int legs) {
    const auto& grid = scene.grid;
    Cell cur = random_spawn(scene, rng);
    std::vector<Vec2> pts{grid.grid_to_world(cur)};
    for (int k = 0; k < legs; ++k) {
        const Cell next = random_spawn(scene, rng);
        if (next == cur) continue;
        try {
            const auto leg = astar_grid(grid, cur, next, trav);
            pts.insert(pts.end(), leg.points().begin() + 1, leg.points().end());
        } catch (const Error&) {
            return std::nullopt;
        }
        cur = next;
    }
    PathPolyline route(std::move(pts));
    if (route.size() < 2) return std::nullopt;
    return route;
}

/// Largest arc s <= s_target whose point is exactly `gap` away (Euclidean)
/// from the point at s_target; nullopt when the route start is closer.
std::optional<double> trailing_arc(const PathPolyline& route, double s_target, double gap) {
    const Vec2 pt = route.point_at(s_target);
    double hi = s_target;
    double lo = s_target;
    const double dstep = 0.01;
    while (true) {
        lo = std::max(0.0, hi - dstep);
        if (distance(route.point_at(lo), pt) >= gap) break;
        if (lo <= 0.0) return std::nullopt;
        hi = lo;
    }
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (distance(route.point_at(mid), pt) >= gap) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return lo;
}

std::vector<TimedPose> walk(const PathPolyline& route, double s0, double speed, double dt, double duration) {
    std::vector<TimedPose> out;
    const double total = route.length();
    const long steps = std::lround(duration / dt);
    for (long k = 0; k <= steps; ++k) {
        const double t = static_cast<double>(k) * dt;
        const double s = std::min(total, s0 + speed * t);
        out.push_back({t, Pose2D(route.point_at(s), route.heading_at(std::min(s, total - 1e-9)))});
    }
    return out;
}

}  // namespace

PersonDescriptor parse_descriptor(const std::string& s) {
    std::istringstream in(s);
    PersonDescriptor d;
    in >> d.color >> d.garment >> d.accessory;
    return d;
}

bool similar_descriptor(const std::string& a, const std::string& b) {
    const auto da = parse_descriptor(a);
    const auto db = parse_descriptor(b);
    if (da.color != db.color) return false;
    const int diff = (da.garment != db.garment ? 1 : 0) + (da.accessory != db.accessory ? 1 : 0);
    return diff == 1;
}

std::vector<Episode> synth_person_follow(const Scene& scene, int n, const std::vector<double>& distances, Rng& rng,
                                         const SynthesisConfig& cfg, SynthesisLog* log) {
    if (n <= 0) throw Error(ErrorCode::InvalidParams, "n must be positive");
    if (distances.empty()) throw Error(ErrorCode::InvalidParams, "distances must be nonempty");
    for (double d : distances) {
        if (!(d > 0.0)) throw Error(ErrorCode::InvalidParams, "follow distances must be positive");
    }
    const auto& grid = scene.grid;
    const Traversal trav = expert_traversal(scene);
    const FovConfig fov{};
    const double dt = cfg.person_dt;
    std::vector<Episode> out;
    if (log) {
        log->task = "person_follow";
        log->requested += n;
    }
    static const FollowCategory kCycle[3] = {FollowCategory::STT, FollowCategory::DT, FollowCategory::AT};
    for (int i = 0; i < n; ++i) {
        const double gap = distances[static_cast<std::size_t>(i) % distances.size()];
        const FollowCategory category = kCycle[i % 3];
        const bool absent = takes_share(i, cfg.target_absent_fraction);
        bool done = false;
        for (int attempt = 0; attempt < cfg.attempts_per_episode && !done; ++attempt) {
            const PersonDescriptor who = random_descriptor(rng);
            PersonScript script;
            script.target_descriptor = who.render();
            script.category = category;
            script.target_absent = absent;
            Episode ep;
            ep.episode_id = episode_id(scene, "follow", i);
            ep.scene_id = scene.id;
            ep.success_radius = cfg.success_radius;
            ep.goal = PersonFollowGoal{script.target_descriptor, gap};
            ep.tags.category = category;
            ep.tags.target_absent = absent;
            double duration = 10.0;
            if (absent) {
                const Cell s = random_spawn(scene, rng);
                ep.start = Pose2D(grid.grid_to_world(s), rng.uniform(-kPi, kPi));
                for (long k = 0; k <= std::lround(duration / dt); ++k) script.follower.push_back({k * dt, ep.start});
                ep.gt_path = PathPolyline({ep.start.position()});
                ep.gt_plans = {identity_plan()};
            } else {
                const auto route = random_route(scene, rng, trav, 2);
                if (!route) continue;
                const double total = route->length();
                double s0 = -1.0;
                for (double s = gap; s <= total; s += 0.05) {
                    if (trailing_arc(*route, s, gap)) {
                        s0 = s;
                        break;
                    }
                }
                if (s0 < 0.0 || total - s0 < 10.0 * cfg.person_speed) continue;
                duration = std::min(40.0, (total - s0) / cfg.person_speed);
                duration = std::floor(duration / dt + 1e-9) * dt;
                script.target = walk(*route, s0, cfg.person_speed, dt, duration);
                bool ok = true;
                int occluded = 0;
                for (const auto& tp : script.target) {
                    const double st = std::min(total, s0 + cfg.person_speed * tp.t);
                    const auto sf = trailing_arc(*route, st, gap);
                    if (!sf) {
                        ok = false;
                        break;
                    }
                    const Vec2 fp = route->point_at(*sf);
                    const Pose2D follower(fp, heading_of(tp.pose.position() - fp));
                    script.follower.push_back({tp.t, follower});
                    if (!point_visible(grid, follower, tp.pose.position(), fov)) ++occluded;
                }
                if (!ok) continue;
                if (category == FollowCategory::AT ? occluded == 0 : occluded > 0) {
                    if (log) log->skip(category == FollowCategory::AT ? "no_occlusion" : "occluded");
                    continue;
                }
                std::vector<Vec2> pts;
                for (const auto& f : script.follower) pts.push_back(f.pose.position());
                ep.start = script.follower.front().pose;
                ep.gt_path = PathPolyline(std::move(pts));
                ep.gt_plans = resample_waypoints(ep.gt_path, ep.start, cfg.step);
            }
            if (category == FollowCategory::DT) {
                const auto droute = random_route(scene, rng, trav, 1);
                if (!droute || droute->length() < 5.0) continue;
                script.distractors.push_back({similar_to(who, rng).render(), walk(*droute, 0.0, cfg.person_speed, dt, duration)});
            }
            ep.max_steps = static_cast<int>(std::lround(duration / dt));
            ep.person_script = std::move(script);
            out.push_back(std::move(ep));
            done = true;
        }
        if (!done) throw Error(ErrorCode::SceneTooSmall, "no feasible person-following route");
    }
    if (log) log->produced += static_cast<int>(out.size());
    return out;
}

// -------------------------------------------------------------- truncation

std::vector<Pose2D> episode_poses(const Episode& ep, double step) {
    const auto chained = chain_plans(ep.gt_plans, ep.start);
    const double final_heading = chained.empty() ? ep.start.theta : chained.back().theta;
    std::vector<Pose2D> out{ep.start};
    const auto rest = resample_poses(ep.gt_path, ep.start, step, final_heading);
    out.insert(out.end(), rest.begin(), rest.end());
    return out;
}

Episode truncate_first_visibility(const Episode& ep, const Scene& scene, const FovConfig& fov, double step) {
    const auto* goal = std::get_if<ObjectGoal>(&ep.goal);
    Episode out = ep;
    out.tags.truncated = false;
    if (goal == nullptr) return out;
    const auto poses = episode_poses(ep, step);
    std::optional<std::size_t> first;
    for (std::size_t k = 0; k < poses.size() && !first; ++k) {
        for (const auto& obj : scene.objects) {
            if (goal->admits(obj) && object_visible(scene.grid, poses[k], obj, fov)) {
                first = k;
                break;
            }
        }
    }
    if (!first) return out;
    out.tags.truncated = true;
    if (*first == 0) return out;
    const std::size_t k = *first;
    const auto& pts = ep.gt_path.points();
    const double cut = static_cast<double>(k) * step;
    std::vector<Vec2> rest{poses[k].position()};
    double acc = 0.0;
    for (std::size_t v = 1; v < pts.size(); ++v) {
        acc += distance(pts[v - 1], pts[v]);
        if (acc > cut + 1e-9) rest.push_back(pts[v]);
    }
    out.start = poses[k];
    out.gt_path = PathPolyline(std::move(rest));
    out.gt_plans = resample_waypoints(out.gt_path, out.start, step, poses.back().theta);
    out.max_steps = default_step_budget(out.gt_path.length());
    return out;
}

// --------------------------------------------------------------- balancing

double first_plan_turn(const Episode& ep) {
    if (ep.gt_plans.empty()) return 0.0;
    return ep.gt_plans.front().back().theta;
}

int action_bin(double turn, int bins) {
    const long b = std::lround(wrap_angle(turn) / (2.0 * kPi) * bins);
    return static_cast<int>(((b % bins) + bins) % bins);
}

std::vector<Episode> balance_actions(const std::vector<Episode>& episodes, int bins, double cap_ratio, Rng& rng) {
    if (bins < 2) throw Error(ErrorCode::InvalidParams, "bins must be >= 2");
    if (!(cap_ratio >= 1.0)) throw Error(ErrorCode::InvalidParams, "cap_ratio must be >= 1");
    std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(bins));
    for (std::size_t k = 0; k < episodes.size(); ++k) {
        members[static_cast<std::size_t>(action_bin(first_plan_turn(episodes[k]), bins))].push_back(k);
    }
    std::size_t smallest = 0;
    for (const auto& m : members) {
        if (!m.empty() && (smallest == 0 || m.size() < smallest)) smallest = m.size();
    }
    const auto cap = static_cast<std::size_t>(std::floor(cap_ratio * static_cast<double>(smallest)));
    std::vector<char> keep(episodes.size(), 1);
    for (auto& m : members) {
        if (m.size() <= cap) continue;
        auto shuffled = m;
        rng.shuffle(shuffled);
        for (std::size_t k = cap; k < shuffled.size(); ++k) keep[shuffled[k]] = 0;
    }
    std::vector<Episode> out;
    for (std::size_t k = 0; k < episodes.size(); ++k) {
        if (keep[k]) out.push_back(episodes[k]);
    }
    return out;
}

}  // namespace navkit
