#include "navkit/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "navkit/error.hpp"
#include "navkit/memory.hpp"

namespace navkit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kHeadingDone = 0.05;
constexpr double kStraightCheck = 3.0;

double clamp_abs(double v, double limit) { return std::clamp(v, -limit, limit); }

}  // namespace

void SimConfig::validate() const {
    if (!(dt > 0.0)) throw Error(ErrorCode::InvalidParams, "dt must be positive");
    if (!(max_speed > 0.0) || !(max_yaw_rate > 0.0)) throw Error(ErrorCode::InvalidParams, "speed limits must be positive");
    if (replan_every < 1) throw Error(ErrorCode::InvalidParams, "replan_every must be >= 1");
    if (success_radius && !(*success_radius > 0.0)) throw Error(ErrorCode::InvalidParams, "success_radius must be positive");
    if (max_steps < 0) throw Error(ErrorCode::InvalidParams, "max_steps must be nonnegative");
    if (!(lookahead >= 0.0) || !(stop_tolerance > 0.0)) throw Error(ErrorCode::InvalidParams, "bad controller tolerances");
    if (!(heading_gain > 0.0)) throw Error(ErrorCode::InvalidParams, "heading_gain must be positive");
    if (!(local_grid_half_width >= 0.0)) throw Error(ErrorCode::InvalidParams, "local_grid_half_width must be nonnegative");
    if (lost_track_steps < 1) throw Error(ErrorCode::InvalidParams, "lost_track_steps must be >= 1");
    weights.validate();
}

// -------------------------------------------------------------- controller

VelocityCommand waypoint_controller(const Pose2D& state, const WaypointPlan& plan, const SimConfig& cfg) {
    const Vec2 pos = state.position();
    // Arc position of every vertex of [origin] + waypoints, and the robot's
    // projection onto that polyline.
    std::array<Vec2, kPlanLength + 1> pts{};
    pts[0] = {0.0, 0.0};
    for (std::size_t k = 0; k < kPlanLength; ++k) pts[k + 1] = plan[k].position();
    std::array<double, kPlanLength + 1> arc{};
    for (std::size_t k = 1; k < pts.size(); ++k) arc[k] = arc[k - 1] + distance(pts[k - 1], pts[k]);
    double progress = 0.0;
    double best = kInf;
    for (std::size_t k = 1; k < pts.size(); ++k) {
        const Vec2 d = pts[k] - pts[k - 1];
        const double len2 = d.dot(d);
        const double f = len2 > 0.0 ? std::clamp((pos - pts[k - 1]).dot(d) / len2, 0.0, 1.0) : 0.0;
        const double dist = distance(pos, pts[k - 1] + d * f);
        if (dist < best - 1e-12) {
            best = dist;
            progress = arc[k - 1] + f * std::sqrt(len2);
        }
    }

    // Carrot one lookahead past the projection; its waypoint supplies the
    // reference heading.
    const double total = arc[kPlanLength];
    const double carrot_s = progress + cfg.lookahead;
    const bool final = carrot_s >= total - 1e-9;
    std::size_t target = kPlanLength - 1;
    Vec2 carrot = plan[kPlanLength - 1].position();
    if (!final) {
        for (std::size_t k = 1; k < pts.size(); ++k) {
            if (arc[k] >= carrot_s) {
                const double len = arc[k] - arc[k - 1];
                const double f = len > 0.0 ? (carrot_s - arc[k - 1]) / len : 1.0;
                carrot = pts[k - 1] + (pts[k] - pts[k - 1]) * f;
                target = k - 1;
                break;
            }
        }
    }
    const Pose2D& wp = plan[target];
    const Vec2 to = carrot - pos;
    const double dist = to.norm();

    VelocityCommand cmd;
    if (final && dist <= cfg.stop_tolerance) {
        const double err = wrap_angle(wp.theta - state.theta);
        if (std::abs(err) <= kHeadingDone) return cmd;
        cmd.vyaw = clamp_abs(cfg.heading_gain * err, cfg.max_yaw_rate);
        return cmd;
    }
    const double bearing = heading_of(to);
    double desired = wp.theta;
    const double off = wrap_angle(bearing - wp.theta);
    if (std::abs(off) <= kPi / 2.0) desired = wp.theta + 0.5 * off;
    cmd.vyaw = clamp_abs(cfg.heading_gain * wrap_angle(desired - state.theta), cfg.max_yaw_rate);
    const double speed = final ? std::min(cfg.max_speed, 2.0 * dist) : cfg.max_speed;
    const double rel = bearing - state.theta;
    cmd.vx = speed * std::cos(rel);
    cmd.vy = speed * std::sin(rel);
    return cmd;
}

Pose2D integrate(const Pose2D& pose, const VelocityCommand& cmd, double dt) {
    const double c = std::cos(pose.theta);
    const double s = std::sin(pose.theta);
    return Pose2D(pose.x + dt * (c * cmd.vx - s * cmd.vy), pose.y + dt * (s * cmd.vx + c * cmd.vy),
                  pose.theta + dt * cmd.vyaw);
}

// ---------------------------------------------------------- goal handling

std::optional<ResolvedGoal> resolve_goal(const Scene& scene, const Episode& ep) {
    const auto& grid = scene.grid;
    if (const auto* g = std::get_if<PointGoal>(&ep.goal)) {
        return ResolvedGoal{to_world(ep.start, g->target), std::nullopt};
    }
    if (const auto* g = std::get_if<ObjectGoal>(&ep.goal)) {
        if (!grid.contains(ep.start.position())) return std::nullopt;
        const DistanceField df(grid, grid.world_to_grid(ep.start.position()), expert_traversal(scene));
        double best = kInf;
        std::optional<ResolvedGoal> out;
        for (const auto& o : scene.objects) {
            if (!label_equals(o.category, g->category) || !g->admits(o)) continue;
            for (const auto& c : o.visible_region) {
                if (df.reachable(c) && df.cost(c) < best) {
                    best = df.cost(c);
                    const Vec2 p = grid.grid_to_world(c);
                    out = ResolvedGoal{p, heading_of(o.position - p)};
                }
            }
        }
        return out;
    }
    if (const auto* g = std::get_if<PoiGoal>(&ep.goal)) {
        if (!grid.contains(ep.start.position())) return std::nullopt;
        const DistanceField df(grid, grid.world_to_grid(ep.start.position()), expert_traversal(scene));
        double best = kInf;
        std::optional<ResolvedGoal> out;
        for (const auto& p : scene.pois) {
            if (p.name != g->name || !grid.contains(p.entrance.position())) continue;
            const Cell c = grid.world_to_grid(p.entrance.position());
            if (df.reachable(c) && df.cost(c) < best) {
                best = df.cost(c);
                out = ResolvedGoal{p.entrance.position(), p.entrance.theta};
            }
        }
        return out;
    }
    if (const auto* g = std::get_if<InstructionGoal>(&ep.goal)) {
        if (g->implied_target) {
            const Pose2D w = to_world(ep.start, *g->implied_target);
            return ResolvedGoal{w.position(), w.theta};
        }
        for (const auto& p : g->program.steps) {
            switch (p.kind) {
                case PrimitiveKind::TurnLeft:
                case PrimitiveKind::TurnRight:
                case PrimitiveKind::TurnAround:
                case PrimitiveKind::Forward:
                case PrimitiveKind::Backward:
                    break;
                default:
                    return std::nullopt;
            }
        }
        const auto poses = execute_program(g->program, ep.start);
        const Pose2D end = poses.empty() ? ep.start : poses.back();
        return ResolvedGoal{end.position(), end.theta};
    }
    return std::nullopt;
}

ResolvedGoal follow_goal(const Scene& scene, const Pose2D& target, double desired_distance) {
    const Vec2 back = unit_from_angle(target.theta) * -1.0;
    const auto& grid = scene.grid;
    const int n = std::max(1, static_cast<int>(std::ceil(desired_distance / 0.05)));
    for (int k = n; k >= 0; --k) {
        const Vec2 p = target.position() + back * (desired_distance * k / n);
        if (grid.contains(p) && passable(grid, grid.world_to_grid(p), false)) return {p, target.theta};
    }
    return {target.position(), target.theta};
}

GoalDistance::GoalDistance(const Scene& scene, Vec2 goal)
    : scene_(&scene),
      goal_(goal),
      planning_(scene.grid, scene.grid.world_to_grid(goal), Traversal{scene.social_planning(), 0}) {
    if (scene.social_planning()) {
        physical_ = std::make_unique<DistanceField>(scene.grid, scene.grid.world_to_grid(goal), Traversal{false, 0});
    }
}

double GoalDistance::operator()(Vec2 p) const {
    double d = planning_.geodesic(goal_, p);
    bool social = scene_->social_planning();
    if (!std::isfinite(d) && physical_) {
        d = physical_->geodesic(goal_, p);
        social = false;
    }
    const double straight = distance(goal_, p);
    if (straight < d && straight <= kStraightCheck) {
        const Vec2 seg[2] = {goal_, p};
        if (polyline_passable(scene_->grid, seg, social, 0.02)) d = straight;
    }
    return d;
}

// ---------------------------------------------------------------- policies

void AStarOracle::reset(std::uint64_t) {
    cached_goal_.reset();
    cached_scene_ = nullptr;
    for (auto& f : fields_) f.reset();
}

const DistanceField& AStarOracle::field_for(const Scene& scene, Cell goal, int which) {
    if (cached_scene_ != &scene || !cached_goal_ || *cached_goal_ != goal) {
        for (auto& f : fields_) f.reset();
        cached_scene_ = &scene;
        cached_goal_ = goal;
    }
    auto& slot = fields_[which];
    if (!slot) {
        const bool social = scene.social_planning() && which < 2;
        slot = std::make_unique<DistanceField>(scene.grid, goal, Traversal{social, which == 0 ? 1 : 0});
    }
    return *slot;
}

namespace {

WaypointPlan spin_plan() {
    WaypointPlan plan{};
    for (std::size_t k = 0; k < kPlanLength; ++k) plan[k] = Pose2D(0.0, 0.0, (static_cast<double>(k) + 1.0) * kPi / 10.0);
    return plan;
}

WaypointPlan local_chunk(const std::vector<Pose2D>& world, const Pose2D& frame) {
    WaypointPlan plan{};
    for (std::size_t k = 0; k < kPlanLength; ++k) {
        const Pose2D& w = world.empty() ? frame : world[std::min(k, world.size() - 1)];
        plan[k] = to_local(frame, w);
    }
    return plan;
}

}  // namespace

WaypointPlan AStarOracle::plan(const Observation& obs, const PolicyContext& ctx) {
    if (!ctx.scene) throw Error(ErrorCode::InvalidParams, "oracle needs the scene");
    if (!ctx.goal) return spin_plan();
    const Scene& scene = *ctx.scene;
    const auto& grid = scene.grid;
    const Vec2 goal = ctx.goal->point;
    const Vec2 pos = obs.pose.position();
    if (!grid.contains(goal) || !grid.contains(pos)) throw Error(ErrorCode::OutOfBounds, "oracle endpoint outside the grid");
    const Cell gc = grid.world_to_grid(goal);
    const Cell rc = grid.world_to_grid(pos);
    std::vector<Cell> cells;
    const int tiers = scene.social_planning() ? 3 : 2;
    for (int which = 0; which < tiers && cells.empty(); ++which) cells = field_for(scene, gc, which).cells_to_source(rc);
    if (cells.empty()) throw Error(ErrorCode::Unreachable, "goal unreachable from the current cell");

    std::vector<Vec2> pts{pos};
    for (std::size_t k = 1; k + 1 < cells.size(); ++k) pts.push_back(grid.grid_to_world(cells[k]));
    pts.push_back(goal);
    const PathPolyline path(std::move(pts));
    std::vector<Pose2D> poses;
    if (path.size() >= 2) poses = resample_poses(path, obs.pose, step_, ctx.goal->heading);
    if (poses.empty()) poses.push_back(Pose2D(goal, ctx.goal->heading.value_or(obs.pose.theta)));
    if (poses.size() > kPlanLength) poses.resize(kPlanLength);
    return local_chunk(poses, obs.pose);
}

std::string NoisyOracle::name() const {
    std::string s = std::to_string(sigma_);
    while (s.size() > 1 && s.back() == '0') s.pop_back();
    if (!s.empty() && s.back() == '.') s.pop_back();
    return "noisy:" + s;
}

void NoisyOracle::reset(std::uint64_t seed) {
    inner_.reset(seed);
    rng_ = Rng(derive_seed(seed, "noisy_oracle", 0));
}

WaypointPlan NoisyOracle::plan(const Observation& obs, const PolicyContext& ctx) {
    WaypointPlan p = inner_.plan(obs, ctx);
    for (auto& w : p) {
        const double nx = rng_.normal();
        const double ny = rng_.normal();
        w = Pose2D(w.x + sigma_ * nx, w.y + sigma_ * ny, w.theta);
    }
    return p;
}

WaypointPlan GreedyPolicy::plan(const Observation& obs, const PolicyContext& ctx) {
    if (!ctx.goal) return identity_plan();
    const Vec2 local = to_local(obs.pose, ctx.goal->point);
    const double dist = local.norm();
    const double bearing = dist > 1e-9 ? heading_of(local) : 0.0;
    WaypointPlan plan{};
    for (std::size_t k = 0; k < kPlanLength; ++k) {
        const double s = std::min(dist, 0.5 * (static_cast<double>(k) + 1.0));
        double theta = bearing;
        if (s >= dist && ctx.goal->heading) theta = wrap_angle(*ctx.goal->heading - obs.pose.theta);
        plan[k] = Pose2D(unit_from_angle(bearing) * s, theta);
    }
    return plan;
}

ReplayPolicy::ReplayPolicy(const Episode& episode, double heading_weight, std::size_t window)
    : heading_weight_(heading_weight), window_(std::max<std::size_t>(window, 1)) {
    poses_.push_back(episode.start);
    for (const auto& p : chain_plans(episode.gt_plans, episode.start)) poses_.push_back(p);
}

void ReplayPolicy::reset(std::uint64_t) { cursor_ = 0; }

WaypointPlan ReplayPolicy::plan(const Observation& obs, const PolicyContext&) {
    double best = kInf;
    std::size_t pick = cursor_;
    for (std::size_t k = cursor_; k < poses_.size() && k <= cursor_ + window_; ++k) {
        const double c = distance(poses_[k].position(), obs.pose.position()) +
                         heading_weight_ * std::abs(wrap_angle(poses_[k].theta - obs.pose.theta));
        if (c < best) {
            best = c;
            pick = k;
        }
    }
    cursor_ = pick;
    std::vector<Pose2D> next;
    for (std::size_t k = cursor_ + 1; k < poses_.size() && next.size() < kPlanLength; ++k) next.push_back(poses_[k]);
    if (next.empty()) next.push_back(poses_.back());
    return local_chunk(next, obs.pose);
}

std::unique_ptr<Policy> make_policy(const std::string& spec) {
    if (spec == "oracle") return std::make_unique<AStarOracle>();
    if (spec == "greedy") return std::make_unique<GreedyPolicy>();
    if (spec == "stationary") return std::make_unique<StationaryPolicy>();
    if (spec.rfind("noisy:", 0) == 0) {
        const std::string rest = spec.substr(6);
        std::size_t used = 0;
        double sigma = 0.0;
        try {
            sigma = std::stod(rest, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != rest.size() || !(sigma >= 0.0) || !std::isfinite(sigma)) {
            throw Error(ErrorCode::InvalidParams, "bad noise level in policy '" + spec + "'");
        }
        return std::make_unique<NoisyOracle>(sigma);
    }
    throw Error(ErrorCode::InvalidParams, "unknown policy '" + spec + "'");
}

const char* status_name(TerminalStatus s) {
    switch (s) {
        case TerminalStatus::Success: return "success";
        case TerminalStatus::Timeout: return "timeout";
        case TerminalStatus::Collision: return "collision";
        case TerminalStatus::LostTrack: return "lost_track";
    }
    return "timeout";
}

TerminalStatus status_from_name(const std::string& s) {
    for (auto k : {TerminalStatus::Success, TerminalStatus::Timeout, TerminalStatus::Collision, TerminalStatus::LostTrack}) {
        if (s == status_name(k)) return k;
    }
    throw Error(ErrorCode::InvalidParams, "unknown status '" + s + "'");
}

double EpisodeTrace::path_length() const {
    double total = 0.0;
    for (std::size_t k = 1; k < steps.size(); ++k) total += distance(steps[k - 1].pose.position(), steps[k].pose.position());
    return total;
}

int EpisodeTrace::collision_steps() const {
    int n = 0;
    for (const auto& s : steps) n += s.collided ? 1 : 0;
    return n;
}

std::vector<Pose2D> advance_actors(const PersonScript& script, double t) {
    std::vector<Pose2D> out;
    if (!script.target_absent && !script.target.empty()) out.push_back(pose_at(script.target, t));
    for (const auto& d : script.distractors) {
        if (!d.trajectory.empty()) out.push_back(pose_at(d.trajectory, t));
    }
    return out;
}

Observation build_observation(const Scene& scene, const Episode& ep, const Pose2D& pose, int step, double time,
                              const SimConfig& cfg) {
    Observation obs;
    obs.pose = pose;
    obs.goal = ep.goal;
    obs.episode_start = ep.start;
    obs.step_index = step;
    obs.time = time;
    obs.fov = cfg.fov;
    const auto& grid = scene.grid;
    const double res = grid.resolution();
    const int n = static_cast<int>(std::ceil(cfg.local_grid_half_width / res - 1e-9));
    obs.local_grid_half_cells = n;
    obs.local_grid.reserve(static_cast<std::size_t>(2 * n + 1) * static_cast<std::size_t>(2 * n + 1));
    for (int b = -n; b <= n; ++b) {
        for (int a = -n; a <= n; ++a) obs.local_grid.push_back(grid.class_at(to_world(pose, Vec2{a * res, b * res})));
    }
    for (const auto& o : scene.objects) {
        if (!object_visible(grid, pose, o, cfg.fov)) continue;
        const Vec2 d = o.position - pose.position();
        obs.visible.push_back({o.id, o.category, d.norm(), wrap_angle(heading_of(d) - pose.theta)});
    }
    if (ep.person_script) {
        const auto& script = *ep.person_script;
        auto add = [&](const std::string& id, const std::string& label, const Pose2D& p) {
            if (!point_visible(grid, pose, p.position(), cfg.fov)) return;
            const Vec2 d = p.position() - pose.position();
            obs.people.push_back({id, label, d.norm(), wrap_angle(heading_of(d) - pose.theta)});
        };
        if (!script.target_absent && !script.target.empty()) add("target", script.target_descriptor, pose_at(script.target, time));
        for (std::size_t k = 0; k < script.distractors.size(); ++k) {
            const auto& d = script.distractors[k];
            if (!d.trajectory.empty()) add("distractor_" + std::to_string(k), d.descriptor, pose_at(d.trajectory, time));
        }
    }
    return obs;
}

// -------------------------------------------------------------- bookkeeping

namespace {

/// Per-step flags and terminal rules shared by closed-loop rollouts and
/// pose replays.
class StepJudge {
public:
    StepJudge(const Scene& scene, const Episode& ep, const SimConfig& cfg)
        : scene_(scene), ep_(ep), cfg_(cfg), goal_(resolve_goal(scene, ep)) {
        radius_ = cfg.success_radius.value_or(ep.success_radius);
        follow_ = ep.person_script.has_value() && ep.kind() == TaskKind::PersonFollow;
        if (goal_ && scene.grid.contains(goal_->point)) metric_ = std::make_unique<GoalDistance>(scene, goal_->point);
        if (cfg.max_steps > 0) {
            max_steps_ = cfg.max_steps;
        } else if (ep.max_steps > 0) {
            max_steps_ = ep.max_steps;
        } else if (follow_) {
            max_steps_ = static_cast<int>(std::llround(ep.person_script->duration() / cfg.dt));
        } else {
            max_steps_ = default_step_budget(ep.gt_path.length());
        }
        max_steps_ = std::max(1, max_steps_);
    }

    int max_steps() const { return max_steps_; }
    double radius() const { return radius_; }
    const std::optional<ResolvedGoal>& goal() const { return goal_; }
    bool follow() const { return follow_; }

    std::optional<ResolvedGoal> goal_at(double t) const {
        if (!follow_) return goal_;
        const auto& script = *ep_.person_script;
        if (script.target_absent || script.target.empty()) return std::nullopt;
        const double d = std::get<PersonFollowGoal>(ep_.goal).desired_distance;
        return follow_goal(scene_, pose_at(script.target, t), d);
    }

    bool static_collision(Vec2 p) const {
        const auto& grid = scene_.grid;
        return !grid.contains(p) || !is_traversable(grid.at(grid.world_to_grid(p)));
    }

    bool actor_collision(Vec2 p, double t) const {
        if (!ep_.person_script) return false;
        for (const auto& a : advance_actors(*ep_.person_script, t)) {
            if (distance(a.position(), p) < cfg_.robot_radius + cfg_.actor_radius) return true;
        }
        return false;
    }

    TraceStep make_step(int index, double time, const Pose2D& pose, const VelocityCommand& v, bool collided,
                        int active_plan) const {
        TraceStep s;
        s.index = index;
        s.time = time;
        s.pose = pose;
        s.velocity = v;
        s.collided = collided;
        s.active_plan = active_plan;
        s.compliant = is_social(scene_.grid.class_at(pose.position()));
        if (follow_) {
            const auto& script = *ep_.person_script;
            if (script.target_absent || script.target.empty()) {
                s.target_in_view = false;
            } else {
                const Pose2D target = pose_at(script.target, time);
                s.target_in_view = point_visible(scene_.grid, pose, target.position(), cfg_.fov);
                s.target_gap = distance(target.position(), pose.position());
            }
        } else if (metric_) {
            s.goal_distance = (*metric_)(pose.position());
        }
        return s;
    }

    bool success(const TraceStep& s) const {
        if (follow_ || !goal_ || !s.goal_distance || !(*s.goal_distance <= radius_)) return false;
        if (const auto* g = std::get_if<ObjectGoal>(&ep_.goal)) {
            bool seen = false;
            for (const auto& o : scene_.objects) {
                if (label_equals(o.category, g->category) && g->admits(o) && object_visible(scene_.grid, s.pose, o, cfg_.fov)) {
                    seen = true;
                    break;
                }
            }
            if (!seen) return false;
        }
        if (std::holds_alternative<InstructionGoal>(ep_.goal) && goal_->heading) {
            if (std::abs(wrap_angle(s.pose.theta - *goal_->heading)) > kInstructionHeadingTolerance) return false;
        }
        return true;
    }

    /// Terminal status after recording step `s`, if the episode ends there.
    std::optional<TerminalStatus> terminal(const TraceStep& s) {
        if (success(s)) return TerminalStatus::Success;
        if (s.collided && cfg_.terminate_on_collision) return TerminalStatus::Collision;
        if (follow_ && !ep_.person_script->target_absent) {
            const bool lost = !s.target_in_view.value_or(false) && s.target_gap.value_or(kInf) > cfg_.lost_track_gap;
            unseen_ = lost ? unseen_ + 1 : 0;
            if (unseen_ >= cfg_.lost_track_steps) return TerminalStatus::LostTrack;
        }
        if (s.index >= max_steps_) return TerminalStatus::Timeout;
        return std::nullopt;
    }

    /// Expert continuation from `frame`: the 5 ground-truth poses after the
    /// one nearest to the frame position.
    std::optional<WaypointPlan> reference(const Pose2D& frame) const {
        if (ep_.gt_plans.empty()) return std::nullopt;
        if (gt_world_.empty()) gt_world_ = chain_plans(ep_.gt_plans, ep_.start);
        std::size_t nearest = 0;
        double best = distance(ep_.start.position(), frame.position());
        bool from_start = true;
        for (std::size_t k = 0; k < gt_world_.size(); ++k) {
            const double d = distance(gt_world_[k].position(), frame.position());
            if (d < best) {
                best = d;
                nearest = k;
                from_start = false;
            }
        }
        std::vector<Pose2D> next;
        for (std::size_t k = from_start ? 0 : nearest + 1; k < gt_world_.size() && next.size() < kPlanLength; ++k) {
            next.push_back(gt_world_[k]);
        }
        if (next.empty()) next.push_back(gt_world_.back());
        return local_chunk(next, frame);
    }

private:
    const Scene& scene_;
    const Episode& ep_;
    const SimConfig& cfg_;
    std::optional<ResolvedGoal> goal_;
    std::unique_ptr<GoalDistance> metric_;
    double radius_ = 0.5;
    bool follow_ = false;
    int max_steps_ = 1;
    int unseen_ = 0;
    mutable std::vector<Pose2D> gt_world_;
};

EpisodeTrace trace_header(const Scene& scene, const Episode& ep, const SimConfig& cfg, const std::string& policy,
                          std::uint64_t seed, const StepJudge& judge) {
    EpisodeTrace t;
    t.episode_id = ep.episode_id;
    t.scene_id = scene.id;
    t.policy = policy;
    t.task = ep.kind();
    t.seed = seed;
    t.dt = cfg.dt;
    t.success_radius = judge.radius();
    if (judge.goal()) t.goal_point = judge.goal()->point;
    return t;
}

}  // namespace

EpisodeTrace run_episode(const Scene& scene, const Episode& ep, Policy& policy, const SimConfig& cfg, std::uint64_t seed,
                         const RunOptions& opts) {
    cfg.validate();
    if (!scene.grid.contains(ep.start.position())) throw Error(ErrorCode::OutOfBounds, "episode start outside the grid");
    StepJudge judge(scene, ep, cfg);
    EpisodeTrace trace = trace_header(scene, ep, cfg, policy.name(), seed, judge);
    policy.reset(seed);

    Pose2D pose = ep.start;
    trace.steps.push_back(judge.make_step(0, 0.0, pose, {}, false, -1));
    if (auto st = judge.terminal(trace.steps.back())) {
        trace.status = *st;
        return trace;
    }
    WaypointPlan active = identity_plan();
    Pose2D frame = pose;
    int plan_id = -1;
    for (int k = 1;; ++k) {
        const double t_prev = (k - 1) * cfg.dt;
        if ((k - 1) % cfg.replan_every == 0) {
            const Observation obs = build_observation(scene, ep, pose, k - 1, t_prev, cfg);
            if (opts.buffer) {
                MemoryEntry e{k - 1, t_prev, pose, {}, {}};
                for (const auto& v : obs.visible) e.visible.push_back(v.id);
                for (const auto& p : obs.people) e.people.push_back(p.id);
                opts.buffer->push(std::move(e));
            }
            PolicyContext ctx{&scene, &ep, judge.goal_at(t_prev), opts.memory, opts.buffer};
            try {
                active = policy.plan(obs, ctx);
            } catch (const PolicyError&) {
                throw;
            } catch (const std::exception& e) {
                throw PolicyError(k - 1, e.what());
            }
            if (!plan_is_finite(active)) throw PolicyError(k - 1, "policy returned a non-finite plan");
            frame = pose;
            PlanRecord rec;
            rec.id = ++plan_id;
            rec.step = k - 1;
            rec.frame = frame;
            rec.plan = active;
            rec.reference = judge.reference(frame);
            if (cfg.score_plans && ctx.goal && rec.reference) {
                try {
                    rec.reward = total_reward(active, *rec.reference, frame, ctx.goal->point, scene, cfg.weights);
                } catch (const Error& e) {
                    if (e.code() != ErrorCode::Unreachable) throw;
                    // endpoint off the traversable set: plan stays unscored
                }
            }
            trace.plans.push_back(std::move(rec));
        }
        const VelocityCommand cmd = waypoint_controller(to_local(frame, pose), active, cfg);
        Pose2D next = integrate(pose, cmd, cfg.dt);
        const double t = k * cfg.dt;
        const bool collided = judge.static_collision(next.position()) || judge.actor_collision(next.position(), t);
        if (collided && !cfg.terminate_on_collision) {
            // Slide along whichever world axis stays free, else stay put.
            const Vec2 from = pose.position();
            const Vec2 slide_x{next.x, from.y};
            const Vec2 slide_y{from.x, next.y};
            const bool ok_x = !judge.static_collision(slide_x) && !judge.actor_collision(slide_x, t);
            const bool ok_y = !judge.static_collision(slide_y) && !judge.actor_collision(slide_y, t);
            Vec2 keep = from;
            if (ok_x && (!ok_y || std::abs(next.x - from.x) >= std::abs(next.y - from.y))) {
                keep = slide_x;
            } else if (ok_y) {
                keep = slide_y;
            }
            next = Pose2D(keep, next.theta);
        }
        pose = next;
        trace.steps.push_back(judge.make_step(k, t, pose, cmd, collided, plan_id));
        if (auto st = judge.terminal(trace.steps.back())) {
            trace.status = *st;
            break;
        }
    }
    return trace;
}

EpisodeTrace replay_plans(const Scene& scene, const Episode& episode, const SimConfig& cfg) {
    ReplayPolicy policy(episode);
    return run_episode(scene, episode, policy, cfg, 0);
}

EpisodeTrace trace_from_poses(const Scene& scene, const Episode& ep, const std::vector<TimedPose>& poses,
                              const SimConfig& cfg, const std::string& label) {
    cfg.validate();
    if (poses.empty()) throw Error(ErrorCode::EmptyPath, "no poses to replay");
    StepJudge judge(scene, ep, cfg);
    EpisodeTrace trace = trace_header(scene, ep, cfg, label, 0, judge);
    trace.dt = poses.size() > 1 ? poses[1].t - poses[0].t : cfg.dt;
    for (std::size_t k = 0; k < poses.size(); ++k) {
        VelocityCommand v;
        if (k > 0) {
            const double h = poses[k].t - poses[k - 1].t;
            if (!(h > 0.0)) throw Error(ErrorCode::InvalidParams, "pose timestamps must increase");
            const Vec2 d = to_local(poses[k - 1].pose, poses[k].pose.position());
            v = {d.x / h, d.y / h, wrap_angle(poses[k].pose.theta - poses[k - 1].pose.theta) / h};
        }
        const Vec2 p = poses[k].pose.position();
        const bool collided = k > 0 && (judge.static_collision(p) || judge.actor_collision(p, poses[k].t));
        trace.steps.push_back(judge.make_step(static_cast<int>(k), poses[k].t, poses[k].pose, v, collided, -1));
        if (auto st = judge.terminal(trace.steps.back())) {
            trace.status = *st;
            return trace;
        }
    }
    trace.status = TerminalStatus::Timeout;
    return trace;
}

}  // namespace navkit
