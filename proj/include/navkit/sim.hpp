#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "navkit/episode.hpp"
#include "navkit/planner.hpp"
#include "navkit/reward.hpp"
#include "navkit/scene.hpp"

namespace navkit {

class TopoStore;
class EpisodicBuffer;

struct SimConfig {
    double dt = 0.1;
    double max_speed = 1.5;
    double max_yaw_rate = 1.5;
    int replan_every = 5;
    std::optional<double> success_radius;  // episode value when unset
    int max_steps = 0;                     // episode value when 0
    bool terminate_on_collision = false;
    double lookahead = 0.3;
    double stop_tolerance = 0.1;
    double heading_gain = 2.0;
    double robot_radius = 0.25;
    double actor_radius = 0.3;
    double local_grid_half_width = 8.0;
    FovConfig fov{};
    int lost_track_steps = 50;
    double lost_track_gap = 3.0;
    bool score_plans = false;
    RewardWeights weights{};

    void validate() const;
};

struct VelocityCommand {
    double vx = 0.0;
    double vy = 0.0;
    double vyaw = 0.0;
    friend bool operator==(const VelocityCommand&, const VelocityCommand&) = default;
};

/// Pure pursuit on the plan polyline (frame origin then the 5 waypoints):
/// the carrot sits one lookahead past the robot's projection, and the
/// heading reference is the carrot segment's waypoint theta blended with the
/// bearing. Near the final waypoint it slows, then turns in place to the
/// final theta. `state` is expressed in the plan's frame. Returns body-frame
/// velocities clamped to the limits.
VelocityCommand waypoint_controller(const Pose2D& state, const WaypointPlan& plan, const SimConfig& cfg);

/// Holonomic step: body velocities rotated by the current heading.
Pose2D integrate(const Pose2D& pose, const VelocityCommand& cmd, double dt);

struct SeenEntity {
    std::string id;
    std::string label;  // category for objects, descriptor for people
    double range = 0.0;
    double bearing = 0.0;  // relative to the agent heading
};

struct Observation {
    Pose2D pose;
    GoalSpec goal;
    Pose2D episode_start;
    /// Egocentric semantic crop, row-major, (2n+1)^2 cells with the agent at
    /// the centre facing +x; n = ceil(half_width / resolution).
    std::vector<SemanticClass> local_grid;
    int local_grid_half_cells = 0;
    std::vector<SeenEntity> visible;
    std::vector<SeenEntity> people;
    int step_index = 0;
    double time = 0.0;
    FovConfig fov{};
};

/// Goal location the simulator resolves from the episode (omniscient).
struct ResolvedGoal {
    Vec2 point;
    std::optional<double> heading;
};

struct PolicyContext {
    const Scene* scene = nullptr;
    const Episode* episode = nullptr;
    std::optional<ResolvedGoal> goal;
    const TopoStore* memory = nullptr;
    const EpisodicBuffer* buffer = nullptr;
};

class Policy {
public:
    virtual ~Policy() = default;
    virtual std::string name() const = 0;
    /// Called once per episode before the first query.
    virtual void reset(std::uint64_t seed) { (void)seed; }
    virtual WaypointPlan plan(const Observation& obs, const PolicyContext& ctx) = 0;
};

/// Replans a grid path to the resolved goal on every query and returns its
/// first 5-waypoint chunk. With no resolvable goal it turns in place.
class AStarOracle : public Policy {
public:
    explicit AStarOracle(double step = 0.5) : step_(step) {}
    std::string name() const override { return "oracle"; }
    void reset(std::uint64_t seed) override;
    WaypointPlan plan(const Observation& obs, const PolicyContext& ctx) override;

private:
    const DistanceField& field_for(const Scene& scene, Cell goal, int which);

    double step_;
    std::optional<Cell> cached_goal_;
    const Scene* cached_scene_ = nullptr;
    std::unique_ptr<DistanceField> fields_[3];  // clearance 1, clearance 0, physical
};

class NoisyOracle : public Policy {
public:
    explicit NoisyOracle(double sigma) : sigma_(sigma), rng_(0) {}
    std::string name() const override;
    void reset(std::uint64_t seed) override;
    WaypointPlan plan(const Observation& obs, const PolicyContext& ctx) override;

private:
    double sigma_;
    AStarOracle inner_;
    Rng rng_;
};

/// Heads straight at the goal regardless of terrain semantics.
class GreedyPolicy : public Policy {
public:
    std::string name() const override { return "greedy"; }
    WaypointPlan plan(const Observation& obs, const PolicyContext& ctx) override;
};

class StationaryPolicy : public Policy {
public:
    std::string name() const override { return "stationary"; }
    WaypointPlan plan(const Observation&, const PolicyContext&) override { return identity_plan(); }
};

/// Feeds an episode's gt_plans open loop. The plans are chained from the
/// start pose into fixed world poses; each query snaps a monotone cursor to
/// the nearest pose in a short window ahead (position plus weighted heading
/// error) and hands out the 5 poses after it.
class ReplayPolicy : public Policy {
public:
    explicit ReplayPolicy(const Episode& episode, double heading_weight = 0.25, std::size_t window = 6);
    std::string name() const override { return "replay"; }
    void reset(std::uint64_t seed) override;
    WaypointPlan plan(const Observation& obs, const PolicyContext& ctx) override;

private:
    std::vector<Pose2D> poses_;  // start pose first
    std::size_t cursor_ = 0;
    double heading_weight_;
    std::size_t window_;
};

/// "oracle", "noisy:<sigma>", "greedy" or "stationary".
std::unique_ptr<Policy> make_policy(const std::string& spec);

enum class TerminalStatus : std::uint8_t { Success, Timeout, Collision, LostTrack };

const char* status_name(TerminalStatus s);
TerminalStatus status_from_name(const std::string& s);

struct TraceStep {
    int index = 0;
    double time = 0.0;
    Pose2D pose;
    VelocityCommand velocity;  // command applied over the preceding interval
    bool compliant = true;
    bool collided = false;
    std::optional<bool> target_in_view;
    std::optional<double> target_gap;
    int active_plan = -1;
    /// Geodesic distance to the resolved goal; absent when there is none.
    std::optional<double> goal_distance;
    friend bool operator==(const TraceStep&, const TraceStep&) = default;
};

struct PlanRecord {
    int id = 0;
    int step = 0;
    Pose2D frame;
    WaypointPlan plan{};
    std::optional<WaypointPlan> reference;
    std::optional<RewardBreakdown> reward;
    friend bool operator==(const PlanRecord&, const PlanRecord&) = default;
};

struct EpisodeTrace {
    std::string episode_id;
    std::string scene_id;
    std::string policy;
    TaskKind task = TaskKind::PointGoal;
    std::uint64_t seed = 0;
    double dt = 0.1;
    double success_radius = 0.5;
    std::vector<TraceStep> steps;
    std::vector<PlanRecord> plans;
    TerminalStatus status = TerminalStatus::Timeout;
    std::optional<Vec2> goal_point;

    double path_length() const;
    int collision_steps() const;
    friend bool operator==(const EpisodeTrace&, const EpisodeTrace&) = default;
};

/// Static goal resolution at episode start (PersonFollow is dynamic and
/// resolved per step; see follow_goal).
std::optional<ResolvedGoal> resolve_goal(const Scene& scene, const Episode& episode);
/// Point desired_distance behind the target along its heading, pulled back
/// toward the target until it lands on a passable cell.
ResolvedGoal follow_goal(const Scene& scene, const Pose2D& target, double desired_distance);

/// Geodesic metric used for success and navigation error: planning
/// traversal when reachable, physical traversal otherwise. Within 3 m a
/// passable straight segment replaces the cell-centre estimate.
class GoalDistance {
public:
    GoalDistance(const Scene& scene, Vec2 goal);
    double operator()(Vec2 p) const;
    Vec2 goal() const { return goal_; }

private:
    const Scene* scene_;
    Vec2 goal_;
    DistanceField planning_;
    std::unique_ptr<DistanceField> physical_;
};

struct RunOptions {
    const TopoStore* memory = nullptr;
    EpisodicBuffer* buffer = nullptr;
};

/// Closed-loop rollout. Throws PolicyError (with the step index) when the
/// policy fails or returns a non-finite plan.
EpisodeTrace run_episode(const Scene& scene, const Episode& episode, Policy& policy, const SimConfig& cfg,
                         std::uint64_t seed, const RunOptions& opts = {});

/// Open-loop replay of the episode's gt_plans through the controller.
EpisodeTrace replay_plans(const Scene& scene, const Episode& episode, const SimConfig& cfg);

/// Trace that visits the given timed poses exactly (no controller), with
/// the same per-step bookkeeping as run_episode.
EpisodeTrace trace_from_poses(const Scene& scene, const Episode& episode, const std::vector<TimedPose>& poses,
                              const SimConfig& cfg, const std::string& label = "gt");

/// Actor poses at time t: target first (if present) then distractors.
std::vector<Pose2D> advance_actors(const PersonScript& script, double t);

Observation build_observation(const Scene& scene, const Episode& episode, const Pose2D& pose, int step, double time,
                              const SimConfig& cfg);

}  // namespace navkit
