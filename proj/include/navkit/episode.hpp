#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "navkit/planner.hpp"
#include "navkit/rng.hpp"
#include "navkit/scene.hpp"

namespace navkit {

enum class TaskKind : std::uint8_t { PointGoal, ObjectGoal, PoiGoal, Instruction, PersonFollow };

const char* task_name(TaskKind k);

/// Target in the agent-local frame at episode start.
struct PointGoal {
    Vec2 target;
    friend bool operator==(const PointGoal&, const PointGoal&) = default;
};

/// Category search. A search region restricts which instances count; the
/// planner uses it to aim a search leg at one memory hypothesis.
struct ObjectGoal {
    std::string category;
    std::optional<Vec2> search_center;  // world frame
    double search_radius = 0.0;

    bool admits(const SceneObject& obj) const;
    friend bool operator==(const ObjectGoal&, const ObjectGoal&) = default;
};

struct PoiGoal {
    std::string name;
    friend bool operator==(const PoiGoal&, const PoiGoal&) = default;
};

enum class PrimitiveKind : std::uint8_t {
    TurnLeft,
    TurnRight,
    TurnAround,
    Forward,
    Backward,
    GoThroughDoor,
    GoToRoom,
    FindObject,
    FindPerson,
};

const char* primitive_name(PrimitiveKind k);

struct Primitive {
    PrimitiveKind kind = PrimitiveKind::Forward;
    double magnitude = 0.0;  // degrees for turns, metres for translations
    int door_id = -1;
    std::string text;  // room label, category or descriptor

    friend bool operator==(const Primitive&, const Primitive&) = default;
};

struct InstructionProgram {
    std::vector<Primitive> steps;
    friend bool operator==(const InstructionProgram&, const InstructionProgram&) = default;
};

/// Throws InvalidParams when the program is empty or a magnitude is not positive.
void validate_program(const InstructionProgram& program);
std::string render_program(const InstructionProgram& program);

struct InstructionGoal {
    InstructionProgram program;
    /// Pose the program ends at, in the agent-local frame at episode start.
    std::optional<Pose2D> implied_target;
    friend bool operator==(const InstructionGoal&, const InstructionGoal&) = default;
};

struct PersonFollowGoal {
    std::string descriptor;
    double desired_distance = 1.5;
    friend bool operator==(const PersonFollowGoal&, const PersonFollowGoal&) = default;
};

using GoalSpec = std::variant<PointGoal, ObjectGoal, PoiGoal, InstructionGoal, PersonFollowGoal>;

TaskKind task_of(const GoalSpec& g);
std::string describe_goal(const GoalSpec& g);

enum class FollowCategory : std::uint8_t { STT, DT, AT };

const char* follow_category_name(FollowCategory c);

struct TimedPose {
    double t = 0.0;
    Pose2D pose;
    friend bool operator==(const TimedPose&, const TimedPose&) = default;
};

struct Distractor {
    std::string descriptor;
    std::vector<TimedPose> trajectory;
    friend bool operator==(const Distractor&, const Distractor&) = default;
};

struct PersonScript {
    std::string target_descriptor;
    std::vector<TimedPose> target;  // empty when target_absent
    std::vector<Distractor> distractors;
    /// Ground-truth follower poses on the same timeline as the target.
    std::vector<TimedPose> follower;
    FollowCategory category = FollowCategory::STT;
    bool target_absent = false;

    double duration() const;
    friend bool operator==(const PersonScript&, const PersonScript&) = default;
};

/// Linear interpolation between timestamped poses, clamped at both ends.
Pose2D pose_at(const std::vector<TimedPose>& traj, double t);

struct EpisodeTags {
    bool recovery = false;
    bool truncated = false;
    std::optional<FollowCategory> category;
    bool target_absent = false;
    friend bool operator==(const EpisodeTags&, const EpisodeTags&) = default;
};

struct Episode {
    std::string episode_id;
    std::string scene_id;
    Pose2D start;
    GoalSpec goal;
    PathPolyline gt_path;
    std::vector<WaypointPlan> gt_plans;
    double success_radius = 0.5;
    int max_steps = 0;
    EpisodeTags tags;
    std::optional<PersonScript> person_script;

    TaskKind kind() const { return task_of(goal); }
    friend bool operator==(const Episode&, const Episode&) = default;
};

/// Instruction goals also require the final heading within this tolerance.
inline constexpr double kInstructionHeadingTolerance = 0.35;

struct SynthesisConfig {
    double step = 0.5;  // waypoint spacing
    double min_geodesic = 3.0;
    double max_geodesic = 50.0;
    double success_radius = 0.5;
    double poi_success_radius = 0.3;
    double short_horizon_radius = 0.25;
    double person_speed = 1.0;
    double person_dt = 0.1;
    double target_absent_fraction = 0.1;
    int attempts_per_episode = 200;
};

/// Step budget for a path of the given length at the default controller speed.
int default_step_budget(double path_length);

/// Per-call record of what synthesis skipped and why.
struct SynthesisLog {
    std::string task;
    int requested = 0;
    int produced = 0;
    std::map<std::string, int> skipped;

    void skip(const std::string& reason) { ++skipped[reason]; }
};

/// Traversal used for expert paths in a scene.
Traversal expert_traversal(const Scene& scene);

std::vector<Episode> synth_point_goal(const Scene& scene, int n, double recovery_fraction, Rng& rng,
                                      const SynthesisConfig& cfg = {}, SynthesisLog* log = nullptr);
std::vector<Episode> synth_object_goal(const Scene& scene, int n, Rng& rng, const SynthesisConfig& cfg = {},
                                       SynthesisLog* log = nullptr);
std::vector<Episode> synth_door_traversal(const Scene& scene, int n, Rng& rng, const SynthesisConfig& cfg = {},
                                          SynthesisLog* log = nullptr);
std::vector<Episode> synth_short_horizon(const Scene& scene, int n, Rng& rng, const SynthesisConfig& cfg = {},
                                         SynthesisLog* log = nullptr);
std::vector<Episode> synth_poi_goal(const Scene& scene, int n, Rng& rng, const SynthesisConfig& cfg = {},
                                    SynthesisLog* log = nullptr);
std::vector<Episode> synth_person_follow(const Scene& scene, int n, const std::vector<double>& distances, Rng& rng,
                                         const SynthesisConfig& cfg = {}, SynthesisLog* log = nullptr);

/// Poses used for truncation: the start pose followed by the resampled poses.
std::vector<Pose2D> episode_poses(const Episode& ep, double step = 0.5);

/// Cuts an object-goal episode so it starts at the first pose from which a
/// target instance is in view.
Episode truncate_first_visibility(const Episode& ep, const Scene& scene, const FovConfig& fov, double step = 0.5);

/// Net heading change of an episode's first plan, in (-pi, pi].
double first_plan_turn(const Episode& ep);

/// Subsamples so no heading-change bin exceeds cap_ratio times the smallest
/// nonzero bin. Order of survivors is preserved.
std::vector<Episode> balance_actions(const std::vector<Episode>& episodes, int bins, double cap_ratio, Rng& rng);
int action_bin(double turn, int bins);

/// Kinematic execution of a translation/rotation program from `start`:
/// the pose after every intermediate sample (rotations in <= 45 deg slices,
/// translations every `step` metres).
std::vector<Pose2D> execute_program(const InstructionProgram& program, const Pose2D& start, double step = 0.5);

/// Descriptor tokens for person scripts: "<color> <garment> <accessory>".
struct PersonDescriptor {
    std::string color;
    std::string garment;
    std::string accessory;
    std::string render() const { return color + " " + garment + " " + accessory; }
};

PersonDescriptor parse_descriptor(const std::string& s);
/// Same color token, exactly one of the other attributes differs.
bool similar_descriptor(const std::string& a, const std::string& b);

}  // namespace navkit
