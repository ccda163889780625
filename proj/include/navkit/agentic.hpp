#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "navkit/episode.hpp"
#include "navkit/json_io.hpp"
#include "navkit/memory.hpp"
#include "navkit/scene.hpp"
#include "navkit/sim.hpp"

namespace navkit {

enum class Verb : std::uint8_t { Goto, Find, Follow, Through, Primitive };

const char* verb_name(Verb v);

struct Clause {
    Verb verb = Verb::Goto;
    /// Target label, category, POI name or descriptor; "door" for Through.
    std::string target;
    std::optional<Primitive> primitive;  // Primitive clauses only
    std::size_t offset = 0;              // byte offset of the clause's first token

    friend bool operator==(const Clause&, const Clause&) = default;
};

struct IntentAst {
    std::vector<Clause> clauses;
    friend bool operator==(const IntentAst&, const IntentAst&) = default;
};

/// Recursive descent over the command grammar:
///
///   instruction := clause (("then" | "and") clause)* ;
///   clause      := "go to" target | "find" article? target | "follow" descriptor
///                | "go through" "the"? "door" | primitive ;
///   primitive   := ("turn left" | "turn right") number "degrees" | "turn around"
///                | ("move forward" | "move backward") number ("meter" | "meters") ;
///   target      := word+ ;  article := "a" | "an" | "the" ;
///
/// Matching is case-insensitive. A leading article is dropped from targets
/// and descriptors. Throws ParseError with the byte offset of the offending
/// token and the set of tokens that would have been accepted there.
IntentAst parse_instruction(const std::string& text);
std::string render_clause(const Clause& c);

enum class SubTaskRole : std::uint8_t { Approach, Reach, Interact };

const char* role_name(SubTaskRole r);

struct SubTask {
    TaskKind kind = TaskKind::PointGoal;
    SubTaskRole role = SubTaskRole::Reach;
    /// PointGoal targets and Instruction implied targets are held in the
    /// world frame here; make_subtask_episode re-expresses them relative to
    /// the pose the subtask starts from.
    GoalSpec goal = PointGoal{};
    int budget = 0;
    int origin_clause = 0;
    /// Memory node that motivated the leg, if any.
    std::optional<std::string> hypothesis;
    bool exploratory = false;

    friend bool operator==(const SubTask&, const SubTask&) = default;
};

std::string describe_subtask(const SubTask& s);

enum class FeedbackCode : std::uint8_t { Ok, NotFound, Timeout, Collision, WrongRoom, LostTrack };

const char* feedback_name(FeedbackCode c);

struct Feedback {
    FeedbackCode code = FeedbackCode::Ok;
    std::string message;
    std::optional<std::string> suspect;
    friend bool operator==(const Feedback&, const Feedback&) = default;
};

struct ReflectionResult {
    bool r = true;
    Feedback f;
    friend bool operator==(const ReflectionResult&, const ReflectionResult&) = default;
};

/// Labels searched, in order, when a category has no instance in memory.
const std::vector<std::string>& affinity_labels(const std::string& category);

/// Steps granted to a search leg whose region holds no known instance
/// (about one full turn in place).
inline constexpr int kSearchSweepSteps = 60;
/// Search radius around an object-like hypothesis anchor.
inline constexpr double kHypothesisRadius = 2.0;
inline constexpr int kMinLegSteps = 40;

struct PlanOptions {
    /// Total step budget shared by the emitted subtasks in proportion to
    /// their estimated legs; 0 gives each leg its own default budget.
    int global_budget = 0;
    /// Memory nodes never used as hypotheses.
    std::set<std::string> excluded;
};

/// Decomposes the intent into subtasks starting from `pose`. Clause order
/// is preserved; memory-resolved targets get an Approach PointGoal followed
/// by the precise Reach task, unless the preceding subtask already is that
/// PointGoal.
std::vector<SubTask> plan(const IntentAst& intent, const TopoStore& memory, const Pose2D& pose, const Scene& scene,
                          const PlanOptions& opts = {});
/// Subtasks for a single clause (see plan).
std::vector<SubTask> plan_clause(const IntentAst& intent, std::size_t clause, const TopoStore& memory,
                                 const Pose2D& pose, const Scene& scene, const PlanOptions& opts = {});

/// Episode that runs `task` from `start`.
Episode make_subtask_episode(const Scene& scene, const SubTask& task, const Pose2D& start, const std::string& id,
                             const std::optional<PersonScript>& script = std::nullopt);

/// Rule-based completion check of a terminal subtask trace.
ReflectionResult reflect(const EpisodeTrace& trace, const SubTask& task, const TopoStore& memory, const Scene& scene,
                         const SimConfig& cfg = {});

/// New subtasks for the failed clause. The feedback's suspect joins
/// `opts.excluded`. Returns an empty plan when attempts_left is 0.
std::vector<SubTask> replan(const IntentAst& intent, std::size_t clause, const TopoStore& memory, const Feedback& feedback,
                            int attempts_left, const Pose2D& pose, const Scene& scene, PlanOptions& opts);

struct MissionConfig {
    SimConfig sim{};
    int max_retries = 2;
    int global_budget = 0;
    /// Script of the person FOLLOW clauses track; without one they fail with LostTrack.
    std::optional<PersonScript> person_script;
};

struct SubTaskRun {
    SubTask task;
    int attempt = 0;  // 0 for the first plan of the clause
    std::string status;
    ReflectionResult reflection;
    int steps = 0;
    double path_length = 0.0;
    int collision_steps = 0;
    Pose2D start;
    Pose2D end;
};

struct MissionReport {
    std::string instruction;
    std::string scene_id;
    std::string policy;
    std::uint64_t seed = 0;
    IntentAst intent;
    std::vector<SubTask> initial_plan;
    std::vector<SubTaskRun> runs;
    std::vector<Feedback> feedback_chain;  // failures only, in order
    std::map<int, int> retries;            // clause -> retries used
    std::vector<Evidence> evidence;
    bool success = false;
    std::string failure;
    std::vector<EpisodeTrace> traces;  // one per run

    int total_steps() const;
    double total_path_length() const;
};

/// parse, plan, then per subtask: run, reflect, and replan the clause on
/// failure up to max_retries times. Traversed road edges are fed to memory
/// as TraversedOk evidence. Only ParseError escapes.
MissionReport run_mission(const Scene& scene, const std::string& instruction, Policy& policy, TopoStore& memory,
                          const MissionConfig& cfg, std::uint64_t seed, const Pose2D& start);

Json subtask_to_json(const SubTask& s);
Json mission_to_json(const MissionReport& report);

}  // namespace navkit
