#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "navkit/json_io.hpp"
#include "navkit/scene.hpp"
#include "navkit/sim.hpp"

namespace navkit {

/// (1/N) sum S_i l_i / max(p_i, l_i); a success with p = l = 0 scores 1.
/// Throws LengthMismatch or InvalidParams (negative lengths). Empty input gives 0.
double spl(std::span<const bool> successes, std::span<const double> geodesics, std::span<const double> path_lengths);

struct NavScores {
    double sr = 0.0;
    double rc = 0.0;
    double ne = 0.0;
    double os = 0.0;
    std::size_t count = 0;
};

/// Threshold-based scores from the traces' per-step goal distances.
/// Traces without a goal distance count as failures and are left out of NE.
NavScores sr_rc_ne_os(std::span<const EpisodeTrace> traces, double threshold);

/// Worst bearing error of one plan pair in radians; throws DegeneratePlan
/// when no waypoint index has nonzero displacement in both plans.
double maoe_sample(const WaypointPlan& pred, const WaypointPlan& gt);
/// Mean of maoe_sample over pairs, in degrees. Throws LengthMismatch.
double maoe(std::span<const WaypointPlan> pred, std::span<const WaypointPlan> gt);

struct Compliance {
    double dcr = 1.0;
    double tcr = 1.0;
};

/// Length of the segment a-b lying in socially compliant cells, integrated
/// exactly over grid cell crossings.
double compliant_length(const OccupancyGrid& grid, Vec2 a, Vec2 b);
/// DCR over the pose polyline (1 for a stationary trace), TCR over step flags.
Compliance dcr_tcr(const EpisodeTrace& trace, const OccupancyGrid& grid);

struct TrackingScores {
    double tr = 0.0;
    double sr = 0.0;
    double cr = 0.0;
    std::size_t count = 0;
};

inline constexpr double kTrackMinGap = 0.5;
inline constexpr double kTrackMaxGap = 3.0;

/// Fraction of steps with the target in view at a gap within [0.5, 3] m.
double tracking_rate(const EpisodeTrace& trace);
/// Throws WrongTask on a non-follow trace.
TrackingScores tracking_metrics(std::span<const EpisodeTrace> traces);

inline const std::vector<double> kPoiThresholds = {0.1, 0.2, 0.3};

/// SR at each threshold by final Euclidean distance to the resolved
/// entrance. Traces without a goal point count as failures.
std::vector<double> poi_sr(std::span<const EpisodeTrace> traces, const std::vector<double>& thresholds = kPoiThresholds);

struct EpisodeRecord {
    std::string episode_id;
    TaskKind task = TaskKind::PointGoal;
    std::string status;
    bool success = false;
    std::optional<double> initial_distance;
    std::optional<double> final_distance;
    std::optional<double> min_distance;
    double success_radius = 0.5;
    double path_length = 0.0;
    double spl = 0.0;
    double rc = 0.0;
    double dcr = 1.0;
    double tcr = 1.0;
    bool collided = false;
    std::optional<double> tracking_rate;
    std::optional<double> final_goal_euclid;
    /// Sum and count of per-plan MAOE (degrees) over plans with a reference.
    double maoe_sum_deg = 0.0;
    int maoe_pairs = 0;
    int steps = 0;
};

/// Navigation rates cover non-follow episodes; tracking rates cover
/// follow episodes; MAOE averages over all scored plan pairs.
struct Aggregate {
    std::size_t episodes = 0;
    std::size_t nav_episodes = 0;
    double sr = 0.0;
    double spl = 0.0;
    double rc = 0.0;
    double ne = 0.0;
    double os = 0.0;
    double dcr = 0.0;
    double tcr = 0.0;
    std::size_t follow_episodes = 0;
    double tr = 0.0;
    double tracking_sr = 0.0;
    double cr = 0.0;
    std::size_t maoe_pairs = 0;
    double maoe = 0.0;
    std::size_t poi_episodes = 0;
    std::vector<double> poi_thresholds = kPoiThresholds;
    std::vector<double> poi_sr;
};

struct MetricReport {
    std::vector<EpisodeRecord> records;
    Aggregate aggregate;
};

EpisodeRecord episode_record(const EpisodeTrace& trace, const OccupancyGrid& grid);
/// Aggregates are recomputed from the records alone.
Aggregate aggregate_records(std::span<const EpisodeRecord> records, const std::vector<double>& poi_thresholds = kPoiThresholds);
MetricReport evaluate(std::span<const EpisodeTrace> traces, const OccupancyGrid& grid);

Json report_to_json(const MetricReport& report);
std::string report_to_csv(const MetricReport& report);

}  // namespace navkit
