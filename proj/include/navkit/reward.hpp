#pragma once

#include <span>
#include <vector>

#include "navkit/geometry.hpp"
#include "navkit/planner.hpp"
#include "navkit/scene.hpp"

namespace navkit {

struct RewardWeights {
    double w_soc = 2.0;
    double w_exp = 1.0;
    double w_sm = 0.5;
    double w_eff = 1.0;

    /// Throws InvalidParams on negative weights or all-zero weights.
    void validate() const;
    friend bool operator==(const RewardWeights&, const RewardWeights&) = default;
};

struct RewardBreakdown {
    double r_social = 0.0;
    double r_expert = 0.0;
    double r_smooth = 0.0;
    double r_eff = 0.0;
    double total = 0.0;
    friend bool operator==(const RewardBreakdown&, const RewardBreakdown&) = default;
};

inline constexpr double kSocialSpacing = 0.1;
inline constexpr double kSmoothThetaMax = kPi / 2.0;

/// World polyline of a plan: the frame origin followed by the 5 waypoints.
std::vector<Vec2> plan_to_world(const WaypointPlan& plan, const Pose2D& frame);

/// Midpoints of ceil(L / 0.1) equal arc intervals along the polyline (the
/// single point itself for a zero-length polyline).
std::vector<Vec2> social_samples(std::span<const Vec2> polyline);

/// 1 - 2v over the social samples; -1 when any sample is on a
/// non-traversable cell or outside the grid.
double r_social(std::span<const Vec2> plan_world, const OccupancyGrid& grid);
double r_expert(const WaypointPlan& plan, const WaypointPlan& gt_plan, double scale = 1.0);
double r_smooth(const WaypointPlan& plan);
/// Geodesic progress toward `goal` per metre of plan arc (0 for a zero-length plan).
double r_eff(std::span<const Vec2> plan_world, Vec2 goal, const Scene& scene);
/// Same, with geodesics read from a field rooted at the goal's cell.
double r_eff(std::span<const Vec2> plan_world, Vec2 goal, const DistanceField& goal_field);

RewardBreakdown total_reward(const WaypointPlan& plan, const WaypointPlan& gt_plan, const Pose2D& frame, Vec2 goal,
                             const Scene& scene, const RewardWeights& weights, double expert_scale = 1.0);
RewardBreakdown combine(const RewardBreakdown& parts, const RewardWeights& weights);

/// (r - mean) / (population std + 1e-8). Throws GroupTooSmall below 2 entries.
std::vector<double> group_advantages(std::span<const double> rewards);

}  // namespace navkit
