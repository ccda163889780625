#include "navkit/reward.hpp"

#include <algorithm>
#include <cmath>

#include "navkit/error.hpp"

namespace navkit {

void RewardWeights::validate() const {
    for (double w : {w_soc, w_exp, w_sm, w_eff}) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw Error(ErrorCode::InvalidParams, "reward weights must be nonnegative");
    }
    if (w_soc + w_exp + w_sm + w_eff <= 0.0) throw Error(ErrorCode::InvalidParams, "at least one reward weight must be positive");
}

std::vector<Vec2> plan_to_world(const WaypointPlan& plan, const Pose2D& frame) {
    std::vector<Vec2> out{frame.position()};
    for (const auto& w : plan) out.push_back(to_world(frame, w.position()));
    return out;
}

std::vector<Vec2> social_samples(std::span<const Vec2> polyline) {
    std::vector<Vec2> out;
    if (polyline.empty()) return out;
    const double total = polyline_length(polyline);
    if (total <= 0.0) {
        out.push_back(polyline.front());
        return out;
    }
    const auto n = static_cast<long>(std::ceil(total / kSocialSpacing - 1e-9));
    const double width = total / static_cast<double>(n);
    std::size_t seg = 1;
    double seg_start = 0.0;
    for (long k = 0; k < n; ++k) {
        const double s = (static_cast<double>(k) + 0.5) * width;
        while (seg + 1 < polyline.size() && seg_start + distance(polyline[seg - 1], polyline[seg]) < s) {
            seg_start += distance(polyline[seg - 1], polyline[seg]);
            ++seg;
        }
        const double len = distance(polyline[seg - 1], polyline[seg]);
        const double f = len > 0.0 ? std::clamp((s - seg_start) / len, 0.0, 1.0) : 0.0;
        out.push_back(polyline[seg - 1] + (polyline[seg] - polyline[seg - 1]) * f);
    }
    return out;
}

double r_social(std::span<const Vec2> plan_world, const OccupancyGrid& grid) {
    const auto samples = social_samples(plan_world);
    if (samples.empty()) return 1.0;
    std::size_t bad = 0;
    for (const auto& p : samples) {
        const auto c = grid.class_at(p);
        if (!is_traversable(c)) return -1.0;
        if (!is_social(c)) ++bad;
    }
    const double v = static_cast<double>(bad) / static_cast<double>(samples.size());
    return std::clamp(1.0 - 2.0 * v, -1.0, 1.0);
}

double r_expert(const WaypointPlan& plan, const WaypointPlan& gt_plan, double scale) {
    if (!(scale > 0.0)) throw Error(ErrorCode::InvalidParams, "expert scale must be positive");
    double sum = 0.0;
    for (std::size_t k = 0; k < kPlanLength; ++k) sum += distance(plan[k].position(), gt_plan[k].position());
    return std::exp(-(sum / static_cast<double>(kPlanLength)) / scale);
}

double r_smooth(const WaypointPlan& plan) {
    double sum = 0.0;
    for (std::size_t k = 1; k < kPlanLength; ++k) sum += std::abs(wrap_angle(plan[k].theta - plan[k - 1].theta));
    const double mean = sum / static_cast<double>(kPlanLength - 1);
    return 1.0 - std::clamp(mean / kSmoothThetaMax, 0.0, 1.0);
}

double r_eff(std::span<const Vec2> plan_world, Vec2 goal, const Scene& scene) {
    const double arc = polyline_length(plan_world);
    if (plan_world.empty() || arc <= 0.0) return 0.0;
    const double before = geodesic_distance(scene, plan_world.front(), goal, false);
    const double after = geodesic_distance(scene, plan_world.back(), goal, false);
    return (before - after) / arc;
}

double r_eff(std::span<const Vec2> plan_world, Vec2 goal, const DistanceField& goal_field) {
    const double arc = polyline_length(plan_world);
    if (plan_world.empty() || arc <= 0.0) return 0.0;
    const double before = goal_field.geodesic(goal, plan_world.front());
    const double after = goal_field.geodesic(goal, plan_world.back());
    if (!std::isfinite(before) || !std::isfinite(after)) throw Error(ErrorCode::Unreachable, "plan endpoint cannot reach the goal");
    return (before - after) / arc;
}

RewardBreakdown combine(const RewardBreakdown& parts, const RewardWeights& w) {
    RewardBreakdown out = parts;
    out.total = w.w_soc * parts.r_social + w.w_exp * parts.r_expert + w.w_sm * parts.r_smooth + w.w_eff * parts.r_eff;
    return out;
}

RewardBreakdown total_reward(const WaypointPlan& plan, const WaypointPlan& gt_plan, const Pose2D& frame, Vec2 goal,
                             const Scene& scene, const RewardWeights& weights, double expert_scale) {
    weights.validate();
    const auto world = plan_to_world(plan, frame);
    RewardBreakdown parts;
    parts.r_social = r_social(world, scene.grid);
    parts.r_expert = r_expert(plan, gt_plan, expert_scale);
    parts.r_smooth = r_smooth(plan);
    parts.r_eff = r_eff(world, goal, scene);
    return combine(parts, weights);
}

std::vector<double> group_advantages(std::span<const double> rewards) {
    if (rewards.size() < 2) throw Error(ErrorCode::GroupTooSmall, "group needs at least 2 rewards");
    const double n = static_cast<double>(rewards.size());
    // Shifted by the first entry so identical rewards give an exact zero mean deviation.
    const double base = rewards.front();
    double shifted = 0.0;
    for (double r : rewards) shifted += r - base;
    const double mean = base + shifted / n;
    double var = 0.0;
    for (double r : rewards) var += (r - mean) * (r - mean);
    const double denom = std::sqrt(var / n) + 1e-8;
    std::vector<double> out;
    out.reserve(rewards.size());
    for (double r : rewards) out.push_back((r - mean) / denom);
    return out;
}

}  // namespace navkit
