#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "navkit/geometry.hpp"
#include "navkit/scene.hpp"

namespace navkit {

inline constexpr std::size_t kPlanDim = 4 * kPlanLength;

/// 5 x (x, y, cos theta, sin theta).
using PlanVector = std::array<double, kPlanDim>;

PlanVector encode_plan(const WaypointPlan& plan);
/// Renormalises each (cos, sin) pair; throws AngleDegenerate when a pair's
/// norm falls outside [0.5, 2].
WaypointPlan decode_plan(const PlanVector& v);

/// Empirical expert mixture for one context bucket. Empty weights mean
/// uniform; otherwise weights are relative mixture masses.
struct ExpertSet {
    std::vector<PlanVector> samples;
    std::vector<double> weights;
    std::string context_key;

    void validate() const;
    double weight(std::size_t i) const { return weights.empty() ? 1.0 : weights[i]; }
};

struct FlowConfig {
    double sigma_min = 1e-2;
    int ode_steps = 100;
    double weight_temperature = 1.0;
    double t_end = 1.0 - 1e-3;

    void validate() const;
};

/// Exact marginal velocity of the mixture under the optimal-transport
/// conditional path x_t = (1 - (1 - sigma_min) t) x0 + t x1.
PlanVector cond_velocity(const PlanVector& x, double t, const ExpertSet& experts, const FlowConfig& cfg);

/// Conditional target velocity u_t(x | x1).
PlanVector conditional_velocity(const PlanVector& x, double t, const PlanVector& x1, const FlowConfig& cfg);

/// Euler integration of cond_velocity from a standard-normal draw seeded by `seed`.
PlanVector sample_vector(const ExpertSet& experts, const FlowConfig& cfg, std::uint64_t seed);
WaypointPlan sample_plan(const ExpertSet& experts, const FlowConfig& cfg, std::uint64_t seed);

/// Many samples, one per seed. Parallel over seeds; results are identical to
/// the serial version.
std::vector<PlanVector> sample_vectors(const ExpertSet& experts, const FlowConfig& cfg,
                                       const std::vector<std::uint64_t>& seeds);
std::vector<PlanVector> sample_vectors_serial(const ExpertSet& experts, const FlowConfig& cfg,
                                              const std::vector<std::uint64_t>& seeds);

WaypointPlan mean_regression_plan(const ExpertSet& experts);

using VelocityField = std::function<PlanVector(const PlanVector&, double)>;

/// Monte Carlo estimate of E ||v(x_t, t) - u_t(x_t | x1)||^2.
double cfm_objective(const VelocityField& field, const ExpertSet& experts, const FlowConfig& cfg, int n_mc,
                     std::uint64_t seed);

/// Left/right obstacle bypass: agent at the origin facing +x, a block in
/// front, and two symmetric expert modes whose middle waypoints sit
/// `lateral` metres to either side.
struct BypassScenario {
    Scene scene;
    ExpertSet experts;
    std::array<PlanVector, 2> mode_centers;  // left, right
    Vec2 obstacle_min;
    Vec2 obstacle_max;
};

BypassScenario make_bypass_scenario(int experts_per_mode = 8, double lateral = 1.0, double jitter = 0.05,
                                    std::uint64_t seed = 0);

/// Largest waypoint position distance between two plans.
double plan_distance(const WaypointPlan& a, const WaypointPlan& b);
/// True when the plan's world polyline (from the origin) touches a
/// non-traversable cell.
bool plan_collides(const WaypointPlan& plan, const Pose2D& frame, const OccupancyGrid& grid);

}  // namespace navkit
