#pragma once

// Reference implementations used only by tests. Each one is written from
// the definition, without calling the library routine it checks.

#include <optional>
#include <string>
#include <vector>

#include "navkit/episode.hpp"
#include "navkit/flow.hpp"
#include "navkit/memory.hpp"
#include "navkit/planner.hpp"
#include "navkit/scene.hpp"
#include "navkit/sim.hpp"

namespace oracle {

using namespace navkit;

/// a + b*sqrt(2) with exact comparison.
struct ZCost {
    long a = 0;
    long b = 0;
    double value(double res) const;
};
bool less(const ZCost& x, const ZCost& y);

bool cell_ok(const OccupancyGrid& g, Cell c, const Traversal& t);
/// Exact-arithmetic Dijkstra with the 8-connected, no-corner-cut move model;
/// endpoints only need the base predicate. nullopt when unreachable.
std::optional<ZCost> dijkstra(const OccupancyGrid& g, Cell s, Cell goal, const Traversal& t);

/// Cells strictly between a and b: walk the major axis from the endpoint that
/// is smaller in (row, column) order, rounding the minor coordinate half up.
std::vector<Cell> ray_cells(Cell a, Cell b);
bool los(const OccupancyGrid& g, Cell a, Cell b);
bool in_sector(double rel, const FovConfig& fov);
bool point_visible(const OccupancyGrid& g, const Pose2D& pose, Vec2 p, const FovConfig& fov);
bool object_visible(const OccupancyGrid& g, const Pose2D& pose, const SceneObject& obj, const FovConfig& fov);
/// Every traversable cell of the grid that sees a footprint cell within range.
std::vector<Cell> visible_region(const Scene& scene, const SceneObject& obj);
/// First pose index from which an admitted instance is visible.
std::optional<std::size_t> first_visible(const std::vector<Pose2D>& poses, const Scene& scene, const ObjectGoal& goal,
                                         const FovConfig& fov);

/// Direct (non log-domain) posterior-weighted sum in long double.
PlanVector marginal_velocity(const PlanVector& x, double t, const ExpertSet& e, const FlowConfig& cfg);

double spl(const std::vector<bool>& s, const std::vector<double>& l, const std::vector<double>& p);
/// Degrees.
double maoe(const std::vector<WaypointPlan>& pred, const std::vector<WaypointPlan>& gt);
/// Length of segment a-b inside socially compliant cells, by clipping the
/// segment against every cell box it can touch.
double compliant_length(const OccupancyGrid& g, Vec2 a, Vec2 b);
double dcr(const EpisodeTrace& t, const OccupancyGrid& g);
/// Trapezoid rule over per-step compliance flags.
double dcr_trapezoid(const std::vector<Vec2>& pts, const OccupancyGrid& g);
double tcr(const EpisodeTrace& t);
double tracking_rate(const EpisodeTrace& t);
/// Sorted-distance count per threshold.
std::vector<double> poi_sr(const std::vector<double>& final_dists, const std::vector<double>& thresholds);

/// Bellman-Ford over open Road edges; nullopt when unreachable.
std::optional<double> route_cost(const TopoStore& m, const std::string& from, const std::string& to);

std::vector<double> advantages(const std::vector<double>& r);

}  // namespace oracle
