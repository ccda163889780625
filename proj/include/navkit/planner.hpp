#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "navkit/geometry.hpp"
#include "navkit/rng.hpp"
#include "navkit/scene.hpp"

namespace navkit {

/// Ordered world points with cached arc length. Consecutive duplicates are
/// dropped on construction.
class PathPolyline {
public:
    PathPolyline() = default;
    explicit PathPolyline(std::vector<Vec2> points);
    /// Uses a caller-supplied length (e.g. exact octile cost) instead of the
    /// recomputed segment sum.
    PathPolyline(std::vector<Vec2> points, double length);

    const std::vector<Vec2>& points() const { return points_; }
    double length() const { return length_; }
    bool empty() const { return points_.empty(); }
    std::size_t size() const { return points_.size(); }
    Vec2 front() const { return points_.front(); }
    Vec2 back() const { return points_.back(); }

    /// Point at arc length s, clamped to [0, length].
    Vec2 point_at(double s) const;
    /// Heading of the segment leaving arc position s (incoming heading at the end).
    double heading_at(double s) const;

    friend bool operator==(const PathPolyline&, const PathPolyline&) = default;

private:
    std::vector<Vec2> points_;
    std::vector<double> cumulative_;  // running segment sum, same order as the length loop
    double length_ = 0.0;
};

double polyline_length(std::span<const Vec2> points);
double distance_to_polyline(std::span<const Vec2> points, Vec2 p);

/// Cell predicate for search: base traversability, optional social-only
/// restriction, and an optional clearance (Chebyshev radius in cells) from
/// cells failing the base predicate.
struct Traversal {
    bool social_only = false;
    int clearance = 0;
};

bool passable(const OccupancyGrid& grid, Cell c, bool social_only);
bool passable(const OccupancyGrid& grid, Cell c, const Traversal& t);

/// Octile cost of a move sequence with n_straight unit and n_diag diagonal steps.
inline double octile_length(long n_straight, long n_diag, double resolution) {
    return (static_cast<double>(n_straight) + static_cast<double>(n_diag) * std::sqrt(2.0)) * resolution;
}

/// 8-connected A* through cell centres with an octile heuristic; diagonal
/// moves may not cut between two blocked orthogonal neighbours. Throws
/// Unreachable (also when an endpoint fails the predicate).
PathPolyline astar_grid(const OccupancyGrid& grid, Cell start, Cell goal, bool social_only);
PathPolyline astar_grid(const OccupancyGrid& grid, Cell start, Cell goal, const Traversal& t);

/// Single-source Dijkstra over the same move model as astar_grid.
class DistanceField {
public:
    DistanceField(const OccupancyGrid& grid, Cell source, const Traversal& t);

    Cell source() const { return source_; }
    bool reachable(Cell c) const;
    /// Centre-to-centre cost; +inf when unreachable.
    double cost(Cell c) const;
    /// Cell path from `from` back to the source, as cell centres.
    std::vector<Cell> cells_to_source(Cell from) const;

    /// Point-to-point geodesic between a point inside `source` and p.
    double geodesic(Vec2 source_point, Vec2 p) const;

private:
    const OccupancyGrid* grid_;
    Cell source_;
    std::vector<double> cost_;
    std::vector<int> parent_;
};

/// Geodesic distance between two world points: the A* cost between their
/// containing cells plus the offsets from each point to its cell centre, or
/// the straight distance when both share a cell.
double geodesic_distance(const Scene& scene, Vec2 a, Vec2 b, bool social_only);
double geodesic_distance(const OccupancyGrid& grid, Vec2 a, Vec2 b, bool social_only);

/// Bresenham ray between cell centres; endpoints themselves never block.
/// Symmetric in (a, b).
bool line_of_sight(const OccupancyGrid& grid, Cell a, Cell b);
bool line_of_sight(const OccupancyGrid& grid, Vec2 a, Vec2 b);

enum class FovMode { FrontOnly, Panoramic3View };

struct FovConfig {
    double horizontal_fov = 2.0 * kPi / 3.0;
    double max_range = 5.0;
    FovMode mode = FovMode::FrontOnly;

    /// True when a bearing relative to the heading falls in some sector.
    bool in_fov(double relative_bearing) const;
};

/// Point visibility: in range, in an FoV sector, unobstructed.
bool point_visible(const OccupancyGrid& grid, const Pose2D& pose, Vec2 point, const FovConfig& fov);
bool object_visible(const OccupancyGrid& grid, const Pose2D& pose, const SceneObject& object,
                    const FovConfig& fov);
std::vector<std::string> visible_objects(const Scene& scene, const Pose2D& pose, const FovConfig& fov);

/// World poses sampled every `step` metres of arc length along `path`
/// (the last sample sits at the path end). Headings follow the chord to the
/// next sample; the final heading is the incoming chord unless overridden.
std::vector<Pose2D> resample_poses(const PathPolyline& path, const Pose2D& start_pose, double step,
                                   std::optional<double> final_heading = std::nullopt);

/// Chunks resampled poses into 5-waypoint plans, each expressed in the frame
/// of the chunk's starting pose; the last chunk is padded with its final pose.
std::vector<WaypointPlan> resample_waypoints(const PathPolyline& path, const Pose2D& start_pose,
                                             double step,
                                             std::optional<double> final_heading = std::nullopt);

/// Groups world poses into 5-waypoint plans, each in the frame of the pose
/// preceding its chunk (start_pose for the first); the last chunk repeats its
/// final pose. No poses yields a single identity plan.
std::vector<WaypointPlan> chunk_plans(std::span<const Pose2D> poses, const Pose2D& start_pose);

/// Inverse of chunk_plans: world poses obtained by composing each plan onto
/// the final pose of the previous one.
std::vector<Pose2D> chain_plans(std::span<const WaypointPlan> plans, const Pose2D& start_pose);

struct PerturbationBand {
    double min_offset = 0.5;
    double max_offset = 1.5;
    double min_turn = deg_to_rad(30.0);
    double max_turn = deg_to_rad(90.0);
    int max_attempts = 400;
};

/// Off-path recovery start: a pose beside the path on a passable cell.
Pose2D perturb_offpath(const Scene& scene, const PathPolyline& path, Rng& rng,
                       const Traversal& t = {}, const PerturbationBand& band = {});

/// True when every point sampled along the polyline at `spacing` satisfies
/// the traversal predicate (bounds included).
bool polyline_passable(const OccupancyGrid& grid, std::span<const Vec2> points, bool social_only,
                       double spacing = 0.05);

/// Cells covered by sampling the polyline at `spacing`.
std::vector<Cell> polyline_cells(const OccupancyGrid& grid, std::span<const Vec2> points,
                                 double spacing = 0.05);

}  // namespace navkit
