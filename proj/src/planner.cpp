#include "navkit/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>

#include "navkit/error.hpp"

namespace navkit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Move {
    int di, dj;
    bool diagonal;
};

constexpr Move kMoves[8] = {
    {1, 0, false}, {-1, 0, false}, {0, 1, false}, {0, -1, false},
    {1, 1, true},  {1, -1, true},  {-1, 1, true}, {-1, -1, true},
};

std::string cell_str(Cell c) {
    return "(" + std::to_string(c.i) + ", " + std::to_string(c.j) + ")";
}

}  // namespace

// ---------------------------------------------------------------- polyline

PathPolyline::PathPolyline(std::vector<Vec2> points) {
    points_.reserve(points.size());
    for (const auto& p : points) {
        if (points_.empty() || !(points_.back() == p)) points_.push_back(p);
    }
    cumulative_.reserve(points_.size());
    double acc = 0.0;
    for (std::size_t k = 0; k < points_.size(); ++k) {
        if (k > 0) acc += distance(points_[k - 1], points_[k]);
        cumulative_.push_back(acc);
    }
    length_ = polyline_length(points_);
}

PathPolyline::PathPolyline(std::vector<Vec2> points, double length) : PathPolyline(std::move(points)) {
    length_ = length;
}

Vec2 PathPolyline::point_at(double s) const {
    if (points_.empty()) return {};
    if (s <= 0.0) return points_.front();
    const auto it = std::lower_bound(cumulative_.begin() + 1, cumulative_.end(), s);
    if (it == cumulative_.end()) return points_.back();
    const auto k = static_cast<std::size_t>(it - cumulative_.begin());
    const double seg = distance(points_[k - 1], points_[k]);
    const double f = seg > 0.0 ? (s - cumulative_[k - 1]) / seg : 0.0;
    return points_[k - 1] + (points_[k] - points_[k - 1]) * f;
}

double PathPolyline::heading_at(double s) const {
    if (points_.size() < 2) return 0.0;
    const auto it = std::upper_bound(cumulative_.begin() + 1, cumulative_.end(), s);
    if (it == cumulative_.end()) return heading_of(points_.back() - points_[points_.size() - 2]);
    const auto k = static_cast<std::size_t>(it - cumulative_.begin());
    return heading_of(points_[k] - points_[k - 1]);
}

double polyline_length(std::span<const Vec2> points) {
    double total = 0.0;
    for (std::size_t k = 1; k < points.size(); ++k) total += distance(points[k - 1], points[k]);
    return total;
}

double distance_to_polyline(std::span<const Vec2> points, Vec2 p) {
    if (points.empty()) return kInf;
    if (points.size() == 1) return distance(points[0], p);
    double best = kInf;
    for (std::size_t k = 1; k < points.size(); ++k) {
        const Vec2 a = points[k - 1];
        const Vec2 ab = points[k] - a;
        const double len2 = ab.dot(ab);
        double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
        t = std::clamp(t, 0.0, 1.0);
        best = std::min(best, distance(a + ab * t, p));
    }
    return best;
}

// ---------------------------------------------------------------- search

bool passable(const OccupancyGrid& grid, Cell c, bool social_only) {
    if (!grid.in_bounds(c)) return false;
    const auto k = grid.at(c);
    return social_only ? is_social(k) : is_traversable(k);
}

bool passable(const OccupancyGrid& grid, Cell c, const Traversal& t) {
    if (!passable(grid, c, t.social_only)) return false;
    for (int dj = -t.clearance; dj <= t.clearance; ++dj) {
        for (int di = -t.clearance; di <= t.clearance; ++di) {
            const Cell n{c.i + di, c.j + dj};
            if (grid.in_bounds(n) && !passable(grid, n, t.social_only)) return false;
        }
    }
    return true;
}

namespace {

/// Shared expansion rule: passable under `t`, with the listed cells exempt
/// from the clearance requirement.
struct MoveModel {
    const OccupancyGrid& grid;
    Traversal t;
    Cell exempt_a;
    Cell exempt_b;

    bool ok(Cell c) const {
        if (!grid.in_bounds(c)) return false;
        if (c == exempt_a || c == exempt_b) return passable(grid, c, t.social_only);
        return passable(grid, c, t);
    }

    bool can_move(Cell from, const Move& m) const {
        const Cell to{from.i + m.di, from.j + m.dj};
        if (!ok(to)) return false;
        if (m.diagonal) {
            if (!ok({from.i + m.di, from.j}) || !ok({from.i, from.j + m.dj})) return false;
        }
        return true;
    }
};

struct QueueEntry {
    double f;
    double g;
    std::size_t idx;
    bool operator>(const QueueEntry& o) const {
        if (f != o.f) return f > o.f;
        if (g != o.g) return g < o.g;  // prefer deeper nodes on ties
        return idx > o.idx;
    }
};

double octile_heuristic(Cell a, Cell b, double res) {
    const long dx = std::abs(a.i - b.i);
    const long dy = std::abs(a.j - b.j);
    return octile_length(std::max(dx, dy) - std::min(dx, dy), std::min(dx, dy), res);
}

}  // namespace

PathPolyline astar_grid(const OccupancyGrid& grid, Cell start, Cell goal, bool social_only) {
    return astar_grid(grid, start, goal, Traversal{social_only, 0});
}

PathPolyline astar_grid(const OccupancyGrid& grid, Cell start, Cell goal, const Traversal& t) {
    const MoveModel model{grid, t, start, goal};
    if (!model.ok(start) || !model.ok(goal)) {
        throw Error(ErrorCode::Unreachable, "endpoint not passable: " + cell_str(start) + " -> " + cell_str(goal));
    }
    if (start == goal) return PathPolyline({grid.grid_to_world(start)}, 0.0);

    const double res = grid.resolution();
    const std::size_t n = grid.size();
    std::vector<double> g(n, kInf);
    std::vector<long> n_straight(n, 0);
    std::vector<long> n_diag(n, 0);
    std::vector<int> parent(n, -1);
    std::priority_queue<QueueEntry, std::vector<QueueEntry>, std::greater<>> open;

    const std::size_t s = grid.index(start);
    const std::size_t target = grid.index(goal);
    g[s] = 0.0;
    open.push({octile_heuristic(start, goal, res), 0.0, s});
    while (!open.empty()) {
        const QueueEntry cur = open.top();
        open.pop();
        if (cur.g > g[cur.idx]) continue;
        if (cur.idx == target) break;
        const Cell c = grid.cell_at(cur.idx);
        for (const auto& m : kMoves) {
            if (!model.can_move(c, m)) continue;
            const Cell nc{c.i + m.di, c.j + m.dj};
            const std::size_t ni = grid.index(nc);
            const long ns = n_straight[cur.idx] + (m.diagonal ? 0 : 1);
            const long nd = n_diag[cur.idx] + (m.diagonal ? 1 : 0);
            const double ng = octile_length(ns, nd, res);
            if (ng < g[ni]) {
                g[ni] = ng;
                n_straight[ni] = ns;
                n_diag[ni] = nd;
                parent[ni] = static_cast<int>(cur.idx);
                open.push({ng + octile_heuristic(nc, goal, res), ng, ni});
            }
        }
    }
    if (g[target] == kInf) {
        throw Error(ErrorCode::Unreachable, "no path " + cell_str(start) + " -> " + cell_str(goal));
    }
    std::vector<Vec2> pts;
    for (int k = static_cast<int>(target); k >= 0; k = parent[static_cast<std::size_t>(k)]) {
        pts.push_back(grid.grid_to_world(grid.cell_at(static_cast<std::size_t>(k))));
    }
    std::reverse(pts.begin(), pts.end());
    return PathPolyline(std::move(pts), octile_length(n_straight[target], n_diag[target], res));
}

DistanceField::DistanceField(const OccupancyGrid& grid, Cell source, const Traversal& t)
    : grid_(&grid), source_(source), cost_(grid.size(), kInf), parent_(grid.size(), -1) {
    const MoveModel model{grid, t, source, source};
    if (!model.ok(source)) return;
    const double res = grid.resolution();
    std::vector<long> n_straight(grid.size(), 0);
    std::vector<long> n_diag(grid.size(), 0);
    std::priority_queue<QueueEntry, std::vector<QueueEntry>, std::greater<>> open;
    const std::size_t s = grid.index(source);
    cost_[s] = 0.0;
    open.push({0.0, 0.0, s});
    while (!open.empty()) {
        const QueueEntry cur = open.top();
        open.pop();
        if (cur.g > cost_[cur.idx]) continue;
        const Cell c = grid.cell_at(cur.idx);
        for (const auto& m : kMoves) {
            if (!model.can_move(c, m)) continue;
            const std::size_t ni = grid.index({c.i + m.di, c.j + m.dj});
            const long ns = n_straight[cur.idx] + (m.diagonal ? 0 : 1);
            const long nd = n_diag[cur.idx] + (m.diagonal ? 1 : 0);
            const double ng = octile_length(ns, nd, res);
            if (ng < cost_[ni]) {
                cost_[ni] = ng;
                n_straight[ni] = ns;
                n_diag[ni] = nd;
                parent_[ni] = static_cast<int>(cur.idx);
                open.push({ng, ng, ni});
            }
        }
    }
}

bool DistanceField::reachable(Cell c) const { return grid_->in_bounds(c) && cost_[grid_->index(c)] < kInf; }

double DistanceField::cost(Cell c) const { return grid_->in_bounds(c) ? cost_[grid_->index(c)] : kInf; }

std::vector<Cell> DistanceField::cells_to_source(Cell from) const {
    std::vector<Cell> out;
    if (!reachable(from)) return out;
    for (int k = static_cast<int>(grid_->index(from)); k >= 0; k = parent_[static_cast<std::size_t>(k)]) {
        out.push_back(grid_->cell_at(static_cast<std::size_t>(k)));
    }
    return out;
}

double DistanceField::geodesic(Vec2 source_point, Vec2 p) const {
    if (!grid_->contains(p)) return kInf;
    const Cell c = grid_->world_to_grid(p);
    if (c == source_) return distance(source_point, p);
    const double base = cost(c);
    if (base == kInf) return kInf;
    return base + distance(p, grid_->grid_to_world(c)) + distance(source_point, grid_->grid_to_world(source_));
}

double geodesic_distance(const OccupancyGrid& grid, Vec2 a, Vec2 b, bool social_only) {
    const Cell ca = grid.world_to_grid(a);
    const Cell cb = grid.world_to_grid(b);
    if (!passable(grid, ca, social_only) || !passable(grid, cb, social_only)) {
        throw Error(ErrorCode::Unreachable, "geodesic endpoint not passable");
    }
    if (ca == cb) return distance(a, b);
    const auto path = astar_grid(grid, ca, cb, social_only);
    return path.length() + distance(a, grid.grid_to_world(ca)) + distance(b, grid.grid_to_world(cb));
}

double geodesic_distance(const Scene& scene, Vec2 a, Vec2 b, bool social_only) {
    return geodesic_distance(scene.grid, a, b, social_only);
}

// ---------------------------------------------------------------- visibility

bool line_of_sight(const OccupancyGrid& grid, Cell a, Cell b) {
    if (!grid.in_bounds(a) || !grid.in_bounds(b)) return false;
    if (b < a) std::swap(a, b);
    const int dx = std::abs(b.i - a.i);
    const int dy = -std::abs(b.j - a.j);
    const int sx = a.i < b.i ? 1 : -1;
    const int sy = a.j < b.j ? 1 : -1;
    int err = dx + dy;
    Cell c = a;
    while (true) {
        if (c == b) return true;
        const int e2 = 2 * err;
        if (e2 >= dy) {
            err += dy;
            c.i += sx;
        }
        if (e2 <= dx) {
            err += dx;
            c.j += sy;
        }
        if (!(c == b) && blocks_sight(grid.at(c))) return false;
    }
}

bool line_of_sight(const OccupancyGrid& grid, Vec2 a, Vec2 b) {
    return line_of_sight(grid, grid.world_to_grid(a), grid.world_to_grid(b));
}

bool FovConfig::in_fov(double rel) const {
    constexpr double eps = 1e-9;
    const double half = horizontal_fov / 2.0;
    if (horizontal_fov >= 2.0 * kPi) return true;
    rel = wrap_angle(rel);
    if (mode == FovMode::FrontOnly) return std::abs(rel) <= half + eps;
    const double offset = 0.75 * kPi - half;
    for (double c : {-offset, 0.0, offset}) {
        if (std::abs(wrap_angle(rel - c)) <= half + eps) return true;
    }
    return false;
}

bool point_visible(const OccupancyGrid& grid, const Pose2D& pose, Vec2 point, const FovConfig& fov) {
    if (!grid.contains(point) || !grid.contains(pose.position())) return false;
    const Vec2 d = point - pose.position();
    const double r = d.norm();
    if (r > fov.max_range) return false;
    if (r > 1e-12 && !fov.in_fov(heading_of(d) - pose.theta)) return false;
    return line_of_sight(grid, grid.world_to_grid(pose.position()), grid.world_to_grid(point));
}

bool object_visible(const OccupancyGrid& grid, const Pose2D& pose, const SceneObject& object,
                    const FovConfig& fov) {
    for (const auto& f : object.footprint) {
        if (!grid.in_bounds(f)) continue;
        if (point_visible(grid, pose, grid.grid_to_world(f), fov)) return true;
    }
    return false;
}

std::vector<std::string> visible_objects(const Scene& scene, const Pose2D& pose, const FovConfig& fov) {
    std::vector<std::string> out;
    for (const auto& obj : scene.objects) {
        if (object_visible(scene.grid, pose, obj, fov)) out.push_back(obj.id);
    }
    return out;
}

// ---------------------------------------------------------------- resampling

std::vector<Pose2D> resample_poses(const PathPolyline& path, const Pose2D& start_pose, double step,
                                   std::optional<double> final_heading) {
    if (path.empty()) throw Error(ErrorCode::EmptyPath, "cannot resample an empty path");
    if (!(step > 0.0)) throw Error(ErrorCode::InvalidParams, "resample step must be positive");
    const double total = polyline_length(path.points());
    const auto count = static_cast<long>(std::ceil(total / step - 1e-9));
    std::vector<Vec2> pts;
    pts.push_back(start_pose.position());
    for (long k = 1; k <= count; ++k) {
        pts.push_back(path.point_at(k == count ? total : std::min(total, static_cast<double>(k) * step)));
    }
    std::vector<Pose2D> out;
    double prev = start_pose.theta;
    for (std::size_t k = 1; k < pts.size(); ++k) {
        double theta = prev;
        if (k + 1 < pts.size()) {
            const Vec2 d = pts[k + 1] - pts[k];
            if (d.norm() > 1e-12) theta = heading_of(d);
        } else if (final_heading) {
            theta = *final_heading;
        } else {
            const Vec2 d = pts[k] - pts[k - 1];
            if (d.norm() > 1e-12) theta = heading_of(d);
        }
        out.emplace_back(pts[k], theta);
        prev = out.back().theta;
    }
    return out;
}

std::vector<WaypointPlan> resample_waypoints(const PathPolyline& path, const Pose2D& start_pose, double step,
                                             std::optional<double> final_heading) {
    const auto poses = resample_poses(path, start_pose, step, final_heading);
    std::vector<WaypointPlan> plans;
    if (poses.empty()) {
        WaypointPlan p{};
        const double dtheta = final_heading ? wrap_angle(*final_heading - start_pose.theta) : 0.0;
        for (auto& w : p) w = Pose2D(0.0, 0.0, dtheta);
        plans.push_back(p);
        return plans;
    }
    return chunk_plans(poses, start_pose);
}

std::vector<WaypointPlan> chunk_plans(std::span<const Pose2D> poses, const Pose2D& start_pose) {
    std::vector<WaypointPlan> plans;
    if (poses.empty()) {
        plans.push_back(identity_plan());
        return plans;
    }
    for (std::size_t begin = 0; begin < poses.size(); begin += kPlanLength) {
        const Pose2D frame = begin == 0 ? start_pose : poses[begin - 1];
        WaypointPlan plan{};
        for (std::size_t k = 0; k < kPlanLength; ++k) {
            const std::size_t src = std::min(begin + k, poses.size() - 1);
            plan[k] = to_local(frame, poses[src]);
        }
        plans.push_back(plan);
    }
    return plans;
}

std::vector<Pose2D> chain_plans(std::span<const WaypointPlan> plans, const Pose2D& start_pose) {
    std::vector<Pose2D> out;
    Pose2D frame = start_pose;
    for (const auto& plan : plans) {
        for (const auto& w : plan) out.push_back(to_world(frame, w));
        frame = out.back();
    }
    return out;
}

Pose2D perturb_offpath(const Scene& scene, const PathPolyline& path, Rng& rng, const Traversal& t,
                       const PerturbationBand& band) {
    if (path.empty()) throw Error(ErrorCode::EmptyPath, "cannot perturb around an empty path");
    const auto& grid = scene.grid;
    const double total = polyline_length(path.points());
    for (int attempt = 0; attempt < band.max_attempts; ++attempt) {
        const double s = rng.uniform(0.0, total);
        const Vec2 base = path.point_at(s);
        const double h = path.heading_at(s);
        const double side = rng.coin() ? 1.0 : -1.0;
        const double offset = rng.uniform(band.min_offset, band.max_offset);
        const double turn = (rng.coin() ? 1.0 : -1.0) * rng.uniform(band.min_turn, band.max_turn);
        const Vec2 dir = total > 0.0 ? Vec2{-std::sin(h), std::cos(h)} * side
                                     : unit_from_angle(rng.uniform(-kPi, kPi));
        const Vec2 q = base + dir * offset;
        if (!grid.contains(q)) continue;
        if (!passable(grid, grid.world_to_grid(q), t)) continue;
        const Vec2 hop[2] = {base, q};
        if (!polyline_passable(grid, hop, t.social_only)) continue;
        const double d = distance_to_polyline(path.points(), q);
        if (d < band.min_offset || d > band.max_offset) continue;
        return Pose2D(q, h + turn);
    }
    throw Error(ErrorCode::NoValidPerturbation, "no passable cell in the offset band");
}

bool polyline_passable(const OccupancyGrid& grid, std::span<const Vec2> points, bool social_only, double spacing) {
    for (const auto& c : polyline_cells(grid, points, spacing)) {
        if (!passable(grid, c, social_only)) return false;
    }
    for (const auto& p : points) {
        if (!grid.contains(p)) return false;
    }
    return true;
}

std::vector<Cell> polyline_cells(const OccupancyGrid& grid, std::span<const Vec2> points, double spacing) {
    std::vector<Cell> out;
    auto push = [&](Vec2 p) {
        if (!grid.contains(p)) {
            out.push_back({-1, -1});
            return;
        }
        const Cell c = grid.world_to_grid(p);
        if (out.empty() || !(out.back() == c)) out.push_back(c);
    };
    if (points.empty()) return out;
    push(points[0]);
    for (std::size_t k = 1; k < points.size(); ++k) {
        const Vec2 a = points[k - 1];
        const Vec2 b = points[k];
        const double len = distance(a, b);
        const int n = std::max(1, static_cast<int>(std::ceil(len / spacing)));
        for (int s = 1; s <= n; ++s) push(a + (b - a) * (static_cast<double>(s) / n));
    }
    return out;
}

}  // namespace navkit
