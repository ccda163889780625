#include "navkit/scene.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <sstream>

#include "navkit/error.hpp"
#include "navkit/planner.hpp"

namespace navkit {

std::string_view class_name(SemanticClass c) {
    switch (c) {
        case SemanticClass::Sidewalk: return "sidewalk";
        case SemanticClass::Crosswalk: return "crosswalk";
        case SemanticClass::VehicleRoad: return "vehicle_road";
        case SemanticClass::Lawn: return "lawn";
        case SemanticClass::Obstacle: return "obstacle";
        case SemanticClass::IndoorFloor: return "indoor_floor";
        case SemanticClass::Door: return "door";
        case SemanticClass::Furniture: return "furniture";
        case SemanticClass::Unknown: return "unknown";
    }
    return "unknown";
}

OccupancyGrid::OccupancyGrid(int width, int height, double resolution, Vec2 origin, SemanticClass fill)
    : width_(width), height_(height), resolution_(resolution), origin_(origin) {
    if (width <= 0 || height <= 0 || !(resolution > 0.0)) {
        throw Error(ErrorCode::InvalidParams, "grid dimensions and resolution must be positive");
    }
    cells_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

bool OccupancyGrid::contains(Vec2 p) const {
    const double fx = (p.x - origin_.x) / resolution_;
    const double fy = (p.y - origin_.y) / resolution_;
    return fx >= 0.0 && fy >= 0.0 && std::floor(fx) < width_ && std::floor(fy) < height_;
}

Cell OccupancyGrid::world_to_grid(Vec2 p) const {
    const double fx = std::floor((p.x - origin_.x) / resolution_);
    const double fy = std::floor((p.y - origin_.y) / resolution_);
    if (!(fx >= 0.0 && fy >= 0.0 && fx < width_ && fy < height_)) {
        std::ostringstream msg;
        msg << "point (" << p.x << ", " << p.y << ") outside grid";
        throw Error(ErrorCode::OutOfBounds, msg.str());
    }
    return {static_cast<int>(fx), static_cast<int>(fy)};
}

Vec2 OccupancyGrid::grid_to_world(Cell c) const {
    return {origin_.x + (c.i + 0.5) * resolution_, origin_.y + (c.j + 0.5) * resolution_};
}

SemanticClass OccupancyGrid::class_at(Vec2 p) const {
    if (!contains(p)) return SemanticClass::Unknown;
    return at(world_to_grid(p));
}

void OccupancyGrid::fill_rect(Cell lo, Cell hi, SemanticClass v) {
    for (int j = std::max(0, lo.j); j < std::min(height_, hi.j); ++j) {
        for (int i = std::max(0, lo.i); i < std::min(width_, hi.i); ++i) {
            set({i, j}, v);
        }
    }
}

const GraphNode* NavGraph::find(int id) const {
    for (const auto& n : nodes) {
        if (n.id == id) return &n;
    }
    return nullptr;
}

int NavGraph::component_count() const {
    std::vector<int> parent(nodes.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto find_root = [&](int x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
            x = parent[static_cast<std::size_t>(x)];
        }
        return x;
    };
    auto slot = [&](int id) -> int {
        for (std::size_t k = 0; k < nodes.size(); ++k) {
            if (nodes[k].id == id) return static_cast<int>(k);
        }
        return -1;
    };
    for (const auto& e : edges) {
        if (!e.traversable) continue;
        const int a = slot(e.u);
        const int b = slot(e.v);
        if (a < 0 || b < 0) continue;
        parent[static_cast<std::size_t>(find_root(a))] = find_root(b);
    }
    int count = 0;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        if (find_root(static_cast<int>(k)) == static_cast<int>(k)) ++count;
    }
    return count;
}

const Region* Scene::region_at(Vec2 p) const {
    for (const auto& r : regions) {
        if (r.contains(p)) return &r;
    }
    return nullptr;
}

std::string_view violation_name(ViolationKind k) {
    switch (k) {
        case ViolationKind::NodeOutOfBounds: return "NodeOutOfBounds";
        case ViolationKind::NodeOnObstacle: return "NodeOnObstacle";
        case ViolationKind::EdgeUnknownNode: return "EdgeUnknownNode";
        case ViolationKind::EdgeSelfLoop: return "EdgeSelfLoop";
        case ViolationKind::EdgeTooShort: return "EdgeTooShort";
        case ViolationKind::DoorOutOfBounds: return "DoorOutOfBounds";
        case ViolationKind::DoorNotOnDoorCell: return "DoorNotOnDoorCell";
        case ViolationKind::SpawnOutOfBounds: return "SpawnOutOfBounds";
        case ViolationKind::SpawnNotCompliant: return "SpawnNotCompliant";
        case ViolationKind::BadResolution: return "BadResolution";
    }
    return "Unknown";
}

std::string Violation::describe() const {
    return std::string(violation_name(kind)) + "(" + entity + ")";
}

std::vector<Violation> validate_scene(const Scene& scene) {
    std::vector<Violation> out;
    const auto& grid = scene.grid;
    if (!(grid.resolution() > 0.0) || grid.size() == 0) {
        out.push_back({ViolationKind::BadResolution, scene.id});
        return out;
    }
    for (const auto& n : scene.graph.nodes) {
        if (!grid.contains(n.position)) {
            out.push_back({ViolationKind::NodeOutOfBounds, std::to_string(n.id)});
        } else if (!is_traversable(grid.at(grid.world_to_grid(n.position)))) {
            out.push_back({ViolationKind::NodeOnObstacle, std::to_string(n.id)});
        }
    }
    for (const auto& e : scene.graph.edges) {
        const std::string name = std::to_string(e.u) + "," + std::to_string(e.v);
        if (e.u == e.v) {
            out.push_back({ViolationKind::EdgeSelfLoop, name});
            continue;
        }
        const auto* a = scene.graph.find(e.u);
        const auto* b = scene.graph.find(e.v);
        if (a == nullptr || b == nullptr) {
            out.push_back({ViolationKind::EdgeUnknownNode, name});
            continue;
        }
        if (e.length < distance(a->position, b->position) - kEdgeLengthEpsilon) {
            out.push_back({ViolationKind::EdgeTooShort, name});
        }
    }
    for (const auto& d : scene.doors) {
        const Vec2 p = d.pose.position();
        if (!grid.contains(p)) {
            out.push_back({ViolationKind::DoorOutOfBounds, std::to_string(d.id)});
        } else if (grid.at(grid.world_to_grid(p)) != SemanticClass::Door) {
            out.push_back({ViolationKind::DoorNotOnDoorCell, std::to_string(d.id)});
        }
    }
    for (const auto& c : scene.spawn_region) {
        const std::string name = std::to_string(c.i) + "," + std::to_string(c.j);
        if (!grid.in_bounds(c)) {
            out.push_back({ViolationKind::SpawnOutOfBounds, name});
        } else if (!is_social(grid.at(c))) {
            out.push_back({ViolationKind::SpawnNotCompliant, name});
        }
    }
    return out;
}

namespace {

struct CandidateWindow {
    int i0, j0, i1, j1;  // inclusive
};

CandidateWindow visibility_window(const OccupancyGrid& grid, const SceneObject& obj, double range) {
    const int reach = static_cast<int>(std::ceil(range / grid.resolution()));
    CandidateWindow w{grid.width(), grid.height(), -1, -1};
    for (const auto& f : obj.footprint) {
        w.i0 = std::min(w.i0, f.i - reach);
        w.j0 = std::min(w.j0, f.j - reach);
        w.i1 = std::max(w.i1, f.i + reach);
        w.j1 = std::max(w.j1, f.j + reach);
    }
    w.i0 = std::max(0, w.i0);
    w.j0 = std::max(0, w.j0);
    w.i1 = std::min(grid.width() - 1, w.i1);
    w.j1 = std::min(grid.height() - 1, w.j1);
    return w;
}

bool cell_sees_object(const OccupancyGrid& grid, Cell c, const SceneObject& obj, double range) {
    if (!is_traversable(grid.at(c))) return false;
    const Vec2 pc = grid.grid_to_world(c);
    for (const auto& f : obj.footprint) {
        if (!grid.in_bounds(f)) continue;
        if (distance(pc, grid.grid_to_world(f)) > range) continue;
        if (line_of_sight(grid, c, f)) return true;
    }
    return false;
}

}  // namespace

void compute_visible_regions(Scene& scene) {
    const auto& grid = scene.grid;
    for (auto& obj : scene.objects) {
        obj.visible_region.clear();
        if (obj.footprint.empty()) continue;
        const auto w = visibility_window(grid, obj, scene.visibility_range);
        if (w.i1 < w.i0 || w.j1 < w.j0) continue;
        const int cols = w.i1 - w.i0 + 1;
        const long total = static_cast<long>(cols) * (w.j1 - w.j0 + 1);
        std::vector<unsigned char> flags(static_cast<std::size_t>(total), 0);
#pragma omp parallel for schedule(static)
        for (long k = 0; k < total; ++k) {
            const Cell c{w.i0 + static_cast<int>(k % cols), w.j0 + static_cast<int>(k / cols)};
            flags[static_cast<std::size_t>(k)] = cell_sees_object(grid, c, obj, scene.visibility_range) ? 1 : 0;
        }
        for (long k = 0; k < total; ++k) {
            if (flags[static_cast<std::size_t>(k)] != 0) {
                obj.visible_region.push_back({w.i0 + static_cast<int>(k % cols), w.j0 + static_cast<int>(k / cols)});
            }
        }
    }
}

void compute_visible_regions_serial(Scene& scene) {
    const auto& grid = scene.grid;
    for (auto& obj : scene.objects) {
        obj.visible_region.clear();
        if (obj.footprint.empty()) continue;
        const auto w = visibility_window(grid, obj, scene.visibility_range);
        for (int j = w.j0; j <= w.j1; ++j) {
            for (int i = w.i0; i <= w.i1; ++i) {
                if (cell_sees_object(grid, {i, j}, obj, scene.visibility_range)) {
                    obj.visible_region.push_back({i, j});
                }
            }
        }
    }
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    for (auto& ch : out) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return out;
}

bool label_equals(std::string_view a, std::string_view b) {
    if (a.size() != b.size()) return false;
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (std::tolower(static_cast<unsigned char>(a[k])) != std::tolower(static_cast<unsigned char>(b[k]))) {
            return false;
        }
    }
    return true;
}

}  // namespace navkit
