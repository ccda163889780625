#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "navkit/geometry.hpp"

namespace navkit {

enum class SemanticClass : std::uint8_t {
    Sidewalk = 0,
    Crosswalk = 1,
    VehicleRoad = 2,
    Lawn = 3,
    Obstacle = 4,
    IndoorFloor = 5,
    Door = 6,
    Furniture = 7,
    Unknown = 8,
};

inline constexpr int kSemanticClassCount = 9;

constexpr bool is_traversable(SemanticClass c) {
    switch (c) {
        case SemanticClass::Sidewalk:
        case SemanticClass::Crosswalk:
        case SemanticClass::VehicleRoad:
        case SemanticClass::Lawn:
        case SemanticClass::IndoorFloor:
        case SemanticClass::Door:
            return true;
        default:
            return false;
    }
}

constexpr bool is_social(SemanticClass c) {
    switch (c) {
        case SemanticClass::Sidewalk:
        case SemanticClass::Crosswalk:
        case SemanticClass::IndoorFloor:
        case SemanticClass::Door:
            return true;
        default:
            return false;
    }
}

constexpr bool blocks_sight(SemanticClass c) {
    return c == SemanticClass::Obstacle || c == SemanticClass::Furniture;
}

std::string_view class_name(SemanticClass c);

struct Cell {
    int i = 0;  // column (x)
    int j = 0;  // row (y)

    friend bool operator==(Cell, Cell) = default;
    friend auto operator<=>(Cell a, Cell b) {
        if (a.j != b.j) return a.j <=> b.j;
        return a.i <=> b.i;
    }
};

/// Semantic occupancy grid. Cell (i, j) covers
/// [origin.x + i*res, origin.x + (i+1)*res) x [origin.y + j*res, ...).
class OccupancyGrid {
public:
    OccupancyGrid() = default;
    OccupancyGrid(int width, int height, double resolution, Vec2 origin = {},
                  SemanticClass fill = SemanticClass::Unknown);

    int width() const { return width_; }
    int height() const { return height_; }
    double resolution() const { return resolution_; }
    Vec2 origin() const { return origin_; }
    std::size_t size() const { return cells_.size(); }

    bool in_bounds(Cell c) const { return c.i >= 0 && c.j >= 0 && c.i < width_ && c.j < height_; }
    bool contains(Vec2 p) const;

    std::size_t index(Cell c) const {
        return static_cast<std::size_t>(c.j) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(c.i);
    }
    Cell cell_at(std::size_t idx) const {
        return {static_cast<int>(idx % static_cast<std::size_t>(width_)),
                static_cast<int>(idx / static_cast<std::size_t>(width_))};
    }

    SemanticClass at(Cell c) const { return cells_[index(c)]; }
    void set(Cell c, SemanticClass v) { cells_[index(c)] = v; }
    /// Class at a world point; Unknown outside the grid.
    SemanticClass class_at(Vec2 p) const;

    void fill_rect(Cell lo, Cell hi_exclusive, SemanticClass v);

    /// Throws OutOfBounds when p is outside the grid.
    Cell world_to_grid(Vec2 p) const;
    Vec2 grid_to_world(Cell c) const;

    const std::vector<SemanticClass>& cells() const { return cells_; }

    friend bool operator==(const OccupancyGrid&, const OccupancyGrid&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    double resolution_ = 0.25;
    Vec2 origin_{};
    std::vector<SemanticClass> cells_;
};

struct GraphNode {
    int id = 0;
    Vec2 position;
    std::string label;

    friend bool operator==(const GraphNode&, const GraphNode&) = default;
};

struct GraphEdge {
    int u = 0;
    int v = 0;
    double length = 0.0;
    bool traversable = true;

    friend bool operator==(const GraphEdge&, const GraphEdge&) = default;
};

/// Undirected navigation skeleton over the grid.
struct NavGraph {
    std::vector<GraphNode> nodes;
    std::vector<GraphEdge> edges;

    const GraphNode* find(int id) const;
    /// Number of connected components over traversable edges.
    int component_count() const;

    friend bool operator==(const NavGraph&, const NavGraph&) = default;
};

struct SceneObject {
    std::string id;
    std::string category;
    Vec2 position;
    std::vector<Cell> footprint;
    /// Traversable cells with line of sight to some footprint cell, within
    /// the scene's visibility range. Derived; see compute_visible_regions.
    std::vector<Cell> visible_region;

    friend bool operator==(const SceneObject&, const SceneObject&) = default;
};

struct PoiEntry {
    std::string name;
    Pose2D entrance;
    double entrance_width = 1.0;

    friend bool operator==(const PoiEntry&, const PoiEntry&) = default;
};

/// Door centre pose; theta is the crossing direction.
struct Door {
    int id = 0;
    Pose2D pose;
    double width = 1.0;

    friend bool operator==(const Door&, const Door&) = default;
};

enum class RegionKind : std::uint8_t { Room, District };

/// Axis-aligned labelled area: a room indoors, a city block outdoors.
struct Region {
    std::string id;
    std::string label;
    RegionKind kind = RegionKind::Room;
    Vec2 min;
    Vec2 max;

    bool contains(Vec2 p) const { return p.x >= min.x && p.x < max.x && p.y >= min.y && p.y < max.y; }
    Vec2 center() const { return {(min.x + max.x) / 2.0, (min.y + max.y) / 2.0}; }

    friend bool operator==(const Region&, const Region&) = default;
};

enum class Domain : std::uint8_t { Indoor, Outdoor };

struct Scene {
    std::string id;
    Domain domain = Domain::Indoor;
    OccupancyGrid grid;
    NavGraph graph;
    std::vector<SceneObject> objects;
    std::vector<PoiEntry> pois;
    std::vector<Door> doors;
    std::vector<Cell> spawn_region;
    std::vector<Region> regions;
    std::map<std::string, std::string> metadata;
    double visibility_range = 3.0;

    /// Outdoor scenes plan over socially-compliant cells only.
    bool social_planning() const { return domain == Domain::Outdoor; }
    const Region* region_at(Vec2 p) const;

    friend bool operator==(const Scene&, const Scene&) = default;
};

enum class ViolationKind {
    NodeOutOfBounds,
    NodeOnObstacle,
    EdgeUnknownNode,
    EdgeSelfLoop,
    EdgeTooShort,
    DoorOutOfBounds,
    DoorNotOnDoorCell,
    SpawnOutOfBounds,
    SpawnNotCompliant,
    BadResolution,
};

std::string_view violation_name(ViolationKind k);

struct Violation {
    ViolationKind kind;
    std::string entity;

    std::string describe() const;
};

inline constexpr double kEdgeLengthEpsilon = 1e-6;

std::vector<Violation> validate_scene(const Scene& scene);

/// Fills every object's visible_region. Parallel over cells.
void compute_visible_regions(Scene& scene);
/// Single-threaded reference for compute_visible_regions.
void compute_visible_regions_serial(Scene& scene);

/// Case-insensitive exact match used for open-vocabulary categories.
bool label_equals(std::string_view a, std::string_view b);
std::string to_lower(std::string_view s);

}  // namespace navkit
