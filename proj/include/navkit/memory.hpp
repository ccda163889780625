#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "navkit/geometry.hpp"
#include "navkit/json_io.hpp"
#include "navkit/scene.hpp"

namespace navkit {

enum class LayerKind : std::uint8_t { Block, Road, Function, ObjectPoi };

const char* layer_name(LayerKind k);
LayerKind layer_from_name(const std::string& s);
/// Coarseness rank: Block 0, Road 1, Function 2, ObjectPoi 3.
int layer_rank(LayerKind k);

struct TopoNode {
    std::string id;
    LayerKind layer = LayerKind::Block;
    std::string label;
    std::string scene_id;
    Vec2 anchor;
    std::optional<std::string> parent;
    /// Scene entity the node was built from (region id, graph node id, object id, POI name).
    std::string source;
    friend bool operator==(const TopoNode&, const TopoNode&) = default;
};

struct TopoEdge {
    std::string u;
    std::string v;
    double cost = 0.0;
    double congestion = 1.0;
    bool open = true;
    double confidence = 1.0;
    double last_evidence_time = 0.0;

    double effective_cost() const { return cost * congestion; }
    friend bool operator==(const TopoEdge&, const TopoEdge&) = default;
};

enum class EvidenceKind : std::uint8_t { TraversedOk, Blocked, Congested };

struct Evidence {
    std::string u;
    std::string v;
    EvidenceKind kind = EvidenceKind::TraversedOk;
    double duration = 0.0;  // TraversedOk: seconds
    double factor = 1.0;    // Congested: > 1
    double timestamp = 0.0;
};

/// Metres per second used to turn a traversal duration into a cost.
inline constexpr double kNominalSpeed = 1.0;

struct IngestCounts {
    int nodes_added = 0;
    int nodes_updated = 0;
    int edges_added = 0;
    std::map<LayerKind, int> per_layer;
};

struct RouteResult {
    std::vector<TopoNode> road;         // Road-layer nodes from start to end
    std::vector<std::string> blocks;    // Block ids visited, consecutive duplicates merged
    double cost = 0.0;
};

/// Four-layer topological memory. Nodes and edges are keyed and iterated
/// in id order so every traversal is deterministic.
class TopoStore {
public:
    IngestCounts ingest_scene(const Scene& scene);

    void upsert_node(const TopoNode& node);
    /// Adds or replaces an edge between existing nodes of the same layer.
    void upsert_edge(const TopoEdge& edge);

    const TopoNode* node(const std::string& id) const;
    const TopoEdge* edge(const std::string& u, const std::string& v) const;
    /// Case-insensitive exact label match, ordered by id.
    std::vector<TopoNode> query_label(const std::string& label, std::optional<LayerKind> layer = std::nullopt) const;
    std::vector<TopoNode> layer_nodes(LayerKind layer) const;

    /// Nearest ancestor on the given layer, if any.
    std::optional<std::string> ancestor(const std::string& id, LayerKind layer) const;
    /// Road node used to enter the road layer from `id`: itself when it is a
    /// Road node, else the nearest Road node of the same scene (ties by id).
    std::optional<std::string> road_attachment(const std::string& id) const;

    /// Minimum-cost route over open Road edges. Throws UnknownNode or Unreachable.
    RouteResult route(const std::string& from, const std::string& to) const;

    /// Throws UnknownEdge.
    const TopoEdge& apply_evidence(const Evidence& e);

    /// Ids of nodes whose parent is missing or not strictly coarser.
    std::vector<std::string> layer_violations() const;

    const std::map<std::string, TopoNode>& nodes() const { return nodes_; }
    const std::map<std::pair<std::string, std::string>, TopoEdge>& edges() const { return edges_; }
    bool empty() const { return nodes_.empty(); }

    Json to_json() const;
    static TopoStore from_json(const Json& j, const std::string& location = "memory");
    void snapshot(const std::filesystem::path& path) const;
    /// Replaces the store with the file's content; leaves it untouched on error.
    void load(const std::filesystem::path& path);

    friend bool operator==(const TopoStore&, const TopoStore&) = default;

private:
    static std::pair<std::string, std::string> key(const std::string& a, const std::string& b);

    std::map<std::string, TopoNode> nodes_;
    std::map<std::pair<std::string, std::string>, TopoEdge> edges_;
};

inline constexpr int kMemorySchemaVersion = 1;

struct MemoryEntry {
    int step = 0;
    double time = 0.0;
    Pose2D pose;
    std::vector<std::string> visible;
    std::vector<std::string> people;
    friend bool operator==(const MemoryEntry&, const MemoryEntry&) = default;
};

/// Short-term ring of recent observation summaries.
class EpisodicBuffer {
public:
    explicit EpisodicBuffer(std::size_t capacity = 64);

    void push(MemoryEntry e);
    void clear() { entries_.clear(); }
    std::size_t size() const { return entries_.size(); }
    std::size_t capacity() const { return capacity_; }
    const std::deque<MemoryEntry>& entries() const { return entries_; }
    /// Most recent entry that saw `id`, if any.
    std::optional<MemoryEntry> last_seen(const std::string& id) const;

private:
    std::size_t capacity_;
    std::deque<MemoryEntry> entries_;
};

/// Centre of the traversable cell nearest to p (p's own cell when traversable).
std::optional<Vec2> snap_to_traversable(const OccupancyGrid& grid, Vec2 p, int max_radius = 40);

}  // namespace navkit
