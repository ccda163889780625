#include "navkit/memory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <set>

#include "navkit/error.hpp"

namespace navkit {

const char* layer_name(LayerKind k) {
    switch (k) {
        case LayerKind::Block: return "block";
        case LayerKind::Road: return "road";
        case LayerKind::Function: return "function";
        case LayerKind::ObjectPoi: return "object_poi";
    }
    return "block";
}

LayerKind layer_from_name(const std::string& s) {
    for (auto k : {LayerKind::Block, LayerKind::Road, LayerKind::Function, LayerKind::ObjectPoi}) {
        if (s == layer_name(k)) return k;
    }
    throw Error(ErrorCode::InvalidParams, "unknown layer '" + s + "'");
}

int layer_rank(LayerKind k) {
    switch (k) {
        case LayerKind::Block: return 0;
        case LayerKind::Road: return 1;
        case LayerKind::Function: return 2;
        case LayerKind::ObjectPoi: return 3;
    }
    return 3;
}

std::optional<Vec2> snap_to_traversable(const OccupancyGrid& grid, Vec2 p, int max_radius) {
    if (grid.size() == 0) return std::nullopt;
    const double res = grid.resolution();
    const Cell c{static_cast<int>(std::floor((p.x - grid.origin().x) / res)),
                 static_cast<int>(std::floor((p.y - grid.origin().y) / res))};
    if (grid.in_bounds(c) && is_traversable(grid.at(c))) return grid.grid_to_world(c);
    for (int r = 1; r <= max_radius; ++r) {
        std::optional<Cell> best;
        double best_d = std::numeric_limits<double>::infinity();
        for (int dj = -r; dj <= r; ++dj) {
            for (int di = -r; di <= r; ++di) {
                if (std::max(std::abs(di), std::abs(dj)) != r) continue;
                const Cell n{c.i + di, c.j + dj};
                if (!grid.in_bounds(n) || !is_traversable(grid.at(n))) continue;
                const double d = distance(grid.grid_to_world(n), p);
                if (d < best_d) {
                    best_d = d;
                    best = n;
                }
            }
        }
        if (best) return grid.grid_to_world(*best);
    }
    return std::nullopt;
}

std::pair<std::string, std::string> TopoStore::key(const std::string& a, const std::string& b) {
    return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
}

void TopoStore::upsert_node(const TopoNode& node) {
    if (node.id.empty()) throw Error(ErrorCode::InvalidParams, "node id must not be empty");
    nodes_[node.id] = node;
}

void TopoStore::upsert_edge(const TopoEdge& edge) {
    const auto* a = node(edge.u);
    const auto* b = node(edge.v);
    if (!a || !b) throw Error(ErrorCode::UnknownNode, "edge endpoint missing: " + edge.u + " / " + edge.v);
    if (a->layer != b->layer) throw Error(ErrorCode::InvalidParams, "edges join nodes of one layer");
    if (!(edge.cost >= 0.0)) throw Error(ErrorCode::InvalidParams, "edge cost must be nonnegative");
    TopoEdge e = edge;
    std::tie(e.u, e.v) = key(edge.u, edge.v);
    edges_[{e.u, e.v}] = e;
}

const TopoNode* TopoStore::node(const std::string& id) const {
    const auto it = nodes_.find(id);
    return it == nodes_.end() ? nullptr : &it->second;
}

const TopoEdge* TopoStore::edge(const std::string& u, const std::string& v) const {
    const auto it = edges_.find(key(u, v));
    return it == edges_.end() ? nullptr : &it->second;
}

std::vector<TopoNode> TopoStore::query_label(const std::string& label, std::optional<LayerKind> layer) const {
    std::vector<TopoNode> out;
    for (const auto& [id, n] : nodes_) {
        if (layer && n.layer != *layer) continue;
        if (label_equals(n.label, label)) out.push_back(n);
    }
    return out;
}

std::vector<TopoNode> TopoStore::layer_nodes(LayerKind layer) const {
    std::vector<TopoNode> out;
    for (const auto& [id, n] : nodes_) {
        if (n.layer == layer) out.push_back(n);
    }
    return out;
}

std::optional<std::string> TopoStore::ancestor(const std::string& id, LayerKind layer) const {
    const TopoNode* n = node(id);
    std::set<std::string> seen;
    while (n && n->parent && seen.insert(n->id).second) {
        n = node(*n->parent);
        if (n && n->layer == layer) return n->id;
    }
    return std::nullopt;
}

std::optional<std::string> TopoStore::road_attachment(const std::string& id) const {
    const TopoNode* n = node(id);
    if (!n) return std::nullopt;
    if (n->layer == LayerKind::Road) return n->id;
    std::optional<std::string> best;
    double best_d = std::numeric_limits<double>::infinity();
    for (const auto& [rid, r] : nodes_) {
        if (r.layer != LayerKind::Road || r.scene_id != n->scene_id) continue;
        const double d = distance(r.anchor, n->anchor);
        if (d < best_d) {
            best_d = d;
            best = rid;
        }
    }
    return best;
}

RouteResult TopoStore::route(const std::string& from, const std::string& to) const {
    if (!node(from)) throw Error(ErrorCode::UnknownNode, "unknown node '" + from + "'");
    if (!node(to)) throw Error(ErrorCode::UnknownNode, "unknown node '" + to + "'");
    const auto a = road_attachment(from);
    const auto b = road_attachment(to);
    if (!a || !b) throw Error(ErrorCode::Unreachable, "no road attachment for " + from + " or " + to);

    std::map<std::string, std::vector<std::pair<std::string, double>>> adj;
    for (const auto& [k, e] : edges_) {
        if (!e.open || node(e.u)->layer != LayerKind::Road) continue;
        adj[e.u].emplace_back(e.v, e.effective_cost());
        adj[e.v].emplace_back(e.u, e.effective_cost());
    }
    std::map<std::string, double> dist;
    std::map<std::string, std::string> prev;
    using Entry = std::pair<double, std::string>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
    dist[*a] = 0.0;
    open.push({0.0, *a});
    while (!open.empty()) {
        const auto [d, u] = open.top();
        open.pop();
        if (d > dist[u]) continue;
        if (u == *b) break;
        for (const auto& [v, w] : adj[u]) {
            const double nd = d + w;
            const auto it = dist.find(v);
            if (it == dist.end() || nd < it->second) {
                dist[v] = nd;
                prev[v] = u;
                open.push({nd, v});
            }
        }
    }
    if (!dist.count(*b)) throw Error(ErrorCode::Unreachable, "no open road route from " + from + " to " + to);
    RouteResult out;
    out.cost = dist[*b];
    std::vector<std::string> ids{*b};
    while (ids.back() != *a) ids.push_back(prev.at(ids.back()));
    std::reverse(ids.begin(), ids.end());
    for (const auto& id : ids) {
        out.road.push_back(*node(id));
        const auto blk = ancestor(id, LayerKind::Block);
        if (blk && (out.blocks.empty() || out.blocks.back() != *blk)) out.blocks.push_back(*blk);
    }
    return out;
}

const TopoEdge& TopoStore::apply_evidence(const Evidence& ev) {
    const auto it = edges_.find(key(ev.u, ev.v));
    if (it == edges_.end()) throw Error(ErrorCode::UnknownEdge, "no edge " + ev.u + " -- " + ev.v);
    TopoEdge& e = it->second;
    switch (ev.kind) {
        case EvidenceKind::Blocked:
            e.open = false;
            e.confidence = std::max(0.05, e.confidence * 0.5);
            break;
        case EvidenceKind::TraversedOk: {
            if (!(ev.duration >= 0.0)) throw Error(ErrorCode::InvalidParams, "traversal duration must be nonnegative");
            e.open = true;
            e.cost = 0.9 * e.cost + 0.1 * (ev.duration * kNominalSpeed);
            e.confidence = std::min(1.0, e.confidence + 0.1);
            break;
        }
        case EvidenceKind::Congested:
            if (!(ev.factor > 1.0)) throw Error(ErrorCode::InvalidParams, "congestion factor must exceed 1");
            e.congestion = 0.5 * e.congestion + 0.5 * ev.factor;
            break;
    }
    e.last_evidence_time = ev.timestamp;
    return e;
}

std::vector<std::string> TopoStore::layer_violations() const {
    std::vector<std::string> out;
    for (const auto& [id, n] : nodes_) {
        if (!n.parent) continue;
        const TopoNode* p = node(*n.parent);
        if (!p || layer_rank(p->layer) >= layer_rank(n.layer)) out.push_back(id);
    }
    return out;
}

// ------------------------------------------------------------------ ingest

namespace {

std::string node_id(const Scene& scene, LayerKind layer, const std::string& source) {
    return scene.id + "/" + layer_name(layer) + "/" + source;
}

const Region* containing_region(const Scene& scene, Vec2 p) {
    for (const auto& r : scene.regions) {
        if (r.contains(p)) return &r;
    }
    return nullptr;
}

}  // namespace

IngestCounts TopoStore::ingest_scene(const Scene& scene) {
    IngestCounts counts;
    auto put = [&](TopoNode n) {
        ++counts.per_layer[n.layer];
        const auto it = nodes_.find(n.id);
        if (it == nodes_.end()) {
            ++counts.nodes_added;
        } else if (!(it->second == n)) {
            ++counts.nodes_updated;
        }
        nodes_[n.id] = std::move(n);
    };
    auto block_of = [&](Vec2 p) -> std::optional<std::string> {
        const Region* r = containing_region(scene, p);
        if (!r) return std::nullopt;
        return node_id(scene, LayerKind::Block, r->id);
    };

    std::map<std::string, std::string> function_of_region;
    for (const auto& r : scene.regions) {
        const auto anchor = snap_to_traversable(scene.grid, r.center());
        if (!anchor) continue;
        put({node_id(scene, LayerKind::Block, r.id), LayerKind::Block, r.id, scene.id, *anchor, std::nullopt, r.id});
        if (r.kind != RegionKind::Room) continue;
        Vec2 fa = *anchor;
        for (const auto& g : scene.graph.nodes) {
            if (g.label == r.label && r.contains(g.position) && is_traversable(scene.grid.class_at(g.position))) {
                fa = g.position;
                break;
            }
        }
        const std::string fid = node_id(scene, LayerKind::Function, r.id);
        put({fid, LayerKind::Function, r.label, scene.id, fa, node_id(scene, LayerKind::Block, r.id), r.id});
        function_of_region[r.id] = fid;
    }

    for (const auto& g : scene.graph.nodes) {
        if (!is_traversable(scene.grid.class_at(g.position))) continue;
        put({node_id(scene, LayerKind::Road, std::to_string(g.id)), LayerKind::Road, g.label, scene.id, g.position,
             block_of(g.position), std::to_string(g.id)});
    }
    for (const auto& e : scene.graph.edges) {
        const std::string u = node_id(scene, LayerKind::Road, std::to_string(e.u));
        const std::string v = node_id(scene, LayerKind::Road, std::to_string(e.v));
        if (!node(u) || !node(v) || u == v) continue;
        if (edge(u, v)) continue;  // keep learned state on re-ingest
        TopoEdge te;
        te.u = u;
        te.v = v;
        te.cost = e.length;
        te.open = e.traversable;
        upsert_edge(te);
        ++counts.edges_added;
    }

    auto object_parent = [&](Vec2 p) -> std::optional<std::string> {
        const Region* r = containing_region(scene, p);
        if (!r) return std::nullopt;
        const auto f = function_of_region.find(r->id);
        if (f != function_of_region.end()) return f->second;
        return node_id(scene, LayerKind::Block, r->id);
    };
    for (const auto& o : scene.objects) {
        std::optional<Vec2> anchor;
        double best = std::numeric_limits<double>::infinity();
        for (const auto& c : o.visible_region) {
            const double d = distance(scene.grid.grid_to_world(c), o.position);
            if (d < best) {
                best = d;
                anchor = scene.grid.grid_to_world(c);
            }
        }
        if (!anchor) anchor = snap_to_traversable(scene.grid, o.position);
        if (!anchor) continue;
        put({node_id(scene, LayerKind::ObjectPoi, o.id), LayerKind::ObjectPoi, o.category, scene.id, *anchor,
             object_parent(o.position), o.id});
    }
    for (std::size_t k = 0; k < scene.pois.size(); ++k) {
        const auto& p = scene.pois[k];
        const auto anchor = snap_to_traversable(scene.grid, p.entrance.position(), 0);
        if (!anchor) continue;
        put({node_id(scene, LayerKind::ObjectPoi, "poi_" + std::to_string(k)), LayerKind::ObjectPoi, p.name, scene.id,
             p.entrance.position(), object_parent(p.entrance.position()), p.name});
    }
    return counts;
}

// ------------------------------------------------------------------ json

Json TopoStore::to_json() const {
    Json nodes = Json::array();
    for (const auto& [id, n] : nodes_) {
        nodes.push_back({{"id", n.id},
                         {"layer", layer_name(n.layer)},
                         {"label", n.label},
                         {"scene_id", n.scene_id},
                         {"anchor", vec_to_json(n.anchor)},
                         {"parent", n.parent ? Json(*n.parent) : Json(nullptr)},
                         {"source", n.source}});
    }
    Json edges = Json::array();
    for (const auto& [k, e] : edges_) {
        edges.push_back({{"u", e.u},
                         {"v", e.v},
                         {"cost", e.cost},
                         {"congestion", e.congestion},
                         {"open", e.open},
                         {"confidence", e.confidence},
                         {"last_evidence_time", e.last_evidence_time}});
    }
    return {{"schema_version", kMemorySchemaVersion}, {"nodes", nodes}, {"edges", edges}};
}

TopoStore TopoStore::from_json(const Json& j, const std::string& location) {
    check_schema_version(j, kMemorySchemaVersion, location);
    TopoStore s;
    const auto& nodes = json_member(j, "nodes", location);
    if (!nodes.is_array()) throw SchemaError(location + ".nodes", "expected an array");
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        const std::string loc = location + ".nodes[" + std::to_string(k) + "]";
        const auto& jn = nodes[k];
        TopoNode n;
        n.id = json_get<std::string>(jn, "id", loc);
        try {
            n.layer = layer_from_name(json_get<std::string>(jn, "layer", loc));
        } catch (const Error& e) {
            throw SchemaError(loc + ".layer", e.what());
        }
        n.label = json_get<std::string>(jn, "label", loc);
        n.scene_id = json_get<std::string>(jn, "scene_id", loc);
        n.anchor = vec_from_json(json_member(jn, "anchor", loc), loc + ".anchor");
        const auto& par = json_member(jn, "parent", loc);
        if (!par.is_null()) n.parent = json_get<std::string>(jn, "parent", loc);
        n.source = json_get<std::string>(jn, "source", loc);
        if (n.id.empty()) throw SchemaError(loc + ".id", "empty id");
        if (s.nodes_.count(n.id)) throw SchemaError(loc + ".id", "duplicate id '" + n.id + "'");
        s.nodes_[n.id] = n;
    }
    const auto& edges = json_member(j, "edges", location);
    if (!edges.is_array()) throw SchemaError(location + ".edges", "expected an array");
    for (std::size_t k = 0; k < edges.size(); ++k) {
        const std::string loc = location + ".edges[" + std::to_string(k) + "]";
        const auto& je = edges[k];
        TopoEdge e;
        e.u = json_get<std::string>(je, "u", loc);
        e.v = json_get<std::string>(je, "v", loc);
        e.cost = json_get<double>(je, "cost", loc);
        e.congestion = json_get<double>(je, "congestion", loc);
        e.open = json_get<bool>(je, "open", loc);
        e.confidence = json_get<double>(je, "confidence", loc);
        e.last_evidence_time = json_get<double>(je, "last_evidence_time", loc);
        try {
            s.upsert_edge(e);
        } catch (const Error& err) {
            throw SchemaError(loc, err.what());
        }
    }
    return s;
}

void TopoStore::snapshot(const std::filesystem::path& path) const { write_json_file(path, to_json()); }

void TopoStore::load(const std::filesystem::path& path) {
    TopoStore loaded = from_json(read_json_file(path), path.string());
    *this = std::move(loaded);
}

// ------------------------------------------------------------ episodic buffer

EpisodicBuffer::EpisodicBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw Error(ErrorCode::InvalidParams, "buffer capacity must be positive");
}

void EpisodicBuffer::push(MemoryEntry e) {
    entries_.push_back(std::move(e));
    while (entries_.size() > capacity_) entries_.pop_front();
}

std::optional<MemoryEntry> EpisodicBuffer::last_seen(const std::string& id) const {
    for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
        if (std::find(it->visible.begin(), it->visible.end(), id) != it->visible.end()) return *it;
    }
    return std::nullopt;
}

}  // namespace navkit
