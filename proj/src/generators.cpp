#include "navkit/generators.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <queue>
#include <sstream>

#include "navkit/error.hpp"
#include "navkit/rng.hpp"

namespace navkit {

namespace {

int to_cells(double meters, double res) { return std::max(1, static_cast<int>(std::lround(meters / res))); }

std::string fmt_double(double v) {
    std::ostringstream out;
    out << v;
    return out.str();
}

class GraphBuilder {
public:
    explicit GraphBuilder(NavGraph& g) : g_(g) {}

    int node(Vec2 p, const std::string& label) {
        for (const auto& n : g_.nodes) {
            if (distance(n.position, p) < 1e-9) return n.id;
        }
        const int id = static_cast<int>(g_.nodes.size());
        g_.nodes.push_back({id, p, label});
        return id;
    }

    void edge(int u, int v) {
        if (u == v) return;
        for (const auto& e : g_.edges) {
            if ((e.u == u && e.v == v) || (e.u == v && e.v == u)) return;
        }
        g_.edges.push_back({u, v, distance(g_.find(u)->position, g_.find(v)->position), true});
    }

private:
    NavGraph& g_;
};

}  // namespace

// ------------------------------------------------------------------ urban

Scene gen_urban_block(std::uint64_t seed, const UrbanParams& params) {
    const auto& p = params;
    if (!(p.block_size > 0 && p.road_width > 0 && p.sidewalk_width > 0 && p.resolution > 0) ||
        p.crosswalk_count < 0 || p.lawn_patches < 0) {
        throw Error(ErrorCode::InvalidParams, "urban parameters must be positive");
    }
    if (p.block_size < 2.0 * (p.road_width + p.sidewalk_width)) {
        throw Error(ErrorCode::InvalidParams, "block_size must be at least 2*(road_width + sidewalk_width)");
    }
    Rng rng(derive_seed(seed, "gen_urban_block", 0));
    const double res = p.resolution;
    const int B = to_cells(p.block_size, res);
    const int R = to_cells(p.road_width, res);
    const int S = to_cells(p.sidewalk_width, res);
    const int W = 2 * B + R;

    Scene scene;
    scene.id = "urban_" + std::to_string(seed);
    scene.domain = Domain::Outdoor;
    scene.grid = OccupancyGrid(W, W, res, {0.0, 0.0}, SemanticClass::VehicleRoad);
    auto& grid = scene.grid;

    struct Block {
        const char* name;
        int ox, oy;
    };
    const Block blocks[4] = {{"block_sw", 0, 0}, {"block_se", B + R, 0}, {"block_nw", 0, B + R}, {"block_ne", B + R, B + R}};

    const int core = B - 2 * S;
    for (const auto& b : blocks) {
        grid.fill_rect({b.ox, b.oy}, {b.ox + B, b.oy + B}, SemanticClass::Sidewalk);
        grid.fill_rect({b.ox + S, b.oy + S}, {b.ox + B - S, b.oy + B - S}, SemanticClass::Obstacle);
        for (int k = 0; k < p.lawn_patches; ++k) {
            const int len = std::max(1, static_cast<int>(core * rng.uniform(0.25, 0.6)));
            const int depth = std::max(1, static_cast<int>(core * rng.uniform(0.2, 0.45)));
            const int along = static_cast<int>(rng.below(static_cast<std::uint64_t>(std::max(1, core - len + 1))));
            const int side = static_cast<int>(rng.below(4));
            const int cx = b.ox + S;
            const int cy = b.oy + S;
            switch (side) {
                case 0: grid.fill_rect({cx + along, cy}, {cx + along + len, cy + depth}, SemanticClass::Lawn); break;
                case 1: grid.fill_rect({cx + along, cy + core - depth}, {cx + along + len, cy + core}, SemanticClass::Lawn); break;
                case 2: grid.fill_rect({cx, cy + along}, {cx + depth, cy + along + len}, SemanticClass::Lawn); break;
                default: grid.fill_rect({cx + core - depth, cy + along}, {cx + core, cy + along + len}, SemanticClass::Lawn); break;
            }
        }
        scene.regions.push_back({b.name, b.name, RegionKind::District,
                                 grid.grid_to_world({b.ox, b.oy}) - Vec2{res / 2, res / 2},
                                 grid.grid_to_world({b.ox + B, b.oy + B}) - Vec2{res / 2, res / 2}});
    }

    // Sidewalk ring centrelines, one list of (along, node) per block side.
    GraphBuilder gb(scene.graph);
    const int rs = S / 2;
    auto ring_point = [&](const Block& b, int lx, int ly) { return grid.grid_to_world({b.ox + lx, b.oy + ly}); };
    // side order: 0 south (y=rs), 1 north (y=B-1-rs), 2 west (x=rs), 3 east (x=B-1-rs)
    std::map<std::pair<int, int>, std::vector<std::pair<int, int>>> side_nodes;
    for (int bi = 0; bi < 4; ++bi) {
        const auto& b = blocks[bi];
        const int lo = rs;
        const int hi = B - 1 - rs;
        const int c00 = gb.node(ring_point(b, lo, lo), "corner");
        const int c10 = gb.node(ring_point(b, hi, lo), "corner");
        const int c11 = gb.node(ring_point(b, hi, hi), "corner");
        const int c01 = gb.node(ring_point(b, lo, hi), "corner");
        side_nodes[{bi, 0}] = {{lo, c00}, {hi, c10}};
        side_nodes[{bi, 1}] = {{lo, c01}, {hi, c11}};
        side_nodes[{bi, 2}] = {{lo, c00}, {hi, c01}};
        side_nodes[{bi, 3}] = {{lo, c10}, {hi, c11}};
    }

    // arm: (block a, side of a, block b, side of b, vertical road?)
    struct Arm {
        int a, side_a, b, side_b;
        bool vertical;
    };
    const Arm arms[4] = {{0, 3, 1, 2, true}, {1, 1, 3, 0, false}, {2, 3, 3, 2, true}, {0, 1, 2, 0, false}};
    std::vector<int> per_arm(4, 0);
    for (int k = 0; k < p.crosswalk_count; ++k) ++per_arm[static_cast<std::size_t>(k % 4)];
    const int cw = S;
    int crossings = 0;
    for (int ai = 0; ai < 4; ++ai) {
        const auto& arm = arms[ai];
        const int m = per_arm[static_cast<std::size_t>(ai)];
        for (int j = 0; j < m; ++j) {
            const double frac = (j + 1.0) / (m + 1.0);
            int uc = static_cast<int>(frac * B + rng.uniform(-0.1, 0.1) * B);
            uc = std::clamp(uc, std::max(rs, cw / 2), std::min(B - 1 - rs, B - cw + cw / 2 - 1));
            const Block& ba = blocks[arm.a];
            const Block& bb = blocks[arm.b];
            int na = 0;
            int nb = 0;
            if (arm.vertical) {
                grid.fill_rect({B, ba.oy + uc - cw / 2}, {B + R, ba.oy + uc - cw / 2 + cw}, SemanticClass::Crosswalk);
                na = gb.node(ring_point(ba, B - 1 - rs, uc), "crosswalk");
                nb = gb.node(ring_point(bb, rs, uc), "crosswalk");
            } else {
                grid.fill_rect({ba.ox + uc - cw / 2, B}, {ba.ox + uc - cw / 2 + cw, B + R}, SemanticClass::Crosswalk);
                na = gb.node(ring_point(ba, uc, B - 1 - rs), "crosswalk");
                nb = gb.node(ring_point(bb, uc, rs), "crosswalk");
            }
            side_nodes[{arm.a, arm.side_a}].push_back({uc, na});
            side_nodes[{arm.b, arm.side_b}].push_back({uc, nb});
            gb.edge(na, nb);
            ++crossings;
        }
    }
    for (auto& [key, list] : side_nodes) {
        std::sort(list.begin(), list.end());
        for (std::size_t k = 1; k < list.size(); ++k) gb.edge(list[k - 1].second, list[k].second);
    }

    // Storefront entrances: sidewalk cells facing a building wall.
    static const std::vector<std::string> kPoiNames = {"tea shop", "pharmacy", "bakery", "cafe", "bookstore", "bank"};
    for (const auto& b : blocks) {
        int placed = 0;
        for (int attempt = 0; attempt < 200 && placed < 2; ++attempt) {
            const int side = static_cast<int>(rng.below(4));
            const int along = S + static_cast<int>(rng.below(static_cast<std::uint64_t>(core)));
            Cell walk{};
            Cell wall{};
            double facing = 0.0;
            switch (side) {
                case 0: walk = {b.ox + along, b.oy + S - 1}; wall = {walk.i, walk.j + 1}; facing = kPi / 2; break;
                case 1: walk = {b.ox + along, b.oy + B - S}; wall = {walk.i, walk.j - 1}; facing = -kPi / 2; break;
                case 2: walk = {b.ox + S - 1, b.oy + along}; wall = {walk.i + 1, walk.j}; facing = 0.0; break;
                default: walk = {b.ox + B - S, b.oy + along}; wall = {walk.i - 1, walk.j}; facing = kPi; break;
            }
            if (grid.at(walk) != SemanticClass::Sidewalk || grid.at(wall) != SemanticClass::Obstacle) continue;
            bool clash = false;
            for (const auto& poi : scene.pois) {
                if (distance(poi.entrance.position(), grid.grid_to_world(walk)) < 2.0) clash = true;
            }
            if (clash) continue;
            PoiEntry poi;
            poi.name = kPoiNames[static_cast<std::size_t>(rng.below(kPoiNames.size()))];
            poi.entrance = Pose2D(grid.grid_to_world(walk), facing);
            poi.entrance_width = rng.uniform(0.8, 1.6);
            scene.pois.push_back(poi);
            ++placed;
        }
    }

    for (std::size_t k = 0; k < grid.size(); ++k) {
        const auto c = grid.cells()[k];
        if (c == SemanticClass::Sidewalk || c == SemanticClass::Crosswalk) scene.spawn_region.push_back(grid.cell_at(k));
    }
    scene.metadata["generator"] = "urban_block";
    scene.metadata["seed"] = std::to_string(seed);
    scene.metadata["crosswalks"] = std::to_string(crossings);
    scene.metadata["sidewalk_components"] = std::to_string(scene.graph.component_count());
    scene.metadata["block_size"] = fmt_double(p.block_size);
    scene.metadata["road_width"] = fmt_double(p.road_width);
    scene.metadata["sidewalk_width"] = fmt_double(p.sidewalk_width);
    scene.metadata["lawn_patches"] = std::to_string(p.lawn_patches);
    compute_visible_regions(scene);
    return scene;
}

// -------------------------------------------------------------- apartment

const std::vector<std::string>& room_affinity(const std::string& room_label) {
    static const std::map<std::string, std::vector<std::string>> table = {
        {"kitchen", {"oven", "fridge", "sink", "table"}},
        {"living room", {"sofa", "tv", "table", "bookshelf"}},
        {"bedroom", {"bed", "wardrobe", "desk"}},
        {"bathroom", {"toilet", "sink"}},
        {"study", {"desk", "chair", "bookshelf"}},
        {"dining room", {"table", "chair"}},
        {"office", {"desk", "chair"}},
        {"laundry", {"sink"}},
    };
    static const std::vector<std::string> empty;
    const auto it = table.find(room_label);
    return it == table.end() ? empty : it->second;
}

namespace {

struct RoomRect {
    int x0, y0, w, h;  // interior, in cells
    bool contains(Cell c) const { return c.i >= x0 && c.i < x0 + w && c.j >= y0 && c.j < y0 + h; }
    Cell center() const { return {x0 + w / 2, y0 + h / 2}; }
};

bool room_connected(const OccupancyGrid& grid, const RoomRect& r) {
    const Cell start = r.center();
    if (grid.at(start) != SemanticClass::IndoorFloor) return false;
    std::vector<unsigned char> seen(static_cast<std::size_t>(r.w * r.h), 0);
    auto slot = [&](Cell c) { return static_cast<std::size_t>((c.j - r.y0) * r.w + (c.i - r.x0)); };
    std::queue<Cell> q;
    q.push(start);
    seen[slot(start)] = 1;
    while (!q.empty()) {
        const Cell c = q.front();
        q.pop();
        const Cell nbrs[4] = {{c.i + 1, c.j}, {c.i - 1, c.j}, {c.i, c.j + 1}, {c.i, c.j - 1}};
        for (const auto& n : nbrs) {
            if (!r.contains(n) || seen[slot(n)] || grid.at(n) != SemanticClass::IndoorFloor) continue;
            seen[slot(n)] = 1;
            q.push(n);
        }
    }
    for (int j = r.y0; j < r.y0 + r.h; ++j) {
        for (int i = r.x0; i < r.x0 + r.w; ++i) {
            if (grid.at({i, j}) == SemanticClass::IndoorFloor && !seen[slot({i, j})]) return false;
        }
    }
    return true;
}

}  // namespace

Scene gen_apartment(std::uint64_t seed, const ApartmentParams& params) {
    const auto& p = params;
    if (p.rooms < 2) throw Error(ErrorCode::InvalidParams, "apartment needs at least 2 rooms");
    if (!(p.door_width > 0.0) || p.door_width > 3.0 || p.objects_per_room < 0 || !(p.resolution > 0.0)) {
        throw Error(ErrorCode::InvalidParams, "invalid apartment parameters");
    }
    if (p.objects_per_room > 0 && p.categories.empty()) {
        throw Error(ErrorCode::InvalidParams, "object categories must be nonempty");
    }
    Rng rng(derive_seed(seed, "gen_apartment", 0));
    const double res = p.resolution;
    const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(p.rooms))));
    const int rows = (p.rooms + cols - 1) / cols;
    std::vector<int> widths(static_cast<std::size_t>(cols));
    std::vector<int> heights(static_cast<std::size_t>(rows));
    for (auto& w : widths) w = to_cells(rng.uniform(4.0, 6.0), res);
    for (auto& h : heights) h = to_cells(rng.uniform(4.0, 6.0), res);
    std::vector<int> x0(static_cast<std::size_t>(cols));
    std::vector<int> y0(static_cast<std::size_t>(rows));
    int acc = 1;
    for (int c = 0; c < cols; ++c) {
        x0[static_cast<std::size_t>(c)] = acc;
        acc += widths[static_cast<std::size_t>(c)] + 1;
    }
    const int W = acc;
    acc = 1;
    for (int r = 0; r < rows; ++r) {
        y0[static_cast<std::size_t>(r)] = acc;
        acc += heights[static_cast<std::size_t>(r)] + 1;
    }
    const int H = acc;

    Scene scene;
    scene.id = "apartment_" + std::to_string(seed);
    scene.domain = Domain::Indoor;
    scene.grid = OccupancyGrid(W, H, res, {0.0, 0.0}, SemanticClass::Obstacle);
    auto& grid = scene.grid;

    static const std::vector<std::string> kLabels = {"living room", "kitchen", "bedroom", "bathroom",
                                                     "study",       "dining room", "office", "laundry"};
    std::vector<RoomRect> rooms;
    std::vector<std::string> labels;
    for (int k = 0; k < p.rooms; ++k) {
        const int c = k % cols;
        const int r = k / cols;
        RoomRect rr{x0[static_cast<std::size_t>(c)], y0[static_cast<std::size_t>(r)], widths[static_cast<std::size_t>(c)],
                    heights[static_cast<std::size_t>(r)]};
        grid.fill_rect({rr.x0, rr.y0}, {rr.x0 + rr.w, rr.y0 + rr.h}, SemanticClass::IndoorFloor);
        rooms.push_back(rr);
        std::string label = kLabels[static_cast<std::size_t>(k) % kLabels.size()];
        if (k >= static_cast<int>(kLabels.size())) label += " " + std::to_string(k / kLabels.size() + 1);
        labels.push_back(label);
        const Vec2 lo = grid.grid_to_world({rr.x0, rr.y0}) - Vec2{res / 2, res / 2};
        scene.regions.push_back({"room_" + std::to_string(k), label, RegionKind::Room, lo,
                                 lo + Vec2{rr.w * res, rr.h * res}});
    }

    // Candidate doors between grid neighbours, then a random spanning tree.
    std::vector<std::pair<int, int>> adj;
    for (int k = 0; k < p.rooms; ++k) {
        if (k % cols + 1 < cols && k + 1 < p.rooms) adj.push_back({k, k + 1});
        if (k + cols < p.rooms) adj.push_back({k, k + cols});
    }
    rng.shuffle(adj);
    std::vector<int> uf(static_cast<std::size_t>(p.rooms));
    std::iota(uf.begin(), uf.end(), 0);
    auto root = [&](int x) {
        while (uf[static_cast<std::size_t>(x)] != x) x = uf[static_cast<std::size_t>(x)];
        return x;
    };
    std::vector<std::pair<int, int>> chosen;
    std::vector<std::pair<int, int>> spare;
    for (const auto& e : adj) {
        const int a = root(e.first);
        const int b = root(e.second);
        if (a != b) {
            uf[static_cast<std::size_t>(a)] = b;
            chosen.push_back(e);
        } else {
            spare.push_back(e);
        }
    }
    if (!spare.empty()) chosen.push_back(spare.front());

    GraphBuilder gb(scene.graph);
    std::vector<int> room_node;
    for (int k = 0; k < p.rooms; ++k) {
        room_node.push_back(gb.node(grid.grid_to_world(rooms[static_cast<std::size_t>(k)].center()), labels[static_cast<std::size_t>(k)]));
    }
    const int dw = to_cells(p.door_width, res);
    std::vector<std::vector<Cell>> door_cells_of_room(static_cast<std::size_t>(p.rooms));
    for (const auto& [a, b] : chosen) {
        const auto& ra = rooms[static_cast<std::size_t>(a)];
        const bool horizontal = (b == a + 1);
        const int span = horizontal ? ra.h : ra.w;
        const int margin = 2;
        const int free = span - 2 * margin - dw;
        if (free < 0) throw Error(ErrorCode::InvalidParams, "door_width too large for room size");
        const int start = margin + static_cast<int>(rng.below(static_cast<std::uint64_t>(free + 1)));
        std::vector<Cell> cells;
        for (int k = 0; k < dw; ++k) {
            cells.push_back(horizontal ? Cell{ra.x0 + ra.w, ra.y0 + start + k} : Cell{ra.x0 + start + k, ra.y0 + ra.h});
        }
        for (const auto& c : cells) grid.set(c, SemanticClass::Door);
        Door door;
        door.id = static_cast<int>(scene.doors.size());
        door.pose = Pose2D(grid.grid_to_world(cells[cells.size() / 2]), horizontal ? 0.0 : kPi / 2);
        door.width = dw * res;
        scene.doors.push_back(door);
        const int dn = gb.node(door.pose.position(), "door");
        gb.edge(room_node[static_cast<std::size_t>(a)], dn);
        gb.edge(dn, room_node[static_cast<std::size_t>(b)]);
        door_cells_of_room[static_cast<std::size_t>(a)].insert(door_cells_of_room[static_cast<std::size_t>(a)].end(), cells.begin(), cells.end());
        door_cells_of_room[static_cast<std::size_t>(b)].insert(door_cells_of_room[static_cast<std::size_t>(b)].end(), cells.begin(), cells.end());
    }

    // Furniture against the walls, keeping door approaches and centres free.
    int obj_counter = 0;
    for (int k = 0; k < p.rooms; ++k) {
        const auto& rr = rooms[static_cast<std::size_t>(k)];
        std::vector<std::string> wanted;
        for (const auto& cat : room_affinity(labels[static_cast<std::size_t>(k)])) {
            if (std::find(p.categories.begin(), p.categories.end(), cat) != p.categories.end()) wanted.push_back(cat);
        }
        for (int n = 0; n < p.objects_per_room; ++n) {
            const std::string category = n < static_cast<int>(wanted.size())
                                             ? wanted[static_cast<std::size_t>(n)]
                                             : p.categories[static_cast<std::size_t>(rng.below(p.categories.size()))];
            for (int attempt = 0; attempt < 60; ++attempt) {
                const int fw = 2 + static_cast<int>(rng.below(2));
                const int fh = 2;
                const int side = static_cast<int>(rng.below(4));
                int ax = 0;
                int ay = 0;
                int sx = fw;
                int sy = fh;
                if (side >= 2) std::swap(sx, sy);
                switch (side) {
                    case 0: ax = rr.x0 + static_cast<int>(rng.below(static_cast<std::uint64_t>(rr.w - sx + 1))); ay = rr.y0; break;
                    case 1: ax = rr.x0 + static_cast<int>(rng.below(static_cast<std::uint64_t>(rr.w - sx + 1))); ay = rr.y0 + rr.h - sy; break;
                    case 2: ax = rr.x0; ay = rr.y0 + static_cast<int>(rng.below(static_cast<std::uint64_t>(rr.h - sy + 1))); break;
                    default: ax = rr.x0 + rr.w - sx; ay = rr.y0 + static_cast<int>(rng.below(static_cast<std::uint64_t>(rr.h - sy + 1))); break;
                }
                std::vector<Cell> fp;
                bool ok = true;
                for (int j = ay; j < ay + sy && ok; ++j) {
                    for (int i = ax; i < ax + sx && ok; ++i) {
                        const Cell c{i, j};
                        if (grid.at(c) != SemanticClass::IndoorFloor) ok = false;
                        const Cell ctr = rr.center();
                        if (std::max(std::abs(c.i - ctr.i), std::abs(c.j - ctr.j)) < 3) ok = false;
                        for (const auto& d : door_cells_of_room[static_cast<std::size_t>(k)]) {
                            if (std::max(std::abs(c.i - d.i), std::abs(c.j - d.j)) < 5) ok = false;
                        }
                        for (int dj = -1; dj <= 1 && ok; ++dj) {
                            for (int di = -1; di <= 1 && ok; ++di) {
                                const Cell nb{i + di, j + dj};
                                if (grid.in_bounds(nb) && grid.at(nb) == SemanticClass::Furniture) ok = false;
                            }
                        }
                        fp.push_back(c);
                    }
                }
                if (!ok) continue;
                for (const auto& c : fp) grid.set(c, SemanticClass::Furniture);
                if (!room_connected(grid, rr)) {
                    for (const auto& c : fp) grid.set(c, SemanticClass::IndoorFloor);
                    continue;
                }
                SceneObject obj;
                obj.id = "obj_" + std::to_string(obj_counter++);
                obj.category = category;
                const Vec2 lo = grid.grid_to_world({ax, ay});
                const Vec2 hi = grid.grid_to_world({ax + sx - 1, ay + sy - 1});
                obj.position = (lo + hi) * 0.5;
                obj.footprint = fp;
                scene.objects.push_back(std::move(obj));
                break;
            }
        }
    }

    for (std::size_t k = 0; k < grid.size(); ++k) {
        if (grid.cells()[k] == SemanticClass::IndoorFloor) scene.spawn_region.push_back(grid.cell_at(k));
    }
    scene.metadata["generator"] = "apartment";
    scene.metadata["seed"] = std::to_string(seed);
    scene.metadata["rooms"] = std::to_string(p.rooms);
    scene.metadata["door_width"] = fmt_double(p.door_width);
    scene.metadata["objects_per_room"] = std::to_string(p.objects_per_room);
    compute_visible_regions(scene);
    std::erase_if(scene.objects, [](const SceneObject& o) { return o.visible_region.empty(); });
    return scene;
}

}  // namespace navkit
