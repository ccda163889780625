#include "navkit/scene_io.hpp"

namespace navkit {

namespace {

const char* domain_name(Domain d) { return d == Domain::Indoor ? "indoor" : "outdoor"; }

Domain domain_from(const std::string& s, const std::string& loc) {
    if (s == "indoor") return Domain::Indoor;
    if (s == "outdoor") return Domain::Outdoor;
    throw SchemaError(loc, "unknown domain '" + s + "'");
}

const char* region_kind_name(RegionKind k) { return k == RegionKind::Room ? "room" : "district"; }

RegionKind region_kind_from(const std::string& s, const std::string& loc) {
    if (s == "room") return RegionKind::Room;
    if (s == "district") return RegionKind::District;
    throw SchemaError(loc, "unknown region kind '" + s + "'");
}

template <class F>
void for_each_item(const Json& j, const char* key, const std::string& loc, F&& fn) {
    const Json& arr = json_member(j, key, loc);
    if (!arr.is_array()) throw SchemaError(loc + "." + key, "expected an array");
    for (std::size_t k = 0; k < arr.size(); ++k) fn(arr[k], loc + "." + key + "[" + std::to_string(k) + "]");
}

}  // namespace

Json scene_to_json(const Scene& scene) {
    Json j;
    j["schema_version"] = kSceneSchemaVersion;
    j["id"] = scene.id;
    j["domain"] = domain_name(scene.domain);
    j["visibility_range"] = scene.visibility_range;

    const auto& g = scene.grid;
    Json cells = Json::array();
    for (const auto c : g.cells()) cells.push_back(static_cast<int>(c));
    j["grid"] = {{"width", g.width()},
                 {"height", g.height()},
                 {"resolution", g.resolution()},
                 {"origin", vec_to_json(g.origin())},
                 {"cells", std::move(cells)}};

    Json nodes = Json::array();
    for (const auto& n : scene.graph.nodes) {
        nodes.push_back({{"id", n.id}, {"position", vec_to_json(n.position)}, {"label", n.label}});
    }
    Json edges = Json::array();
    for (const auto& e : scene.graph.edges) {
        edges.push_back({{"u", e.u}, {"v", e.v}, {"length", e.length}, {"traversable", e.traversable}});
    }
    j["graph"] = {{"nodes", std::move(nodes)}, {"edges", std::move(edges)}};

    Json objects = Json::array();
    for (const auto& o : scene.objects) {
        Json fp = Json::array();
        for (const auto& c : o.footprint) fp.push_back(cell_to_json(c));
        objects.push_back(
            {{"id", o.id}, {"category", o.category}, {"position", vec_to_json(o.position)}, {"footprint", std::move(fp)}});
    }
    j["objects"] = std::move(objects);

    Json pois = Json::array();
    for (const auto& p : scene.pois) {
        pois.push_back({{"name", p.name}, {"entrance", pose_to_json(p.entrance)}, {"entrance_width", p.entrance_width}});
    }
    j["pois"] = std::move(pois);

    Json doors = Json::array();
    for (const auto& d : scene.doors) doors.push_back({{"id", d.id}, {"pose", pose_to_json(d.pose)}, {"width", d.width}});
    j["doors"] = std::move(doors);

    Json spawn = Json::array();
    for (const auto& c : scene.spawn_region) spawn.push_back(cell_to_json(c));
    j["spawn_region"] = std::move(spawn);

    Json regions = Json::array();
    for (const auto& r : scene.regions) {
        regions.push_back({{"id", r.id},
                           {"label", r.label},
                           {"kind", region_kind_name(r.kind)},
                           {"min", vec_to_json(r.min)},
                           {"max", vec_to_json(r.max)}});
    }
    j["regions"] = std::move(regions);
    j["metadata"] = scene.metadata;
    return j;
}

Scene scene_from_json(const Json& j) {
    const std::string root = "scene";
    check_schema_version(j, kSceneSchemaVersion, root);
    Scene s;
    s.id = json_get<std::string>(j, "id", root);
    s.domain = domain_from(json_get<std::string>(j, "domain", root), root + ".domain");
    s.visibility_range = json_get<double>(j, "visibility_range", root);

    const Json& g = json_member(j, "grid", root);
    const std::string gl = root + ".grid";
    const int w = json_get<int>(g, "width", gl);
    const int h = json_get<int>(g, "height", gl);
    const double res = json_get<double>(g, "resolution", gl);
    if (w <= 0 || h <= 0 || !(res > 0.0)) throw SchemaError(gl, "grid dimensions and resolution must be positive");
    s.grid = OccupancyGrid(w, h, res, vec_from_json(json_member(g, "origin", gl), gl + ".origin"));
    const Json& cells = json_member(g, "cells", gl);
    if (!cells.is_array() || cells.size() != static_cast<std::size_t>(w) * static_cast<std::size_t>(h)) {
        throw SchemaError(gl + ".cells", "expected width*height class codes");
    }
    for (std::size_t k = 0; k < cells.size(); ++k) {
        if (!cells[k].is_number_integer()) throw SchemaError(gl + ".cells[" + std::to_string(k) + "]", "expected integer");
        const int code = cells[k].get<int>();
        if (code < 0 || code >= kSemanticClassCount) {
            throw SchemaError(gl + ".cells[" + std::to_string(k) + "]", "unknown class code " + std::to_string(code));
        }
        s.grid.set(s.grid.cell_at(k), static_cast<SemanticClass>(code));
    }

    const Json& graph = json_member(j, "graph", root);
    for_each_item(graph, "nodes", root + ".graph", [&](const Json& n, const std::string& loc) {
        s.graph.nodes.push_back({json_get<int>(n, "id", loc), vec_from_json(json_member(n, "position", loc), loc + ".position"),
                                 json_get<std::string>(n, "label", loc)});
    });
    for_each_item(graph, "edges", root + ".graph", [&](const Json& e, const std::string& loc) {
        s.graph.edges.push_back({json_get<int>(e, "u", loc), json_get<int>(e, "v", loc), json_get<double>(e, "length", loc),
                                 json_get<bool>(e, "traversable", loc)});
    });
    for_each_item(j, "objects", root, [&](const Json& o, const std::string& loc) {
        SceneObject obj;
        obj.id = json_get<std::string>(o, "id", loc);
        obj.category = json_get<std::string>(o, "category", loc);
        obj.position = vec_from_json(json_member(o, "position", loc), loc + ".position");
        for_each_item(o, "footprint", loc, [&](const Json& c, const std::string& cl) {
            obj.footprint.push_back(cell_from_json(c, cl));
        });
        s.objects.push_back(std::move(obj));
    });
    for_each_item(j, "pois", root, [&](const Json& p, const std::string& loc) {
        s.pois.push_back({json_get<std::string>(p, "name", loc), pose_from_json(json_member(p, "entrance", loc), loc + ".entrance"),
                          json_get<double>(p, "entrance_width", loc)});
    });
    for_each_item(j, "doors", root, [&](const Json& d, const std::string& loc) {
        s.doors.push_back({json_get<int>(d, "id", loc), pose_from_json(json_member(d, "pose", loc), loc + ".pose"),
                           json_get<double>(d, "width", loc)});
    });
    for_each_item(j, "spawn_region", root, [&](const Json& c, const std::string& loc) {
        s.spawn_region.push_back(cell_from_json(c, loc));
    });
    for_each_item(j, "regions", root, [&](const Json& r, const std::string& loc) {
        s.regions.push_back({json_get<std::string>(r, "id", loc), json_get<std::string>(r, "label", loc),
                             region_kind_from(json_get<std::string>(r, "kind", loc), loc + ".kind"),
                             vec_from_json(json_member(r, "min", loc), loc + ".min"),
                             vec_from_json(json_member(r, "max", loc), loc + ".max")});
    });
    s.metadata = json_get<std::map<std::string, std::string>>(j, "metadata", root);
    compute_visible_regions(s);
    return s;
}

void write_scene(const std::filesystem::path& path, const Scene& scene) { write_json_file(path, scene_to_json(scene)); }

Scene read_scene(const std::filesystem::path& path) { return scene_from_json(read_json_file(path)); }

}  // namespace navkit
