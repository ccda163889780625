#include "navkit/json_io.hpp"

#include <fstream>
#include <sstream>

namespace navkit {

const Json& json_member(const Json& j, const char* key, const std::string& location) {
    if (!j.is_object()) throw SchemaError(location, "expected an object");
    const auto it = j.find(key);
    if (it == j.end()) throw SchemaError(location + "." + key, "missing field");
    return *it;
}

void check_schema_version(const Json& j, int expected, const std::string& location) {
    const int v = json_get<int>(j, "schema_version", location);
    if (v != expected) {
        throw SchemaError(location + ".schema_version",
                          "unsupported schema_version " + std::to_string(v) + ", expected " + std::to_string(expected));
    }
}

Json pose_to_json(const Pose2D& p) { return Json::array({p.x, p.y, p.theta}); }

Pose2D pose_from_json(const Json& j, const std::string& location) {
    if (!j.is_array() || j.size() != 3) throw SchemaError(location, "expected [x, y, theta]");
    try {
        return Pose2D(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(location, e.what());
    }
}

Json vec_to_json(Vec2 v) { return Json::array({v.x, v.y}); }

Vec2 vec_from_json(const Json& j, const std::string& location) {
    if (!j.is_array() || j.size() != 2) throw SchemaError(location, "expected [x, y]");
    try {
        return {j[0].get<double>(), j[1].get<double>()};
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(location, e.what());
    }
}

Json cell_to_json(Cell c) { return Json::array({c.i, c.j}); }

Cell cell_from_json(const Json& j, const std::string& location) {
    if (!j.is_array() || j.size() != 2) throw SchemaError(location, "expected [i, j]");
    try {
        return {j[0].get<int>(), j[1].get<int>()};
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(location, e.what());
    }
}

Json plan_to_json(const WaypointPlan& plan) {
    Json out = Json::array();
    for (const auto& p : plan) out.push_back(pose_to_json(p));
    return out;
}

WaypointPlan plan_from_json(const Json& j, const std::string& location) {
    if (!j.is_array() || j.size() != kPlanLength) throw SchemaError(location, "expected 5 waypoints");
    WaypointPlan plan;
    for (std::size_t k = 0; k < kPlanLength; ++k) {
        plan[k] = pose_from_json(j[k], location + "[" + std::to_string(k) + "]");
    }
    return plan;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    out << text;
    if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

Json read_json_file(const std::filesystem::path& path) {
    const std::string text = read_text_file(path);
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError(path.string() + "@" + std::to_string(e.byte), e.what());
    }
}

void write_json_file(const std::filesystem::path& path, const Json& j) { write_text_file(path, j.dump(1) + "\n"); }

}  // namespace navkit
