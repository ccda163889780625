#include "navkit/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <type_traits>
#include <sstream>

#include "navkit/error.hpp"
#include "navkit/json_io.hpp"

namespace navkit {

void RunConfig::validate() const {
    if (scene_kind != "urban" && scene_kind != "apartment") {
        throw Error(ErrorCode::InvalidParams, "scene.kind must be urban or apartment");
    }
    if (counts.point < 0 || counts.object < 0 || counts.door < 0 || counts.short_horizon < 0 || counts.poi < 0 ||
        counts.follow < 0) {
        throw Error(ErrorCode::InvalidParams, "episode counts must be nonnegative");
    }
    if (!(counts.recovery_fraction >= 0.0 && counts.recovery_fraction <= 1.0)) {
        throw Error(ErrorCode::InvalidParams, "recovery_fraction must lie in [0, 1]");
    }
    if (jobs < 0) throw Error(ErrorCode::InvalidParams, "jobs must be nonnegative");
    if (max_retries < 0) throw Error(ErrorCode::InvalidParams, "max_retries must be nonnegative");
    for (double t : poi_thresholds) {
        if (!(t > 0.0)) throw Error(ErrorCode::InvalidParams, "poi thresholds must be positive");
    }
    sim.validate();
}

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

template <class T>
T parse_number(const std::string& s) {
    T v{};
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) throw Error(ErrorCode::InvalidParams, "bad number '" + s + "'");
    if constexpr (std::is_floating_point_v<T>) {
        if (!std::isfinite(v)) throw Error(ErrorCode::InvalidParams, "non-finite number '" + s + "'");
    }
    return v;
}

bool parse_bool(const std::string& s) {
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw Error(ErrorCode::InvalidParams, "bad boolean '" + s + "'");
}

struct Binding {
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

using Registry = std::vector<std::pair<std::string, Binding>>;

template <class Access>
Binding number_binding(Access access) {
    using T = std::remove_reference_t<decltype(access(std::declval<RunConfig&>()))>;
    return {[access](RunConfig& c, const std::string& v) { access(c) = parse_number<T>(v); },
            [access](const RunConfig& c) {
                if constexpr (std::is_floating_point_v<T>) return fmt_double(access(c));
                else return std::to_string(access(c));
            }};
}

template <class Access>
Binding bool_binding(Access access) {
    return {[access](RunConfig& c, const std::string& v) { access(c) = parse_bool(v); },
            [access](const RunConfig& c) { return std::string(access(c) ? "true" : "false"); }};
}

template <class Access>
Binding string_binding(Access access) {
    return {[access](RunConfig& c, const std::string& v) { access(c) = v; },
            [access](const RunConfig& c) { return access(c); }};
}

template <class Access>
Binding list_binding(Access access) {
    return {[access](RunConfig& c, const std::string& v) {
                std::vector<double> out;
                for (const auto& item : split_list(v)) out.push_back(parse_number<double>(item));
                access(c) = out;
            },
            [access](const RunConfig& c) {
                std::string out;
                for (double d : access(c)) out += (out.empty() ? "" : ", ") + fmt_double(d);
                return out;
            }};
}

#define NK_NUM(key, expr) {key, number_binding([](auto& c) -> auto& { return c.expr; })}
#define NK_BOOL(key, expr) {key, bool_binding([](auto& c) -> auto& { return c.expr; })}
#define NK_STR(key, expr) {key, string_binding([](auto& c) -> auto& { return c.expr; })}
#define NK_LIST(key, expr) {key, list_binding([](auto& c) -> auto& { return c.expr; })}

const Registry& registry() {
    static const Registry reg = [] {
        Registry r = {
            NK_NUM("run.seed", master_seed),
            NK_STR("run.policy", policy),
            NK_NUM("run.jobs", jobs),
            NK_STR("run.out", out_dir),
            NK_STR("scene.kind", scene_kind),
            NK_NUM("scene.urban_block_size", urban.block_size),
            NK_NUM("scene.urban_road_width", urban.road_width),
            NK_NUM("scene.urban_sidewalk_width", urban.sidewalk_width),
            NK_NUM("scene.urban_crosswalk_count", urban.crosswalk_count),
            NK_NUM("scene.urban_lawn_patches", urban.lawn_patches),
            NK_NUM("scene.urban_resolution", urban.resolution),
            NK_NUM("scene.apartment_rooms", apartment.rooms),
            NK_NUM("scene.apartment_door_width", apartment.door_width),
            NK_NUM("scene.apartment_objects_per_room", apartment.objects_per_room),
            NK_NUM("scene.apartment_resolution", apartment.resolution),
            NK_NUM("synth.point", counts.point),
            NK_NUM("synth.object", counts.object),
            NK_NUM("synth.door", counts.door),
            NK_NUM("synth.short_horizon", counts.short_horizon),
            NK_NUM("synth.poi", counts.poi),
            NK_NUM("synth.follow", counts.follow),
            NK_NUM("synth.recovery_fraction", counts.recovery_fraction),
            NK_LIST("synth.follow_distances", counts.follow_distances),
            NK_NUM("synth.step", synthesis.step),
            NK_NUM("synth.min_geodesic", synthesis.min_geodesic),
            NK_NUM("synth.max_geodesic", synthesis.max_geodesic),
            NK_NUM("synth.success_radius", synthesis.success_radius),
            NK_NUM("synth.poi_success_radius", synthesis.poi_success_radius),
            NK_NUM("synth.short_horizon_radius", synthesis.short_horizon_radius),
            NK_NUM("synth.person_speed", synthesis.person_speed),
            NK_NUM("synth.person_dt", synthesis.person_dt),
            NK_NUM("synth.target_absent_fraction", synthesis.target_absent_fraction),
            NK_NUM("synth.attempts_per_episode", synthesis.attempts_per_episode),
            NK_NUM("sim.dt", sim.dt),
            NK_NUM("sim.max_speed", sim.max_speed),
            NK_NUM("sim.max_yaw_rate", sim.max_yaw_rate),
            NK_NUM("sim.replan_every", sim.replan_every),
            NK_NUM("sim.max_steps", sim.max_steps),
            NK_BOOL("sim.terminate_on_collision", sim.terminate_on_collision),
            NK_NUM("sim.lookahead", sim.lookahead),
            NK_NUM("sim.stop_tolerance", sim.stop_tolerance),
            NK_NUM("sim.heading_gain", sim.heading_gain),
            NK_NUM("sim.robot_radius", sim.robot_radius),
            NK_NUM("sim.actor_radius", sim.actor_radius),
            NK_NUM("sim.local_grid_half_width", sim.local_grid_half_width),
            NK_NUM("sim.fov_horizontal", sim.fov.horizontal_fov),
            NK_NUM("sim.fov_range", sim.fov.max_range),
            NK_NUM("sim.lost_track_steps", sim.lost_track_steps),
            NK_NUM("sim.lost_track_gap", sim.lost_track_gap),
            NK_BOOL("sim.score_plans", sim.score_plans),
            NK_NUM("reward.w_soc", sim.weights.w_soc),
            NK_NUM("reward.w_exp", sim.weights.w_exp),
            NK_NUM("reward.w_sm", sim.weights.w_sm),
            NK_NUM("reward.w_eff", sim.weights.w_eff),
            NK_LIST("metrics.poi_thresholds", poi_thresholds),
            NK_NUM("mission.max_retries", max_retries),
        };
        r.push_back({"sim.success_radius",
                     {[](RunConfig& c, const std::string& v) {
                          if (v == "none") c.sim.success_radius.reset();
                          else c.sim.success_radius = parse_number<double>(v);
                      },
                      [](const RunConfig& c) { return c.sim.success_radius ? fmt_double(*c.sim.success_radius) : std::string("none"); }}});
        r.push_back({"sim.fov_mode",
                     {[](RunConfig& c, const std::string& v) {
                          if (v == "front") c.sim.fov.mode = FovMode::FrontOnly;
                          else if (v == "panoramic") c.sim.fov.mode = FovMode::Panoramic3View;
                          else throw Error(ErrorCode::InvalidParams, "fov_mode must be front or panoramic");
                      },
                      [](const RunConfig& c) { return std::string(c.sim.fov.mode == FovMode::FrontOnly ? "front" : "panoramic"); }}});
        r.push_back({"scene.apartment_categories",
                     {[](RunConfig& c, const std::string& v) { c.apartment.categories = split_list(v); },
                      [](const RunConfig& c) {
                          std::string out;
                          for (const auto& s : c.apartment.categories) out += (out.empty() ? "" : ", ") + s;
                          return out;
                      }}});
        return r;
    }();
    return reg;
}

#undef NK_NUM
#undef NK_BOOL
#undef NK_STR
#undef NK_LIST

const Binding* lookup(const std::string& key) {
    for (const auto& [k, b] : registry()) {
        if (k == key) return &b;
    }
    return nullptr;
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& location) {
    static const std::set<std::string> sections = {"run", "scene", "synth", "sim", "reward", "metrics", "mission"};
    RunConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string loc = location + ":" + std::to_string(line_no);
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw SchemaError(loc, "unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (!sections.count(section)) throw SchemaError(loc, "unknown section '" + section + "'");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw SchemaError(loc, "expected key = value");
        if (section.empty()) throw SchemaError(loc, "key outside a section");
        const std::string key = section + "." + trim(line.substr(0, eq));
        const Binding* b = lookup(key);
        if (!b) throw SchemaError(loc, "unknown key '" + key + "'");
        try {
            b->set(cfg, trim(line.substr(eq + 1)));
        } catch (const SchemaError&) {
            throw;
        } catch (const Error& e) {
            throw SchemaError(loc, e.what());
        }
    }
    try {
        cfg.validate();
    } catch (const Error& e) {
        throw SchemaError(location, e.what());
    }
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) { return parse_config(read_text_file(path), path.string()); }

std::string config_to_text(const RunConfig& cfg) {
    std::map<std::string, std::vector<std::pair<std::string, std::string>>> by_section;
    std::vector<std::string> order;
    for (const auto& [key, b] : registry()) {
        const auto dot = key.find('.');
        const std::string sec = key.substr(0, dot);
        if (!by_section.count(sec)) order.push_back(sec);
        by_section[sec].push_back({key.substr(dot + 1), b.get(cfg)});
    }
    std::string out;
    for (const auto& sec : order) {
        out += "[" + sec + "]\n";
        for (const auto& [k, v] : by_section[sec]) out += k + " = " + v + "\n";
        out += "\n";
    }
    return out;
}

}  // namespace navkit
