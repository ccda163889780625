#include "navkit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "navkit/error.hpp"

namespace navkit {

double spl(std::span<const bool> successes, std::span<const double> geodesics, std::span<const double> path_lengths) {
    if (successes.size() != geodesics.size() || successes.size() != path_lengths.size()) {
        throw Error(ErrorCode::LengthMismatch, "spl inputs differ in length");
    }
    if (successes.empty()) return 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < successes.size(); ++i) {
        const double l = geodesics[i];
        const double p = path_lengths[i];
        if (!(l >= 0.0) || !(p >= 0.0)) throw Error(ErrorCode::InvalidParams, "spl lengths must be nonnegative");
        if (!successes[i]) continue;
        const double m = std::max(p, l);
        sum += m > 0.0 ? l / m : 1.0;
    }
    return sum / static_cast<double>(successes.size());
}

NavScores sr_rc_ne_os(std::span<const EpisodeTrace> traces, double threshold) {
    if (!(threshold > 0.0)) throw Error(ErrorCode::InvalidParams, "threshold must be positive");
    NavScores out;
    out.count = traces.size();
    if (traces.empty()) return out;
    double sr = 0.0, rc = 0.0, ne = 0.0, os = 0.0;
    std::size_t ne_count = 0;
    for (const auto& t : traces) {
        if (t.steps.empty() || !t.steps.front().goal_distance || !t.steps.back().goal_distance) continue;
        const double d0 = *t.steps.front().goal_distance;
        const double d1 = *t.steps.back().goal_distance;
        if (!std::isfinite(d1)) continue;
        sr += d1 <= threshold ? 1.0 : 0.0;
        ne += d1;
        ++ne_count;
        rc += d0 > 0.0 ? std::clamp(1.0 - d1 / d0, 0.0, 1.0) : 1.0;
        for (const auto& s : t.steps) {
            if (s.goal_distance && *s.goal_distance <= threshold) {
                os += 1.0;
                break;
            }
        }
    }
    const double n = static_cast<double>(traces.size());
    out.sr = sr / n;
    out.rc = rc / n;
    out.os = os / n;
    out.ne = ne_count ? ne / static_cast<double>(ne_count) : 0.0;
    return out;
}

double maoe_sample(const WaypointPlan& pred, const WaypointPlan& gt) {
    double worst = -1.0;
    for (std::size_t k = 0; k < kPlanLength; ++k) {
        const Vec2 a = pred[k].position();
        const Vec2 b = gt[k].position();
        if (a.norm() <= 1e-12 || b.norm() <= 1e-12) continue;
        worst = std::max(worst, std::abs(wrap_angle(heading_of(a) - heading_of(b))));
    }
    if (worst < 0.0) throw Error(ErrorCode::DegeneratePlan, "no waypoint with nonzero displacement in both plans");
    return worst;
}

double maoe(std::span<const WaypointPlan> pred, std::span<const WaypointPlan> gt) {
    if (pred.size() != gt.size()) throw Error(ErrorCode::LengthMismatch, "maoe needs paired plans");
    if (pred.empty()) return 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) sum += maoe_sample(pred[i], gt[i]);
    return rad_to_deg(sum / static_cast<double>(pred.size()));
}

double compliant_length(const OccupancyGrid& grid, Vec2 a, Vec2 b) {
    const Vec2 d = b - a;
    const double len = d.norm();
    if (len <= 0.0) return 0.0;
    const double res = grid.resolution();
    const Vec2 o = grid.origin();
    std::vector<double> cuts{0.0, 1.0};
    auto add_axis = [&](double p0, double dp, double org) {
        if (dp == 0.0) return;
        const double lo = std::min(p0, p0 + dp);
        const double hi = std::max(p0, p0 + dp);
        for (double k = std::ceil((lo - org) / res); org + k * res < hi; k += 1.0) {
            const double t = (org + k * res - p0) / dp;
            if (t > 0.0 && t < 1.0) cuts.push_back(t);
        }
    };
    add_axis(a.x, d.x, o.x);
    add_axis(a.y, d.y, o.y);
    std::sort(cuts.begin(), cuts.end());
    double good = 0.0;
    for (std::size_t k = 1; k < cuts.size(); ++k) {
        const double t0 = cuts[k - 1];
        const double t1 = cuts[k];
        if (t1 <= t0) continue;
        const Vec2 mid = a + d * (0.5 * (t0 + t1));
        if (is_social(grid.class_at(mid))) good += (t1 - t0) * len;
    }
    return good;
}

Compliance dcr_tcr(const EpisodeTrace& trace, const OccupancyGrid& grid) {
    if (trace.steps.empty()) throw Error(ErrorCode::InvalidParams, "compliance needs a nonempty trace");
    Compliance out;
    double total = 0.0;
    double good = 0.0;
    for (std::size_t k = 1; k < trace.steps.size(); ++k) {
        const Vec2 a = trace.steps[k - 1].pose.position();
        const Vec2 b = trace.steps[k].pose.position();
        total += distance(a, b);
        good += compliant_length(grid, a, b);
    }
    out.dcr = total > 0.0 ? std::clamp(good / total, 0.0, 1.0) : 1.0;
    std::size_t ok = 0;
    for (const auto& s : trace.steps) ok += s.compliant ? 1 : 0;
    out.tcr = static_cast<double>(ok) / static_cast<double>(trace.steps.size());
    return out;
}

double tracking_rate(const EpisodeTrace& trace) {
    if (trace.task != TaskKind::PersonFollow) throw Error(ErrorCode::WrongTask, "tracking metrics need a person-follow trace");
    if (trace.steps.empty()) return 0.0;
    std::size_t good = 0;
    for (const auto& s : trace.steps) {
        if (s.target_in_view.value_or(false) && s.target_gap && *s.target_gap >= kTrackMinGap && *s.target_gap <= kTrackMaxGap) ++good;
    }
    return static_cast<double>(good) / static_cast<double>(trace.steps.size());
}

TrackingScores tracking_metrics(std::span<const EpisodeTrace> traces) {
    TrackingScores out;
    out.count = traces.size();
    if (traces.empty()) return out;
    for (const auto& t : traces) {
        out.tr += tracking_rate(t);
        out.sr += t.status == TerminalStatus::Timeout ? 1.0 : 0.0;
        out.cr += t.collision_steps() > 0 ? 1.0 : 0.0;
    }
    const double n = static_cast<double>(traces.size());
    out.tr /= n;
    out.sr /= n;
    out.cr /= n;
    return out;
}

std::vector<double> poi_sr(std::span<const EpisodeTrace> traces, const std::vector<double>& thresholds) {
    std::vector<double> out(thresholds.size(), 0.0);
    if (traces.empty()) return out;
    for (const auto& t : traces) {
        if (!t.goal_point || t.steps.empty()) continue;
        const double d = distance(t.steps.back().pose.position(), *t.goal_point);
        for (std::size_t k = 0; k < thresholds.size(); ++k) out[k] += d <= thresholds[k] ? 1.0 : 0.0;
    }
    for (auto& v : out) v /= static_cast<double>(traces.size());
    return out;
}

// ------------------------------------------------------------------ report

EpisodeRecord episode_record(const EpisodeTrace& t, const OccupancyGrid& grid) {
    EpisodeRecord r;
    r.episode_id = t.episode_id;
    r.task = t.task;
    r.status = status_name(t.status);
    r.success_radius = t.success_radius;
    r.steps = static_cast<int>(t.steps.size());
    r.path_length = t.path_length();
    r.collided = t.collision_steps() > 0;
    if (!t.steps.empty()) {
        const auto c = dcr_tcr(t, grid);
        r.dcr = c.dcr;
        r.tcr = c.tcr;
    }
    if (t.task == TaskKind::PersonFollow) {
        r.tracking_rate = tracking_rate(t);
        r.success = t.status == TerminalStatus::Timeout;
    } else {
        r.success = t.status == TerminalStatus::Success;
        if (!t.steps.empty() && t.steps.front().goal_distance && t.steps.back().goal_distance &&
            std::isfinite(*t.steps.back().goal_distance)) {
            r.initial_distance = t.steps.front().goal_distance;
            r.final_distance = t.steps.back().goal_distance;
            double m = *r.final_distance;
            for (const auto& s : t.steps) {
                if (s.goal_distance) m = std::min(m, *s.goal_distance);
            }
            r.min_distance = m;
            const double l = std::isfinite(*r.initial_distance) ? *r.initial_distance : 0.0;
            const bool ok[] = {r.success};
            const double ls[] = {l};
            const double ps[] = {r.path_length};
            r.spl = spl(ok, ls, ps);
            r.rc = l > 0.0 ? std::clamp(1.0 - *r.final_distance / l, 0.0, 1.0) : 1.0;
        }
        if (t.goal_point && !t.steps.empty()) r.final_goal_euclid = distance(t.steps.back().pose.position(), *t.goal_point);
    }
    for (const auto& p : t.plans) {
        if (!p.reference) continue;
        try {
            r.maoe_sum_deg += rad_to_deg(maoe_sample(p.plan, *p.reference));
            ++r.maoe_pairs;
        } catch (const Error&) {
            // degenerate pair (both plans stationary): nothing to compare
        }
    }
    return r;
}

Aggregate aggregate_records(std::span<const EpisodeRecord> records, const std::vector<double>& poi_thresholds) {
    Aggregate a;
    a.episodes = records.size();
    a.poi_thresholds = poi_thresholds;
    a.poi_sr.assign(poi_thresholds.size(), 0.0);
    std::size_t ne_count = 0;
    for (const auto& r : records) {
        a.maoe += r.maoe_sum_deg;
        a.maoe_pairs += static_cast<std::size_t>(r.maoe_pairs);
        if (r.task == TaskKind::PersonFollow) {
            ++a.follow_episodes;
            a.tr += r.tracking_rate.value_or(0.0);
            a.tracking_sr += r.success ? 1.0 : 0.0;
            a.cr += r.collided ? 1.0 : 0.0;
            continue;
        }
        ++a.nav_episodes;
        a.sr += r.success ? 1.0 : 0.0;
        a.spl += r.spl;
        a.rc += r.rc;
        a.dcr += r.dcr;
        a.tcr += r.tcr;
        if (r.final_distance) {
            a.ne += *r.final_distance;
            ++ne_count;
        }
        if (r.min_distance && *r.min_distance <= r.success_radius) a.os += 1.0;
        if (r.task == TaskKind::PoiGoal) {
            ++a.poi_episodes;
            for (std::size_t k = 0; k < poi_thresholds.size(); ++k) {
                if (r.final_goal_euclid && *r.final_goal_euclid <= poi_thresholds[k]) a.poi_sr[k] += 1.0;
            }
        }
    }
    if (a.nav_episodes) {
        const double n = static_cast<double>(a.nav_episodes);
        a.sr /= n;
        a.spl /= n;
        a.rc /= n;
        a.os /= n;
        a.dcr /= n;
        a.tcr /= n;
    }
    a.ne = ne_count ? a.ne / static_cast<double>(ne_count) : 0.0;
    if (a.follow_episodes) {
        const double n = static_cast<double>(a.follow_episodes);
        a.tr /= n;
        a.tracking_sr /= n;
        a.cr /= n;
    }
    a.maoe = a.maoe_pairs ? a.maoe / static_cast<double>(a.maoe_pairs) : 0.0;
    if (a.poi_episodes) {
        for (auto& v : a.poi_sr) v /= static_cast<double>(a.poi_episodes);
    }
    return a;
}

MetricReport evaluate(std::span<const EpisodeTrace> traces, const OccupancyGrid& grid) {
    MetricReport out;
    for (const auto& t : traces) out.records.push_back(episode_record(t, grid));
    out.aggregate = aggregate_records(out.records);
    return out;
}

namespace {

template <class T>
Json opt(const std::optional<T>& v) {
    return v ? Json(*v) : Json(nullptr);
}

}  // namespace

Json report_to_json(const MetricReport& report) {
    Json records = Json::array();
    for (const auto& r : report.records) {
        records.push_back({{"episode_id", r.episode_id},
                           {"task", task_name(r.task)},
                           {"status", r.status},
                           {"success", r.success},
                           {"initial_distance", opt(r.initial_distance)},
                           {"final_distance", opt(r.final_distance)},
                           {"min_distance", opt(r.min_distance)},
                           {"success_radius", r.success_radius},
                           {"path_length", r.path_length},
                           {"spl", r.spl},
                           {"rc", r.rc},
                           {"dcr", r.dcr},
                           {"tcr", r.tcr},
                           {"collided", r.collided},
                           {"tracking_rate", opt(r.tracking_rate)},
                           {"final_goal_euclid", opt(r.final_goal_euclid)},
                           {"maoe_sum_deg", r.maoe_sum_deg},
                           {"maoe_pairs", r.maoe_pairs},
                           {"steps", r.steps}});
    }
    const auto& a = report.aggregate;
    Json poi = Json::object();
    for (std::size_t k = 0; k < a.poi_thresholds.size(); ++k) {
        std::ostringstream key;
        key << "SR@" << a.poi_thresholds[k];
        poi[key.str()] = a.poi_sr[k];
    }
    Json agg = {{"episodes", a.episodes}, {"nav_episodes", a.nav_episodes}, {"SR", a.sr},     {"SPL", a.spl},
                {"RC", a.rc},             {"NE", a.ne},                     {"OS", a.os},     {"DCR", a.dcr},
                {"TCR", a.tcr},           {"follow_episodes", a.follow_episodes},            {"TR", a.tr},
                {"tracking_SR", a.tracking_sr},                             {"CR", a.cr},     {"maoe_pairs", a.maoe_pairs},
                {"MAOE", a.maoe},         {"poi_episodes", a.poi_episodes}, {"poi", poi}};
    return {{"schema_version", 1}, {"aggregate", agg}, {"episodes", records}};
}

std::string report_to_csv(const MetricReport& report) {
    std::ostringstream out;
    out.precision(17);
    out << "episode_id,task,status,success,initial_distance,final_distance,path_length,spl,rc,dcr,tcr,collided,tracking_rate\n";
    auto o = [&](const std::optional<double>& v) {
        if (v) out << *v;
    };
    for (const auto& r : report.records) {
        out << r.episode_id << ',' << task_name(r.task) << ',' << r.status << ',' << (r.success ? 1 : 0) << ',';
        o(r.initial_distance);
        out << ',';
        o(r.final_distance);
        out << ',' << r.path_length << ',' << r.spl << ',' << r.rc << ',' << r.dcr << ',' << r.tcr << ',' << (r.collided ? 1 : 0) << ',';
        o(r.tracking_rate);
        out << '\n';
    }
    return out.str();
}

}  // namespace navkit
