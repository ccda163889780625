// Runs the ten acceptance criteria and prints one PASS/FAIL line each.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "navkit/agentic.hpp"
#include "navkit/batch.hpp"
#include "navkit/config.hpp"
#include "navkit/error.hpp"
#include "navkit/flow.hpp"
#include "navkit/generators.hpp"
#include "navkit/memory.hpp"
#include "navkit/metrics.hpp"
#include "navkit/pipeline.hpp"
#include "navkit/planner.hpp"
#include "navkit/reward.hpp"
#include "oracles/fixtures.hpp"
#include "oracles/oracles.hpp"

using namespace navkit;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

bool files_equal(const fs::path& a, const fs::path& b) {
    std::ifstream x(a, std::ios::binary), y(b, std::ios::binary);
    std::ostringstream sx, sy;
    sx << x.rdbuf();
    sy << y.rdbuf();
    return sx.str() == sy.str();
}

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

// ------------------------------------------------------------------ 1

Outcome planner_optimality() {
    const auto t0 = Clock::now();
    Rng rng(101);
    int queries = 0, reachable = 0, mismatches = 0;
    for (int g = 0; g < 100; ++g) {
        const int w = 8 + static_cast<int>(rng.below(23));
        const int h = 8 + static_cast<int>(rng.below(23));
        const OccupancyGrid grid = fixture::random_grid(rng, w, h, rng.uniform(0.05, 0.35));
        for (int q = 0; q < 5; ++q) {
            const Traversal t{rng.below(3) == 0, static_cast<int>(rng.below(3)) == 0 ? 1 : 0};
            const Cell s = fixture::random_open_cell(rng, grid);
            const Cell e = fixture::random_open_cell(rng, grid);
            const auto ref = oracle::dijkstra(grid, s, e, t);
            std::optional<double> got;
            try {
                got = astar_grid(grid, s, e, t).length();
            } catch (const Error& err) {
                if (err.code() != ErrorCode::Unreachable) throw;
            }
            ++queries;
            if (ref) ++reachable;
            const bool same = ref.has_value() == got.has_value() && (!ref || ref->value(grid.resolution()) == *got);
            if (!same) ++mismatches;
        }
    }
    const double secs = since(t0);
    std::ostringstream os;
    os << queries << " queries on 100 grids, " << reachable << " reachable, " << mismatches << " mismatches, "
       << fmt("%.2f s", secs);
    return {mismatches == 0 && reachable > queries / 3 && secs < 10.0, os.str()};
}

// ------------------------------------------------------------------ 2

Outcome oracle_closed_loop() {
    const auto t0 = Clock::now();
    SimConfig sim;
    std::vector<EpisodeRecord> records;
    std::vector<EpisodeRecord> greedy_records;
    for (int k = 0; k < 2; ++k) {
        const std::uint64_t seed = 200 + static_cast<std::uint64_t>(k);
        for (const bool urban : {true, false}) {
            const Scene scene = urban ? gen_urban_block(seed) : gen_apartment(seed);
            Rng rng(derive_seed(seed, urban ? "acc_urban" : "acc_apartment", 0));
            const auto eps = synth_point_goal(scene, 50, 0.2, rng);
            const auto traces = run_batch(scene, eps, "oracle", sim, seed);
            for (const auto& t : traces) records.push_back(episode_record(t, scene.grid));
            if (urban) {
                const auto greedy = run_batch(scene, eps, "greedy", sim, seed);
                for (const auto& t : greedy) greedy_records.push_back(episode_record(t, scene.grid));
            }
        }
    }
    const Aggregate a = aggregate_records(records);
    const Aggregate g = aggregate_records(greedy_records);
    const double secs = since(t0);
    std::ostringstream os;
    os << records.size() << " oracle episodes: SR " << fmt("%.3f", a.sr) << " SPL " << fmt("%.3f", a.spl)
       << "; greedy urban DCR " << fmt("%.3f", g.dcr) << ", " << fmt("%.1f s", secs);
    return {records.size() == 200 && a.sr >= 0.95 && a.spl >= 0.90 && g.dcr < 0.9 && secs < 60.0, os.str()};
}

// ------------------------------------------------------------------ 3

Outcome flow_multimodality() {
    const auto t0 = Clock::now();
    const BypassScenario sc = make_bypass_scenario();
    const WaypointPlan left = decode_plan(sc.mode_centers[0]);
    const WaypointPlan right = decode_plan(sc.mode_centers[1]);
    double sep = 0.0;
    for (std::size_t k = 0; k < kPlanLength; ++k) sep = std::max(sep, distance(left[k].position(), right[k].position()));
    std::vector<std::uint64_t> seeds;
    for (std::uint64_t k = 0; k < 10000; ++k) seeds.push_back(derive_seed(3, "acc_flow", k));
    const auto samples = sample_vectors(sc.experts, FlowConfig{}, seeds);
    int n_left = 0, n_right = 0, stray = 0;
    for (const auto& v : samples) {
        const WaypointPlan p = decode_plan(v);
        if (plan_distance(p, left) <= 0.2) ++n_left;
        else if (plan_distance(p, right) <= 0.2) ++n_right;
        else ++stray;
    }
    const double wl = n_left / 10000.0;
    const bool mean_collides = plan_collides(mean_regression_plan(sc.experts), Pose2D{}, sc.scene.grid);
    const double secs = since(t0);
    std::ostringstream os;
    os << "mode separation " << fmt("%.2f m", sep) << ", left " << n_left << " right " << n_right << " stray " << stray
       << ", mean plan collides " << (mean_collides ? "yes" : "no") << ", " << fmt("%.2f s", secs);
    return {std::abs(sep - 2.0) < 0.05 && stray == 0 && std::abs(wl - 0.5) <= 0.05 && mean_collides && secs < 30.0,
            os.str()};
}

// ------------------------------------------------------------------ 4

Outcome flow_exactness() {
    Rng rng(404);
    const FlowConfig cfg;
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        ExpertSet e;
        const int n = 1 + static_cast<int>(rng.below(8));
        for (int i = 0; i < n; ++i) {
            PlanVector v{};
            for (auto& d : v) d = rng.uniform(-2.0, 2.0);
            e.samples.push_back(v);
        }
        if (rng.coin()) {
            for (int i = 0; i < n; ++i) e.weights.push_back(rng.uniform(0.1, 3.0));
        }
        const double t = rng.uniform(0.0, 0.999);
        const auto& x1 = e.samples[rng.below(static_cast<std::uint64_t>(n))];
        const double sig = 1.0 - (1.0 - cfg.sigma_min) * t;
        PlanVector x{};
        for (std::size_t d = 0; d < kPlanDim; ++d) x[d] = sig * rng.normal() + t * x1[d];
        const PlanVector got = cond_velocity(x, t, e, cfg);
        const PlanVector ref = oracle::marginal_velocity(x, t, e, cfg);
        for (std::size_t d = 0; d < kPlanDim; ++d) worst = std::max(worst, std::abs(got[d] - ref[d]));
    }
    double single_worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        WaypointPlan p{};
        Pose2D cur;
        for (auto& w : p) {
            cur = Pose2D(cur.x + rng.uniform(0.2, 0.6), cur.y + rng.uniform(-0.3, 0.3), rng.uniform(-1.0, 1.0));
            w = cur;
        }
        ExpertSet e;
        e.samples.push_back(encode_plan(p));
        const WaypointPlan s = sample_plan(e, cfg, derive_seed(4, "acc_single", static_cast<std::uint64_t>(trial)));
        single_worst = std::max(single_worst, plan_distance(s, p));
    }
    std::ostringstream os;
    os << "max |cond_velocity - direct sum| " << fmt("%.3g", worst) << " over 1000 triples; single expert max distance "
       << fmt("%.4f", single_worst);
    return {worst <= 1e-10 && single_worst <= 0.05, os.str()};
}

// ------------------------------------------------------------------ 5

EpisodeTrace random_walk_trace(Rng& rng, const OccupancyGrid& g, int steps) {
    EpisodeTrace t;
    const double span_x = g.width() * g.resolution();
    const double span_y = g.height() * g.resolution();
    Vec2 p{g.origin().x + rng.uniform(0.2, span_x - 0.2), g.origin().y + rng.uniform(0.2, span_y - 0.2)};
    for (int k = 0; k < steps; ++k) {
        TraceStep s;
        s.index = k;
        if (k > 0 && rng.below(5) != 0) {
            const double speed = rng.uniform(0.0, 0.6);  // variable speed, sometimes standing still
            const double a = rng.uniform(-kPi, kPi);
            p = {std::clamp(p.x + speed * std::cos(a), g.origin().x, g.origin().x + span_x - 1e-6),
                 std::clamp(p.y + speed * std::sin(a), g.origin().y, g.origin().y + span_y - 1e-6)};
        }
        s.pose = Pose2D(p, rng.uniform(-kPi, kPi));
        s.compliant = rng.coin();
        s.collided = rng.below(20) == 0;
        t.steps.push_back(s);
    }
    return t;
}

Outcome metric_formulas() {
    Rng rng(505);
    double worst = 0.0;
    std::string worst_name = "none";
    int invariant_failures = 0;
    auto track = [&](const char* name, double a, double b) {
        if (std::abs(a - b) > worst) worst = std::abs(a - b), worst_name = name;
    };
    for (int trial = 0; trial < 1000; ++trial) {
        // SPL
        const std::size_t n = 1 + rng.below(20);
        auto s = std::make_unique<bool[]>(n);
        std::vector<bool> sv(n);
        std::vector<double> l(n), p(n);
        for (std::size_t i = 0; i < n; ++i) {
            sv[i] = s[i] = rng.coin();
            l[i] = rng.below(10) == 0 ? 0.0 : rng.uniform(0.0, 30.0);
            p[i] = rng.below(10) == 0 ? 0.0 : rng.uniform(0.0, 40.0);
        }
        track("spl", spl(std::span<const bool>(s.get(), n), l, p), oracle::spl(sv, l, p));

        // MAOE
        const std::size_t m = 1 + rng.below(6);
        std::vector<WaypointPlan> pred(m), gt(m);
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t k = 0; k < kPlanLength; ++k) {
                pred[i][k] = Pose2D(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-kPi, kPi));
                gt[i][k] = Pose2D(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-kPi, kPi));
            }
        }
        track("maoe", maoe(pred, gt), oracle::maoe(pred, gt));

        // DCR / TCR on a random grid and a variable-speed trace
        const OccupancyGrid g = fixture::random_grid(rng, 6 + static_cast<int>(rng.below(20)),
                                                     6 + static_cast<int>(rng.below(20)), 0.1);
        EpisodeTrace tr = random_walk_trace(rng, g, 2 + static_cast<int>(rng.below(40)));
        const Compliance c = dcr_tcr(tr, g);
        track("dcr", c.dcr, oracle::dcr(tr, g));
        track("tcr", c.tcr, oracle::tcr(tr));

        // Tracking
        std::vector<EpisodeTrace> follow;
        const std::size_t nf = 1 + rng.below(6);
        double ref_sr = 0.0, ref_cr = 0.0, ref_tr = 0.0;
        for (std::size_t i = 0; i < nf; ++i) {
            EpisodeTrace ft = random_walk_trace(rng, g, 1 + static_cast<int>(rng.below(30)));
            ft.task = TaskKind::PersonFollow;
            for (auto& st : ft.steps) {
                if (rng.below(4) != 0) {
                    st.target_in_view = rng.coin();
                    st.target_gap = rng.uniform(0.0, 4.0);
                    if (rng.below(10) == 0) st.target_gap = rng.coin() ? 0.5 : 3.0;
                }
            }
            static const TerminalStatus statuses[] = {TerminalStatus::Timeout, TerminalStatus::LostTrack,
                                                      TerminalStatus::Collision};
            ft.status = statuses[rng.below(3)];
            track("tracking_rate", tracking_rate(ft), oracle::tracking_rate(ft));
            ref_tr += oracle::tracking_rate(ft);
            ref_sr += (ft.status != TerminalStatus::LostTrack && ft.status != TerminalStatus::Collision) ? 1.0 : 0.0;
            ref_cr += std::any_of(ft.steps.begin(), ft.steps.end(), [](const TraceStep& x) { return x.collided; }) ? 1.0
                                                                                                                 : 0.0;
            follow.push_back(std::move(ft));
        }
        const TrackingScores ts = tracking_metrics(follow);
        track("tracking_tr", ts.tr, ref_tr / nf);
        track("tracking_sr", ts.sr, ref_sr / nf);
        track("tracking_cr", ts.cr, ref_cr / nf);

        // POI SR
        std::vector<EpisodeTrace> poi;
        std::vector<double> finals;
        const std::size_t np = 1 + rng.below(12);
        for (std::size_t i = 0; i < np; ++i) {
            EpisodeTrace pt;
            pt.task = TaskKind::PoiGoal;
            const Vec2 goal{rng.uniform(-5, 5), rng.uniform(-5, 5)};
            const double d = rng.below(8) == 0 ? 0.2 : rng.uniform(0.0, 0.5);
            const double a = rng.uniform(-kPi, kPi);
            TraceStep st;
            st.pose = Pose2D(goal.x + d * std::cos(a), goal.y + d * std::sin(a), 0.0);
            pt.steps.push_back(st);
            pt.goal_point = goal;
            finals.push_back(distance(st.pose.position(), goal));
            poi.push_back(pt);
        }
        const auto got = poi_sr(poi, kPoiThresholds);
        const auto ref = oracle::poi_sr(finals, kPoiThresholds);
        for (std::size_t k = 0; k < ref.size(); ++k) track("poi_sr", got[k], ref[k]);
        for (std::size_t k = 1; k < got.size(); ++k) invariant_failures += got[k] + 1e-15 < got[k - 1] ? 1 : 0;

        // Batch invariants over navigation traces
        std::vector<EpisodeTrace> nav;
        const std::size_t nn = 1 + rng.below(10);
        for (std::size_t i = 0; i < nn; ++i) {
            EpisodeTrace nt = random_walk_trace(rng, g, 2 + static_cast<int>(rng.below(30)));
            nt.success_radius = 0.5;
            double d = rng.uniform(0.0, 8.0);
            for (auto& st : nt.steps) {
                d = std::max(0.0, d + rng.uniform(-0.8, 0.5));
                st.goal_distance = d;
            }
            nt.status = d <= nt.success_radius ? TerminalStatus::Success : TerminalStatus::Timeout;
            nav.push_back(std::move(nt));
        }
        const MetricReport rep = evaluate(nav, g);
        if (rep.aggregate.spl > rep.aggregate.sr + 1e-12) ++invariant_failures;
        if (rep.aggregate.os + 1e-12 < rep.aggregate.sr) ++invariant_failures;
        const NavScores ns = sr_rc_ne_os(nav, 0.5);
        if (ns.os + 1e-12 < ns.sr) ++invariant_failures;
        double rsr = 0.0, ros = 0.0, rne = 0.0, rrc = 0.0;
        for (const auto& t : nav) {
            const double d0 = *t.steps.front().goal_distance;
            const double d1 = *t.steps.back().goal_distance;
            rsr += d1 <= 0.5;
            rne += d1;
            rrc += d0 > 0 ? std::min(1.0, std::max(0.0, 1.0 - d1 / d0)) : 1.0;
            bool hit = false;
            for (const auto& st : t.steps) hit = hit || *st.goal_distance <= 0.5;
            ros += hit;
        }
        track("sr", ns.sr, rsr / nn);
        track("os", ns.os, ros / nn);
        track("ne", ns.ne, rne / nn);
        track("rc", ns.rc, rrc / nn);
    }
    std::ostringstream os;
    os << "1000 randomized batches, max deviation " << fmt("%.3g", worst) << " (" << worst_name << "), invariant failures "
       << invariant_failures;
    return {worst <= 1e-9 && invariant_failures == 0, os.str()};
}

// ------------------------------------------------------------------ 6

Outcome reward_contract() {
    Rng rng(606);
    const Scene scene = gen_urban_block(6);
    double lin_worst = 0.0;
    int scored = 0;
    for (int trial = 0; trial < 1000 && scored < 200; ++trial) {
        const Cell c = scene.spawn_region[rng.below(scene.spawn_region.size())];
        const Pose2D frame(scene.grid.grid_to_world(c), rng.uniform(-kPi, kPi));
        WaypointPlan plan{}, gt{};
        for (std::size_t k = 0; k < kPlanLength; ++k) {
            plan[k] = Pose2D(0.4 * (k + 1) + rng.uniform(-0.1, 0.1), rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5));
            gt[k] = Pose2D(0.4 * (k + 1), 0.0, 0.0);
        }
        const Vec2 goal = scene.grid.grid_to_world(scene.spawn_region[rng.below(scene.spawn_region.size())]);
        RewardWeights w1{rng.uniform(0.1, 3), rng.uniform(0.1, 3), rng.uniform(0.1, 3), rng.uniform(0.1, 3)};
        RewardWeights w2{rng.uniform(0.1, 3), rng.uniform(0.1, 3), rng.uniform(0.1, 3), rng.uniform(0.1, 3)};
        const double a = rng.uniform(0.1, 2), b = rng.uniform(0.1, 2);
        // r_eff needs both plan endpoints on traversable cells
        const auto world = plan_to_world(plan, frame);
        const auto on_floor = [&](Vec2 p) {
            return scene.grid.contains(p) && is_traversable(scene.grid.at(scene.grid.world_to_grid(p)));
        };
        if (!on_floor(world.front()) || !on_floor(world.back())) continue;
        ++scored;
        const RewardWeights wm{a * w1.w_soc + b * w2.w_soc, a * w1.w_exp + b * w2.w_exp, a * w1.w_sm + b * w2.w_sm,
                               a * w1.w_eff + b * w2.w_eff};
        const double t1 = total_reward(plan, gt, frame, goal, scene, w1).total;
        const double t2 = total_reward(plan, gt, frame, goal, scene, w2).total;
        const RewardBreakdown rm = total_reward(plan, gt, frame, goal, scene, wm);
        const double by_parts = wm.w_soc * rm.r_social + wm.w_exp * rm.r_expert + wm.w_sm * rm.r_smooth + wm.w_eff * rm.r_eff;
        lin_worst = std::max(lin_worst, std::abs(rm.total - (a * t1 + b * t2)));
        lin_worst = std::max(lin_worst, std::abs(rm.total - by_parts));
    }

    OccupancyGrid half(16, 8, 0.25, {-1.0, -1.0}, SemanticClass::Sidewalk);
    half.fill_rect({8, 0}, {16, 8}, SemanticClass::Lawn);  // x >= 1
    WaypointPlan straight{};
    for (std::size_t k = 0; k < kPlanLength; ++k) straight[k] = Pose2D(0.4 * (k + 1), 0.0, 0.0);
    const double rs = r_social(plan_to_world(straight, Pose2D{}), half);

    double sum_worst = 0.0, adv_worst = 0.0;
    for (int g = 0; g < 100000; ++g) {
        const std::size_t n = 2 + rng.below(15);
        std::vector<double> r(n);
        for (auto& v : r) v = rng.uniform(-5, 5);
        if (rng.below(50) == 0) std::fill(r.begin(), r.end(), r[0]);
        const auto adv = group_advantages(r);
        double sum = 0.0;
        for (double v : adv) sum += v;
        sum_worst = std::max(sum_worst, std::abs(sum));
        if (g % 100 == 0) {
            const auto ref = oracle::advantages(r);
            for (std::size_t i = 0; i < n; ++i) adv_worst = std::max(adv_worst, std::abs(adv[i] - ref[i]));
        }
    }
    std::ostringstream os;
    os << "linearity max error " << fmt("%.3g", lin_worst) << " on " << scored << " plans" << ", half-lawn r_social " << fmt("%.17g", rs)
       << ", max |sum advantages| " << fmt("%.3g", sum_worst) << " over 1e5 groups, max deviation from direct formula "
       << fmt("%.3g", adv_worst);
    return {scored == 200 && lin_worst <= 1e-12 && rs == 0.0 && sum_worst <= 1e-9 && adv_worst <= 1e-9, os.str()};
}

// ------------------------------------------------------------------ 7

bool oracle_path_clear(const OccupancyGrid& g, const PathPolyline& path) {
    const auto& pts = path.points();
    auto clear_at = [&](Vec2 p) {
        const Cell c{static_cast<int>(std::floor((p.x - g.origin().x) / g.resolution())),
                     static_cast<int>(std::floor((p.y - g.origin().y) / g.resolution()))};
        return g.in_bounds(c) && is_traversable(g.at(c));
    };
    if (pts.size() == 1) return clear_at(pts[0]);
    for (std::size_t k = 1; k < pts.size(); ++k) {
        const double len = distance(pts[k - 1], pts[k]);
        const int n = std::max(1, static_cast<int>(std::ceil(len / 0.02)));
        for (int s = 0; s <= n; ++s) {
            if (!clear_at(pts[k - 1] + (pts[k] - pts[k - 1]) * (static_cast<double>(s) / n))) return false;
        }
    }
    return true;
}

Outcome episode_fidelity() {
    const FovConfig fov;
    int trunc_checked = 0, trunc_mismatch = 0, paths = 0, blocked = 0, replayed = 0, replay_ok = 0;
    // urban blocks carry POIs but no objects
    for (std::uint64_t seed = 70; trunc_checked < 500 && seed < 90; ++seed) {
        {
            const Scene scene = gen_apartment(seed);
            Rng rng(derive_seed(seed, "acc_object", 0));
            const auto eps = synth_object_goal(scene, 50, rng);
            for (const auto& ep : eps) {
                const auto poses = episode_poses(ep);
                const auto ref = oracle::first_visible(poses, scene, std::get<ObjectGoal>(ep.goal), fov);
                const Episode cut = truncate_first_visibility(ep, scene, fov);
                bool ok = cut.tags.truncated == ref.has_value();
                if (ok && ref) ok = cut.start == poses[*ref];
                if (ok && !ref) ok = cut.start == ep.start;
                trunc_checked += 1;
                trunc_mismatch += ok ? 0 : 1;
            }
        }
    }

    SimConfig sim;
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        for (const char* kind : {"urban", "apartment"}) {
            RunConfig cfg;
            cfg.scene_kind = kind;
            cfg.master_seed = 700 + seed;
            const Scene scene = generate_scene(cfg);
            const auto eps = synthesize_episodes(scene, cfg);
            for (const auto& ep : eps) {
                ++paths;
                if (!oracle_path_clear(scene.grid, ep.gt_path)) ++blocked;
                if (ep.kind() == TaskKind::PersonFollow) continue;
                ++replayed;
                if (replay_plans(scene, ep, sim).status == TerminalStatus::Success) ++replay_ok;
            }
        }
    }
    const double rate = replayed ? static_cast<double>(replay_ok) / replayed : 0.0;
    std::ostringstream os;
    os << trunc_checked << " truncations, " << trunc_mismatch << " mismatches; " << blocked << "/" << paths
       << " gt paths blocked; replay " << replay_ok << "/" << replayed << " (" << fmt("%.3f", rate) << ")";
    return {trunc_checked >= 500 && trunc_mismatch == 0 && blocked == 0 && rate >= 0.99, os.str()};
}

// ------------------------------------------------------------------ 8

TopoStore random_store(Rng& rng) {
    TopoStore m;
    const int n = 2 + static_cast<int>(rng.below(20));
    static const LayerKind layers[] = {LayerKind::Block, LayerKind::Road, LayerKind::Function, LayerKind::ObjectPoi};
    std::vector<std::string> ids;
    for (int i = 0; i < n; ++i) {
        TopoNode node;
        node.id = "n" + std::to_string(i);
        node.layer = layers[rng.below(4)];
        node.label = rng.coin() ? "kitchen" : "node " + std::to_string(rng.below(1000));
        node.scene_id = "s" + std::to_string(rng.below(3));
        node.anchor = {rng.uniform(-100, 100), rng.uniform(-100, 100)};
        if (i > 0 && rng.coin()) node.parent = ids[rng.below(ids.size())];
        node.source = std::to_string(rng.next_u64());
        m.upsert_node(node);
        ids.push_back(node.id);
    }
    for (int e = 0; e < n * 2; ++e) {
        const auto& a = *m.node(ids[rng.below(ids.size())]);
        const auto& b = *m.node(ids[rng.below(ids.size())]);
        if (a.id == b.id || a.layer != b.layer) continue;
        TopoEdge edge{a.id, b.id, rng.uniform(0.01, 50), rng.uniform(1, 4), rng.coin(), rng.uniform(0, 1),
                      rng.uniform(0, 1e6)};
        m.upsert_edge(edge);
    }
    return m;
}

Outcome memory_maintenance() {
    const Scene scene = gen_urban_block(8);
    TopoStore base;
    base.ingest_scene(scene);
    const auto roads = base.layer_nodes(LayerKind::Road);
    // longest-hop route from the first road node
    std::string from = roads.front().id, to;
    std::size_t hops = 0;
    for (const auto& r : roads) {
        try {
            const auto res = base.route(from, r.id);
            if (res.road.size() > hops) hops = res.road.size(), to = r.id;
        } catch (const Error&) {
        }
    }
    bool route_ok = !to.empty();
    int checks = 0;
    TopoStore m = base;
    for (int round = 0; round < 3 && route_ok; ++round) {
        RouteResult res;
        try {
            res = m.route(from, to);
        } catch (const Error& e) {
            route_ok = e.code() == ErrorCode::Unreachable && !oracle::route_cost(m, from, to);
            break;
        }
        const auto ref = oracle::route_cost(m, from, to);
        route_ok = route_ok && ref && std::abs(*ref - res.cost) <= 1e-9;
        const std::size_t mid = res.road.size() / 2;
        const std::string u = res.road[mid - 1].id, v = res.road[mid].id;
        m.apply_evidence({u, v, EvidenceKind::Blocked, 0.0, 1.0, 10.0 + round});
        ++checks;
        try {
            const auto after = m.route(from, to);
            for (std::size_t k = 1; k < after.road.size(); ++k) {
                const bool same = (after.road[k - 1].id == u && after.road[k].id == v) ||
                                  (after.road[k - 1].id == v && after.road[k].id == u);
                route_ok = route_ok && !same;
            }
        } catch (const Error& e) {
            route_ok = route_ok && e.code() == ErrorCode::Unreachable;
        }
    }

    Rng rng(808);
    std::vector<Evidence> events;
    std::vector<std::pair<std::string, std::string>> keys;
    for (const auto& [k, e] : base.edges()) keys.push_back(k);
    for (int i = 0; i < 200; ++i) {
        const auto& k = keys[rng.below(keys.size())];
        static const EvidenceKind kinds[] = {EvidenceKind::TraversedOk, EvidenceKind::Blocked, EvidenceKind::Congested};
        events.push_back({k.first, k.second, kinds[rng.below(3)], rng.uniform(0.5, 30), rng.uniform(1.01, 4), 1.0 * i});
    }
    TopoStore r1 = base, r2 = base;
    for (const auto& e : events) r1.apply_evidence(e);
    for (const auto& e : events) r2.apply_evidence(e);
    const bool replay_ok = r1 == r2 && r1.to_json().dump() == r2.to_json().dump() && !(r1 == base);

    const fs::path dir = fs::temp_directory_path() / "navkit_acc_memory";
    fs::create_directories(dir);
    int round_trips = 0;
    for (int i = 0; i < 100; ++i) {
        const TopoStore s = random_store(rng);
        const fs::path p = dir / ("store_" + std::to_string(i) + ".json");
        s.snapshot(p);
        TopoStore back;
        back.load(p);
        const fs::path p2 = dir / ("store_" + std::to_string(i) + "_again.json");
        back.snapshot(p2);
        if (back == s && files_equal(p, p2)) ++round_trips;
    }
    fs::remove_all(dir);
    std::ostringstream os;
    os << checks << " blocked-edge reroutes " << (route_ok ? "ok" : "FAILED") << ", evidence replay "
       << (replay_ok ? "deterministic" : "DIVERGED") << ", " << round_trips << "/100 snapshot round trips";
    return {route_ok && checks > 0 && replay_ok && round_trips == 100, os.str()};
}

// ------------------------------------------------------------------ 9

Outcome agentic_loop() {
    const auto t0 = Clock::now();
    AStarOracle oracle_policy;
    MissionConfig cfg;
    std::ostringstream os;
    bool pass = true;

    const Scene s = gen_apartment(7);
    TopoStore mem;
    mem.ingest_scene(s);
    const Pose2D start(s.graph.nodes[2].position, 0.0);
    const auto kitchen = run_mission(s, "go to the kitchen then find an oven", oracle_policy, mem, cfg, 1, start);
    std::vector<TaskKind> kinds;
    for (const auto& st : kitchen.initial_plan) kinds.push_back(st.kind);
    bool kitchen_ok = kitchen.success && kinds == std::vector<TaskKind>{TaskKind::PointGoal, TaskKind::ObjectGoal} &&
                      kitchen.runs.size() == 2 && kitchen.feedback_chain.empty();
    for (const auto& r : kitchen.runs) kitchen_ok = kitchen_ok && r.reflection.r;
    os << "kitchen/oven " << (kitchen_ok ? "ok" : "FAILED");
    pass = pass && kitchen_ok;

    Scene c = gen_apartment(7);
    c.objects[0].category = "snack rack";
    c.objects[3].category = "vending machine";
    TopoStore m2;
    m2.ingest_scene(c);
    SceneObject coke = c.objects[3];
    coke.id = "obj_coke";
    coke.category = "coke";
    c.objects.push_back(coke);
    compute_visible_regions(c);
    const auto r = run_mission(c, "find a coke", oracle_policy, m2, cfg, 1, start);
    std::vector<std::string> seq;
    for (const auto& run : r.runs) {
        seq.push_back(std::string(task_name(run.task.kind)) + ":" + feedback_name(run.reflection.f.code));
    }
    const std::vector<std::string> expected = {"point_goal:ok", "object_goal:not_found", "point_goal:ok",
                                               "object_goal:ok"};
    bool coke_ok = r.success && seq == expected;
    const auto* snack = m2.node(r.runs.size() > 1 && r.runs[1].task.hypothesis ? *r.runs[1].task.hypothesis : "");
    const auto* vend = m2.node(r.runs.size() > 3 && r.runs[3].task.hypothesis ? *r.runs[3].task.hypothesis : "");
    coke_ok = coke_ok && snack && vend && snack->label == "snack rack" && vend->label == "vending machine" &&
              r.feedback_chain.size() == 1 && r.feedback_chain[0].code == FeedbackCode::NotFound;
    os << "; coke/vending ";
    for (std::size_t k = 0; k < seq.size(); ++k) os << (k ? " > " : "") << seq[k];
    os << (coke_ok ? " ok" : " FAILED");
    pass = pass && coke_ok;

    const auto lost = run_mission(s, "find a unicorn", oracle_policy, mem, cfg, 1, start);
    bool bound_ok = !lost.success;
    for (const auto& [clause, used] : lost.retries) bound_ok = bound_ok && used <= cfg.max_retries;
    for (const auto& [clause, used] : r.retries) bound_ok = bound_ok && used <= cfg.max_retries;
    bound_ok = bound_ok && lost.runs.size() == static_cast<std::size_t>(cfg.max_retries + 1);
    os << "; retry bound " << (bound_ok ? "respected" : "VIOLATED");
    pass = pass && bound_ok;

    const double secs = since(t0);
    os << ", " << fmt("%.2f s", secs);
    return {pass && secs < 30.0, os.str()};
}

// ------------------------------------------------------------------ 10

std::map<std::string, std::string> tree_bytes(const fs::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (!e.is_regular_file()) continue;
        std::ifstream in(e.path(), std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        out[fs::relative(e.path(), root).generic_string()] = ss.str();
    }
    return out;
}

Outcome determinism() {
    const fs::path base = fs::temp_directory_path() / "navkit_acc_determinism";
    fs::remove_all(base);
    std::size_t files = 0;
    bool same = true;
    for (const char* kind : {"urban", "apartment"}) {
        RunConfig cfg;
        cfg.scene_kind = kind;
        cfg.master_seed = 1010;
        run_pipeline(cfg, base / kind / "a");
        run_pipeline(cfg, base / kind / "b");
        const auto a = tree_bytes(base / kind / "a");
        const auto b = tree_bytes(base / kind / "b");
        same = same && a == b && a.size() > 5;
        files += a.size();
    }
    fs::remove_all(base);
    std::ostringstream os;
    os << files << " files across urban and apartment runs " << (same ? "byte-identical" : "DIFFER");
    return {same, os.str()};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"planner optimality", planner_optimality},
        {"oracle closed loop", oracle_closed_loop},
        {"flow multimodality", flow_multimodality},
        {"flow exactness", flow_exactness},
        {"metric formulas", metric_formulas},
        {"reward contract", reward_contract},
        {"episode-engine fidelity", episode_fidelity},
        {"topo-memory maintenance", memory_maintenance},
        {"agentic loop", agentic_loop},
        {"determinism", determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        std::printf("[%s] %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
        std::fflush(stdout);
        failed += o.pass ? 0 : 1;
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
