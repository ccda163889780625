#include <doctest.h>

#include <cmath>

#include "navkit/error.hpp"
#include "navkit/generators.hpp"
#include "navkit/sim.hpp"
#include "oracles/oracles.hpp"

using namespace navkit;

namespace {

Scene open_field() {
    Scene s;
    s.id = "field";
    s.domain = Domain::Outdoor;
    s.grid = OccupancyGrid(60, 60, 0.25, {0, 0}, SemanticClass::Obstacle);
    s.grid.fill_rect({1, 1}, {59, 59}, SemanticClass::Sidewalk);
    for (int j = 2; j < 58; ++j)
        for (int i = 2; i < 58; ++i) s.spawn_region.push_back({i, j});
    return s;
}

Episode point_episode(const Scene& s, Cell from, Cell to, double heading = 0.0) {
    Episode ep;
    ep.episode_id = "pg";
    ep.scene_id = s.id;
    ep.start = Pose2D(s.grid.grid_to_world(from), heading);
    ep.gt_path = astar_grid(s.grid, from, to, expert_traversal(s));
    ep.gt_plans = resample_waypoints(ep.gt_path, ep.start, 0.5);
    ep.goal = PointGoal{to_local(ep.start, s.grid.grid_to_world(to))};
    ep.max_steps = default_step_budget(ep.gt_path.length());
    return ep;
}

WaypointPlan line_plan(Vec2 step, double theta) {
    WaypointPlan p;
    for (std::size_t k = 0; k < kPlanLength; ++k) {
        const double f = static_cast<double>(k + 1);
        p[k] = Pose2D(step.x * f, step.y * f, theta);
    }
    return p;
}

class ThrowingPolicy : public Policy {
public:
    explicit ThrowingPolicy(int fail_at) : fail_at_(fail_at) {}
    std::string name() const override { return "thrower"; }
    WaypointPlan plan(const Observation& obs, const PolicyContext&) override {
        if (obs.step_index >= fail_at_) throw std::runtime_error("boom");
        return identity_plan();
    }

private:
    int fail_at_;
};

void check_trace_invariants(const Scene& s, const EpisodeTrace& t, const SimConfig& cfg) {
    for (std::size_t k = 0; k < t.steps.size(); ++k) {
        const auto& st = t.steps[k];
        CHECK(st.index == static_cast<int>(k));
        CHECK(st.time == doctest::Approx(static_cast<double>(k) * cfg.dt).epsilon(1e-12));
        CHECK(std::hypot(st.velocity.vx, st.velocity.vy) <= cfg.max_speed + 1e-12);
        CHECK(std::abs(st.velocity.vyaw) <= cfg.max_yaw_rate + 1e-12);
        CHECK(st.compliant == is_social(s.grid.class_at(st.pose.position())));
    }
    if (t.status == TerminalStatus::Success && t.goal_point) {
        const GoalDistance metric(s, *t.goal_point);
        CHECK(metric(t.steps.back().pose.position()) <= t.success_radius);
    }
}

}  // namespace

TEST_CASE("controller examples") {
    const SimConfig cfg;
    const VelocityCommand ahead = waypoint_controller(Pose2D{}, line_plan({1, 0}, 0.0), cfg);
    CHECK(ahead.vx == doctest::Approx(cfg.max_speed));
    CHECK(std::abs(ahead.vy) < 1e-12);
    CHECK(std::abs(ahead.vyaw) < 1e-12);

    const VelocityCommand left = waypoint_controller(Pose2D{}, line_plan({0, 1}, kPi / 2), cfg);
    CHECK(left.vyaw > 0.0);
    const VelocityCommand right = waypoint_controller(Pose2D{}, line_plan({0, -1}, -kPi / 2), cfg);
    CHECK(right.vyaw < 0.0);

    const WaypointPlan p = line_plan({0.4, 0}, 0.0);
    const VelocityCommand at_end = waypoint_controller(Pose2D(p.back().x - 0.05, 0.0, 0.0), p, cfg);
    CHECK(at_end == VelocityCommand{});
}

TEST_CASE("controller tracks a straight plan to within 0.15 m") {
    const SimConfig cfg;
    for (double len : {0.5, 1.0, 2.0, 3.0}) {
        const WaypointPlan plan = line_plan({len / 5.0, 0}, 0.0);
        Pose2D pose{};
        for (int k = 0; k < 400; ++k) pose = integrate(pose, waypoint_controller(pose, plan, cfg), cfg.dt);
        CHECK(distance(pose.position(), plan.back().position()) < 0.15);
    }
}

TEST_CASE("controller output respects limits") {
    SimConfig cfg;
    cfg.max_speed = 0.8;
    cfg.max_yaw_rate = 0.6;
    Rng rng(1);
    for (int k = 0; k < 5000; ++k) {
        WaypointPlan plan;
        for (auto& w : plan) w = Pose2D(rng.uniform(-4, 4), rng.uniform(-4, 4), rng.uniform(-kPi, kPi));
        const Pose2D state(rng.uniform(-4, 4), rng.uniform(-4, 4), rng.uniform(-kPi, kPi));
        const auto v = waypoint_controller(state, plan, cfg);
        CHECK(std::hypot(v.vx, v.vy) <= cfg.max_speed + 1e-12);
        CHECK(std::abs(v.vyaw) <= cfg.max_yaw_rate + 1e-12);
    }
}

TEST_CASE("holonomic integration") {
    const Pose2D p = integrate(Pose2D(1, 1, kPi / 2), {1.0, 0.0, 0.0}, 0.5);
    CHECK(p.x == doctest::Approx(1.0));
    CHECK(p.y == doctest::Approx(1.5));
    const Pose2D q = integrate(Pose2D(0, 0, 0), {0.0, 2.0, 1.0}, 0.1);
    CHECK(q.y == doctest::Approx(0.2));
    CHECK(q.theta == doctest::Approx(0.1));
}

TEST_CASE("oracle reaches an open-field point goal") {
    const Scene s = open_field();
    const Episode ep = point_episode(s, {5, 5}, {50, 40});
    const SimConfig cfg;
    AStarOracle oracle;
    const auto t = run_episode(s, ep, oracle, cfg, 1);
    CHECK(t.status == TerminalStatus::Success);
    check_trace_invariants(s, t, cfg);
    CHECK(t == run_episode(s, ep, oracle, cfg, 1));
}

TEST_CASE("stationary policy times out at the budget") {
    const Scene s = open_field();
    const Episode ep = point_episode(s, {5, 5}, {30, 30});
    SimConfig cfg;
    StationaryPolicy still;
    const auto t = run_episode(s, ep, still, cfg, 0);
    CHECK(t.status == TerminalStatus::Timeout);
    CHECK(t.steps.back().index == ep.max_steps);
    cfg.max_steps = 17;
    CHECK(run_episode(s, ep, still, cfg, 0).steps.size() == 18);
}

TEST_CASE("noisy oracle at zero noise matches the oracle") {
    const Scene s = gen_apartment(2);
    Rng rng(4);
    const SimConfig cfg;
    for (const auto& ep : synth_point_goal(s, 5, 0.2, rng)) {
        AStarOracle a;
        NoisyOracle b(0.0);
        auto ta = run_episode(s, ep, a, cfg, 9);
        auto tb = run_episode(s, ep, b, cfg, 9);
        CHECK(ta.steps == tb.steps);
        CHECK(ta.plans == tb.plans);
        CHECK(ta.status == tb.status);
    }
}

TEST_CASE("noisy oracle is seed deterministic") {
    const Scene s = gen_apartment(2);
    Rng rng(5);
    const Episode ep = synth_point_goal(s, 1, 0.0, rng).front();
    NoisyOracle p(0.3);
    const SimConfig cfg;
    const auto a = run_episode(s, ep, p, cfg, 3);
    CHECK(a == run_episode(s, ep, p, cfg, 3));
    CHECK(a.plans != run_episode(s, ep, p, cfg, 4).plans);
}

TEST_CASE("oracle campaign on apartments and urban blocks") {
    int ok = 0;
    int total = 0;
    const SimConfig cfg;
    for (std::uint64_t seed = 0; seed < 2; ++seed) {
        for (const Scene& s : {gen_apartment(seed), gen_urban_block(seed)}) {
            Rng rng(seed + 100);
            for (const auto& ep : synth_point_goal(s, 20, 0.2, rng)) {
                AStarOracle oracle;
                const auto t = run_episode(s, ep, oracle, cfg, seed);
                check_trace_invariants(s, t, cfg);
                ok += t.status == TerminalStatus::Success ? 1 : 0;
                ++total;
            }
        }
    }
    CHECK(static_cast<double>(ok) / total >= 0.95);
}

TEST_CASE("greedy cuts across non-compliant terrain") {
    Scene s = open_field();
    s.grid.fill_rect({10, 10}, {50, 50}, SemanticClass::Lawn);
    s.spawn_region.clear();
    for (int i = 2; i < 58; ++i) s.spawn_region.push_back({i, 5});
    const Episode ep = point_episode(s, {5, 5}, {55, 55});
    const SimConfig cfg;
    GreedyPolicy greedy;
    const auto g = run_episode(s, ep, greedy, cfg, 0);
    int off = 0;
    for (const auto& st : g.steps) off += st.compliant ? 0 : 1;
    CHECK(off > 0);
    check_trace_invariants(s, g, cfg);
    AStarOracle oracle;
    const auto o = run_episode(s, ep, oracle, cfg, 0);
    for (const auto& st : o.steps) CHECK(st.compliant);
}

TEST_CASE("collision termination") {
    Scene s = open_field();
    s.grid.fill_rect({20, 1}, {22, 59}, SemanticClass::Obstacle);
    s.grid.set({21, 58}, SemanticClass::Sidewalk);
    s.grid.set({20, 58}, SemanticClass::Sidewalk);
    const Episode ep = point_episode(s, {10, 20}, {40, 20});
    SimConfig cfg;
    cfg.terminate_on_collision = true;
    GreedyPolicy greedy;
    const auto t = run_episode(s, ep, greedy, cfg, 0);
    CHECK(t.status == TerminalStatus::Collision);
    CHECK(t.collision_steps() == 1);
    CHECK(t.steps.back().collided);

    cfg.terminate_on_collision = false;
    const auto slide = run_episode(s, ep, greedy, cfg, 0);
    CHECK(slide.status == TerminalStatus::Timeout);
    for (const auto& st : slide.steps) CHECK(is_traversable(s.grid.class_at(st.pose.position())));
}

TEST_CASE("policy failures carry the step index") {
    const Scene s = open_field();
    const Episode ep = point_episode(s, {5, 5}, {40, 40});
    ThrowingPolicy p(10);
    try {
        (void)run_episode(s, ep, p, SimConfig{}, 0);
        FAIL("expected PolicyError");
    } catch (const PolicyError& e) {
        CHECK(e.step() == 10);
        CHECK(e.code() == ErrorCode::PolicyError);
    }
}

TEST_CASE("actor interpolation") {
    PersonScript script;
    script.target = {{1.0, Pose2D(0, 0, 0)}, {2.0, Pose2D(2, 2, kPi / 2)}};
    script.distractors.push_back({"d", {{0.0, Pose2D(5, 5, 0)}, {4.0, Pose2D(9, 5, 0)}}});
    const auto mid = advance_actors(script, 1.5);
    REQUIRE(mid.size() == 2);
    CHECK(mid[0].x == doctest::Approx(1.0));
    CHECK(mid[0].y == doctest::Approx(1.0));
    CHECK(mid[0].theta == doctest::Approx(kPi / 4));
    CHECK(mid[1].x == doctest::Approx(6.5));
    const auto late = advance_actors(script, 10.0);
    CHECK(late[0] == Pose2D(2, 2, kPi / 2));
    CHECK(late[1] == Pose2D(9, 5, 0));
    CHECK(advance_actors(script, -1.0)[0] == Pose2D(0, 0, 0));
}

TEST_CASE("interpolated actors stay on traversable cells") {
    const Scene s = gen_urban_block(3);
    Rng rng(2);
    for (const auto& ep : synth_person_follow(s, 9, {1.5}, rng)) {
        const auto& script = *ep.person_script;
        const double end = script.duration();
        for (double t = 0.0; t <= end; t += 0.03) {
            for (const auto& p : advance_actors(script, t)) CHECK(is_traversable(s.grid.class_at(p.position())));
        }
    }
}

TEST_CASE("person following rollouts") {
    const Scene s = gen_urban_block(3);
    Rng rng(6);
    const SimConfig cfg;
    for (const auto& ep : synth_person_follow(s, 6, {1.5, 2.0}, rng)) {
        AStarOracle oracle;
        const auto t = run_episode(s, ep, oracle, cfg, 0);
        check_trace_invariants(s, t, cfg);
        const auto& script = *ep.person_script;
        for (const auto& st : t.steps) {
            REQUIRE(st.target_in_view.has_value());
            if (script.target_absent) {
                CHECK_FALSE(*st.target_in_view);
                continue;
            }
            const Vec2 target = pose_at(script.target, st.time).position();
            CHECK(*st.target_in_view == oracle::point_visible(s.grid, st.pose, target, cfg.fov));
            CHECK(*st.target_gap == doctest::Approx(distance(target, st.pose.position())));
        }
    }
}

TEST_CASE("lost track after the target walks out of view") {
    Scene s = open_field();
    Episode ep;
    ep.episode_id = "follow";
    ep.scene_id = s.id;
    ep.start = Pose2D(2.0, 7.0, kPi);  // facing away from the walker
    PersonScript script;
    script.target_descriptor = "red coat hat";
    for (int k = 0; k <= 100; ++k) script.target.push_back({0.1 * k, Pose2D(3.5 + 0.1 * k, 7.0, 0.0)});
    script.follower = {{0.0, ep.start}};
    ep.person_script = script;
    ep.goal = PersonFollowGoal{script.target_descriptor, 1.5};
    ep.gt_path = PathPolyline({ep.start.position()});
    ep.gt_plans = {identity_plan()};
    ep.max_steps = 100;
    SimConfig cfg;
    StationaryPolicy still;
    const auto t = run_episode(s, ep, still, cfg, 0);
    REQUIRE(t.status == TerminalStatus::LostTrack);
    REQUIRE(t.steps.size() > 50);
    for (std::size_t k = t.steps.size() - 50; k < t.steps.size(); ++k) {
        CHECK_FALSE(*t.steps[k].target_in_view);
        CHECK(*t.steps[k].target_gap > cfg.lost_track_gap);
    }
    const auto& before = t.steps[t.steps.size() - 51];
    CHECK((*before.target_in_view || *before.target_gap <= cfg.lost_track_gap));
}

TEST_CASE("observations agree with full-grid visibility") {
    const Scene s = gen_apartment(7);
    Rng rng(8);
    const SimConfig cfg;
    for (const auto& ep : synth_object_goal(s, 10, rng)) {
        const Observation obs = build_observation(s, ep, ep.start, 0, 0.0, cfg);
        const int n = static_cast<int>(std::ceil(cfg.local_grid_half_width / s.grid.resolution()));
        CHECK(obs.local_grid_half_cells == n);
        CHECK(obs.local_grid.size() == static_cast<std::size_t>((2 * n + 1) * (2 * n + 1)));
        CHECK(obs.local_grid[static_cast<std::size_t>(n * (2 * n + 1) + n)] == s.grid.class_at(ep.start.position()));
        std::vector<std::string> want;
        for (const auto& o : s.objects)
            if (oracle::object_visible(s.grid, ep.start, o, cfg.fov)) want.push_back(o.id);
        std::vector<std::string> got;
        for (const auto& v : obs.visible) got.push_back(v.id);
        std::sort(want.begin(), want.end());
        std::sort(got.begin(), got.end());
        CHECK(got == want);
    }
}

TEST_CASE("policy factory and status names") {
    CHECK(make_policy("oracle")->name() == "oracle");
    CHECK(make_policy("greedy")->name() == "greedy");
    CHECK(make_policy("stationary")->name() == "stationary");
    CHECK(make_policy("noisy:0.2") != nullptr);
    CHECK_THROWS_AS(make_policy("noisy:x"), Error);
    CHECK_THROWS_AS(make_policy("noisy:-1"), Error);
    CHECK_THROWS_AS(make_policy("pilot"), Error);
    for (auto st : {TerminalStatus::Success, TerminalStatus::Timeout, TerminalStatus::Collision, TerminalStatus::LostTrack})
        CHECK(status_from_name(status_name(st)) == st);
    SimConfig bad;
    bad.dt = 0.0;
    CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("plans ending off the traversable set stay unscored") {
    const Scene s = gen_urban_block(3);
    Rng rng(4);
    SimConfig cfg;
    cfg.score_plans = true;
    int scored = 0;
    int unscored = 0;
    for (const auto& ep : synth_point_goal(s, 6, 0.5, rng)) {
        auto policy = make_policy("greedy");
        const EpisodeTrace t = run_episode(s, ep, *policy, cfg, 5);
        for (const auto& p : t.plans) {
            if (p.reward) {
                ++scored;
                CHECK(std::isfinite(p.reward->total));
            } else {
                ++unscored;
            }
        }
    }
    CHECK(scored > 0);
    CHECK(unscored > 0);
}
