#include <doctest.h>

#include "navkit/agentic.hpp"
#include "navkit/error.hpp"
#include "navkit/generators.hpp"

using namespace navkit;

namespace {

std::size_t parse_offset(const std::string& text, std::set<std::string>* expected = nullptr) {
    try {
        (void)parse_instruction(text);
    } catch (const ParseError& e) {
        CHECK(e.code() == ErrorCode::ParseError);
        if (expected) *expected = e.expected();
        return e.offset();
    }
    FAIL("expected ParseError for: " << text);
    return 0;
}

std::vector<TaskKind> kinds_of(const std::vector<SubTask>& plan) {
    std::vector<TaskKind> out;
    for (const auto& s : plan) out.push_back(s.kind);
    return out;
}

Pose2D apartment_start(const Scene& s) { return Pose2D(s.graph.nodes[2].position, 0.0); }

/// Approach/Reach shape: every memory-backed Reach leg follows a PointGoal.
void check_shape(const std::vector<SubTask>& plan) {
    for (std::size_t k = 0; k < plan.size(); ++k) {
        if (k > 0) CHECK(plan[k].origin_clause >= plan[k - 1].origin_clause);
        const auto& s = plan[k];
        const bool reach_from_memory = s.role == SubTaskRole::Reach && s.hypothesis &&
                                       (s.kind == TaskKind::ObjectGoal || s.kind == TaskKind::PoiGoal);
        if (!reach_from_memory) continue;
        REQUIRE(k > 0);
        CHECK(plan[k - 1].kind == TaskKind::PointGoal);
        CHECK(plan[k - 1].origin_clause <= s.origin_clause);
    }
}

}  // namespace

TEST_CASE("parsing examples") {
    const IntentAst a = parse_instruction("go to the kitchen then find an oven");
    REQUIRE(a.clauses.size() == 2);
    CHECK(a.clauses[0].verb == Verb::Goto);
    CHECK(a.clauses[0].target == "kitchen");
    CHECK(a.clauses[0].offset == 0);
    CHECK(a.clauses[1].verb == Verb::Find);
    CHECK(a.clauses[1].target == "oven");
    CHECK(a.clauses[1].offset == 23);

    const IntentAst b = parse_instruction("turn left 60 degrees and move forward 1 meter");
    REQUIRE(b.clauses.size() == 2);
    CHECK(b.clauses[0].primitive->kind == PrimitiveKind::TurnLeft);
    CHECK(b.clauses[0].primitive->magnitude == 60.0);
    CHECK(b.clauses[1].primitive->kind == PrimitiveKind::Forward);
    CHECK(b.clauses[1].primitive->magnitude == 1.0);
    CHECK(render_clause(b.clauses[0]) == "PRIMITIVE(" + std::string(primitive_name(PrimitiveKind::TurnLeft)) + " 60)");

    const IntentAst c = parse_instruction("Go Through Door and TURN AROUND then follow the man in red and go to Tea Shop");
    REQUIRE(c.clauses.size() == 4);
    CHECK(c.clauses[0].verb == Verb::Through);
    CHECK(c.clauses[0].target == "door");
    CHECK(c.clauses[1].primitive->kind == PrimitiveKind::TurnAround);
    CHECK(c.clauses[2].verb == Verb::Follow);
    CHECK(c.clauses[2].target == "man in red");
    CHECK(c.clauses[3].target == "tea shop");
    CHECK(parse_instruction("move backward 2.5 meters").clauses[0].primitive->magnitude == 2.5);
}

TEST_CASE("parse errors carry the offset and the accepted tokens") {
    std::set<std::string> expected;
    CHECK(parse_offset("flurble the wug", &expected) == 0);
    CHECK(expected.count("find"));
    CHECK(expected.count("go"));
    CHECK(parse_offset("", &expected) == 0);
    CHECK(parse_offset("go to", &expected) == 5);
    CHECK(expected == std::set<std::string>{"<word>"});
    CHECK(parse_offset("turn left 60 radians", &expected) == 13);
    CHECK(expected == std::set<std::string>{"degrees"});
    CHECK(parse_offset("turn left sixty degrees", &expected) == 10);
    CHECK(expected == std::set<std::string>{"<number>"});
    CHECK(parse_offset("move forward 0 meters") == 13);
    CHECK(parse_offset("find oven and") == 13);
    CHECK(parse_offset("go through the window", &expected) == 15);
    CHECK(expected == std::set<std::string>{"door"});
    CHECK(parse_offset("turn around please", &expected) == 12);
    CHECK(expected.count("then"));
    CHECK(parse_offset("find the oven; go to kitchen") == 13);
}

TEST_CASE("generated instructions parse clause by clause") {
    const std::vector<std::string> clauses = {"go to the kitchen", "find a sofa",         "follow the woman in blue",
                                              "go through door",   "turn right 15 degrees", "move forward 2 meters",
                                              "turn around",       "go to the tea shop"};
    const std::vector<Verb> verbs = {Verb::Goto,    Verb::Find,      Verb::Follow,    Verb::Through,
                                     Verb::Primitive, Verb::Primitive, Verb::Primitive, Verb::Goto};
    Rng rng(1);
    for (int trial = 0; trial < 300; ++trial) {
        const int n = 1 + static_cast<int>(rng.below(5));
        std::string text;
        std::vector<std::size_t> picks;
        std::vector<std::size_t> offsets;
        for (int k = 0; k < n; ++k) {
            if (k) text += rng.coin() ? " then " : " and ";
            picks.push_back(rng.below(clauses.size()));
            offsets.push_back(text.size());
            text += clauses[picks.back()];
        }
        const IntentAst ast = parse_instruction(text);
        REQUIRE(ast.clauses.size() == picks.size());
        for (std::size_t k = 0; k < picks.size(); ++k) {
            CHECK(ast.clauses[k].verb == verbs[picks[k]]);
            CHECK(ast.clauses[k].offset == offsets[k]);
            CHECK_FALSE(ast.clauses[k].target.empty());
        }
        CHECK(parse_instruction(text) == ast);
    }
}

TEST_CASE("find with the room in memory goes coarse then fine") {
    const Scene s = gen_apartment(7);
    TopoStore mem;
    mem.ingest_scene(s);
    const Pose2D start = apartment_start(s);
    const auto p = plan(parse_instruction("find an oven"), mem, start, s);
    REQUIRE(kinds_of(p) == std::vector<TaskKind>{TaskKind::PointGoal, TaskKind::ObjectGoal});
    CHECK(p[0].role == SubTaskRole::Approach);
    CHECK(p[1].role == SubTaskRole::Reach);
    CHECK(p[0].hypothesis == p[1].hypothesis);
    CHECK(mem.node(*p[1].hypothesis)->label == "oven");
    const auto kitchen = mem.query_label("kitchen", LayerKind::Function);
    REQUIRE(kitchen.size() == 1);
    CHECK(std::get<PointGoal>(p[0].goal).target == kitchen[0].anchor);
    CHECK(std::get<ObjectGoal>(p[1].goal).category == "oven");

    const auto q = plan(parse_instruction("go to the kitchen then find an oven"), mem, start, s);
    CHECK(kinds_of(q) == std::vector<TaskKind>{TaskKind::PointGoal, TaskKind::ObjectGoal});
    CHECK(q[0].origin_clause == 0);
    CHECK(q[1].origin_clause == 1);
    check_shape(q);
}

TEST_CASE("find with empty memory is a single exploratory search") {
    const Scene s = gen_apartment(7);
    const TopoStore empty;
    const auto p = plan(parse_instruction("find an oven"), empty, apartment_start(s), s);
    REQUIRE(kinds_of(p) == std::vector<TaskKind>{TaskKind::ObjectGoal});
    CHECK(p[0].exploratory);
    CHECK_FALSE(p[0].hypothesis.has_value());

    TopoStore other;
    other.ingest_scene(gen_apartment(8));
    CHECK(plan(parse_instruction("find an oven"), other, apartment_start(s), s).size() == 1);
}

TEST_CASE("poi, door and object mission shape") {
    Scene s = gen_apartment(7);
    const std::string hidden = s.objects.back().category;
    const Vec2 at = s.graph.nodes[0].position;
    s.pois.push_back({"tea shop", Pose2D(at, 0.0), 1.0});
    Scene known = s;
    std::erase_if(known.objects, [&](const SceneObject& o) { return o.category == hidden; });
    TopoStore mem;
    mem.ingest_scene(known);

    const auto p = plan(parse_instruction("go to the tea shop then go through the door then find a " + hidden), mem,
                        apartment_start(s), s);
    REQUIRE(kinds_of(p) ==
            std::vector<TaskKind>{TaskKind::PointGoal, TaskKind::PoiGoal, TaskKind::Instruction, TaskKind::ObjectGoal});
    CHECK(p[0].role == SubTaskRole::Approach);
    CHECK(p[1].role == SubTaskRole::Reach);
    CHECK(p[2].role == SubTaskRole::Interact);
    CHECK(p[3].role == SubTaskRole::Reach);
    CHECK(p[3].exploratory);
    const auto& door = std::get<InstructionGoal>(p[2].goal);
    REQUIRE(door.program.steps.size() == 1);
    CHECK(door.program.steps[0].kind == PrimitiveKind::GoThroughDoor);
    CHECK(door.program.steps[0].door_id >= 0);
    CHECK(door.implied_target.has_value());
    check_shape(p);
}

TEST_CASE("follow and primitive clauses") {
    const Scene s = gen_apartment(7);
    TopoStore mem;
    mem.ingest_scene(s);
    const auto p = plan(parse_instruction("follow the man in red then turn left 90 degrees"), mem, apartment_start(s), s);
    REQUIRE(kinds_of(p) == std::vector<TaskKind>{TaskKind::PersonFollow, TaskKind::Instruction});
    CHECK(p[0].role == SubTaskRole::Interact);
    CHECK(std::get<PersonFollowGoal>(p[0].goal).descriptor == "man in red");
    CHECK(std::get<InstructionGoal>(p[1].goal).program.steps[0].magnitude == 90.0);
}

TEST_CASE("global budgets are split across legs") {
    const Scene s = gen_apartment(7);
    TopoStore mem;
    mem.ingest_scene(s);
    const IntentAst intent = parse_instruction("go to the bedroom then find an oven then go to the bathroom");
    for (int g : {200, 500, 2000}) {
        PlanOptions opts;
        opts.global_budget = g;
        const auto p = plan(intent, mem, apartment_start(s), s, opts);
        REQUIRE_FALSE(p.empty());
        int sum = 0;
        for (const auto& t : p) {
            CHECK(t.budget >= kMinLegSteps);
            sum += t.budget;
        }
        CHECK(sum <= g + static_cast<int>(p.size()) * kMinLegSteps);
        CHECK(sum >= g - static_cast<int>(p.size()));
    }
    for (const auto& t : plan(intent, mem, apartment_start(s), s)) CHECK(t.budget > 0);
}

TEST_CASE("random plans keep clause order and the approach shape") {
    const Scene s = gen_apartment(3);
    TopoStore mem;
    mem.ingest_scene(s);
    std::vector<std::string> words = {"kitchen", "bedroom", "bathroom", "living room", "unicorn", "coke", "towel"};
    for (const auto& o : s.objects) words.push_back(o.category);
    Rng rng(2);
    for (int trial = 0; trial < 60; ++trial) {
        std::string text;
        const int n = 1 + static_cast<int>(rng.below(4));
        for (int k = 0; k < n; ++k) {
            if (k) text += " then ";
            text += (rng.coin() ? "find the " : "go to the ") + words[rng.below(words.size())];
        }
        const IntentAst intent = parse_instruction(text);
        const auto p = plan(intent, mem, apartment_start(s), s);
        check_shape(p);
        std::set<int> seen;
        for (const auto& t : p) seen.insert(t.origin_clause);
        CHECK(static_cast<int>(seen.size()) == n);
    }
}

TEST_CASE("reflection rules") {
    const Scene s = gen_apartment(7);
    TopoStore mem;
    mem.ingest_scene(s);
    const Pose2D start = apartment_start(s);
    AStarOracle oracle;
    const auto p = plan(parse_instruction("go to the kitchen"), mem, start, s);
    REQUIRE(p.size() == 1);
    const Episode ep = make_subtask_episode(s, p[0], start, "reflect/0");
    const EpisodeTrace ok = run_episode(s, ep, oracle, SimConfig{}, 1);
    CHECK(ok.status == TerminalStatus::Success);
    const ReflectionResult r = reflect(ok, p[0], mem, s);
    CHECK(r.r);
    CHECK(r.f.code == FeedbackCode::Ok);

    EpisodeTrace timeout = ok;
    timeout.status = TerminalStatus::Timeout;
    timeout.steps.resize(1);
    const ReflectionResult t = reflect(timeout, p[0], mem, s);
    CHECK_FALSE(t.r);
    CHECK((t.f.code == FeedbackCode::Timeout || t.f.code == FeedbackCode::WrongRoom));

    EpisodeTrace crash = ok;
    crash.status = TerminalStatus::Collision;
    CHECK(reflect(crash, p[0], mem, s).f.code == FeedbackCode::Collision);
    CHECK(reflect(EpisodeTrace{}, p[0], mem, s).f.code == FeedbackCode::Timeout);

    SubTask follow;
    follow.kind = TaskKind::PersonFollow;
    follow.goal = PersonFollowGoal{"man", 1.5};
    EpisodeTrace lost = ok;
    lost.status = TerminalStatus::LostTrack;
    CHECK(reflect(lost, follow, mem, s).f.code == FeedbackCode::LostTrack);
}

TEST_CASE("replanning walks the affinity list without repeating a suspect") {
    Scene c = gen_apartment(7);
    c.objects[0].category = "snack rack";
    c.objects[3].category = "vending machine";
    TopoStore mem;
    mem.ingest_scene(c);
    const IntentAst intent = parse_instruction("find a coke");
    const Pose2D start = apartment_start(c);
    PlanOptions opts;
    auto p = plan_clause(intent, 0, mem, start, c, opts);
    REQUIRE(kinds_of(p) == std::vector<TaskKind>{TaskKind::PointGoal, TaskKind::ObjectGoal});
    CHECK(mem.node(*p[1].hypothesis)->label == "snack rack");

    std::vector<std::string> suspects;
    for (int round = 0; round < 10 && p.back().hypothesis; ++round) {
        const std::string suspect = *p.back().hypothesis;
        CHECK(std::find(suspects.begin(), suspects.end(), suspect) == suspects.end());
        suspects.push_back(suspect);
        p = replan(intent, 0, mem, Feedback{FeedbackCode::NotFound, "", suspect}, 2, start, c, opts);
        REQUIRE_FALSE(p.empty());
        if (round == 0) CHECK(mem.node(*p.back().hypothesis)->label == "vending machine");
    }
    CHECK(p.size() == 1);
    CHECK(p[0].exploratory);
    CHECK(std::set<std::string>(suspects.begin(), suspects.end()) == opts.excluded);

    PlanOptions none;
    CHECK(replan(intent, 0, mem, Feedback{FeedbackCode::NotFound, "", std::string("x")}, 0, start, c, none).empty());
    CHECK(none.excluded.count("x"));
}

TEST_CASE("missions") {
    const Scene s = gen_apartment(7);
    const Pose2D start = apartment_start(s);
    AStarOracle oracle;
    MissionConfig cfg;

    TopoStore m1;
    m1.ingest_scene(s);
    TopoStore m2 = m1;
    const auto a = run_mission(s, "go to the kitchen then find an oven", oracle, m1, cfg, 4, start);
    const auto b = run_mission(s, "go to the kitchen then find an oven", oracle, m2, cfg, 4, start);
    CHECK(a.success);
    CHECK(mission_to_json(a).dump() == mission_to_json(b).dump());
    CHECK(m1 == m2);
    CHECK(a.total_steps() > 0);
    CHECK(a.runs.size() == a.traces.size());
    for (std::size_t k = 1; k < a.runs.size(); ++k) CHECK(a.runs[k].start == a.runs[k - 1].end);

    TopoStore m3;
    m3.ingest_scene(s);
    const auto lost = run_mission(s, "find a unicorn", oracle, m3, cfg, 4, start);
    CHECK_FALSE(lost.success);
    REQUIRE(lost.feedback_chain.size() == static_cast<std::size_t>(cfg.max_retries + 1));
    for (const auto& f : lost.feedback_chain) CHECK(f.code == FeedbackCode::NotFound);
    CHECK(lost.retries.at(0) == cfg.max_retries);
    CHECK_FALSE(lost.failure.empty());

    MissionConfig tight = cfg;
    tight.max_retries = 0;
    const auto once = run_mission(s, "find a unicorn", oracle, m3, tight, 4, start);
    CHECK(once.runs.size() == 1);

    const auto follow = run_mission(s, "follow the man in red", oracle, m3, cfg, 4, start);
    CHECK_FALSE(follow.success);
    CHECK(follow.feedback_chain.front().code == FeedbackCode::LostTrack);
    CHECK(follow.runs.front().status == "skipped");

    CHECK_THROWS_AS(run_mission(s, "flurble the wug", oracle, m3, cfg, 4, start), ParseError);

    const Json j = mission_to_json(a);
    CHECK(j["schema_version"] == 1);
    CHECK(j["clauses"].size() == 2);
    CHECK(j["summary"]["subtasks_ok"] == a.runs.size());
}

TEST_CASE("mission evidence reaches memory") {
    const Scene s = gen_apartment(7);
    TopoStore mem;
    mem.ingest_scene(s);
    const TopoStore before = mem;
    AStarOracle oracle;
    const auto r = run_mission(s, "go to the bathroom then go to the kitchen", oracle, mem, MissionConfig{}, 9,
                               apartment_start(s));
    for (const auto& e : r.evidence) {
        CHECK(e.kind == EvidenceKind::TraversedOk);
        CHECK(mem.edge(e.u, e.v) != nullptr);
        CHECK(e.duration >= 0.0);
    }
    REQUIRE_FALSE(r.evidence.empty());
    CHECK_FALSE(mem == before);
    CHECK(mem.layer_violations().empty());
}
