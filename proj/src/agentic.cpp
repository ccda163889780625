#include "navkit/agentic.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <deque>
#include <limits>
#include <memory>
#include <sstream>

#include "navkit/episode_io.hpp"
#include "navkit/error.hpp"
#include "navkit/planner.hpp"

namespace navkit {

const char* verb_name(Verb v) {
    switch (v) {
        case Verb::Goto: return "GOTO";
        case Verb::Find: return "FIND";
        case Verb::Follow: return "FOLLOW";
        case Verb::Through: return "THROUGH";
        case Verb::Primitive: return "PRIMITIVE";
    }
    return "?";
}

const char* role_name(SubTaskRole r) {
    switch (r) {
        case SubTaskRole::Approach: return "approach";
        case SubTaskRole::Reach: return "reach";
        case SubTaskRole::Interact: return "interact";
    }
    return "?";
}

const char* feedback_name(FeedbackCode c) {
    switch (c) {
        case FeedbackCode::Ok: return "ok";
        case FeedbackCode::NotFound: return "not_found";
        case FeedbackCode::Timeout: return "timeout";
        case FeedbackCode::Collision: return "collision";
        case FeedbackCode::WrongRoom: return "wrong_room";
        case FeedbackCode::LostTrack: return "lost_track";
    }
    return "?";
}

// ------------------------------------------------------------------ parser

namespace {

struct Token {
    std::string text;  // lower case
    std::size_t offset = 0;
};

bool word_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '\'' || c == '-';
}

std::vector<Token> tokenize(const std::string& text) {
    std::vector<Token> out;
    std::size_t k = 0;
    while (k < text.size()) {
        const char c = text[k];
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
            ++k;
            continue;
        }
        if (!word_char(c)) throw ParseError(k, {"<word>"}, std::string(1, c));
        const std::size_t start = k;
        while (k < text.size()) {
            if (word_char(text[k])) {
                ++k;
            } else if (text[k] == '.' && k + 1 < text.size() && text[k + 1] >= '0' && text[k + 1] <= '9') {
                ++k;
            } else {
                break;
            }
        }
        out.push_back({to_lower(std::string_view(text).substr(start, k - start)), start});
    }
    return out;
}

bool is_article(const std::string& w) { return w == "a" || w == "an" || w == "the"; }
bool is_joiner(const std::string& w) { return w == "then" || w == "and"; }

class Parser {
public:
    Parser(const std::string& text) : text_(text), toks_(tokenize(text)) {}

    IntentAst run() {
        IntentAst out;
        out.clauses.push_back(clause());
        while (!at_end()) {
            if (!is_joiner(peek().text)) fail({"and", "then", "<end>"});
            ++pos_;
            out.clauses.push_back(clause());
        }
        return out;
    }

private:
    bool at_end() const { return pos_ >= toks_.size(); }
    const Token& peek() const { return toks_[pos_]; }
    std::size_t here() const { return at_end() ? text_.size() : toks_[pos_].offset; }

    [[noreturn]] void fail(std::set<std::string> expected) const {
        throw ParseError(here(), std::move(expected), at_end() ? "<end>" : peek().text);
    }

    std::string expect(std::set<std::string> options) {
        if (at_end() || !options.count(peek().text)) fail(std::move(options));
        return toks_[pos_++].text;
    }

    bool accept(const std::string& w) {
        if (!at_end() && peek().text == w) {
            ++pos_;
            return true;
        }
        return false;
    }

    std::string words(bool drop_article) {
        std::vector<std::string> ws;
        while (!at_end() && !is_joiner(peek().text)) ws.push_back(toks_[pos_++].text);
        if (drop_article && ws.size() > 1 && is_article(ws.front())) ws.erase(ws.begin());
        if (ws.empty()) fail({"<word>"});
        std::string out;
        for (const auto& w : ws) out += (out.empty() ? "" : " ") + w;
        return out;
    }

    double number() {
        if (at_end()) fail({"<number>"});
        const std::string& s = peek().text;
        double v = 0.0;
        const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || !std::isfinite(v) || v <= 0.0) fail({"<number>"});
        ++pos_;
        return v;
    }

    Clause clause() {
        Clause c;
        c.offset = here();
        if (at_end()) fail({"find", "follow", "go", "move", "turn"});
        const std::string head = expect({"find", "follow", "go", "move", "turn"});
        if (head == "go") {
            if (expect({"to", "through"}) == "to") {
                c.verb = Verb::Goto;
                c.target = words(true);
            } else {
                c.verb = Verb::Through;
                if (!accept("the")) expect({"door", "the"});
                else expect({"door"});
                c.target = "door";
            }
        } else if (head == "find") {
            c.verb = Verb::Find;
            c.target = words(true);
        } else if (head == "follow") {
            c.verb = Verb::Follow;
            c.target = words(true);
        } else if (head == "turn") {
            c.verb = Verb::Primitive;
            const std::string dir = expect({"around", "left", "right"});
            Primitive p;
            if (dir == "around") {
                p.kind = PrimitiveKind::TurnAround;
                p.magnitude = 180.0;
            } else {
                p.kind = dir == "left" ? PrimitiveKind::TurnLeft : PrimitiveKind::TurnRight;
                p.magnitude = number();
                expect({"degrees"});
            }
            c.primitive = p;
            c.target = primitive_name(p.kind);
        } else {
            c.verb = Verb::Primitive;
            const std::string dir = expect({"backward", "forward"});
            Primitive p;
            p.kind = dir == "forward" ? PrimitiveKind::Forward : PrimitiveKind::Backward;
            p.magnitude = number();
            expect({"meter", "meters"});
            c.primitive = p;
            c.target = primitive_name(p.kind);
        }
        return c;
    }

    const std::string& text_;
    std::vector<Token> toks_;
    std::size_t pos_ = 0;
};

}  // namespace

IntentAst parse_instruction(const std::string& text) { return Parser(text).run(); }

std::string render_clause(const Clause& c) {
    std::string out = std::string(verb_name(c.verb)) + "(";
    if (c.primitive) {
        out += primitive_name(c.primitive->kind);
        if (c.primitive->kind != PrimitiveKind::TurnAround) {
            std::ostringstream m;
            m << " " << c.primitive->magnitude;
            out += m.str();
        }
    } else {
        out += c.target;
    }
    return out + ")";
}

std::string describe_subtask(const SubTask& s) {
    std::string out = std::string(task_name(s.kind)) + "[" + role_name(s.role) + "] " + describe_goal(s.goal);
    if (s.hypothesis) out += " via " + *s.hypothesis;
    if (s.exploratory) out += " (exploratory)";
    return out;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

// ------------------------------------------------------------------ affinity

const std::vector<std::string>& affinity_labels(const std::string& category) {
    static const std::map<std::string, std::vector<std::string>> table = {
        {"coke", {"snack rack", "vending machine", "fridge", "kitchen"}},
        {"soda", {"snack rack", "vending machine", "fridge", "kitchen"}},
        {"water", {"vending machine", "fridge", "sink", "kitchen"}},
        {"snack", {"snack rack", "vending machine", "kitchen"}},
        {"cup", {"sink", "kitchen"}},
        {"towel", {"bathroom"}},
        {"pillow", {"bed", "bedroom"}},
        {"remote", {"tv", "sofa", "living room"}},
        {"book", {"sofa", "bed", "living room", "bedroom"}},
    };
    static const std::vector<std::string> none;
    const auto it = table.find(to_lower(category));
    return it == table.end() ? none : it->second;
}

// ------------------------------------------------------------------ planning

namespace {

bool is_poi_node(const TopoNode& n, const Scene& scene) {
    if (n.layer != LayerKind::ObjectPoi) return false;
    return std::any_of(scene.pois.begin(), scene.pois.end(), [&](const PoiEntry& p) { return p.name == n.source; });
}

const PoiEntry* find_poi(const Scene& scene, const std::string& name) {
    for (const auto& p : scene.pois) {
        if (label_equals(p.name, name)) return &p;
    }
    return nullptr;
}

struct Leg {
    SubTask task;
    Pose2D end;
    double length = 0.0;
    bool sweep = false;
};

class ClausePlanner {
public:
    ClausePlanner(const TopoStore& memory, const Scene& scene, const PlanOptions& opts)
        : memory_(memory), scene_(scene), opts_(opts) {}

    std::vector<Leg> plan(const Clause& c, int index, const Pose2D& from) {
        clause_ = index;
        from_ = from;
        field_.reset();
        if (scene_.grid.contains(from.position())) {
            field_ = std::make_unique<DistanceField>(scene_.grid, scene_.grid.world_to_grid(from.position()),
                                                     expert_traversal(scene_));
        }
        switch (c.verb) {
            case Verb::Goto: return go_to(c.target);
            case Verb::Find: return find(c.target);
            case Verb::Follow: return follow(c.target);
            case Verb::Through: return through();
            case Verb::Primitive: return primitive(*c.primitive);
        }
        return {};
    }

private:
    double cost_to(Vec2 p) const {
        if (!field_ || !scene_.grid.contains(p)) return kInf;
        const Cell c = scene_.grid.world_to_grid(p);
        return field_->reachable(c) ? field_->cost(c) : kInf;
    }

    double leg_length(Vec2 a, Vec2 b) const {
        const double g = cost_to(b);
        return std::isfinite(g) ? g : distance(a, b);
    }

    std::vector<TopoNode> candidates(const std::string& label, std::optional<LayerKind> layer) const {
        std::vector<TopoNode> out;
        for (auto& n : memory_.query_label(label, layer)) {
            if (n.scene_id == scene_.id && !opts_.excluded.count(n.id)) out.push_back(std::move(n));
        }
        std::stable_sort(out.begin(), out.end(),
                         [&](const TopoNode& a, const TopoNode& b) { return cost_to(a.anchor) < cost_to(b.anchor); });
        return out;
    }

    SubTask make(TaskKind kind, SubTaskRole role, GoalSpec goal, std::optional<std::string> hyp = std::nullopt) const {
        SubTask t;
        t.kind = kind;
        t.role = role;
        t.goal = std::move(goal);
        t.origin_clause = clause_;
        t.hypothesis = std::move(hyp);
        return t;
    }

    Leg point_leg(Vec2 target, SubTaskRole role, const std::string& hyp) const {
        Leg l{make(TaskKind::PointGoal, role, PointGoal{target}, hyp), Pose2D(target.x, target.y, from_.theta)};
        l.length = leg_length(from_.position(), target);
        return l;
    }

    /// Nearest reachable visible cell of an admitted instance, as resolve_goal picks it.
    std::optional<Pose2D> object_end(const ObjectGoal& g, Vec2 from) const {
        if (!scene_.grid.contains(from)) return std::nullopt;
        const DistanceField df(scene_.grid, scene_.grid.world_to_grid(from), expert_traversal(scene_));
        double best = kInf;
        std::optional<Pose2D> out;
        for (const auto& o : scene_.objects) {
            if (!g.admits(o)) continue;
            for (const auto& c : o.visible_region) {
                if (df.reachable(c) && df.cost(c) < best) {
                    best = df.cost(c);
                    const Vec2 p = scene_.grid.grid_to_world(c);
                    out = Pose2D(p.x, p.y, heading_of(o.position - p));
                }
            }
        }
        return out;
    }

    Leg object_leg(const ObjectGoal& g, Vec2 from, std::optional<std::string> hyp, bool exploratory) const {
        Leg l{make(TaskKind::ObjectGoal, SubTaskRole::Reach, g, std::move(hyp)), from_};
        l.task.exploratory = exploratory;
        if (const auto end = object_end(g, from)) {
            l.end = *end;
            l.length = distance(from, end->position()) * 1.5;
        } else {
            l.end = Pose2D(from.x, from.y, from_.theta);
            l.sweep = true;
        }
        return l;
    }

    Vec2 approach_anchor(const TopoNode& n, bool direct) const {
        if (direct) {
            if (const auto f = memory_.ancestor(n.id, LayerKind::Function)) return memory_.node(*f)->anchor;
        }
        return n.anchor;
    }

    std::vector<Leg> search(const std::string& category, const TopoNode& n, bool direct) const {
        const Vec2 anchor = approach_anchor(n, direct);
        ObjectGoal g{category, n.anchor, direct ? scene_.visibility_range + 0.5 : kHypothesisRadius};
        if (n.layer == LayerKind::Function || n.layer == LayerKind::Block) {
            g.search_center = n.anchor;
            g.search_radius = kHypothesisRadius;
            for (const auto& r : scene_.regions) {
                if (r.id == n.source) {
                    g.search_center = r.center();
                    g.search_radius = distance(r.center(), r.max);
                }
            }
        }
        std::vector<Leg> out{point_leg(anchor, SubTaskRole::Approach, n.id)};
        out.push_back(object_leg(g, anchor, n.id, false));
        return out;
    }

    std::vector<Leg> find(const std::string& category) const {
        for (const auto& n : candidates(category, LayerKind::ObjectPoi)) {
            if (!is_poi_node(n, scene_)) return search(category, n, true);
        }
        for (const auto& label : affinity_labels(category)) {
            for (const auto& n : candidates(label, std::nullopt)) {
                if (n.layer == LayerKind::ObjectPoi || n.layer == LayerKind::Function) return search(category, n, false);
            }
        }
        return {object_leg(ObjectGoal{category, std::nullopt, 0.0}, from_.position(), std::nullopt, true)};
    }

    std::vector<Leg> go_to(const std::string& target) const {
        if (const PoiEntry* poi = find_poi(scene_, target)) {
            Leg reach{make(TaskKind::PoiGoal, SubTaskRole::Reach, PoiGoal{poi->name}), poi->entrance};
            for (const auto& n : candidates(target, LayerKind::ObjectPoi)) {
                if (!is_poi_node(n, scene_)) continue;
                const auto road = memory_.road_attachment(n.id);
                const Vec2 anchor = road ? memory_.node(*road)->anchor : n.anchor;
                reach.task.hypothesis = n.id;
                reach.length = distance(anchor, poi->entrance.position()) * 1.5;
                return {point_leg(anchor, SubTaskRole::Approach, n.id), reach};
            }
            reach.task.exploratory = true;
            reach.length = leg_length(from_.position(), poi->entrance.position());
            return {reach};
        }
        for (LayerKind layer : {LayerKind::Function, LayerKind::Block, LayerKind::Road}) {
            const auto nodes = candidates(target, layer);
            if (!nodes.empty()) return {point_leg(nodes.front().anchor, SubTaskRole::Reach, nodes.front().id)};
        }
        return find(target);
    }

    std::vector<Leg> follow(const std::string& descriptor) const {
        Leg l{make(TaskKind::PersonFollow, SubTaskRole::Interact, PersonFollowGoal{descriptor, 1.5}), from_};
        l.length = 20.0;
        return {l};
    }

    std::vector<Leg> through() const {
        const Door* best = nullptr;
        double best_cost = kInf;
        for (const auto& d : scene_.doors) {
            const double c = leg_length(from_.position(), d.pose.position());
            if (c < best_cost) {
                best_cost = c;
                best = &d;
            }
        }
        InstructionGoal g;
        Primitive p;
        p.kind = PrimitiveKind::GoThroughDoor;
        p.door_id = best ? best->id : -1;
        g.program.steps.push_back(p);
        Leg l{make(TaskKind::Instruction, SubTaskRole::Interact, g), from_};
        if (!best) {
            l.task.exploratory = true;
            l.sweep = true;
            return {l};
        }
        std::get<InstructionGoal>(l.task.goal).implied_target = best->pose;
        l.length = best_cost + 1.0;
        l.end = best->pose;
        return {l};
    }

    std::vector<Leg> primitive(const Primitive& p) const {
        InstructionGoal g;
        g.program.steps.push_back(p);
        Leg l{make(TaskKind::Instruction, SubTaskRole::Interact, g), from_};
        const auto poses = execute_program(g.program, from_);
        if (!poses.empty()) l.end = poses.back();
        const bool translate = p.kind == PrimitiveKind::Forward || p.kind == PrimitiveKind::Backward;
        l.length = translate ? p.magnitude : 1.0;
        return {l};
    }

    const TopoStore& memory_;
    const Scene& scene_;
    const PlanOptions& opts_;
    int clause_ = 0;
    Pose2D from_;
    std::unique_ptr<DistanceField> field_;
};

bool same_point_goal(const SubTask& a, const SubTask& b) {
    const auto* pa = std::get_if<PointGoal>(&a.goal);
    const auto* pb = std::get_if<PointGoal>(&b.goal);
    return pa && pb && distance(pa->target, pb->target) < 1e-9;
}

std::vector<SubTask> assign_budgets(std::vector<Leg>& legs, int global_budget) {
    double total = 0.0;
    for (const auto& l : legs) total += l.sweep ? 0.0 : l.length;
    std::vector<SubTask> out;
    for (auto& l : legs) {
        if (l.sweep) {
            l.task.budget = kSearchSweepSteps;
        } else if (global_budget > 0) {
            const double share = total > 0.0 ? l.length / total : 1.0 / static_cast<double>(legs.size());
            l.task.budget = std::max(kMinLegSteps, static_cast<int>(std::floor(global_budget * share)));
        } else {
            l.task.budget = default_step_budget(l.length);
        }
        out.push_back(l.task);
    }
    return out;
}

std::vector<Leg> clause_legs(const IntentAst& intent, std::size_t clause, const TopoStore& memory, const Pose2D& pose,
                             const Scene& scene, const PlanOptions& opts) {
    if (clause >= intent.clauses.size()) throw Error(ErrorCode::InvalidParams, "clause index out of range");
    ClausePlanner planner(memory, scene, opts);
    return planner.plan(intent.clauses[clause], static_cast<int>(clause), pose);
}

}  // namespace

std::vector<SubTask> plan_clause(const IntentAst& intent, std::size_t clause, const TopoStore& memory, const Pose2D& pose,
                                 const Scene& scene, const PlanOptions& opts) {
    auto legs = clause_legs(intent, clause, memory, pose, scene, opts);
    return assign_budgets(legs, opts.global_budget);
}

std::vector<SubTask> plan(const IntentAst& intent, const TopoStore& memory, const Pose2D& pose, const Scene& scene,
                          const PlanOptions& opts) {
    std::vector<Leg> all;
    Pose2D cursor = pose;
    for (std::size_t k = 0; k < intent.clauses.size(); ++k) {
        auto legs = clause_legs(intent, k, memory, cursor, scene, opts);
        for (auto& l : legs) {
            if (l.task.role == SubTaskRole::Approach && !all.empty() && same_point_goal(all.back().task, l.task)) continue;
            cursor = l.end;
            all.push_back(std::move(l));
        }
    }
    return assign_budgets(all, opts.global_budget);
}

// ------------------------------------------------------------------ execution

Episode make_subtask_episode(const Scene& scene, const SubTask& task, const Pose2D& start, const std::string& id,
                             const std::optional<PersonScript>& script) {
    const SynthesisConfig defaults;
    Episode ep;
    ep.episode_id = id;
    ep.scene_id = scene.id;
    ep.start = start;
    ep.goal = task.goal;
    ep.max_steps = task.budget;
    ep.success_radius = task.kind == TaskKind::PoiGoal ? defaults.poi_success_radius : defaults.success_radius;
    if (auto* g = std::get_if<PointGoal>(&ep.goal)) g->target = to_local(start, g->target);
    if (auto* g = std::get_if<InstructionGoal>(&ep.goal)) {
        if (g->implied_target && !g->program.steps.empty() && g->program.steps.front().kind == PrimitiveKind::GoThroughDoor) {
            const Pose2D door = *g->implied_target;
            const Vec2 dir{std::cos(door.theta), std::sin(door.theta)};
            const double side = (start.position() - door.position()).dot(dir) > 0.0 ? -1.0 : 1.0;
            Pose2D target = door;
            for (double d : {0.75, 0.5, 1.0, 0.25}) {
                const Vec2 p = door.position() + dir * (side * d);
                if (scene.grid.contains(p) && passable(scene.grid, scene.grid.world_to_grid(p), expert_traversal(scene))) {
                    target = Pose2D(p.x, p.y, heading_of(dir * side));
                    break;
                }
            }
            g->implied_target = to_local(start, target);
        } else if (g->implied_target) {
            g->implied_target = to_local(start, *g->implied_target);
        }
    }
    if (task.kind == TaskKind::PersonFollow && script) {
        ep.person_script = *script;
        if (!script->follower.empty()) ep.start = script->follower.front().pose;
        ep.max_steps = 0;
    }
    return ep;
}

ReflectionResult reflect(const EpisodeTrace& trace, const SubTask& task, const TopoStore& memory, const Scene& scene,
                         const SimConfig& cfg) {
    auto fail = [](FeedbackCode code, std::string msg, std::optional<std::string> suspect = std::nullopt) {
        return ReflectionResult{false, Feedback{code, std::move(msg), std::move(suspect)}};
    };
    if (trace.steps.empty()) return fail(FeedbackCode::Timeout, "empty trace");
    if (trace.status == TerminalStatus::Collision) return fail(FeedbackCode::Collision, "collided");
    const Pose2D end = trace.steps.back().pose;
    switch (task.kind) {
        case TaskKind::ObjectGoal: {
            const auto& g = std::get<ObjectGoal>(task.goal);
            const double radius = cfg.success_radius.value_or(trace.success_radius);
            const bool close = trace.steps.back().goal_distance && *trace.steps.back().goal_distance <= radius;
            bool seen = false;
            for (const auto& o : scene.objects) {
                if (g.admits(o) && object_visible(scene.grid, end, o, cfg.fov)) seen = true;
            }
            if (trace.status == TerminalStatus::Success && seen && close) return {true, {FeedbackCode::Ok, "found " + g.category, {}}};
            const Episode ep = make_subtask_episode(scene, task, trace.steps.front().pose, trace.episode_id);
            if (!resolve_goal(scene, ep) || trace.status == TerminalStatus::Success) {
                std::string where = "search area";
                if (task.hypothesis) {
                    const TopoNode* n = memory.node(*task.hypothesis);
                    where = n ? n->label : *task.hypothesis;
                }
                return fail(FeedbackCode::NotFound, g.category + " not found at " + where, task.hypothesis);
            }
            return fail(FeedbackCode::Timeout, "ran out of steps searching for " + g.category);
        }
        case TaskKind::PersonFollow:
            if (trace.status == TerminalStatus::LostTrack) return fail(FeedbackCode::LostTrack, "target lost");
            return {true, {FeedbackCode::Ok, "followed to the end", {}}};
        default:
            break;
    }
    if (trace.status == TerminalStatus::Success) return {true, {FeedbackCode::Ok, "reached", {}}};
    if (task.hypothesis) {
        const TopoNode* n = memory.node(*task.hypothesis);
        if (n && n->layer == LayerKind::Function) {
            const Region* r = scene.region_at(end.position());
            if (!r || r->id != n->source) return fail(FeedbackCode::WrongRoom, "ended outside " + n->label, task.hypothesis);
        }
    }
    return fail(FeedbackCode::Timeout, "goal not reached within budget");
}

std::vector<SubTask> replan(const IntentAst& intent, std::size_t clause, const TopoStore& memory, const Feedback& feedback,
                            int attempts_left, const Pose2D& pose, const Scene& scene, PlanOptions& opts) {
    if (feedback.suspect) opts.excluded.insert(*feedback.suspect);
    if (attempts_left <= 0) return {};
    return plan_clause(intent, clause, memory, pose, scene, opts);
}

namespace {

inline constexpr double kVisitRadius = 0.6;

/// TraversedOk evidence for consecutive road-node visits along a trace.
std::vector<Evidence> traversal_evidence(const EpisodeTrace& trace, const TopoStore& memory, const Scene& scene,
                                         double clock) {
    std::vector<TopoNode> road;
    for (const auto& n : memory.layer_nodes(LayerKind::Road)) {
        if (n.scene_id == scene.id) road.push_back(n);
    }
    std::vector<Evidence> out;
    std::optional<std::string> last;
    double left_last = 0.0;
    for (const auto& s : trace.steps) {
        const TopoNode* at = nullptr;
        double best = kVisitRadius;
        for (const auto& n : road) {
            const double d = distance(n.anchor, s.pose.position());
            if (d <= best) {
                best = d;
                at = &n;
            }
        }
        if (!at) continue;
        if (last && *last != at->id && memory.edge(*last, at->id)) {
            out.push_back({*last, at->id, EvidenceKind::TraversedOk, s.time - left_last, 1.0, clock + s.time});
        }
        last = at->id;
        left_last = s.time;
    }
    return out;
}

}  // namespace

int MissionReport::total_steps() const {
    int n = 0;
    for (const auto& r : runs) n += r.steps;
    return n;
}

double MissionReport::total_path_length() const {
    double n = 0.0;
    for (const auto& r : runs) n += r.path_length;
    return n;
}

MissionReport run_mission(const Scene& scene, const std::string& instruction, Policy& policy, TopoStore& memory,
                          const MissionConfig& cfg, std::uint64_t seed, const Pose2D& start) {
    MissionReport report;
    report.instruction = instruction;
    report.scene_id = scene.id;
    report.policy = policy.name();
    report.seed = seed;
    report.intent = parse_instruction(instruction);

    PlanOptions opts;
    opts.global_budget = cfg.global_budget;
    report.initial_plan = plan(report.intent, memory, start, scene, opts);
    std::deque<SubTask> pending(report.initial_plan.begin(), report.initial_plan.end());

    EpisodicBuffer buffer;
    Pose2D pose = start;
    double clock = 0.0;
    std::map<int, int> attempt_of;
    int k = 0;
    while (!pending.empty()) {
        const SubTask task = pending.front();
        pending.pop_front();
        SubTaskRun run;
        run.task = task;
        run.attempt = attempt_of[task.origin_clause];
        run.start = pose;
        EpisodeTrace trace;
        if (task.kind == TaskKind::PersonFollow && !cfg.person_script) {
            run.status = "skipped";
            run.reflection = {false, {FeedbackCode::LostTrack, "no person to follow in this scene", {}}};
        } else {
            const Episode ep = make_subtask_episode(scene, task, pose, scene.id + "/mission/" + std::to_string(k),
                                                    cfg.person_script);
            try {
                trace = run_episode(scene, ep, policy, cfg.sim, derive_seed(seed, "mission", static_cast<std::uint64_t>(k)),
                                    RunOptions{&memory, &buffer});
                run.status = status_name(trace.status);
                run.reflection = reflect(trace, task, memory, scene, cfg.sim);
            } catch (const PolicyError& e) {
                run.status = "policy_error";
                run.reflection = {false, {FeedbackCode::Timeout, e.what(), {}}};
            }
        }
        if (!trace.steps.empty()) {
            run.steps = static_cast<int>(trace.steps.size()) - 1;
            run.path_length = trace.path_length();
            run.collision_steps = trace.collision_steps();
            pose = trace.steps.back().pose;
            for (const auto& e : traversal_evidence(trace, memory, scene, clock)) {
                memory.apply_evidence(e);
                report.evidence.push_back(e);
            }
            clock += trace.steps.back().time;
        }
        run.end = pose;
        report.runs.push_back(run);
        report.traces.push_back(std::move(trace));
        ++k;
        if (run.reflection.r) continue;

        report.feedback_chain.push_back(run.reflection.f);
        const int c = task.origin_clause;
        std::erase_if(pending, [&](const SubTask& s) { return s.origin_clause == c; });
        const int left = cfg.max_retries - report.retries[c];
        auto next = replan(report.intent, static_cast<std::size_t>(c), memory, run.reflection.f, left, pose, scene, opts);
        if (next.empty()) {
            report.failure = "clause " + std::to_string(c) + " " + render_clause(report.intent.clauses[static_cast<std::size_t>(c)]) +
                             " failed: " + feedback_name(run.reflection.f.code) + " (" + run.reflection.f.message + ")";
            return report;
        }
        ++report.retries[c];
        ++attempt_of[c];
        pending.insert(pending.begin(), next.begin(), next.end());
    }
    report.success = true;
    return report;
}

// ------------------------------------------------------------------ JSON

Json subtask_to_json(const SubTask& s) {
    return {{"kind", task_name(s.kind)},
            {"role", role_name(s.role)},
            {"goal", goal_to_json(s.goal)},
            {"budget", s.budget},
            {"origin_clause", s.origin_clause},
            {"hypothesis", s.hypothesis ? Json(*s.hypothesis) : Json(nullptr)},
            {"exploratory", s.exploratory}};
}

namespace {

Json feedback_to_json(const Feedback& f) {
    return {{"code", feedback_name(f.code)}, {"message", f.message}, {"suspect", f.suspect ? Json(*f.suspect) : Json(nullptr)}};
}

}  // namespace

Json mission_to_json(const MissionReport& r) {
    Json clauses = Json::array();
    for (const auto& c : r.intent.clauses) {
        clauses.push_back({{"verb", verb_name(c.verb)}, {"target", c.target}, {"offset", c.offset}, {"text", render_clause(c)}});
    }
    Json initial = Json::array();
    for (const auto& s : r.initial_plan) initial.push_back(subtask_to_json(s));
    Json runs = Json::array();
    int ok = 0;
    int collisions = 0;
    for (const auto& run : r.runs) {
        ok += run.reflection.r ? 1 : 0;
        collisions += run.collision_steps;
        runs.push_back({{"subtask", subtask_to_json(run.task)},
                        {"attempt", run.attempt},
                        {"status", run.status},
                        {"ok", run.reflection.r},
                        {"feedback", feedback_to_json(run.reflection.f)},
                        {"steps", run.steps},
                        {"path_length", run.path_length},
                        {"collision_steps", run.collision_steps},
                        {"start", pose_to_json(run.start)},
                        {"end", pose_to_json(run.end)}});
    }
    Json chain = Json::array();
    for (const auto& f : r.feedback_chain) chain.push_back(feedback_to_json(f));
    Json retries = Json::object();
    for (const auto& [c, n] : r.retries) retries[std::to_string(c)] = n;
    Json evidence = Json::array();
    for (const auto& e : r.evidence) evidence.push_back({{"u", e.u}, {"v", e.v}, {"duration", e.duration}, {"timestamp", e.timestamp}});
    return {{"schema_version", 1},
            {"instruction", r.instruction},
            {"scene_id", r.scene_id},
            {"policy", r.policy},
            {"seed", r.seed},
            {"clauses", clauses},
            {"initial_plan", initial},
            {"runs", runs},
            {"feedback_chain", chain},
            {"retries", retries},
            {"evidence", evidence},
            {"success", r.success},
            {"failure", r.failure},
            {"summary",
             {{"subtasks_run", r.runs.size()},
              {"subtasks_ok", ok},
              {"total_steps", r.total_steps()},
              {"path_length", r.total_path_length()},
              {"collision_steps", collisions}}}};
}

}  // namespace navkit
