#include "navkit/flow.hpp"

#include <algorithm>
#include <cmath>

#include "navkit/error.hpp"
#include "navkit/planner.hpp"
#include "navkit/rng.hpp"

namespace navkit {

PlanVector encode_plan(const WaypointPlan& plan) {
    PlanVector v{};
    for (std::size_t k = 0; k < kPlanLength; ++k) {
        v[4 * k] = plan[k].x;
        v[4 * k + 1] = plan[k].y;
        v[4 * k + 2] = std::cos(plan[k].theta);
        v[4 * k + 3] = std::sin(plan[k].theta);
    }
    return v;
}

WaypointPlan decode_plan(const PlanVector& v) {
    WaypointPlan plan{};
    for (std::size_t k = 0; k < kPlanLength; ++k) {
        const double c = v[4 * k + 2];
        const double s = v[4 * k + 3];
        const double norm = std::hypot(c, s);
        if (!(norm >= 0.5 && norm <= 2.0)) {
            throw Error(ErrorCode::AngleDegenerate, "waypoint " + std::to_string(k) + " has (cos, sin) norm " + std::to_string(norm));
        }
        plan[k] = Pose2D(v[4 * k], v[4 * k + 1], std::atan2(s / norm, c / norm));
    }
    return plan;
}

void ExpertSet::validate() const {
    if (samples.empty()) throw Error(ErrorCode::InvalidParams, "expert set is empty");
    if (!weights.empty() && weights.size() != samples.size()) {
        throw Error(ErrorCode::InvalidParams, "expert weights must match samples");
    }
    for (const auto& s : samples) {
        for (double x : s) {
            if (!std::isfinite(x)) throw Error(ErrorCode::InvalidParams, "expert sample is not finite");
        }
    }
    for (double w : weights) {
        if (!(w > 0.0) || !std::isfinite(w)) throw Error(ErrorCode::InvalidParams, "expert weights must be positive");
    }
}

void FlowConfig::validate() const {
    if (!(sigma_min > 0.0 && sigma_min < 1.0)) throw Error(ErrorCode::InvalidParams, "sigma_min must lie in (0, 1)");
    if (ode_steps < 1) throw Error(ErrorCode::InvalidParams, "ode_steps must be >= 1");
    if (!(weight_temperature > 0.0)) throw Error(ErrorCode::InvalidParams, "weight_temperature must be positive");
    if (!(t_end > 0.0 && t_end < 1.0)) throw Error(ErrorCode::InvalidParams, "t_end must lie in (0, 1)");
}

namespace {

double sigma_at(double t, const FlowConfig& cfg) { return 1.0 - (1.0 - cfg.sigma_min) * t; }

void check_time(double t) {
    if (!(t >= 0.0 && t < 1.0)) throw Error(ErrorCode::InvalidTime, "flow time must lie in [0, 1)");
}

}  // namespace

PlanVector conditional_velocity(const PlanVector& x, double t, const PlanVector& x1, const FlowConfig& cfg) {
    check_time(t);
    const double sig = sigma_at(t, cfg);
    const double a = 1.0 - cfg.sigma_min;
    PlanVector u{};
    for (std::size_t d = 0; d < kPlanDim; ++d) u[d] = (x1[d] - a * x[d]) / sig;
    return u;
}

PlanVector cond_velocity(const PlanVector& x, double t, const ExpertSet& experts, const FlowConfig& cfg) {
    check_time(t);
    if (experts.samples.empty()) throw Error(ErrorCode::InvalidParams, "expert set is empty");
    const double sig = sigma_at(t, cfg);
    const double a = 1.0 - cfg.sigma_min;
    const std::size_t n = experts.samples.size();
    std::vector<double> logits(n);
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        double sq = 0.0;
        for (std::size_t d = 0; d < kPlanDim; ++d) {
            const double r = x[d] - t * experts.samples[i][d];
            sq += r * r;
        }
        logits[i] = -sq / (2.0 * sig * sig) / cfg.weight_temperature + std::log(experts.weight(i));
        best = std::max(best, logits[i]);
    }
    double norm = 0.0;
    PlanVector u{};
    for (std::size_t i = 0; i < n; ++i) {
        const double w = std::exp(logits[i] - best);
        norm += w;
        for (std::size_t d = 0; d < kPlanDim; ++d) u[d] += w * (experts.samples[i][d] - a * x[d]) / sig;
    }
    for (auto& v : u) v /= norm;
    return u;
}

PlanVector sample_vector(const ExpertSet& experts, const FlowConfig& cfg, std::uint64_t seed) {
    Rng rng(seed);
    PlanVector x{};
    for (auto& v : x) v = rng.normal();
    const double h = cfg.t_end / cfg.ode_steps;
    for (int k = 0; k < cfg.ode_steps; ++k) {
        const auto u = cond_velocity(x, h * k, experts, cfg);
        for (std::size_t d = 0; d < kPlanDim; ++d) x[d] += h * u[d];
    }
    return x;
}

WaypointPlan sample_plan(const ExpertSet& experts, const FlowConfig& cfg, std::uint64_t seed) {
    experts.validate();
    cfg.validate();
    return decode_plan(sample_vector(experts, cfg, seed));
}

std::vector<PlanVector> sample_vectors(const ExpertSet& experts, const FlowConfig& cfg,
                                       const std::vector<std::uint64_t>& seeds) {
    experts.validate();
    cfg.validate();
    std::vector<PlanVector> out(seeds.size());
    const long n = static_cast<long>(seeds.size());
#pragma omp parallel for schedule(dynamic, 16)
    for (long k = 0; k < n; ++k) out[static_cast<std::size_t>(k)] = sample_vector(experts, cfg, seeds[static_cast<std::size_t>(k)]);
    return out;
}

std::vector<PlanVector> sample_vectors_serial(const ExpertSet& experts, const FlowConfig& cfg,
                                              const std::vector<std::uint64_t>& seeds) {
    experts.validate();
    cfg.validate();
    std::vector<PlanVector> out;
    out.reserve(seeds.size());
    for (auto s : seeds) out.push_back(sample_vector(experts, cfg, s));
    return out;
}

WaypointPlan mean_regression_plan(const ExpertSet& experts) {
    experts.validate();
    PlanVector mean{};
    double total = 0.0;
    for (std::size_t i = 0; i < experts.samples.size(); ++i) {
        const double w = experts.weight(i);
        total += w;
        for (std::size_t d = 0; d < kPlanDim; ++d) mean[d] += w * experts.samples[i][d];
    }
    for (auto& v : mean) v /= total;
    return decode_plan(mean);
}

double cfm_objective(const VelocityField& field, const ExpertSet& experts, const FlowConfig& cfg, int n_mc,
                     std::uint64_t seed) {
    if (n_mc <= 0) throw Error(ErrorCode::InvalidParams, "n_mc must be positive");
    experts.validate();
    cfg.validate();
    Rng rng(seed);
    std::vector<double> cumulative;
    double acc = 0.0;
    for (std::size_t i = 0; i < experts.samples.size(); ++i) {
        acc += experts.weight(i);
        cumulative.push_back(acc);
    }
    const double a = 1.0 - cfg.sigma_min;
    double sum = 0.0;
    for (int m = 0; m < n_mc; ++m) {
        const double t = rng.uniform(0.0, cfg.t_end);
        const double pick = rng.uniform(0.0, acc);
        const auto idx = static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), pick) - cumulative.begin());
        const auto& x1 = experts.samples[std::min(idx, experts.samples.size() - 1)];
        PlanVector x0{};
        for (auto& v : x0) v = rng.normal();
        PlanVector xt{};
        PlanVector target{};
        for (std::size_t d = 0; d < kPlanDim; ++d) {
            xt[d] = sigma_at(t, cfg) * x0[d] + t * x1[d];
            target[d] = x1[d] - a * x0[d];
        }
        const auto v = field(xt, t);
        for (std::size_t d = 0; d < kPlanDim; ++d) sum += (v[d] - target[d]) * (v[d] - target[d]);
    }
    return sum / n_mc;
}

// ----------------------------------------------------------- bypass scene

namespace {

WaypointPlan bypass_plan(double side, double lateral, double dy) {
    const Vec2 pts[kPlanLength] = {{1.0, side * lateral * 0.5 + dy},
                                   {2.0, side * lateral + dy},
                                   {3.0, side * lateral + dy},
                                   {4.0, side * lateral * 0.5 + dy},
                                   {5.0, dy}};
    WaypointPlan plan{};
    for (std::size_t k = 0; k < kPlanLength; ++k) {
        const Vec2 d = k + 1 < kPlanLength ? pts[k + 1] - pts[k] : pts[k] - pts[k - 1];
        plan[k] = Pose2D(pts[k], heading_of(d));
    }
    return plan;
}

}  // namespace

BypassScenario make_bypass_scenario(int experts_per_mode, double lateral, double jitter, std::uint64_t seed) {
    if (experts_per_mode < 1 || !(lateral > 0.6)) throw Error(ErrorCode::InvalidParams, "bypass needs experts and lateral > 0.6");
    BypassScenario out;
    const double res = 0.1;
    out.scene.id = "bypass";
    out.scene.domain = Domain::Outdoor;
    out.scene.grid = OccupancyGrid(80, 60, res, {-1.0, -3.0}, SemanticClass::Sidewalk);
    out.obstacle_min = {1.5, -0.5};
    out.obstacle_max = {3.5, 0.5};
    const Cell lo = out.scene.grid.world_to_grid(out.obstacle_min + Vec2{res / 2, res / 2});
    const Cell hi = out.scene.grid.world_to_grid(out.obstacle_max - Vec2{res / 2, res / 2});
    out.scene.grid.fill_rect(lo, {hi.i + 1, hi.j + 1}, SemanticClass::Obstacle);
    for (std::size_t k = 0; k < out.scene.grid.size(); ++k) {
        if (is_social(out.scene.grid.cells()[k])) out.scene.spawn_region.push_back(out.scene.grid.cell_at(k));
    }
    Rng rng(derive_seed(seed, "bypass", 0));
    out.experts.context_key = "bypass";
    for (int side = 0; side < 2; ++side) {
        const double s = side == 0 ? 1.0 : -1.0;
        out.mode_centers[static_cast<std::size_t>(side)] = encode_plan(bypass_plan(s, lateral, 0.0));
    }
    for (int k = 0; k < experts_per_mode; ++k) {
        for (int side = 0; side < 2; ++side) {
            const double s = side == 0 ? 1.0 : -1.0;
            out.experts.samples.push_back(encode_plan(bypass_plan(s, lateral, rng.uniform(-jitter, jitter))));
        }
    }
    return out;
}

double plan_distance(const WaypointPlan& a, const WaypointPlan& b) {
    double worst = 0.0;
    for (std::size_t k = 0; k < kPlanLength; ++k) worst = std::max(worst, distance(a[k].position(), b[k].position()));
    return worst;
}

bool plan_collides(const WaypointPlan& plan, const Pose2D& frame, const OccupancyGrid& grid) {
    std::vector<Vec2> pts{frame.position()};
    for (const auto& w : plan) pts.push_back(to_world(frame, w.position()));
    return !polyline_passable(grid, pts, false, 0.02);
}

}  // namespace navkit
