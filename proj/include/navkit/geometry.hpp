#pragma once

#include <array>
#include <cmath>
#include <numbers>

namespace navkit {

inline constexpr double kPi = std::numbers::pi;

/// Wraps an angle into (-pi, pi]. Values already in range are returned
/// unchanged, so the wrap is idempotent bit-for-bit.
inline double wrap_angle(double a) {
    if (a > -kPi && a <= kPi) return a;
    double r = std::remainder(a, 2.0 * kPi);
    if (r <= -kPi) r += 2.0 * kPi;
    if (r > kPi) r -= 2.0 * kPi;
    return r;
}

inline double deg_to_rad(double d) { return d * kPi / 180.0; }
inline double rad_to_deg(double r) { return r * 180.0 / kPi; }

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Vec2 operator*(Vec2 a, double s) { return {a.x * s, a.y * s}; }
    friend Vec2 operator*(double s, Vec2 a) { return {a.x * s, a.y * s}; }
    friend bool operator==(Vec2 a, Vec2 b) = default;

    double norm() const { return std::hypot(x, y); }
    double dot(Vec2 o) const { return x * o.x + y * o.y; }
    double cross(Vec2 o) const { return x * o.y - y * o.x; }
};

inline double distance(Vec2 a, Vec2 b) { return (a - b).norm(); }
inline Vec2 unit_from_angle(double a) { return {std::cos(a), std::sin(a)}; }
inline double heading_of(Vec2 d) { return std::atan2(d.y, d.x); }

/// Planar pose; theta is kept in (-pi, pi].
struct Pose2D {
    double x = 0.0;
    double y = 0.0;
    double theta = 0.0;

    Pose2D() = default;
    Pose2D(double x_, double y_, double theta_) : x(x_), y(y_), theta(wrap_angle(theta_)) {}
    Pose2D(Vec2 p, double theta_) : Pose2D(p.x, p.y, theta_) {}

    Vec2 position() const { return {x, y}; }
    friend bool operator==(const Pose2D&, const Pose2D&) = default;
};

/// Expresses world point `p` in the frame of `origin` (origin at 0, heading +x).
inline Vec2 to_local(const Pose2D& origin, Vec2 p) {
    const double c = std::cos(origin.theta);
    const double s = std::sin(origin.theta);
    const Vec2 d = p - origin.position();
    return {c * d.x + s * d.y, -s * d.x + c * d.y};
}

inline Vec2 to_world(const Pose2D& origin, Vec2 local) {
    const double c = std::cos(origin.theta);
    const double s = std::sin(origin.theta);
    return {origin.x + c * local.x - s * local.y, origin.y + s * local.x + c * local.y};
}

inline Pose2D to_local(const Pose2D& origin, const Pose2D& p) {
    return Pose2D(to_local(origin, p.position()), p.theta - origin.theta);
}

inline Pose2D to_world(const Pose2D& origin, const Pose2D& local) {
    return Pose2D(to_world(origin, local.position()), local.theta + origin.theta);
}

inline constexpr std::size_t kPlanLength = 5;

/// Five local-frame poses: the action unit produced per planning step.
using WaypointPlan = std::array<Pose2D, kPlanLength>;

inline WaypointPlan identity_plan() { return WaypointPlan{}; }

inline bool plan_is_finite(const WaypointPlan& plan) {
    for (const auto& p : plan) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.theta)) return false;
    }
    return true;
}

}  // namespace navkit
