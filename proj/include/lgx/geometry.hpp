#pragma once

#include <array>
#include <cmath>

namespace lgx {

inline double wrap_angle(double a) {
    while (a > M_PI) a -= 2.0 * M_PI;
    while (a < -M_PI) a += 2.0 * M_PI;
    return a;
}

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double norm() const { return std::hypot(x, y); }
};

/// Planar pose (x, y, heading) in meters/radians.
struct Pose2 {
    double x = 0.0;
    double y = 0.0;
    double theta = 0.0;

    Vec2 position() const { return {x, y}; }

    /// this ⊕ delta: apply a body-frame increment.
    Pose2 compose(const Pose2& d) const {
        const double c = std::cos(theta), s = std::sin(theta);
        return {x + c * d.x - s * d.y,
                y + s * d.x + c * d.y,
                wrap_angle(theta + d.theta)};
    }

    /// inverse(this) ⊕ other: other expressed in this pose's frame.
    Pose2 between(const Pose2& other) const {
        const double c = std::cos(theta), s = std::sin(theta);
        const double dx = other.x - x, dy = other.y - y;
        return {c * dx + s * dy,
                -s * dx + c * dy,
                wrap_angle(other.theta - theta)};
    }

    Vec2 transform_from(const Vec2& local) const {
        const double c = std::cos(theta), s = std::sin(theta);
        return {x + c * local.x - s * local.y, y + s * local.x + c * local.y};
    }

    Vec2 transform_to(const Vec2& world) const {
        const double c = std::cos(theta), s = std::sin(theta);
        const double dx = world.x - x, dy = world.y - y;
        return {c * dx + s * dy, -s * dx + c * dy};
    }
};

inline double distance(const Pose2& a, const Pose2& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

inline double distance(const Vec2& a, const Vec2& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

/// Bearing of a world point in the pose's body frame, in (-pi, pi].
inline double bearing_to(const Pose2& p, const Vec2& target) {
    return wrap_angle(std::atan2(target.y - p.y, target.x - p.x) - p.theta);
}

}  // namespace lgx
