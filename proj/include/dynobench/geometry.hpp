#pragma once

#include <cmath>
#include <limits>

namespace dynobench {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

/// 2D vector in meters (positions) or m/s (velocities).
struct Vec2 {
    double x{0.0};
    double y{0.0};

    constexpr Vec2() = default;
    constexpr Vec2(double x_, double y_) : x(x_), y(y_) {}

    constexpr Vec2 operator+(const Vec2& r) const { return {x + r.x, y + r.y}; }
    constexpr Vec2 operator-(const Vec2& r) const { return {x - r.x, y - r.y}; }
    constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
    constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
    constexpr Vec2 operator-() const { return {-x, -y}; }
    friend constexpr Vec2 operator*(double s, const Vec2& v) { return {v.x * s, v.y * s}; }

    Vec2& operator+=(const Vec2& r) { x += r.x; y += r.y; return *this; }
    Vec2& operator-=(const Vec2& r) { x -= r.x; y -= r.y; return *this; }
    Vec2& operator*=(double s) { x *= s; y *= s; return *this; }

    constexpr bool operator==(const Vec2& r) const { return x == r.x && y == r.y; }

    constexpr double dot(const Vec2& r) const { return x * r.x + y * r.y; }
    /// z-component of the 3D cross product.
    constexpr double cross(const Vec2& r) const { return x * r.y - y * r.x; }
    constexpr double norm_sq() const { return x * x + y * y; }
    double norm() const { return std::sqrt(norm_sq()); }

    Vec2 normalized(double eps = 1e-12) const {
        const double n = norm();
        if (n <= eps) return {0.0, 0.0};
        return {x / n, y / n};
    }

    bool finite() const { return std::isfinite(x) && std::isfinite(y); }
};

inline double distance(const Vec2& a, const Vec2& b) { return (a - b).norm(); }

inline Vec2 from_polar(double magnitude, double angle) {
    return {magnitude * std::cos(angle), magnitude * std::sin(angle)};
}

/// Wrap an angle to (-pi, pi].
inline double wrap_angle(double a) {
    a = std::fmod(a, kTwoPi);
    if (a <= -kPi) a += kTwoPi;
    if (a > kPi) a -= kTwoPi;
    return a;
}

inline double clamp(double v, double lo, double hi) {
    return v < lo ? lo : (v > hi ? hi : v);
}

/// Clamp the magnitude of a vector to at most `max_mag`.
inline Vec2 clamp_norm(const Vec2& v, double max_mag) {
    const double n = v.norm();
    if (n <= max_mag || n == 0.0) return v;
    return v * (max_mag / n);
}

/// Distance along the ray origin + t*dir (dir unit) to the first entry into the
/// disc (center, radius). Returns +inf when the ray misses or the disc lies
/// behind the origin. An origin inside the disc yields 0.
inline double ray_disc_entry(const Vec2& origin, const Vec2& dir, const Vec2& center,
                             double radius) {
    const Vec2 d = center - origin;
    const double d_sq = d.norm_sq();
    const double r_sq = radius * radius;
    if (d_sq <= r_sq) return 0.0;
    const double proj = d.dot(dir);
    if (proj <= 0.0) return std::numeric_limits<double>::infinity();
    const double perp_sq = d_sq - proj * proj;
    if (perp_sq > r_sq) return std::numeric_limits<double>::infinity();
    const double t = proj - std::sqrt(r_sq - perp_sq);
    return t >= 0.0 ? t : 0.0;
}

/// True when the segment a-b comes within `radius` of `center`.
inline bool segment_hits_disc(const Vec2& a, const Vec2& b, const Vec2& center,
                              double radius) {
    const Vec2 ab = b - a;
    const Vec2 ac = center - a;
    const double len_sq = ab.norm_sq();
    double t = len_sq > 0.0 ? clamp(ac.dot(ab) / len_sq, 0.0, 1.0) : 0.0;
    return (ac - ab * t).norm_sq() <= radius * radius;
}

/// Distance from `p` along unit `dir` to the boundary of [0,w]x[0,h].
/// `p` is assumed inside the box; returns +inf only for a degenerate dir.
inline double ray_box_exit(const Vec2& p, const Vec2& dir, double w, double h) {
    double t = std::numeric_limits<double>::infinity();
    if (dir.x > 0.0) t = std::min(t, (w - p.x) / dir.x);
    if (dir.x < 0.0) t = std::min(t, -p.x / dir.x);
    if (dir.y > 0.0) t = std::min(t, (h - p.y) / dir.y);
    if (dir.y < 0.0) t = std::min(t, -p.y / dir.y);
    return t;
}

}  // namespace dynobench
