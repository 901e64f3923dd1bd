#pragma once

#include <cstddef>
#include <vector>

#include "dynobench/geometry.hpp"

namespace dynobench::rvo {

// Reciprocal collision avoidance via half-plane constraints in velocity space
// (the ORCA formulation). Each agent solves a small sequence of 2D linear
// programs; with every agent taking half the avoidance responsibility the
// pairwise maneuvers are reciprocal and oscillation-free.

struct Line {
    Vec2 point;
    Vec2 direction;  // unit
};

struct Agent {
    Vec2 position;
    Vec2 velocity;
    double radius{1.0};
    Vec2 pref_velocity;
    double max_speed{4.0};
};

namespace detail {

constexpr double kEpsilon = 1e-5;

inline double det(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }

/// Clip the optimum to the feasible interval of constraint `line_no` within the
/// speed disc, honoring all earlier constraints. Returns false when the
/// feasible interval is empty.
inline bool linear_program1(const std::vector<Line>& lines, std::size_t line_no,
                            double radius, const Vec2& opt_velocity, bool direction_opt,
                            Vec2& result) {
    const double dot = lines[line_no].point.dot(lines[line_no].direction);
    const double discriminant =
        dot * dot + radius * radius - lines[line_no].point.norm_sq();
    if (discriminant < 0.0) return false;  // constraint line misses the speed disc

    const double sqrt_disc = std::sqrt(discriminant);
    double t_left = -dot - sqrt_disc;
    double t_right = -dot + sqrt_disc;

    for (std::size_t i = 0; i < line_no; ++i) {
        const double denominator = det(lines[line_no].direction, lines[i].direction);
        const double numerator =
            det(lines[i].direction, lines[line_no].point - lines[i].point);
        if (std::abs(denominator) <= kEpsilon) {
            if (numerator < 0.0) return false;  // parallel and fully outside
            continue;
        }
        const double t = numerator / denominator;
        if (denominator >= 0.0) {
            t_right = std::min(t_right, t);
        } else {
            t_left = std::max(t_left, t);
        }
        if (t_left > t_right) return false;
    }

    if (direction_opt) {
        if (opt_velocity.dot(lines[line_no].direction) > 0.0) {
            result = lines[line_no].point + t_right * lines[line_no].direction;
        } else {
            result = lines[line_no].point + t_left * lines[line_no].direction;
        }
    } else {
        const double t =
            lines[line_no].direction.dot(opt_velocity - lines[line_no].point);
        if (t < t_left) {
            result = lines[line_no].point + t_left * lines[line_no].direction;
        } else if (t > t_right) {
            result = lines[line_no].point + t_right * lines[line_no].direction;
        } else {
            result = lines[line_no].point + t * lines[line_no].direction;
        }
    }
    return true;
}

/// Incremental 2D LP over half-planes intersected with the speed disc.
/// Returns lines.size() on success, else the index of the first infeasible
/// constraint; `result` then holds the best velocity before that constraint.
inline std::size_t linear_program2(const std::vector<Line>& lines, double radius,
                                   const Vec2& opt_velocity, bool direction_opt,
                                   Vec2& result) {
    if (direction_opt) {
        result = opt_velocity * radius;  // opt_velocity is a unit direction here
    } else if (opt_velocity.norm_sq() > radius * radius) {
        result = opt_velocity.normalized() * radius;
    } else {
        result = opt_velocity;
    }

    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (det(lines[i].direction, lines[i].point - result) > 0.0) {
            const Vec2 temp = result;
            if (!linear_program1(lines, i, radius, opt_velocity, direction_opt, result)) {
                result = temp;
                return i;
            }
        }
    }
    return lines.size();
}

/// Infeasible case: back off the constraints jointly, minimizing the largest
/// penetration depth (the "least bad" velocity).
inline void linear_program3(const std::vector<Line>& lines, std::size_t begin_line,
                            double radius, Vec2& result) {
    double distance = 0.0;
    for (std::size_t i = begin_line; i < lines.size(); ++i) {
        if (det(lines[i].direction, lines[i].point - result) > distance) {
            std::vector<Line> proj_lines;
            proj_lines.reserve(i);
            for (std::size_t j = 0; j < i; ++j) {
                Line line;
                const double determinant = det(lines[i].direction, lines[j].direction);
                if (std::abs(determinant) <= kEpsilon) {
                    if (lines[i].direction.dot(lines[j].direction) > 0.0) continue;
                    line.point = 0.5 * (lines[i].point + lines[j].point);
                } else {
                    line.point =
                        lines[i].point +
                        (det(lines[j].direction, lines[i].point - lines[j].point) /
                         determinant) *
                            lines[i].direction;
                }
                line.direction = (lines[j].direction - lines[i].direction).normalized();
                proj_lines.push_back(line);
            }

            const Vec2 temp = result;
            if (linear_program2(proj_lines, radius,
                                Vec2{-lines[i].direction.y, lines[i].direction.x}, true,
                                result) < proj_lines.size()) {
                result = temp;  // keep the previous best on numerical failure
            }
            distance = det(lines[i].direction, lines[i].point - result);
        }
    }
}

}  // namespace detail

/// One ORCA half-plane for `self` against `other` over horizon `tau`.
/// `dt` bounds the resolution window when the discs already overlap.
inline Line orca_line(const Agent& self, const Agent& other, double tau, double dt) {
    using detail::det;
    const Vec2 relative_position = other.position - self.position;
    const Vec2 relative_velocity = self.velocity - other.velocity;
    const double dist_sq = relative_position.norm_sq();
    const double combined_radius = self.radius + other.radius;
    const double combined_radius_sq = combined_radius * combined_radius;

    Line line;
    Vec2 u;

    if (dist_sq > combined_radius_sq) {
        // No current collision: constraint from the truncated VO cone.
        const Vec2 w = relative_velocity - relative_position / tau;
        const double w_length_sq = w.norm_sq();
        const double dot1 = w.dot(relative_position);

        if (dot1 < 0.0 && dot1 * dot1 > combined_radius_sq * w_length_sq) {
            // Projects onto the cut-off circle.
            const double w_length = std::sqrt(w_length_sq);
            const Vec2 unit_w = w / w_length;
            line.direction = Vec2{unit_w.y, -unit_w.x};
            u = (combined_radius / tau - w_length) * unit_w;
        } else {
            // Projects onto a leg of the cone.
            const double leg = std::sqrt(dist_sq - combined_radius_sq);
            if (det(relative_position, w) > 0.0) {
                line.direction = Vec2{relative_position.x * leg -
                                          relative_position.y * combined_radius,
                                      relative_position.x * combined_radius +
                                          relative_position.y * leg} /
                                 dist_sq;
            } else {
                line.direction = -Vec2{relative_position.x * leg +
                                           relative_position.y * combined_radius,
                                       -relative_position.x * combined_radius +
                                           relative_position.y * leg} /
                                 dist_sq;
            }
            const double dot2 = relative_velocity.dot(line.direction);
            u = dot2 * line.direction - relative_velocity;
        }
    } else {
        // Already overlapping: resolve within one time step.
        const double inv_dt = 1.0 / dt;
        const Vec2 w = relative_velocity - relative_position * inv_dt;
        const double w_length = w.norm();
        const Vec2 unit_w = w_length > 0.0 ? w / w_length : Vec2{1.0, 0.0};
        line.direction = Vec2{unit_w.y, -unit_w.x};
        u = (combined_radius * inv_dt - w_length) * unit_w;
    }

    // Reciprocity: each agent shoulders half the correction.
    line.point = self.velocity + 0.5 * u;
    return line;
}

/// New velocity for `self` given all `agents` (self included; skipped by
/// index). Neighbors beyond `neighbor_dist` are ignored.
inline Vec2 select_velocity(const std::vector<Agent>& agents, std::size_t self_idx,
                            double tau, double neighbor_dist, double dt) {
    const Agent& self = agents[self_idx];
    std::vector<Line> lines;
    lines.reserve(agents.size() - 1);
    const double neighbor_dist_sq = neighbor_dist * neighbor_dist;

    for (std::size_t i = 0; i < agents.size(); ++i) {
        if (i == self_idx) continue;
        if ((agents[i].position - self.position).norm_sq() > neighbor_dist_sq) continue;
        lines.push_back(orca_line(self, agents[i], tau, dt));
    }

    Vec2 result;
    const std::size_t fail =
        detail::linear_program2(lines, self.max_speed, self.pref_velocity, false, result);
    if (fail < lines.size()) {
        detail::linear_program3(lines, fail, self.max_speed, result);
    }
    return result;
}

}  // namespace dynobench::rvo
