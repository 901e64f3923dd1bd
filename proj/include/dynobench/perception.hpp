#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <vector>

#include "dynobench/geometry.hpp"
#include "dynobench/world.hpp"

namespace dynobench {

enum class CellState : std::uint8_t { Unexplored, Unoccupied, Occupied };

/// Tri-state belief grid. Cells only ever leave Unexplored; last_update holds
/// the most recent time the cell sat inside the sensing wedge (occluded or
/// not), which is what staleness-seeking gaze policies consume.
struct OccupancyGrid {
    double resolution{0.5};
    int nx{0};
    int ny{0};
    std::vector<CellState> cells;
    std::vector<double> last_update;

    static OccupancyGrid make(double width_m, double height_m, double resolution = 0.5) {
        OccupancyGrid g;
        g.resolution = resolution;
        g.nx = static_cast<int>(std::lround(width_m / resolution));
        g.ny = static_cast<int>(std::lround(height_m / resolution));
        g.cells.assign(static_cast<std::size_t>(g.nx) * g.ny, CellState::Unexplored);
        g.last_update.assign(static_cast<std::size_t>(g.nx) * g.ny, 0.0);
        return g;
    }

    bool in_bounds(int ix, int iy) const {
        return ix >= 0 && ix < nx && iy >= 0 && iy < ny;
    }
    std::size_t index(int ix, int iy) const {
        return static_cast<std::size_t>(iy) * nx + ix;
    }
    Vec2 center_of(int ix, int iy) const {
        return {(ix + 0.5) * resolution, (iy + 0.5) * resolution};
    }
    int cell_x(double x) const { return static_cast<int>(std::floor(x / resolution)); }
    int cell_y(double y) const { return static_cast<int>(std::floor(y / resolution)); }

    CellState at(int ix, int iy) const { return cells[index(ix, iy)]; }

    std::size_t count(CellState s) const {
        std::size_t n = 0;
        for (CellState c : cells) n += (c == s) ? 1 : 0;
        return n;
    }
};

struct FieldOfView {
    Vec2 center;
    double heading{0.0};
    double angular_width{kPi / 2.0};  // pi/2 or 2*pi
    double depth{8.0};

    bool contains_angle(double bearing) const {
        if (angular_width >= kTwoPi) return true;
        return std::abs(wrap_angle(bearing - heading)) <= angular_width * 0.5;
    }
};

/// Per-obstacle constant-velocity Kalman track. Sightings snap the state to
/// ground truth and collapse the covariance; between sightings the state
/// coasts and the covariance grows.
struct TrackedObstacle {
    int id{0};
    Vec2 position;
    Vec2 velocity;
    std::array<double, 16> covariance{};  // row-major 4x4 over (px, py, vx, vy)
    double radius_estimate{1.0};
    double last_seen{0.0};
    bool visible_now{false};
};

namespace detail {

constexpr double kRayStep = kPi / 360.0;        // 0.5 degree ray lattice
constexpr double kResetCovariance = 1e-6;
constexpr double kProcessNoisePos = 0.01;       // m^2 per second
constexpr double kProcessNoiseVel = 0.1;        // (m/s)^2 per second

inline std::array<double, 16> reset_covariance() {
    std::array<double, 16> p{};
    p[0] = p[5] = p[10] = p[15] = kResetCovariance;
    return p;
}

}  // namespace detail

/// Coast the track dt seconds: x' = F x, P' = F P F^T + Q dt.
inline TrackedObstacle kf_predict(const TrackedObstacle& tracker, double dt) {
    TrackedObstacle out = tracker;
    out.position += tracker.velocity * dt;

    const std::array<double, 16>& p = tracker.covariance;
    std::array<double, 16> fp;  // F * P, where F adds dt * velocity rows
    for (int c = 0; c < 4; ++c) {
        fp[0 * 4 + c] = p[0 * 4 + c] + dt * p[2 * 4 + c];
        fp[1 * 4 + c] = p[1 * 4 + c] + dt * p[3 * 4 + c];
        fp[2 * 4 + c] = p[2 * 4 + c];
        fp[3 * 4 + c] = p[3 * 4 + c];
    }
    std::array<double, 16> out_p;  // (F P) * F^T
    for (int r = 0; r < 4; ++r) {
        out_p[r * 4 + 0] = fp[r * 4 + 0] + dt * fp[r * 4 + 2];
        out_p[r * 4 + 1] = fp[r * 4 + 1] + dt * fp[r * 4 + 3];
        out_p[r * 4 + 2] = fp[r * 4 + 2];
        out_p[r * 4 + 3] = fp[r * 4 + 3];
    }
    out_p[0] += detail::kProcessNoisePos * dt;
    out_p[5] += detail::kProcessNoisePos * dt;
    out_p[10] += detail::kProcessNoiseVel * dt;
    out_p[15] += detail::kProcessNoiseVel * dt;
    out.covariance = out_p;
    out.visible_now = false;
    return out;
}

struct PerceptionFrame {
    OccupancyGrid grid;
    std::vector<TrackedObstacle> trackers;
    FieldOfView fov;
    double time{0.0};

    static PerceptionFrame make(double width_m, double height_m,
                                double resolution = 0.5) {
        PerceptionFrame f;
        f.grid = OccupancyGrid::make(width_m, height_m, resolution);
        return f;
    }

    const TrackedObstacle* find(int id) const {
        for (const TrackedObstacle& t : trackers) {
            if (t.id == id) return &t;
        }
        return nullptr;
    }
    TrackedObstacle* find(int id) {
        for (TrackedObstacle& t : trackers) {
            if (t.id == id) return &t;
        }
        return nullptr;
    }
};

namespace detail {

/// Entry distance along unit `dir` from `origin` to the nearest obstacle
/// surface among `nearby` (indices into world.obstacles).
inline double first_hit(const World& world, const std::vector<int>& nearby,
                        const Vec2& origin, const Vec2& dir) {
    double best = std::numeric_limits<double>::infinity();
    for (int idx : nearby) {
        const Obstacle& ob = world.obstacles[static_cast<std::size_t>(idx)];
        best = std::min(best, ray_disc_entry(origin, dir, ob.position, ob.radius));
    }
    return best;
}

}  // namespace detail

/// Sweep the sensing wedge over the grid and tracker set, in place.
/// Wedge cells with an unobstructed line of sight become Unoccupied; cells
/// holding the first obstacle surface along their sight line become Occupied;
/// occluded wedge cells keep their state. Every wedge cell gets
/// last_update = world.time. An obstacle is visible when some ray of the
/// 0.5-degree lattice terminates on it inside the wedge; visible obstacles
/// snap to ground truth, unseen tracks coast.
inline void sense_into(PerceptionFrame& frame, const World& world,
                       const FieldOfView& fov) {
    const double dt = world.time - frame.time;
    OccupancyGrid& grid = frame.grid;

    // Obstacles close enough to matter for rays of length `depth`.
    std::vector<int> nearby;
    nearby.reserve(world.obstacles.size());
    for (std::size_t i = 0; i < world.obstacles.size(); ++i) {
        const Obstacle& ob = world.obstacles[i];
        const double reach = fov.depth + ob.radius;
        if ((ob.position - fov.center).norm_sq() <= reach * reach) {
            nearby.push_back(static_cast<int>(i));
        }
    }

    // Grid sweep over the wedge's bounding box.
    const int ix_lo = std::max(0, grid.cell_x(fov.center.x - fov.depth));
    const int ix_hi = std::min(grid.nx - 1, grid.cell_x(fov.center.x + fov.depth));
    const int iy_lo = std::max(0, grid.cell_y(fov.center.y - fov.depth));
    const int iy_hi = std::min(grid.ny - 1, grid.cell_y(fov.center.y + fov.depth));
    const double depth_sq = fov.depth * fov.depth;

    for (int iy = iy_lo; iy <= iy_hi; ++iy) {
        for (int ix = ix_lo; ix <= ix_hi; ++ix) {
            const Vec2 c = grid.center_of(ix, iy);
            const Vec2 d = c - fov.center;
            const double dist_sq = d.norm_sq();
            if (dist_sq > depth_sq) continue;
            const double dist = std::sqrt(dist_sq);
            if (dist > 1e-9 && !fov.contains_angle(std::atan2(d.y, d.x))) continue;

            const std::size_t cell = grid.index(ix, iy);
            grid.last_update[cell] = world.time;

            if (dist <= 1e-9) {
                grid.cells[cell] = CellState::Unoccupied;
                continue;
            }
            const Vec2 dir = d / dist;
            const double hit = detail::first_hit(world, nearby, fov.center, dir);
            if (dist < hit) {
                grid.cells[cell] = CellState::Unoccupied;
            } else if (hit <= fov.depth) {
                const Vec2 surface = fov.center + dir * hit;
                if (grid.cell_x(surface.x) == ix && grid.cell_y(surface.y) == iy) {
                    grid.cells[cell] = CellState::Occupied;
                }
                // Otherwise the cell sits behind the surface cell: occluded.
            }
        }
    }

    // Obstacle visibility via the discrete ray lattice.
    std::vector<bool> visible(world.obstacles.size(), false);
    const double wedge_start = fov.angular_width >= kTwoPi
                                   ? -kPi
                                   : fov.heading - fov.angular_width * 0.5;
    const int n_rays =
        static_cast<int>(std::floor(std::min(fov.angular_width, kTwoPi) /
                                    detail::kRayStep + 1e-9));
    const bool full_circle = fov.angular_width >= kTwoPi;

    for (int idx : nearby) {
        const Obstacle& ob = world.obstacles[static_cast<std::size_t>(idx)];
        const Vec2 d = ob.position - fov.center;
        const double dist = d.norm();
        if (dist <= ob.radius) {  // sensor origin inside the disc
            visible[static_cast<std::size_t>(idx)] = true;
            continue;
        }
        const double bearing = std::atan2(d.y, d.x);
        const double half_angle = std::asin(std::min(1.0, ob.radius / dist));
        // Rays of the lattice lying within the disc's angular footprint.
        const double rel = wrap_angle(bearing - wedge_start);
        const double rel_mod = full_circle && rel < 0.0 ? rel + kTwoPi : rel;
        const int k_lo =
            static_cast<int>(std::floor((rel_mod - half_angle) / detail::kRayStep));
        const int k_hi =
            static_cast<int>(std::ceil((rel_mod + half_angle) / detail::kRayStep));
        for (int k = k_lo; k <= k_hi; ++k) {
            int kk = k;
            if (full_circle) {
                kk = ((k % n_rays) + n_rays) % n_rays;
            } else if (k < 0 || k > n_rays) {
                continue;
            }
            const double theta = wedge_start + kk * detail::kRayStep;
            const Vec2 dir{std::cos(theta), std::sin(theta)};
            const double my_hit = ray_disc_entry(fov.center, dir, ob.position, ob.radius);
            if (my_hit > fov.depth) continue;
            if (my_hit <= detail::first_hit(world, nearby, fov.center, dir)) {
                visible[static_cast<std::size_t>(idx)] = true;
                break;
            }
        }
    }

    // Tracker update: snap what is seen, coast the rest, birth new sightings.
    for (TrackedObstacle& t : frame.trackers) {
        if (dt > 0.0) {
            t = kf_predict(t, dt);
        } else {
            t.visible_now = false;
        }
    }
    for (std::size_t i = 0; i < world.obstacles.size(); ++i) {
        if (!visible[i]) continue;
        const Obstacle& ob = world.obstacles[i];
        TrackedObstacle* t = frame.find(ob.id);
        if (t == nullptr) {
            frame.trackers.emplace_back();
            t = &frame.trackers.back();
            t->id = ob.id;
        }
        t->position = ob.position;
        t->velocity = ob.velocity;
        t->covariance = detail::reset_covariance();
        t->radius_estimate = ob.radius;
        t->last_seen = world.time;
        t->visible_now = true;
    }

    frame.fov = fov;
    frame.time = world.time;
}

/// Functional form: returns the advanced frame (pre: prev.time + dt == world.time).
inline PerceptionFrame sense(const World& world, const FieldOfView& fov,
                             const PerceptionFrame& prev, double /*dt*/) {
    PerceptionFrame next = prev;
    sense_into(next, world, fov);
    return next;
}

/// Debug dump: Unexplored mid-gray, Unoccupied white, Occupied black.
inline void write_grid_pgm(const OccupancyGrid& grid, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    out << "P5\n" << grid.nx << " " << grid.ny << "\n255\n";
    for (int iy = grid.ny - 1; iy >= 0; --iy) {
        for (int ix = 0; ix < grid.nx; ++ix) {
            const CellState s = grid.at(ix, iy);
            const unsigned char v =
                s == CellState::Unexplored ? 128 : (s == CellState::Occupied ? 0 : 255);
            out.put(static_cast<char>(v));
        }
    }
}

}  // namespace dynobench
