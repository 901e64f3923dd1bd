#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dynobench/geometry.hpp"
#include "dynobench/rng.hpp"
#include "dynobench/rvo.hpp"

namespace dynobench {

/// Simulation tick. Fast obstacles (6 m/s) move 0.3 m per tick, small against
/// the 1 m robot; sub-tick collision checks interpolate (see harness).
constexpr double kDt = 0.05;

enum class ProfileKind { ConstantVelocity, Rvo };

struct RvoParams {
    double time_horizon{2.0};    // s
    double neighbor_dist{10.0};  // m
    double preferred_speed{4.0}; // m/s
};

struct MotionProfile {
    ProfileKind kind{ProfileKind::ConstantVelocity};
    std::optional<RvoParams> rvo;  // present iff kind == Rvo

    static MotionProfile cvm() { return {ProfileKind::ConstantVelocity, std::nullopt}; }
    static MotionProfile rvo_default(double preferred_speed = 4.0) {
        return {ProfileKind::Rvo, RvoParams{2.0, 10.0, preferred_speed}};
    }
};

struct Obstacle {
    int id{0};
    Vec2 position;
    Vec2 velocity;
    double radius{1.0};
    MotionProfile profile;
};

enum class DatasetTag { DatasetI, DatasetIIa, DatasetIIb, DatasetIIc, Custom };

inline const char* to_string(DatasetTag tag) {
    switch (tag) {
        case DatasetTag::DatasetI: return "DatasetI";
        case DatasetTag::DatasetIIa: return "DatasetII-a";
        case DatasetTag::DatasetIIb: return "DatasetII-b";
        case DatasetTag::DatasetIIc: return "DatasetII-c";
        default: return "Custom";
    }
}

inline DatasetTag dataset_tag_from_string(const std::string& s) {
    if (s == "DatasetI") return DatasetTag::DatasetI;
    if (s == "DatasetII-a") return DatasetTag::DatasetIIa;
    if (s == "DatasetII-b") return DatasetTag::DatasetIIb;
    if (s == "DatasetII-c") return DatasetTag::DatasetIIc;
    if (s == "Custom") return DatasetTag::Custom;
    throw std::invalid_argument("unknown dataset tag: " + s);
}

struct MapSpec {
    std::string id;
    double width_m{50.0};
    double height_m{50.0};
    int n_obs{0};
    double size_min{1.0};   // m, obstacle radius range
    double size_max{1.0};
    double speed_min{4.0};  // m/s
    double speed_max{4.0};
    MotionProfile profile;
    std::uint64_t seed{0};
    DatasetTag dataset_tag{DatasetTag::Custom};

    double area() const { return width_m * height_m; }
};

struct World {
    MapSpec spec;
    double time{0.0};
    std::vector<Obstacle> obstacles;
    // Waypoint navigation state, used only by Rvo-profile obstacles; parallel
    // to `obstacles`. Derived from spec.seed so a world reloaded from its map
    // file reproduces the same waypoint sequence.
    std::vector<Vec2> waypoints;
    std::uint64_t waypoint_rng{0};
};

/// Rejection sampling could not fit the requested discs into the map.
class PlacementError : public std::runtime_error {
public:
    explicit PlacementError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

constexpr std::uint64_t kWaypointStream = 0x5741595054ULL;  // waypoint RNG lane
constexpr double kWaypointArrival = 1.0;                    // m
constexpr int kMaxPlacementAttempts = 10000;

inline Vec2 draw_point_in_bounds(Rng& rng, const MapSpec& spec, double margin) {
    const double x = rng.uniform(margin, spec.width_m - margin);
    const double y = rng.uniform(margin, spec.height_m - margin);
    return {x, y};
}

/// Fold a disc center back into [r, w-r] x [r, h-r], negating the velocity
/// component normal to each wall crossed. Preserves |v|.
inline void reflect_into_bounds(Vec2& p, Vec2& v, double r, double w, double h) {
    const double lo_x = r, hi_x = w - r;
    const double lo_y = r, hi_y = h - r;
    for (int guard = 0; guard < 64; ++guard) {
        bool folded = false;
        if (p.x < lo_x) { p.x = 2.0 * lo_x - p.x; v.x = -v.x; folded = true; }
        else if (p.x > hi_x) { p.x = 2.0 * hi_x - p.x; v.x = -v.x; folded = true; }
        if (p.y < lo_y) { p.y = 2.0 * lo_y - p.y; v.y = -v.y; folded = true; }
        else if (p.y > hi_y) { p.y = 2.0 * hi_y - p.y; v.y = -v.y; folded = true; }
        if (!folded) return;
    }
    // Degenerate bounds (disc wider than the map); pin to the box.
    p.x = clamp(p.x, std::min(lo_x, hi_x), std::max(lo_x, hi_x));
    p.y = clamp(p.y, std::min(lo_y, hi_y), std::max(lo_y, hi_y));
}

}  // namespace detail

/// Seed-derived waypoint state for Rvo obstacles; positions must already be
/// set. Safe to call for any world (no-op for pure-CVM ones).
inline void init_waypoints(World& world) {
    world.waypoints.clear();
    world.waypoint_rng = mix_seed(world.spec.seed, detail::kWaypointStream);
    bool any_rvo = false;
    for (const Obstacle& ob : world.obstacles) {
        if (ob.profile.kind == ProfileKind::Rvo) { any_rvo = true; break; }
    }
    if (!any_rvo) return;

    world.waypoints.assign(world.obstacles.size(), Vec2{});
    Rng rng(world.waypoint_rng);
    for (std::size_t i = 0; i < world.obstacles.size(); ++i) {
        const Obstacle& ob = world.obstacles[i];
        if (ob.profile.kind != ProfileKind::Rvo) continue;
        world.waypoints[i] = detail::draw_point_in_bounds(rng, world.spec, ob.radius);
    }
    world.waypoint_rng = rng.state();
}

/// Expand a spec into its t = 0 world: radii/speeds drawn per obstacle, centers
/// rejection-sampled until pairwise non-overlapping, headings uniform.
inline World expand(const MapSpec& spec) {
    World world;
    world.spec = spec;
    world.time = 0.0;
    world.obstacles.reserve(static_cast<std::size_t>(spec.n_obs));

    Rng rng(spec.seed);
    for (int i = 0; i < spec.n_obs; ++i) {
        Obstacle ob;
        ob.id = i;
        ob.profile = spec.profile;
        ob.radius = rng.uniform(spec.size_min, spec.size_max);
        const double speed = rng.uniform(spec.speed_min, spec.speed_max);

        bool placed = false;
        for (int attempt = 0; attempt < detail::kMaxPlacementAttempts; ++attempt) {
            const Vec2 candidate = detail::draw_point_in_bounds(rng, spec, ob.radius);
            bool overlaps = false;
            for (const Obstacle& other : world.obstacles) {
                const double min_dist = ob.radius + other.radius;
                if ((candidate - other.position).norm_sq() < min_dist * min_dist) {
                    overlaps = true;
                    break;
                }
            }
            if (!overlaps) {
                ob.position = candidate;
                placed = true;
                break;
            }
        }
        if (!placed) {
            throw PlacementError(
                "could not place obstacle " + std::to_string(i) + " of " +
                std::to_string(spec.n_obs) + " in map '" + spec.id +
                "' (radius range [" + std::to_string(spec.size_min) + ", " +
                std::to_string(spec.size_max) + "] m): map too dense");
        }

        const double heading = rng.uniform(0.0, kTwoPi);
        ob.velocity = from_polar(speed, heading);
        world.obstacles.push_back(ob);
    }

    init_waypoints(world);
    // Rvo obstacles start out moving toward their first waypoint.
    for (std::size_t i = 0; i < world.waypoints.size(); ++i) {
        Obstacle& ob = world.obstacles[i];
        if (ob.profile.kind != ProfileKind::Rvo) continue;
        const double pref = ob.profile.rvo ? ob.profile.rvo->preferred_speed
                                           : ob.velocity.norm();
        ob.velocity = (world.waypoints[i] - ob.position).normalized() * pref;
    }
    return world;
}

/// Advance obstacle state by one increment, in place. CVM obstacles integrate
/// straight with specular wall reflection; Rvo obstacles first pick a velocity
/// avoiding all other obstacles. The ego-robot is invisible to obstacles.
inline void advance(World& world, double dt) {
    bool any_rvo = false;
    for (const Obstacle& ob : world.obstacles) {
        if (ob.profile.kind == ProfileKind::Rvo) { any_rvo = true; break; }
    }
    if (any_rvo && world.waypoints.size() != world.obstacles.size()) {
        init_waypoints(world);  // hand-built world; derive waypoints from seed
    }

    if (any_rvo) {
        // Velocity selection reads a frozen snapshot so the update is
        // synchronous and independent of obstacle order.
        std::vector<rvo::Agent> agents(world.obstacles.size());
        for (std::size_t i = 0; i < world.obstacles.size(); ++i) {
            const Obstacle& ob = world.obstacles[i];
            agents[i].position = ob.position;
            agents[i].velocity = ob.velocity;
            agents[i].radius = ob.radius;
            if (ob.profile.kind == ProfileKind::Rvo) {
                const RvoParams& params = *ob.profile.rvo;
                agents[i].pref_velocity =
                    (world.waypoints[i] - ob.position).normalized() *
                    params.preferred_speed;
                agents[i].max_speed = params.preferred_speed;
            } else {
                agents[i].pref_velocity = ob.velocity;
                agents[i].max_speed = ob.velocity.norm();
            }
        }
        for (std::size_t i = 0; i < world.obstacles.size(); ++i) {
            Obstacle& ob = world.obstacles[i];
            if (ob.profile.kind != ProfileKind::Rvo) continue;
            const RvoParams& params = *ob.profile.rvo;
            ob.velocity = rvo::select_velocity(agents, i, params.time_horizon,
                                               params.neighbor_dist, dt);
        }
    }

    Rng wp_rng(world.waypoint_rng);
    bool wp_drawn = false;
    for (std::size_t i = 0; i < world.obstacles.size(); ++i) {
        Obstacle& ob = world.obstacles[i];
        ob.position += ob.velocity * dt;
        detail::reflect_into_bounds(ob.position, ob.velocity, ob.radius,
                                    world.spec.width_m, world.spec.height_m);
        if (ob.profile.kind == ProfileKind::Rvo &&
            (world.waypoints[i] - ob.position).norm() < detail::kWaypointArrival) {
            world.waypoints[i] =
                detail::draw_point_in_bounds(wp_rng, world.spec, ob.radius);
            wp_drawn = true;
        }
    }
    if (wp_drawn) world.waypoint_rng = wp_rng.state();

    world.time += dt;
}

/// Functional step: returns the advanced copy.
inline World step(const World& world, double dt) {
    World next = world;
    advance(next, dt);
    return next;
}

/// World state at time t, stepping from the given t = 0 world in kDt ticks
/// (t rounded down to the nearest tick).
inline World replay(const World& initial, double t) {
    World world = initial;
    const long long ticks = static_cast<long long>(std::floor(t / kDt + 1e-9));
    for (long long i = 0; i < ticks; ++i) advance(world, kDt);
    return world;
}

inline World replay(const MapSpec& spec, double t) { return replay(expand(spec), t); }

struct DatasetIParams {
    std::vector<int> n_obs_set{10, 20, 30};
    std::vector<double> r_obs_set{0.5, 1.0, 1.5};
    std::vector<double> v_obs_set{2.0, 4.0, 6.0};
    int seeds_per_cell{20};
};

namespace detail {

inline std::string trim_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

}  // namespace detail

/// Full-factorial grid over obstacle count x radius x speed, `seeds_per_cell`
/// random draws each; every map uses uniform radius and speed.
inline std::vector<MapSpec> generate_dataset_I(const DatasetIParams& params,
                                               std::uint64_t base_seed = 0) {
    if (params.n_obs_set.empty() || params.r_obs_set.empty() ||
        params.v_obs_set.empty() || params.seeds_per_cell < 1) {
        throw std::invalid_argument("dataset I parameter sets must be non-empty");
    }
    std::vector<MapSpec> specs;
    specs.reserve(params.n_obs_set.size() * params.r_obs_set.size() *
                  params.v_obs_set.size() *
                  static_cast<std::size_t>(params.seeds_per_cell));
    std::uint64_t cell = 0;
    for (int n : params.n_obs_set) {
        for (double r : params.r_obs_set) {
            for (double v : params.v_obs_set) {
                for (int s = 0; s < params.seeds_per_cell; ++s) {
                    MapSpec spec;
                    spec.id = "I-n" + std::to_string(n) + "-r" +
                              detail::trim_number(r) + "-v" + detail::trim_number(v) +
                              "-s" + std::to_string(s);
                    spec.n_obs = n;
                    spec.size_min = spec.size_max = r;
                    spec.speed_min = spec.speed_max = v;
                    spec.profile = MotionProfile::cvm();
                    spec.seed = mix_seed(base_seed, cell, static_cast<std::uint64_t>(s));
                    spec.dataset_tag = DatasetTag::DatasetI;
                    specs.push_back(std::move(spec));
                }
                ++cell;
            }
        }
    }
    return specs;
}

enum class DatasetIIType { a, b, c };

/// Heterogeneous-map datasets: per-obstacle speeds (a), per-obstacle radii (b),
/// or reciprocal-avoidance motion (c). Non-varied attributes sit at the
/// Dataset I midpoints (n = 20, r = 1.0 m, v = 4 m/s).
inline std::vector<MapSpec> generate_dataset_II(DatasetIIType type, int count,
                                                std::uint64_t base_seed = 0) {
    if (count < 1) throw std::invalid_argument("dataset II count must be >= 1");
    std::vector<MapSpec> specs;
    specs.reserve(static_cast<std::size_t>(count));
    const char* tag = type == DatasetIIType::a ? "IIa"
                      : type == DatasetIIType::b ? "IIb"
                                                 : "IIc";
    for (int s = 0; s < count; ++s) {
        MapSpec spec;
        spec.id = std::string(tag) + "-s" + std::to_string(s);
        spec.n_obs = 20;
        spec.seed = mix_seed(base_seed, 0x11 + static_cast<std::uint64_t>(type),
                             static_cast<std::uint64_t>(s));
        switch (type) {
            case DatasetIIType::a:
                spec.size_min = spec.size_max = 1.0;
                spec.speed_min = 2.0;
                spec.speed_max = 6.0;
                spec.profile = MotionProfile::cvm();
                spec.dataset_tag = DatasetTag::DatasetIIa;
                break;
            case DatasetIIType::b:
                spec.size_min = 0.5;
                spec.size_max = 1.5;
                spec.speed_min = spec.speed_max = 4.0;
                spec.profile = MotionProfile::cvm();
                spec.dataset_tag = DatasetTag::DatasetIIb;
                break;
            case DatasetIIType::c:
                spec.size_min = spec.size_max = 1.0;
                spec.speed_min = spec.speed_max = 4.0;
                spec.profile = MotionProfile::rvo_default(4.0);
                spec.dataset_tag = DatasetTag::DatasetIIc;
                break;
        }
        specs.push_back(std::move(spec));
    }
    return specs;
}

}  // namespace dynobench
