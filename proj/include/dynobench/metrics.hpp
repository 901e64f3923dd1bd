#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dynobench/geometry.hpp"
#include "dynobench/map_io.hpp"
#include "dynobench/planning.hpp"
#include "dynobench/world.hpp"

namespace dynobench {

// ---------------------------------------------------------------------------
// Replay logs
//
// Every difficulty metric is a pure function of obstacle trajectories, not of
// the generator that produced them. A ReplayLog is that common currency: a
// time-ordered list of frames, each holding one snapshot per obstacle. Logs
// come either from simulating a world forward (record) or from an external
// per-tick CSV (parse_csv), which lets the same metrics run on trajectories
// captured outside the simulator.
// ---------------------------------------------------------------------------

struct ObstacleSnapshot {
    int id{0};
    Vec2 position;
    Vec2 velocity;
    double radius{1.0};
};

struct ReplayFrame {
    double time{0.0};
    std::vector<ObstacleSnapshot> obstacles;
};

class ReplayLog {
public:
    ReplayLog() : frames_{ReplayFrame{}} {}

    /// Frames must be in strictly increasing time order and list the same
    /// obstacle ids in the same order throughout (persistent tracking).
    ReplayLog(double width_m, double height_m, std::vector<ReplayFrame> frames)
        : width_m_(width_m), height_m_(height_m), frames_(std::move(frames)) {
        if (!(width_m_ > 0.0) || !(height_m_ > 0.0)) {
            throw std::invalid_argument("replay log: bounds must be positive");
        }
        if (frames_.empty()) frames_.push_back(ReplayFrame{});
        const ReplayFrame& first = frames_.front();
        for (std::size_t k = 1; k < frames_.size(); ++k) {
            if (!(frames_[k].time > frames_[k - 1].time)) {
                throw std::invalid_argument(
                    "replay log: frame times must be strictly increasing");
            }
            if (frames_[k].obstacles.size() != first.obstacles.size()) {
                throw std::invalid_argument(
                    "replay log: obstacle count changes between frames");
            }
            for (std::size_t o = 0; o < first.obstacles.size(); ++o) {
                if (frames_[k].obstacles[o].id != first.obstacles[o].id) {
                    throw std::invalid_argument(
                        "replay log: obstacle ids differ between frames");
                }
            }
        }
        for (const ObstacleSnapshot& ob : first.obstacles) {
            if (!(ob.radius > 0.0)) {
                throw std::invalid_argument("replay log: radius must be > 0");
            }
        }
    }

    /// Simulate `world` forward and capture a frame every `dt`, covering at
    /// least `duration` seconds. Frame times are relative to the start.
    static ReplayLog record(World world, double duration, double dt = kDt) {
        if (!(dt > 0.0)) throw std::invalid_argument("replay log: dt must be > 0");
        const int ticks =
            duration > 0.0 ? static_cast<int>(std::ceil(duration / dt - 1e-9)) : 0;
        std::vector<ReplayFrame> frames;
        frames.reserve(static_cast<std::size_t>(ticks) + 1);
        frames.push_back(snapshot(world, 0.0));
        for (int k = 1; k <= ticks; ++k) {
            advance(world, dt);
            frames.push_back(snapshot(world, k * dt));
        }
        return ReplayLog(world.spec.width_m, world.spec.height_m, std::move(frames));
    }

    static ReplayLog record(const MapSpec& map, double duration, double dt = kDt) {
        return record(expand(map), duration, dt);
    }

    /// Parse `t,id,x,y,r` rows (an unparsable first line is treated as a
    /// header; '#' lines are comments). Rows are grouped into frames by equal
    /// timestamps, which must be non-decreasing in file order. Velocities are
    /// recovered by forward finite differences; the last frame reuses the
    /// previous one's.
    static ReplayLog parse_csv(std::istream& in, double width_m = 50.0,
                               double height_m = 50.0) {
        std::vector<ReplayFrame> frames;
        std::string line;
        bool first_line = true;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty() || line[0] == '#') continue;
            double t = 0, x = 0, y = 0, r = 0;
            int id = 0;
            const int got = std::sscanf(line.c_str(), " %lf , %d , %lf , %lf , %lf",
                                        &t, &id, &x, &y, &r);
            if (got != 5) {
                if (first_line) {
                    first_line = false;
                    continue;
                }
                throw std::invalid_argument("replay log: bad row: " + line);
            }
            first_line = false;
            if (frames.empty() || std::abs(frames.back().time - t) > 1e-9) {
                if (!frames.empty() && t < frames.back().time) {
                    throw std::invalid_argument(
                        "replay log: timestamps must be non-decreasing");
                }
                frames.push_back(ReplayFrame{t, {}});
            }
            frames.back().obstacles.push_back(ObstacleSnapshot{id, {x, y}, {0, 0}, r});
        }
        for (ReplayFrame& f : frames) {
            std::sort(f.obstacles.begin(), f.obstacles.end(),
                      [](const ObstacleSnapshot& a, const ObstacleSnapshot& b) {
                          return a.id < b.id;
                      });
            for (std::size_t o = 1; o < f.obstacles.size(); ++o) {
                if (f.obstacles[o].id == f.obstacles[o - 1].id) {
                    throw std::invalid_argument(
                        "replay log: duplicate obstacle id in one frame");
                }
            }
        }
        for (std::size_t k = 0; k + 1 < frames.size(); ++k) {
            const double span = frames[k + 1].time - frames[k].time;
            const std::size_t n =
                std::min(frames[k].obstacles.size(), frames[k + 1].obstacles.size());
            for (std::size_t o = 0; o < n; ++o) {
                frames[k].obstacles[o].velocity =
                    (frames[k + 1].obstacles[o].position -
                     frames[k].obstacles[o].position) /
                    span;
            }
        }
        if (frames.size() >= 2) {
            ReplayFrame& last = frames.back();
            const ReplayFrame& prev = frames[frames.size() - 2];
            for (std::size_t o = 0;
                 o < std::min(last.obstacles.size(), prev.obstacles.size()); ++o) {
                last.obstacles[o].velocity = prev.obstacles[o].velocity;
            }
        }
        return ReplayLog(width_m, height_m, std::move(frames));
    }

    static ReplayLog parse_csv_file(const std::string& path, double width_m = 50.0,
                                    double height_m = 50.0) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open replay log: " + path);
        return parse_csv(in, width_m, height_m);
    }

    std::string to_csv() const {
        std::string out = "t,id,x,y,r\n";
        for (const ReplayFrame& f : frames_) {
            for (const ObstacleSnapshot& ob : f.obstacles) {
                out += detail::fmt_g9(f.time) + ',' + std::to_string(ob.id) + ',' +
                       detail::fmt_g9(ob.position.x) + ',' +
                       detail::fmt_g9(ob.position.y) + ',' +
                       detail::fmt_g9(ob.radius) + '\n';
            }
        }
        return out;
    }

    double width_m() const { return width_m_; }
    double height_m() const { return height_m_; }
    double area() const { return width_m_ * height_m_; }
    const std::vector<ReplayFrame>& frames() const { return frames_; }
    double duration() const { return frames_.back().time - frames_.front().time; }

    /// Obstacle states at time t: positions linearly interpolated between the
    /// surrounding frames, velocity and radius taken from the earlier one.
    /// Times outside the logged span clamp to the nearest frame.
    std::vector<ObstacleSnapshot> at(double t) const {
        if (t <= frames_.front().time) return frames_.front().obstacles;
        if (t >= frames_.back().time) return frames_.back().obstacles;
        const auto it = std::upper_bound(
            frames_.begin(), frames_.end(), t,
            [](double value, const ReplayFrame& f) { return value < f.time; });
        const std::size_t k = static_cast<std::size_t>(it - frames_.begin()) - 1;
        const ReplayFrame& a = frames_[k];
        const ReplayFrame& b = frames_[k + 1];
        const double s = (t - a.time) / (b.time - a.time);
        std::vector<ObstacleSnapshot> out = a.obstacles;
        for (std::size_t o = 0; o < out.size(); ++o) {
            out[o].position =
                a.obstacles[o].position +
                (b.obstacles[o].position - a.obstacles[o].position) * s;
        }
        return out;
    }

private:
    static ReplayFrame snapshot(const World& world, double t) {
        ReplayFrame f;
        f.time = t;
        f.obstacles.reserve(world.obstacles.size());
        for (const Obstacle& ob : world.obstacles) {
            f.obstacles.push_back(
                ObstacleSnapshot{ob.id, ob.position, ob.velocity, ob.radius});
        }
        return f;
    }

    double width_m_{50.0};
    double height_m_{50.0};
    std::vector<ReplayFrame> frames_;
};

// ---------------------------------------------------------------------------
// Sampling lattice
// ---------------------------------------------------------------------------

/// Where and how often the map is probed: a uniform interior position grid
/// plus the per-position direction/velocity counts and the time/start-time
/// sampling used by the time-dependent metrics.
struct SampleLattice {
    std::vector<Vec2> positions;
    int directions_per_position{8};
    int velocity_samples{16};
    int time_samples{10};        // number of probed instants, spaced t_sample
    double t_sample{1.0};        // s
    int start_time_samples{10};  // start offsets for the worst-case sweep
};

/// Interior grid with `d_sample` spacing: points at (i*d, j*d) strictly inside
/// the bounds. On a 50 m square, 12.5 m spacing yields 9 positions and 10 m
/// yields 16.
inline SampleLattice make_lattice(double width_m, double height_m,
                                  double d_sample = 12.5) {
    if (!(d_sample > 0.0) || !(width_m > 0.0) || !(height_m > 0.0)) {
        throw std::invalid_argument("lattice: spacing and bounds must be > 0");
    }
    SampleLattice lat;
    for (double y = d_sample; y < height_m - 1e-9; y += d_sample) {
        for (double x = d_sample; x < width_m - 1e-9; x += d_sample) {
            lat.positions.push_back({x, y});
        }
    }
    if (lat.positions.empty()) {
        throw std::invalid_argument(
            "lattice: spacing leaves no interior sample positions");
    }
    return lat;
}

namespace detail {

inline void check_lattice(const SampleLattice& lat) {
    if (lat.positions.empty() || lat.directions_per_position < 1 ||
        lat.velocity_samples < 1 || lat.time_samples < 1 ||
        lat.start_time_samples < 1 || !(lat.t_sample > 0.0)) {
        throw std::invalid_argument("lattice: counts must be >= 1 and spacing > 0");
    }
}

/// Earliest s in [0,1] with |d0 + s*dd| <= R, or -1 when the moving point
/// stays outside the disc for the whole segment.
inline double earliest_contact(const Vec2& d0, const Vec2& dd, double R) {
    const double c = d0.norm_sq() - R * R;
    if (c <= 0.0) return 0.0;
    const double a = dd.norm_sq();
    if (a <= 0.0) return -1.0;
    const double b = 2.0 * d0.dot(dd);
    const double disc = b * b - 4.0 * a * c;
    if (disc < 0.0) return -1.0;
    const double s = (-b - std::sqrt(disc)) / (2.0 * a);
    return (s >= 0.0 && s <= 1.0) ? s : -1.0;
}

/// Time from `start` until some obstacle disc first reaches the static point
/// `p` (inflated by robot_radius), capped at t_max. Between frames obstacles
/// move on straight segments and the contact instant is the exact root of the
/// per-segment distance quadratic — the same linear intra-tick motion model
/// the trial loop uses for collisions, refined to the continuous root.
inline double survival_from(const ReplayLog& log, const Vec2& p, double start,
                            double t_max, double robot_radius) {
    for (const ObstacleSnapshot& ob : log.at(start)) {
        const double R = ob.radius + robot_radius;
        if ((ob.position - p).norm_sq() <= R * R) return 0.0;
    }
    const std::vector<ReplayFrame>& frames = log.frames();
    auto it = std::upper_bound(
        frames.begin(), frames.end(), start,
        [](double value, const ReplayFrame& f) { return value < f.time; });
    std::size_t k = it == frames.begin()
                        ? 0
                        : static_cast<std::size_t>(it - frames.begin()) - 1;
    for (; k + 1 < frames.size(); ++k) {
        const ReplayFrame& a = frames[k];
        const ReplayFrame& b = frames[k + 1];
        if (a.time - start >= t_max) break;
        const double span = b.time - a.time;
        const double s_lo =
            start > a.time ? clamp((start - a.time) / span, 0.0, 1.0) : 0.0;
        double hit = std::numeric_limits<double>::infinity();
        for (std::size_t o = 0; o < a.obstacles.size(); ++o) {
            const Vec2 seg = b.obstacles[o].position - a.obstacles[o].position;
            const Vec2 d0 = a.obstacles[o].position + seg * s_lo - p;
            const Vec2 dd = seg * (1.0 - s_lo);
            const double R = a.obstacles[o].radius + robot_radius;
            const double s = earliest_contact(d0, dd, R);
            if (s >= 0.0) hit = std::min(hit, s_lo + s * (1.0 - s_lo));
        }
        if (hit < std::numeric_limits<double>::infinity()) {
            return std::min(t_max, a.time + hit * span - start);
        }
    }
    return t_max;  // beyond the log's end obstacles are frozen: no new contact
}

}  // namespace detail

// ---------------------------------------------------------------------------
// The six difficulty metrics
// ---------------------------------------------------------------------------

/// Fraction of the map area covered by obstacle discs at the first frame.
inline double obstacle_density(const ReplayLog& log) {
    double covered = 0.0;
    for (const ObstacleSnapshot& ob : log.frames().front().obstacles) {
        covered += kPi * ob.radius * ob.radius;
    }
    return covered / log.area();
}

/// Mean free-ray length over all lattice positions and uniformly spread
/// directions at time t: each ray runs until the first obstacle disc or the
/// map boundary, whichever is nearer. A position inside an obstacle
/// contributes zero for all its directions.
inline double traversability(const ReplayLog& log, const SampleLattice& lat,
                             double t = 0.0) {
    detail::check_lattice(lat);
    const std::vector<ObstacleSnapshot> obstacles = log.at(t);
    const int dirs = lat.directions_per_position;
    double sum = 0.0;
    for (const Vec2& p : lat.positions) {
        bool inside = false;
        for (const ObstacleSnapshot& ob : obstacles) {
            if ((p - ob.position).norm_sq() < ob.radius * ob.radius) {
                inside = true;
                break;
            }
        }
        if (inside) continue;
        for (int k = 0; k < dirs; ++k) {
            const double theta = k * (kTwoPi / dirs);
            const Vec2 u{std::cos(theta), std::sin(theta)};
            double d = ray_box_exit(p, u, log.width_m(), log.height_m());
            for (const ObstacleSnapshot& ob : obstacles) {
                d = std::min(d, ray_disc_entry(p, u, ob.position, ob.radius));
            }
            sum += d;
        }
    }
    return sum / (static_cast<double>(lat.positions.size()) * dirs);
}

/// Traversability averaged over `time_samples` instants spaced t_sample.
inline double dynamic_traversability(const ReplayLog& log,
                                     const SampleLattice& lat) {
    detail::check_lattice(lat);
    double sum = 0.0;
    for (int j = 0; j < lat.time_samples; ++j) {
        sum += traversability(log, lat, j * lat.t_sample);
    }
    return sum / lat.time_samples;
}

/// Fraction of sampled ego velocities (uniform directions at the ego cruise
/// speed) outside every obstacle's velocity-obstacle cone, averaged over
/// lattice positions. A velocity v is blocked by an obstacle at relative
/// position p_rel moving with v_B when the relative ray (v - v_B)t enters the
/// disc of radius r_obs + r_ego around p_rel for some t > 0 — time-unbounded,
/// so distance only affects the cone's width. A position already inside an
/// inflated disc has no free velocity at all.
inline double vo_feasibility(const ReplayLog& log, const SampleLattice& lat,
                             const RobotConfig& ego = {}) {
    detail::check_lattice(lat);
    const std::vector<ObstacleSnapshot> obstacles = log.at(0.0);
    double total = 0.0;
    for (const Vec2& p : lat.positions) {
        bool swallowed = false;
        for (const ObstacleSnapshot& ob : obstacles) {
            const double R = ob.radius + ego.radius;
            if ((ob.position - p).norm_sq() <= R * R) {
                swallowed = true;
                break;
            }
        }
        if (swallowed) continue;
        int feasible = 0;
        for (int i = 0; i < lat.velocity_samples; ++i) {
            const double theta = i * (kTwoPi / lat.velocity_samples);
            const Vec2 v = from_polar(ego.v_cruise, theta);
            bool blocked = false;
            for (const ObstacleSnapshot& ob : obstacles) {
                const Vec2 w = v - ob.velocity;
                const double wn = w.norm();
                if (wn <= 0.0) continue;  // zero relative motion, outside
                if (ray_disc_entry(p, w / wn, ob.position, ob.radius + ego.radius) <
                    std::numeric_limits<double>::infinity()) {
                    blocked = true;
                    break;
                }
            }
            feasible += blocked ? 0 : 1;
        }
        total += static_cast<double>(feasible) / lat.velocity_samples;
    }
    return total / static_cast<double>(lat.positions.size());
}

/// Mean time a motionless robot placed at each lattice position survives the
/// obstacle flow from the log's start, capped at t_max.
inline double survivability(const ReplayLog& log, const SampleLattice& lat,
                            double t_max = 20.0, double robot_radius = 1.0) {
    detail::check_lattice(lat);
    if (!(t_max > 0.0)) throw std::invalid_argument("survivability: t_max must be > 0");
    double sum = 0.0;
    for (const Vec2& p : lat.positions) {
        sum += detail::survival_from(log, p, 0.0, t_max, robot_radius);
    }
    return sum / static_cast<double>(lat.positions.size());
}

/// Worst-case variant: robots occupy every lattice position simultaneously
/// and the run ends at the first collision anywhere. Averaged over
/// `start_time_samples` start offsets spaced t_sample, capped at t_max.
inline double global_survivability(const ReplayLog& log, const SampleLattice& lat,
                                   double t_max = 20.0, double robot_radius = 1.0) {
    detail::check_lattice(lat);
    if (!(t_max > 0.0)) {
        throw std::invalid_argument("global survivability: t_max must be > 0");
    }
    double sum = 0.0;
    for (int j = 0; j < lat.start_time_samples; ++j) {
        const double start = j * lat.t_sample;
        double worst = t_max;
        for (const Vec2& p : lat.positions) {
            worst = std::min(worst,
                             detail::survival_from(log, p, start, t_max, robot_radius));
            if (worst == 0.0) break;
        }
        sum += worst;
    }
    return sum / lat.start_time_samples;
}

// Map-level conveniences: expand the spec, record just enough trajectory, and
// delegate to the log-based form.

inline double obstacle_density(const MapSpec& map) {
    const World world = expand(map);
    double covered = 0.0;
    for (const Obstacle& ob : world.obstacles) {
        covered += kPi * ob.radius * ob.radius;
    }
    return covered / map.area();
}

inline double traversability(const MapSpec& map, const SampleLattice& lat) {
    return traversability(ReplayLog::record(map, 0.0), lat);
}

inline double dynamic_traversability(const MapSpec& map, const SampleLattice& lat) {
    const double span = (lat.time_samples - 1) * lat.t_sample;
    return dynamic_traversability(ReplayLog::record(map, span), lat);
}

inline double vo_feasibility(const MapSpec& map, const SampleLattice& lat,
                             const RobotConfig& ego = {}) {
    return vo_feasibility(ReplayLog::record(map, 0.0), lat, ego);
}

inline double survivability(const MapSpec& map, const SampleLattice& lat,
                            double t_max = 20.0, double robot_radius = 1.0) {
    return survivability(ReplayLog::record(map, t_max), lat, t_max, robot_radius);
}

inline double global_survivability(const MapSpec& map, const SampleLattice& lat,
                                   double t_max = 20.0, double robot_radius = 1.0) {
    const double span = (lat.start_time_samples - 1) * lat.t_sample + t_max;
    return global_survivability(ReplayLog::record(map, span), lat, t_max,
                                robot_radius);
}

// ---------------------------------------------------------------------------
// Reports and preprocessing
// ---------------------------------------------------------------------------

inline const std::array<const char*, 6>& metric_names() {
    static const std::array<const char*, 6> names = {
        "obstacle_density",  "traversability", "dynamic_traversability",
        "vo_feasibility",    "survivability",  "global_survivability"};
    return names;
}

/// All metrics except obstacle density decrease as maps get harder, so their
/// normalized values are flipped to put every metric on a
/// larger-means-harder scale.
inline bool metric_reversed(const std::string& name) {
    return name != "obstacle_density";
}

struct MetricReport {
    std::string map_id;
    std::map<std::string, double> raw;
    std::map<std::string, double> preprocessed;  // filled by preprocess()
};

/// Longest trajectory any metric will look at, given the lattice and cap.
inline double metric_replay_span(const SampleLattice& lat, double t_max = 20.0) {
    return std::max((lat.time_samples - 1) * lat.t_sample,
                    (lat.start_time_samples - 1) * lat.t_sample + t_max);
}

/// All six raw metrics from one shared log.
inline MetricReport compute_metrics(const ReplayLog& log, const std::string& map_id,
                                    const SampleLattice& lat, double t_max = 20.0,
                                    const RobotConfig& ego = {}) {
    MetricReport report;
    report.map_id = map_id;
    report.raw["obstacle_density"] = obstacle_density(log);
    report.raw["traversability"] = traversability(log, lat);
    report.raw["dynamic_traversability"] = dynamic_traversability(log, lat);
    report.raw["vo_feasibility"] = vo_feasibility(log, lat, ego);
    report.raw["survivability"] = survivability(log, lat, t_max, ego.radius);
    report.raw["global_survivability"] =
        global_survivability(log, lat, t_max, ego.radius);
    return report;
}

inline MetricReport compute_metrics(const World& world, double d_sample = 12.5,
                                    double t_max = 20.0, const RobotConfig& ego = {}) {
    const SampleLattice lat =
        make_lattice(world.spec.width_m, world.spec.height_m, d_sample);
    const ReplayLog log = ReplayLog::record(world, metric_replay_span(lat, t_max));
    return compute_metrics(log, world.spec.id, lat, t_max, ego);
}

inline MetricReport compute_metrics(const MapSpec& map, double d_sample = 12.5,
                                    double t_max = 20.0, const RobotConfig& ego = {}) {
    return compute_metrics(expand(map), d_sample, t_max, ego);
}

/// Dataset-relative affine scaling of each metric onto [0,10], kept so that
/// held-out maps can be projected with the same transform later.
struct Normalization {
    struct Range {
        double lo{0.0};
        double hi{0.0};
    };
    std::map<std::string, Range> ranges;

    /// True when the fitted range cannot distinguish values (all raw values
    /// were identical); project() then maps everything to 0.
    bool degenerate(const std::string& metric) const {
        const auto it = ranges.find(metric);
        return it == ranges.end() || !(it->second.hi > it->second.lo);
    }

    double project(const std::string& metric, double raw) const {
        const auto it = ranges.find(metric);
        if (it == ranges.end()) {
            throw std::out_of_range("no normalization range for metric '" + metric +
                                    "'");
        }
        const Range r = it->second;
        if (!(r.hi > r.lo)) return 0.0;
        double scaled = (raw - r.lo) / (r.hi - r.lo) * 10.0;
        if (metric_reversed(metric)) scaled = 10.0 - scaled;
        return clamp(scaled, 0.0, 10.0);
    }

    std::string to_json() const {
        nlohmann::json doc;
        for (const auto& [name, range] : ranges) {
            doc[name] = {{"min", range.lo}, {"max", range.hi}};
        }
        return doc.dump(2) + "\n";
    }

    static Normalization from_json(const std::string& text) {
        Normalization norm;
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(text);
            for (auto it = doc.begin(); it != doc.end(); ++it) {
                norm.ranges[it.key()] = Range{it.value().at("min").get<double>(),
                                              it.value().at("max").get<double>()};
            }
        } catch (const nlohmann::json::exception& e) {
            throw std::runtime_error(std::string("normalization: bad JSON: ") +
                                     e.what());
        }
        return norm;
    }
};

inline Normalization fit_normalization(const std::vector<MetricReport>& reports) {
    Normalization norm;
    for (const MetricReport& rep : reports) {
        for (const auto& [name, value] : rep.raw) {
            auto [it, fresh] =
                norm.ranges.try_emplace(name, Normalization::Range{value, value});
            if (!fresh) {
                it->second.lo = std::min(it->second.lo, value);
                it->second.hi = std::max(it->second.hi, value);
            }
        }
    }
    return norm;
}

/// Fill every report's preprocessed values from a normalization fitted over
/// the whole set; returns that normalization for persistence.
inline Normalization preprocess(std::vector<MetricReport>& reports) {
    const Normalization norm = fit_normalization(reports);
    for (MetricReport& rep : reports) {
        for (const auto& [name, value] : rep.raw) {
            rep.preprocessed[name] = norm.project(name, value);
        }
    }
    return norm;
}

/// Project one (possibly held-out) report through an existing normalization.
inline void apply_normalization(const Normalization& norm, MetricReport& report) {
    for (const auto& [name, value] : report.raw) {
        report.preprocessed[name] = norm.project(name, value);
    }
}

// ---------------------------------------------------------------------------
// CSV serialization
// ---------------------------------------------------------------------------

inline void write_metrics_csv(std::ostream& os,
                              const std::vector<MetricReport>& reports) {
    os << "map_id,metric,raw,preprocessed\n";
    for (const MetricReport& rep : reports) {
        for (const char* name : metric_names()) {
            const auto raw_it = rep.raw.find(name);
            if (raw_it == rep.raw.end()) continue;
            os << rep.map_id << ',' << name << ',' << detail::fmt_g9(raw_it->second)
               << ',';
            const auto pre_it = rep.preprocessed.find(name);
            if (pre_it != rep.preprocessed.end()) os << detail::fmt_g9(pre_it->second);
            os << '\n';
        }
    }
}

inline void write_metrics_csv(const std::string& path,
                              const std::vector<MetricReport>& reports) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    write_metrics_csv(out, reports);
}

inline std::vector<MetricReport> read_metrics_csv(std::istream& in) {
    std::vector<MetricReport> reports;
    std::string line;
    if (!std::getline(in, line)) {
        throw std::runtime_error("metrics csv: empty input");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "map_id,metric,raw,preprocessed") {
        throw std::runtime_error("metrics csv: unexpected header: " + line);
    }
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::array<std::string, 4> fields;
        std::size_t from = 0;
        for (int f = 0; f < 4; ++f) {
            const std::size_t comma = line.find(',', from);
            if (f < 3 && comma == std::string::npos) {
                throw std::runtime_error("metrics csv: bad row: " + line);
            }
            fields[static_cast<std::size_t>(f)] =
                line.substr(from, comma == std::string::npos ? comma : comma - from);
            from = comma + 1;
        }
        if (reports.empty() || reports.back().map_id != fields[0]) {
            reports.push_back(MetricReport{fields[0], {}, {}});
        }
        MetricReport& rep = reports.back();
        try {
            rep.raw[fields[1]] = std::stod(fields[2]);
            if (!fields[3].empty()) rep.preprocessed[fields[1]] = std::stod(fields[3]);
        } catch (const std::exception&) {
            throw std::runtime_error("metrics csv: bad number in row: " + line);
        }
    }
    return reports;
}

inline std::vector<MetricReport> read_metrics_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open metrics csv: " + path);
    return read_metrics_csv(in);
}

}  // namespace dynobench
