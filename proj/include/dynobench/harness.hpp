#pragma once

#include <array>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "dynobench/planning.hpp"
#include "dynobench/world.hpp"

namespace dynobench {

struct TrialSpec {
    std::string map_id;
    std::string planner;
    std::string gaze;
    Vec2 start;
    Vec2 goal;
    double v_cruise{4.0};
    double time_limit{60.0};
};

enum class TrialOutcome { Success, Collision, Deadlock, Timeout };

inline const char* to_string(TrialOutcome o) {
    switch (o) {
        case TrialOutcome::Success: return "Success";
        case TrialOutcome::Collision: return "Collision";
        case TrialOutcome::Deadlock: return "Deadlock";
        default: return "Timeout";
    }
}

struct TrialRecord {
    TrialSpec trial;
    TrialOutcome outcome{TrialOutcome::Timeout};
    double duration{0.0};
    double min_clearance{std::numeric_limits<double>::infinity()};
    int replan_count{0};
};

/// The canonical 3x3 grid of start/goal candidates.
inline std::array<Vec2, 9> canonical_positions() {
    std::array<Vec2, 9> p{};
    const double axis[3] = {10.0, 25.0, 40.0};
    int k = 0;
    for (double y : axis) {
        for (double x : axis) p[static_cast<std::size_t>(k++)] = {x, y};
    }
    return p;
}

constexpr double kCruiseSpeeds[3] = {2.0, 4.0, 6.0};

/// All ordered start/goal pairs (72) times three cruise speeds = 216 trials.
inline std::vector<TrialSpec> trial_matrix(const std::string& map_id,
                                           const std::string& planner,
                                           const std::string& gaze,
                                           double time_limit = 60.0) {
    const std::array<Vec2, 9> pos = canonical_positions();
    std::vector<TrialSpec> out;
    out.reserve(216);
    for (int s = 0; s < 9; ++s) {
        for (int g = 0; g < 9; ++g) {
            if (s == g) continue;
            for (double v : kCruiseSpeeds) {
                TrialSpec t;
                t.map_id = map_id;
                t.planner = planner;
                t.gaze = gaze;
                t.start = pos[static_cast<std::size_t>(s)];
                t.goal = pos[static_cast<std::size_t>(g)];
                t.v_cruise = v;
                t.time_limit = time_limit;
                out.push_back(std::move(t));
            }
        }
    }
    return out;
}

namespace detail {

constexpr int kReplanTicks = 4;            // 0.2 s cadence
constexpr int kDeadlockBrakes = 5;
constexpr int kCollisionSubsteps = 4;

inline double spawn_clearance(const World& w, const Vec2& p, double robot_radius) {
    double worst = std::numeric_limits<double>::infinity();
    for (const Obstacle& o : w.obstacles) {
        worst = std::min(worst, (p - o.position).norm() - (robot_radius + o.radius));
    }
    return worst;
}

}  // namespace detail

/// One agent-environment episode on an already-expanded world, with the
/// planner and gaze supplied by the caller. Per tick: the world steps, the
/// robot senses from its pre-step pose, replans when due (every 4 ticks, or
/// the tick after a Brake), then moves exactly along the planned trajectory
/// while its heading integrates the commanded yaw rate. Collisions are
/// checked at 4 interpolated substeps per tick.
inline TrialRecord run_trial_with(const TrialSpec& spec, World world,
                                  Planner& planner, GazePolicy gaze,
                                  RobotConfig cfg, double grid_resolution = 0.5) {
    if (spec.start.x == spec.goal.x && spec.start.y == spec.goal.y) {
        throw std::invalid_argument("trial start and goal coincide");
    }
    cfg.v_cruise = spec.v_cruise;
    if (gaze_uses_full_circle(gaze)) cfg.fov_width = kTwoPi;

    TrialRecord rec;
    rec.trial = spec;

    RobotState robot;
    robot.position = spec.start;
    robot.heading = std::atan2(spec.goal.y - spec.start.y, spec.goal.x - spec.start.x);

    // Spawn checks: overlapping an obstacle is an immediate collision; a
    // goal inside the success radius is an immediate success.
    const double clearance0 = detail::spawn_clearance(world, robot.position, cfg.radius);
    rec.min_clearance = clearance0;
    if (clearance0 < 0.0) {
        rec.outcome = TrialOutcome::Collision;
        rec.duration = 0.0;
        return rec;
    }
    if ((spec.goal - spec.start).norm() <= kGoalTolerance) {
        rec.outcome = TrialOutcome::Success;
        rec.duration = 0.0;
        return rec;
    }

    PerceptionFrame frame = PerceptionFrame::make(
        world.spec.width_m, world.spec.height_m, grid_resolution);
    const auto fov_now = [&] {
        FieldOfView f;
        f.center = robot.position;
        f.heading = robot.heading;
        f.angular_width = cfg.fov_width;
        f.depth = cfg.fov_depth;
        return f;
    };

    Trajectory current;
    double plan_anchor = 0.0;
    double yaw_rate = 0.0;
    long last_plan_tick = std::numeric_limits<long>::min();
    bool brake_pending = false;
    int consecutive_brakes = 0;

    const long n_ticks = std::lround(spec.time_limit / kDt);
    std::vector<Vec2> prev_obs(world.obstacles.size());

    for (long tick = 1; tick <= n_ticks; ++tick) {
        for (std::size_t i = 0; i < world.obstacles.size(); ++i) {
            prev_obs[i] = world.obstacles[i].position;
        }
        const Vec2 robot_prev = robot.position;

        advance(world, kDt);
        sense_into(frame, world, fov_now());

        if (current.empty() || brake_pending ||
            tick - last_plan_tick >= detail::kReplanTicks) {
            robot.time = (tick - 1) * kDt;
            const PlanOutcome out = planner.plan(frame, robot, spec.goal, cfg);
            ++rec.replan_count;
            current = out.trajectory;
            plan_anchor = robot.time;
            last_plan_tick = tick;
            yaw_rate = plan_gaze(gaze, frame, robot, current, spec.goal, cfg);
            brake_pending = out.kind == PlanKind::Brake;
            if (brake_pending) {
                if (++consecutive_brakes >= detail::kDeadlockBrakes) {
                    rec.outcome = TrialOutcome::Deadlock;
                    rec.duration = world.time;
                    return rec;
                }
            } else {
                consecutive_brakes = 0;
            }
        }

        const TrajectorySample& s = current.at_time(tick * kDt - plan_anchor);
        robot.position = s.position;
        robot.velocity = s.velocity;
        robot.heading = wrap_angle(robot.heading + yaw_rate * kDt);

        for (int sub = 1; sub <= detail::kCollisionSubsteps; ++sub) {
            const double f =
                static_cast<double>(sub) / detail::kCollisionSubsteps;
            const Vec2 pr = robot_prev + (robot.position - robot_prev) * f;
            for (std::size_t i = 0; i < world.obstacles.size(); ++i) {
                const Obstacle& o = world.obstacles[i];
                const Vec2 po = prev_obs[i] + (o.position - prev_obs[i]) * f;
                const double clearance =
                    (pr - po).norm() - (cfg.radius + o.radius);
                rec.min_clearance = std::min(rec.min_clearance, clearance);
                if (clearance < 0.0) {
                    rec.outcome = TrialOutcome::Collision;
                    rec.duration = (tick - 1) * kDt + f * kDt;
                    return rec;
                }
            }
        }

        if ((robot.position - spec.goal).norm() <= kGoalTolerance) {
            rec.outcome = TrialOutcome::Success;
            rec.duration = tick * kDt;
            return rec;
        }
    }

    rec.outcome = TrialOutcome::Timeout;
    rec.duration = spec.time_limit;
    return rec;
}

/// Expand the map and run one episode with planner/gaze resolved by id.
inline TrialRecord run_trial(const TrialSpec& spec, const MapSpec& map,
                             const RobotConfig& cfg,
                             double grid_resolution = 0.5) {
    World world = expand(map);
    const auto planner = make_planner(spec.planner);
    return run_trial_with(spec, std::move(world), *planner,
                          gaze_from_id(spec.gaze), cfg, grid_resolution);
}

struct SuccessRow {
    std::string map_id;
    std::string planner;
    std::string gaze;
    double success_rate{0.0};
    int trials{0};
};

struct SuccessTable {
    std::vector<SuccessRow> rows;
};

struct MatrixResult {
    std::vector<TrialRecord> records;          // slot order, completed only
    std::vector<std::string> errors;           // "<map>/<planner>/<gaze>: what"
    SuccessTable table;
};

using PlannerFactory = std::function<std::unique_ptr<Planner>(const std::string&)>;

/// Full trial matrix: every map x (planner, gaze) pair x 216 canonical
/// trials. Work is dealt to `parallelism` threads by slot index; each slot
/// owns its world and planner chain and writes only its own cell, so the
/// result is identical at any width. Errored trials are reported, not fatal.
inline MatrixResult run_matrix(
    const std::vector<World>& worlds,
    const std::vector<std::pair<std::string, std::string>>& planner_gaze,
    const RobotConfig& cfg, int parallelism = 1, PlannerFactory factory = {},
    double time_limit = 60.0, double grid_resolution = 0.5) {
    if (parallelism < 1) throw std::invalid_argument("parallelism must be >= 1");
    if (!factory) factory = [](const std::string& planner_id) {
        return make_planner(planner_id);
    };

    struct Slot {
        TrialSpec spec;
        const World* world;
        TrialRecord record;
        std::string error;
        bool completed{false};
    };
    std::vector<Slot> slots;
    for (const World& world : worlds) {
        for (const auto& [planner_id, gaze] : planner_gaze) {
            for (TrialSpec& t :
                 trial_matrix(world.spec.id, planner_id, gaze, time_limit)) {
                Slot s;
                s.spec = std::move(t);
                s.world = &world;
                slots.push_back(std::move(s));
            }
        }
    }

    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= slots.size()) return;
            Slot& slot = slots[i];
            try {
                World world = *slot.world;  // fresh t = 0 copy per trial
                const auto planner = factory(slot.spec.planner);
                slot.record = run_trial_with(slot.spec, std::move(world), *planner,
                                             gaze_from_id(slot.spec.gaze), cfg,
                                             grid_resolution);
                slot.completed = true;
            } catch (const std::exception& e) {
                slot.error = slot.spec.map_id + "/" + slot.spec.planner + "/" +
                             slot.spec.gaze + ": " + e.what();
            }
        }
    };

    if (parallelism == 1 || slots.size() <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        const int width = static_cast<int>(
            std::min<std::size_t>(static_cast<std::size_t>(parallelism), slots.size()));
        pool.reserve(static_cast<std::size_t>(width));
        for (int i = 0; i < width; ++i) pool.emplace_back(worker);
        for (std::thread& th : pool) th.join();
    }

    // Slots are laid out 216 per (map, planner-gaze) group, so the success
    // fold walks them by group index -- a deterministic fold over trial ids.
    MatrixResult out;
    const std::size_t per_group = 216;
    const std::size_t n_groups = worlds.size() * planner_gaze.size();
    std::vector<int> successes(n_groups, 0), completed(n_groups, 0);
    for (std::size_t i = 0; i < slots.size(); ++i) {
        Slot& slot = slots[i];
        const std::size_t group = i / per_group;
        if (slot.completed) {
            ++completed[group];
            if (slot.record.outcome == TrialOutcome::Success) ++successes[group];
            out.records.push_back(std::move(slot.record));
        } else {
            out.errors.push_back(std::move(slot.error));
        }
    }
    for (std::size_t m = 0; m < worlds.size(); ++m) {
        for (std::size_t p = 0; p < planner_gaze.size(); ++p) {
            const std::size_t group = m * planner_gaze.size() + p;
            SuccessRow row;
            row.map_id = worlds[m].spec.id;
            row.planner = planner_gaze[p].first;
            row.gaze = planner_gaze[p].second;
            row.trials = completed[group];
            row.success_rate =
                row.trials > 0 ? static_cast<double>(successes[group]) / row.trials
                               : 0.0;
            out.table.rows.push_back(std::move(row));
        }
    }
    return out;
}

/// Convenience overload expanding each spec once before running. A spec
/// whose expansion fails does not abort the batch: every trial it would
/// have run is reported in `errors` and its success rows carry zero trials,
/// the same way per-trial failures are folded.
inline MatrixResult run_matrix(
    const std::vector<MapSpec>& maps,
    const std::vector<std::pair<std::string, std::string>>& planner_gaze,
    const RobotConfig& cfg, int parallelism = 1, PlannerFactory factory = {},
    double time_limit = 60.0, double grid_resolution = 0.5) {
    std::vector<World> worlds;
    worlds.reserve(maps.size());
    std::vector<std::string> expand_error(maps.size());  // empty = expanded fine
    for (std::size_t i = 0; i < maps.size(); ++i) {
        try {
            worlds.push_back(expand(maps[i]));
        } catch (const std::exception& e) {
            expand_error[i] = e.what();
        }
    }
    MatrixResult res = run_matrix(worlds, planner_gaze, cfg, parallelism,
                                  std::move(factory), time_limit, grid_resolution);
    if (worlds.size() == maps.size()) return res;

    // Splice zero-trial rows for failed maps back in input order.
    SuccessTable table;
    std::size_t good = 0;
    for (std::size_t i = 0; i < maps.size(); ++i) {
        if (expand_error[i].empty()) {
            for (std::size_t p = 0; p < planner_gaze.size(); ++p) {
                table.rows.push_back(
                    std::move(res.table.rows[good * planner_gaze.size() + p]));
            }
            ++good;
            continue;
        }
        for (const auto& [planner_id, gaze] : planner_gaze) {
            SuccessRow row;
            row.map_id = maps[i].id;
            row.planner = planner_id;
            row.gaze = gaze;
            table.rows.push_back(std::move(row));
            const std::size_t skipped =
                trial_matrix(maps[i].id, planner_id, gaze, time_limit).size();
            for (std::size_t t = 0; t < skipped; ++t) {
                res.errors.push_back(maps[i].id + "/" + planner_id + "/" + gaze +
                                     ": " + expand_error[i]);
            }
        }
    }
    res.table = std::move(table);
    return res;
}

namespace detail {

inline std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

}  // namespace detail

inline void write_results_csv(const std::vector<TrialRecord>& records,
                              std::ostream& os) {
    os << "map_id,planner,gaze,start,goal,v_cruise,outcome,duration,"
          "min_clearance,replans\n";
    for (const TrialRecord& r : records) {
        os << r.trial.map_id << ',' << r.trial.planner << ',' << r.trial.gaze << ','
           << detail::format_number(r.trial.start.x) << ':'
           << detail::format_number(r.trial.start.y) << ','
           << detail::format_number(r.trial.goal.x) << ':'
           << detail::format_number(r.trial.goal.y) << ','
           << detail::format_number(r.trial.v_cruise) << ',' << to_string(r.outcome)
           << ',' << detail::format_number(r.duration) << ','
           << detail::format_number(r.min_clearance) << ',' << r.replan_count
           << '\n';
    }
}

inline void write_success_csv(const SuccessTable& table, std::ostream& os) {
    os << "map_id,planner,gaze,success_rate,trials\n";
    for (const SuccessRow& row : table.rows) {
        os << row.map_id << ',' << row.planner << ',' << row.gaze << ','
           << detail::format_number(row.success_rate) << ',' << row.trials << '\n';
    }
}

inline TrialOutcome trial_outcome_from_string(const std::string& s) {
    if (s == "Success") return TrialOutcome::Success;
    if (s == "Collision") return TrialOutcome::Collision;
    if (s == "Deadlock") return TrialOutcome::Deadlock;
    if (s == "Timeout") return TrialOutcome::Timeout;
    throw std::invalid_argument("unknown trial outcome: " + s);
}

namespace detail {

inline std::vector<std::string> split_fields(const std::string& line, char sep,
                                             std::size_t expected,
                                             const std::string& what) {
    std::vector<std::string> fields;
    std::size_t from = 0;
    for (;;) {
        const std::size_t at = line.find(sep, from);
        fields.push_back(line.substr(from, at == std::string::npos ? at : at - from));
        if (at == std::string::npos) break;
        from = at + 1;
    }
    if (fields.size() != expected) {
        throw std::runtime_error(what + ": expected " + std::to_string(expected) +
                                 " fields, got " + std::to_string(fields.size()) +
                                 " in: " + line);
    }
    return fields;
}

inline Vec2 parse_position_pair(const std::string& s, const std::string& what) {
    const std::size_t colon = s.find(':');
    if (colon == std::string::npos) {
        throw std::runtime_error(what + ": expected 'x:y', got: " + s);
    }
    try {
        return {std::stod(s.substr(0, colon)), std::stod(s.substr(colon + 1))};
    } catch (const std::exception&) {
        throw std::runtime_error(what + ": bad coordinates: " + s);
    }
}

}  // namespace detail

/// Strict reverse of write_results_csv.
inline std::vector<TrialRecord> read_results_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("results csv: empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line !=
        "map_id,planner,gaze,start,goal,v_cruise,outcome,duration,"
        "min_clearance,replans") {
        throw std::runtime_error("results csv: unexpected header: " + line);
    }
    std::vector<TrialRecord> records;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto f = detail::split_fields(line, ',', 10, "results csv");
        TrialRecord r;
        r.trial.map_id = f[0];
        r.trial.planner = f[1];
        r.trial.gaze = f[2];
        r.trial.start = detail::parse_position_pair(f[3], "results csv");
        r.trial.goal = detail::parse_position_pair(f[4], "results csv");
        try {
            r.trial.v_cruise = std::stod(f[5]);
            r.outcome = trial_outcome_from_string(f[6]);
            r.duration = std::stod(f[7]);
            r.min_clearance = std::stod(f[8]);
            r.replan_count = std::stoi(f[9]);
        } catch (const std::invalid_argument& e) {
            throw std::runtime_error(std::string("results csv: ") + e.what() +
                                     " in: " + line);
        }
        records.push_back(std::move(r));
    }
    return records;
}

inline std::vector<TrialRecord> read_results_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open results csv: " + path);
    return read_results_csv(in);
}

/// Success rates folded from per-trial records, grouped by (map, planner,
/// gaze) in first-appearance order.
inline SuccessTable success_table_from_records(
    const std::vector<TrialRecord>& records) {
    SuccessTable table;
    std::vector<int> successes;
    for (const TrialRecord& r : records) {
        std::size_t g = 0;
        for (; g < table.rows.size(); ++g) {
            const SuccessRow& row = table.rows[g];
            if (row.map_id == r.trial.map_id && row.planner == r.trial.planner &&
                row.gaze == r.trial.gaze) {
                break;
            }
        }
        if (g == table.rows.size()) {
            SuccessRow row;
            row.map_id = r.trial.map_id;
            row.planner = r.trial.planner;
            row.gaze = r.trial.gaze;
            table.rows.push_back(std::move(row));
            successes.push_back(0);
        }
        ++table.rows[g].trials;
        if (r.outcome == TrialOutcome::Success) ++successes[g];
    }
    for (std::size_t g = 0; g < table.rows.size(); ++g) {
        table.rows[g].success_rate =
            table.rows[g].trials > 0
                ? static_cast<double>(successes[g]) / table.rows[g].trials
                : 0.0;
    }
    return table;
}

/// Strict reverse of write_success_csv.
inline SuccessTable read_success_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("success csv: empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "map_id,planner,gaze,success_rate,trials") {
        throw std::runtime_error("success csv: unexpected header: " + line);
    }
    SuccessTable table;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto f = detail::split_fields(line, ',', 5, "success csv");
        SuccessRow row;
        row.map_id = f[0];
        row.planner = f[1];
        row.gaze = f[2];
        try {
            row.success_rate = std::stod(f[3]);
            row.trials = std::stoi(f[4]);
        } catch (const std::exception&) {
            throw std::runtime_error("success csv: bad number in: " + line);
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

inline SuccessTable read_success_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open success csv: " + path);
    return read_success_csv(in);
}

inline void write_results_file(const std::vector<TrialRecord>& records,
                               const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    write_results_csv(records, os);
}

inline void write_success_file(const SuccessTable& table, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    write_success_csv(table, os);
}

}  // namespace dynobench
