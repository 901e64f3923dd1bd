#include <doctest.h>

#include <cmath>
#include <limits>

#include "dynobench/planning.hpp"
#include "dynobench/world.hpp"

using namespace dynobench;

namespace {

PerceptionFrame bare_frame() { return PerceptionFrame::make(50.0, 50.0); }

void add_tracker(PerceptionFrame& frame, int id, Vec2 pos, Vec2 vel, double r) {
    TrackedObstacle t;
    t.id = id;
    t.position = pos;
    t.velocity = vel;
    t.radius_estimate = r;
    t.last_seen = frame.time;
    t.visible_now = true;
    frame.trackers.push_back(t);
}

RobotState rest_at(Vec2 p) {
    RobotState s;
    s.position = p;
    return s;
}

double max_accel(const Trajectory& traj) {
    double worst = 0.0;
    for (const TrajectorySample& s : traj.samples) {
        worst = std::max(worst, s.acceleration.norm());
    }
    return worst;
}

double max_speed(const Trajectory& traj) {
    double worst = 0.0;
    for (const TrajectorySample& s : traj.samples) {
        worst = std::max(worst, s.velocity.norm());
    }
    return worst;
}

/// Smallest (distance - summed radii) between trajectory samples and the
/// frame's tracked obstacles coasting at constant velocity.
double min_tracker_separation(const Trajectory& traj, const PerceptionFrame& frame,
                              double robot_radius) {
    double worst = std::numeric_limits<double>::infinity();
    for (const TrajectorySample& s : traj.samples) {
        for (const TrackedObstacle& t : frame.trackers) {
            const Vec2 q = t.position + t.velocity * s.t;
            worst = std::min(worst,
                             (s.position - q).norm() - (robot_radius + t.radius_estimate));
        }
    }
    return worst;
}

bool samples_identical(const Trajectory& a, const Trajectory& b) {
    if (a.samples.size() != b.samples.size()) return false;
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        if (a.samples[i].position.x != b.samples[i].position.x ||
            a.samples[i].position.y != b.samples[i].position.y ||
            a.samples[i].velocity.x != b.samples[i].velocity.x ||
            a.samples[i].velocity.y != b.samples[i].velocity.y) {
            return false;
        }
    }
    return true;
}

PerceptionFrame frame_of(const World& w, Vec2 eye, double depth) {
    PerceptionFrame frame = PerceptionFrame::make(w.spec.width_m, w.spec.height_m);
    FieldOfView fov;
    fov.center = eye;
    fov.heading = 0.0;
    fov.angular_width = kTwoPi;
    fov.depth = depth;
    sense_into(frame, w, fov);
    return frame;
}

}  // namespace

TEST_CASE("open-field plan arrives near the straight-line optimum") {
    // Point-mass oracle: ramp to cruise then hold gives d / v_c + v_c / (2a).
    // d = 20 m, v_c = 4, a = 4  ->  5.5 s; the plan must land within 20%.
    const PerceptionFrame frame = bare_frame();
    const RobotState state = rest_at({10, 25});
    const Vec2 goal{30, 25};
    RobotConfig cfg;

    GlobalPrimitivePlanner planner;
    const PlanOutcome out = planner.plan(frame, state, goal, cfg);
    REQUIRE(out.kind == PlanKind::Trajectory);
    REQUIRE_FALSE(out.trajectory.empty());

    const double oracle = 20.0 / cfg.v_cruise + cfg.v_cruise / (2.0 * cfg.a_max);
    CHECK_LE((out.trajectory.samples.back().position - goal).norm(), kGoalTolerance);
    CHECK_LE(out.trajectory.horizon, 1.2 * oracle);
    CHECK_GE(out.trajectory.horizon, 0.8 * oracle);
    CHECK_LE(max_speed(out.trajectory), cfg.v_cruise + 1e-9);
    CHECK_LE(max_accel(out.trajectory), cfg.a_max + 1e-9);
}

TEST_CASE("goal at the current position yields a zero-length plan") {
    const PerceptionFrame frame = bare_frame();
    RobotState state = rest_at({25, 25});
    state.velocity = {0.5, 0.0};
    RobotConfig cfg;

    for (const char* planner_id : {"global-primitive", "local-primitive"}) {
        auto planner = make_planner(planner_id);
        const PlanOutcome out = planner->plan(frame, state, state.position, cfg);
        CHECK(out.kind == PlanKind::Trajectory);
        CHECK_EQ(out.trajectory.samples.size(), 1);
        CHECK_EQ(out.trajectory.horizon, 0.0);
        CHECK_EQ(out.trajectory.samples[0].position.x, state.position.x);
        CHECK_EQ(out.trajectory.samples[0].position.y, state.position.y);
    }
}

TEST_CASE("a wall with a too-narrow gap forces a brake decision") {
    // Occupied column at x ~ 30 spanning the full height except a 1.5 m slot,
    // narrower than the 2 m robot diameter: no lattice path can exist.
    PerceptionFrame frame = bare_frame();
    OccupancyGrid& g = frame.grid;
    const int wall_ix = g.cell_x(30.0);
    for (int iy = 0; iy < g.ny; ++iy) {
        if (iy >= 49 && iy <= 51) continue;  // slot y in [24.5, 26.0)
        g.cells[g.index(wall_ix, iy)] = CellState::Occupied;
    }

    const RobotState state = rest_at({25, 25});
    RobotConfig cfg;
    GlobalPrimitivePlanner planner;
    const PlanOutcome out = planner.plan(frame, state, {35, 25}, cfg);
    CHECK(out.kind == PlanKind::Brake);
    REQUIRE_FALSE(out.trajectory.empty());
    CHECK_EQ(out.trajectory.samples.back().velocity.norm(), 0.0);
}

TEST_CASE("an unavoidable head-on charge forces a brake") {
    // Reachable-set oracle: from rest the robot's position at time t lies
    // within 0.5 * a_max * t^2 of its start, for every control sequence.
    // The charging disc's center crosses the start point, so at that instant
    // every reachable position is deep inside the disc: no feasible plan.
    RobotConfig cfg;
    const Vec2 start{25, 25};
    const Vec2 obs_pos{28.5, 25};
    const Vec2 obs_vel{-8, 0};
    const double obs_r = 1.0;

    bool provably_infeasible = false;
    for (double t = 0.0; t <= 2.0; t += 0.01) {
        const double center_dist = (obs_pos + obs_vel * t - start).norm();
        const double reach = 0.5 * cfg.a_max * t * t;
        if (center_dist + reach < cfg.radius + obs_r) provably_infeasible = true;
    }
    REQUIRE(provably_infeasible);

    PerceptionFrame frame = bare_frame();
    add_tracker(frame, 0, obs_pos, obs_vel, obs_r);
    MpcPlanner planner;
    const PlanOutcome out = planner.plan(frame, rest_at(start), {45, 25}, cfg);
    CHECK(out.kind == PlanKind::Brake);
    REQUIRE_FALSE(out.trajectory.empty());
}

TEST_CASE("receding-horizon descent makes progress in the open") {
    const PerceptionFrame frame = bare_frame();
    const RobotState state = rest_at({10, 25});
    const Vec2 goal{30, 25};
    RobotConfig cfg;

    MpcPlanner planner;
    const PlanOutcome out = planner.plan(frame, state, goal, cfg);
    REQUIRE(out.kind == PlanKind::Trajectory);
    const double d0 = (state.position - goal).norm();
    const double d1 = (out.trajectory.samples.back().position - goal).norm();
    CHECK_LT(d1, d0 - 3.0);  // from rest, 2 s at a_max=4 covers >= 6 m
    CHECK_LE(max_accel(out.trajectory), cfg.a_max + 1e-9);
    CHECK_LE(max_speed(out.trajectory), 1.2 * cfg.v_cruise);
}

TEST_CASE("receding-horizon avoidance clears an obstacle on the path") {
    // Obstacle sits on the start->goal line; the initial velocity is a few
    // degrees off that line, so the optimizer has a lateral escape gradient.
    PerceptionFrame frame = bare_frame();
    add_tracker(frame, 0, {16, 26.2}, {0, 0}, 0.5);
    RobotState state = rest_at({10, 25});
    state.velocity = {3, 1};
    RobotConfig cfg;

    MpcPlanner planner;
    const PlanOutcome out = planner.plan(frame, state, {30, 29}, cfg);
    REQUIRE(out.kind == PlanKind::Trajectory);
    CHECK_GE(min_tracker_separation(out.trajectory, frame, cfg.radius), 0.0);
}

TEST_CASE("local plans start exactly from the current state") {
    const PerceptionFrame frame = bare_frame();
    RobotState state = rest_at({25, 25});
    state.velocity = {1.5, -0.5};
    RobotConfig cfg;

    LocalPrimitivePlanner planner;
    const PlanOutcome out = planner.plan(frame, state, {40, 25}, cfg);
    REQUIRE(out.kind == PlanKind::Trajectory);
    const TrajectorySample& s0 = out.trajectory.samples.front();
    CHECK_LE(std::abs(s0.position.x - state.position.x), 1e-9);
    CHECK_LE(std::abs(s0.position.y - state.position.y), 1e-9);
    CHECK_LE(std::abs(s0.velocity.x - state.velocity.x), 1e-9);
    CHECK_LE(std::abs(s0.velocity.y - state.velocity.y), 1e-9);
    CHECK_LE(s0.acceleration.norm(), 1e-9);
}

TEST_CASE("local target choice minimizes endpoint distance among feasible") {
    RobotConfig cfg;
    const Vec2 goal{40, 25};

    SUBCASE("from rest the cruise-ramp ring wins") {
        // Ring distances scale with speed, so from rest the candidates sit
        // at 2 m and 4 m. Hand-checked: rest -> (29,25) with end speed 4 is
        // the consistent ramp (peaks at exactly 4 m/s and 3 m/s^2, within
        // bounds) and minimizes endpoint distance to the goal; the 2 m ring
        // ends 2 m farther out.
        const PerceptionFrame frame = bare_frame();
        LocalPrimitivePlanner planner;
        const PlanOutcome out = planner.plan(frame, rest_at({25, 25}), goal, cfg);
        REQUIRE(out.kind == PlanKind::Trajectory);
        const Vec2 end = out.trajectory.samples.back().position;
        CHECK_LE(std::abs(end.x - 29.0), 1e-6);
        CHECK_LE(std::abs(end.y - 25.0), 1e-6);
    }

    SUBCASE("at cruise the far ring is a straight coast") {
        const PerceptionFrame frame = bare_frame();
        RobotState state = rest_at({25, 25});
        state.velocity = {4, 0};
        LocalPrimitivePlanner planner;
        const PlanOutcome out = planner.plan(frame, state, goal, cfg);
        REQUIRE(out.kind == PlanKind::Trajectory);
        const Vec2 end = out.trajectory.samples.back().position;
        CHECK_LE(std::abs(end.x - 33.0), 1e-6);
        CHECK_LE(std::abs(end.y - 25.0), 1e-6);
    }
}

TEST_CASE("local planner brakes when every target is covered") {
    PerceptionFrame frame = bare_frame();
    const Vec2 center{25, 25};
    for (int i = 0; i < 8; ++i) {
        const double theta = i * (kTwoPi / 8.0);
        add_tracker(frame, i, center + from_polar(4.0, theta), {0, 0}, 1.1);
    }
    RobotConfig cfg;
    LocalPrimitivePlanner planner;
    const PlanOutcome out = planner.plan(frame, rest_at(center), {45, 25}, cfg);
    CHECK(out.kind == PlanKind::Brake);
    REQUIRE_FALSE(out.trajectory.empty());
    CHECK_EQ(out.trajectory.samples.back().velocity.norm(), 0.0);
}

TEST_CASE("planned motion respects dynamic bounds and predicted clearance") {
    DatasetIParams params;
    params.seeds_per_cell = 1;
    RobotConfig cfg;

    int planned = 0;
    for (std::uint64_t base = 0; base < 6; ++base) {
        MapSpec spec = generate_dataset_I(params, base)[13];  // n=20, r=1, v=4
        const World w = expand(spec);
        const PerceptionFrame frame = frame_of(w, {25, 25}, 12.0);

        for (const char* planner_id :
             {"global-primitive", "mpc", "local-primitive"}) {
            auto planner = make_planner(planner_id);
            const PlanOutcome out =
                planner->plan(frame, rest_at({25, 25}), {45, 45}, cfg);
            REQUIRE_FALSE(out.trajectory.empty());
            CHECK_LE(max_accel(out.trajectory), cfg.a_max + 1e-9);
            if (out.kind == PlanKind::Trajectory) {
                ++planned;
                CHECK_GE(min_tracker_separation(out.trajectory, frame, cfg.radius),
                         0.0);
            }
        }
    }
    CHECK_GT(planned, 6);  // most scenes should admit a plan
}

TEST_CASE("planning is deterministic for identical inputs") {
    DatasetIParams params;
    params.seeds_per_cell = 1;
    const MapSpec spec = generate_dataset_I(params, 7)[13];
    const World w = expand(spec);
    const PerceptionFrame frame = frame_of(w, {25, 25}, 12.0);
    const RobotState state = rest_at({25, 25});
    RobotConfig cfg;

    for (const char* planner_id : {"global-primitive", "mpc", "local-primitive"}) {
        auto a = make_planner(planner_id);
        auto b = make_planner(planner_id);
        const PlanOutcome oa = a->plan(frame, state, {45, 45}, cfg);
        const PlanOutcome ob = b->plan(frame, state, {45, 45}, cfg);
        CHECK(oa.kind == ob.kind);
        CHECK(samples_identical(oa.trajectory, ob.trajectory));

        a->reset();
        const PlanOutcome oc = a->plan(frame, state, {45, 45}, cfg);
        CHECK(samples_identical(oa.trajectory, oc.trajectory));
    }
}

TEST_CASE("brake outcomes decelerate to a full stop") {
    RobotState state = rest_at({25, 25});
    state.velocity = {3, -2};
    RobotConfig cfg;
    const PlanOutcome out = make_brake_outcome(state, cfg);
    CHECK(out.kind == PlanKind::Brake);
    const Trajectory& t = out.trajectory;
    REQUIRE_FALSE(t.empty());
    CHECK_EQ(t.samples.front().position.x, state.position.x);
    CHECK_EQ(t.samples.front().velocity.y, state.velocity.y);
    CHECK_EQ(t.samples.back().velocity.norm(), 0.0);
    CHECK_LE(max_accel(t), cfg.a_max + 1e-9);
    // stop time = |v| / a_max, rounded up to the tick
    const double t_stop = state.velocity.norm() / cfg.a_max;
    CHECK_LE(std::abs(t.horizon - kDt * std::ceil(t_stop / kDt - 1e-9)), 1e-9);
    // Clamped lookup past the horizon holds the resting sample.
    CHECK_EQ(t.at_time(10.0).velocity.norm(), 0.0);
}

TEST_CASE("factories resolve ids and reject unknown names") {
    for (const char* planner_id : {"global-primitive", "mpc", "local-primitive"}) {
        CHECK_EQ(std::string(make_planner(planner_id)->id()), planner_id);
    }
    CHECK_THROWS_AS((void)make_planner("dijkstra"), std::invalid_argument);

    for (const char* g :
         {"full-range", "look-ahead", "look-goal", "rotating", "finean", "owl"}) {
        CHECK_EQ(std::string(gaze_id(gaze_from_id(g))), g);
    }
    CHECK_THROWS_AS((void)gaze_from_id("stare"), std::invalid_argument);
    CHECK(gaze_uses_full_circle(GazePolicy::FullRange));
    CHECK_FALSE(gaze_uses_full_circle(GazePolicy::Owl));
}

TEST_CASE("gaze commands saturate at the yaw-rate limit") {
    const PerceptionFrame frame = bare_frame();
    RobotConfig cfg;
    Trajectory traj;

    Rng rng(99);
    for (int trial = 0; trial < 40; ++trial) {
        RobotState state;
        state.position = {rng.uniform(5, 45), rng.uniform(5, 45)};
        state.velocity = {rng.uniform(-4, 4), rng.uniform(-4, 4)};
        state.heading = rng.uniform(-kPi, kPi);
        const Vec2 goal{rng.uniform(5, 45), rng.uniform(5, 45)};
        for (GazePolicy p : {GazePolicy::FullRange, GazePolicy::LookAhead,
                             GazePolicy::LookGoal, GazePolicy::Rotating,
                             GazePolicy::Finean, GazePolicy::Owl}) {
            const double yaw = plan_gaze(p, frame, state, traj, goal, cfg);
            CHECK_LE(std::abs(yaw), cfg.yaw_rate_max + 1e-12);
        }
        CHECK_EQ(plan_gaze(GazePolicy::Rotating, frame, state, traj, goal, cfg),
                 cfg.yaw_rate_max);
        CHECK_EQ(plan_gaze(GazePolicy::FullRange, frame, state, traj, goal, cfg),
                 0.0);
    }
}

TEST_CASE("goal-directed gaze is proportional below saturation") {
    const PerceptionFrame frame = bare_frame();
    RobotConfig cfg;
    Trajectory traj;
    RobotState state = rest_at({25, 25});
    const Vec2 goal{35, 25};  // bearing 0

    state.heading = 0.0;
    CHECK_EQ(plan_gaze(GazePolicy::LookGoal, frame, state, traj, goal, cfg), 0.0);
    state.heading = -0.1;  // error +0.1 -> gain 5 -> 0.5
    CHECK_LE(std::abs(plan_gaze(GazePolicy::LookGoal, frame, state, traj, goal, cfg) -
                      0.5),
             1e-12);
    state.heading = -1.0;  // would be 5.0, clamps
    CHECK_EQ(plan_gaze(GazePolicy::LookGoal, frame, state, traj, goal, cfg),
             cfg.yaw_rate_max);
}

TEST_CASE("velocity-directed gaze follows the motion bearing") {
    const PerceptionFrame frame = bare_frame();
    RobotConfig cfg;
    Trajectory traj;
    RobotState state = rest_at({25, 25});
    const Vec2 goal{45, 45};

    state.velocity = {0, 2};  // bearing pi/2, heading 0 -> saturates upward
    CHECK_EQ(plan_gaze(GazePolicy::LookAhead, frame, state, traj, goal, cfg),
             cfg.yaw_rate_max);
    state.velocity = {0, 0};  // no motion: hold heading
    CHECK_EQ(plan_gaze(GazePolicy::LookAhead, frame, state, traj, goal, cfg), 0.0);
}

TEST_CASE("exploration gaze is pulled toward stale sectors") {
    // Refresh the whole neighborhood except a sector near bearing pi/4.
    // The trajectory term alone would hold heading 0; the stale term makes
    // the 45-degree sector win, so the command saturates counterclockwise.
    RobotConfig cfg;
    const Vec2 eye{25, 25};
    RobotState state = rest_at(eye);
    Trajectory traj;  // empty: look-ahead term falls back to the heading

    PerceptionFrame frame = bare_frame();
    frame.time = 40.0;
    OccupancyGrid& g = frame.grid;
    for (int iy = 0; iy < g.ny; ++iy) {
        for (int ix = 0; ix < g.nx; ++ix) {
            const Vec2 d = g.center_of(ix, iy) - eye;
            const double bearing = std::atan2(d.y, d.x);
            const bool keep_stale = bearing > kPi / 8 && bearing < 3 * kPi / 8;
            g.last_update[g.index(ix, iy)] = keep_stale ? 0.0 : frame.time;
        }
    }

    const double yaw =
        plan_gaze(GazePolicy::Finean, frame, state, traj, {45, 25}, cfg);
    CHECK_EQ(yaw, cfg.yaw_rate_max);

    // Mirrored staleness pulls clockwise instead.
    for (int iy = 0; iy < g.ny; ++iy) {
        for (int ix = 0; ix < g.nx; ++ix) {
            const Vec2 d = g.center_of(ix, iy) - eye;
            const double bearing = std::atan2(d.y, d.x);
            const bool keep_stale = bearing < -kPi / 8 && bearing > -3 * kPi / 8;
            g.last_update[g.index(ix, iy)] = keep_stale ? 0.0 : frame.time;
        }
    }
    const double yaw2 =
        plan_gaze(GazePolicy::Finean, frame, state, traj, {45, 25}, cfg);
    CHECK_EQ(yaw2, -cfg.yaw_rate_max);
}

TEST_CASE("composite gaze tracks an agreeing target cluster") {
    // Velocity, goal, and the lone tracked obstacle all point at bearing
    // pi/2; heading 0 must be steered counterclockwise at the limit.
    RobotConfig cfg;
    RobotState state = rest_at({25, 25});
    state.velocity = {0, 3};
    Trajectory traj;
    PerceptionFrame frame = bare_frame();
    add_tracker(frame, 0, {25, 31}, {0, 0}, 1.0);

    const double yaw =
        plan_gaze(GazePolicy::Owl, frame, state, traj, {25, 45}, cfg);
    CHECK_EQ(yaw, cfg.yaw_rate_max);
}
