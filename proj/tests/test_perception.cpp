#include <doctest.h>

#include <cmath>

#include "dynobench/perception.hpp"
#include "dynobench/world.hpp"

using namespace dynobench;

namespace {

World bare_world(double w = 50.0, double h = 50.0) {
    World world;
    world.spec.id = "perception-test";
    world.spec.width_m = w;
    world.spec.height_m = h;
    world.spec.profile = MotionProfile::cvm();
    world.spec.dataset_tag = DatasetTag::Custom;
    return world;
}

void add_obstacle(World& world, int id, Vec2 p, Vec2 v, double r) {
    Obstacle ob;
    ob.id = id;
    ob.position = p;
    ob.velocity = v;
    ob.radius = r;
    ob.profile = MotionProfile::cvm();
    world.obstacles.push_back(ob);
    world.spec.n_obs = static_cast<int>(world.obstacles.size());
}

FieldOfView fov_at(Vec2 center, double heading, double width, double depth = 8.0) {
    FieldOfView fov;
    fov.center = center;
    fov.heading = heading;
    fov.angular_width = width;
    fov.depth = depth;
    return fov;
}

}  // namespace

TEST_CASE("full-circle sensing snaps a nearby obstacle to ground truth") {
    World world = bare_world();
    add_obstacle(world, 0, {30, 25}, {1, 1}, 1.0);
    PerceptionFrame frame = PerceptionFrame::make(50, 50);
    sense_into(frame, world, fov_at({25, 25}, 0.0, kTwoPi));

    REQUIRE_EQ(frame.trackers.size(), 1);
    const TrackedObstacle& t = frame.trackers[0];
    CHECK(t.visible_now);
    CHECK_EQ(t.position.x, 30.0);
    CHECK_EQ(t.position.y, 25.0);
    CHECK_EQ(t.velocity.x, 1.0);
    CHECK_EQ(t.velocity.y, 1.0);
    CHECK_EQ(t.radius_estimate, 1.0);
    CHECK_EQ(t.covariance[0], 1e-6);
    CHECK_EQ(t.covariance[1], 0.0);
}

TEST_CASE("an obstacle behind the wedge coasts on its last estimate") {
    World world = bare_world();
    add_obstacle(world, 0, {20, 25}, {0, 0.5}, 1.0);  // due -x of the robot

    PerceptionFrame frame = PerceptionFrame::make(50, 50);
    sense_into(frame, world, fov_at({25, 25}, 0.0, kTwoPi));
    REQUIRE_EQ(frame.trackers.size(), 1);
    REQUIRE(frame.trackers[0].visible_now);
    const Vec2 seen_at = frame.trackers[0].position;

    // Narrow the wedge to face +x; the obstacle sits at bearing 180 degrees.
    advance(world, kDt);
    sense_into(frame, world, fov_at({25, 25}, 0.0, kPi / 2.0));
    REQUIRE_EQ(frame.trackers.size(), 1);
    const TrackedObstacle& t = frame.trackers[0];
    CHECK_FALSE(t.visible_now);
    CHECK_EQ(doctest::Approx(seen_at.x + 0.0 * kDt).epsilon(1e-12), t.position.x);
    CHECK_EQ(doctest::Approx(seen_at.y + 0.5 * kDt).epsilon(1e-12), t.position.y);
    CHECK_GT(t.covariance[0], 1e-6);  // covariance grew while unseen
}

TEST_CASE("depth cutoff hides far obstacles and bounds the swept cells") {
    World world = bare_world();
    add_obstacle(world, 0, {25 + 9.5, 25}, {0, 0}, 1.0);  // surface at 8.5 m
    PerceptionFrame frame = PerceptionFrame::make(50, 50);
    sense_into(frame, world, fov_at({25, 25}, 0.0, kTwoPi));
    CHECK(frame.trackers.empty());

    // Cells along +x: explored up to 8 m, unexplored beyond.
    const OccupancyGrid& g = frame.grid;
    CHECK(g.at(g.cell_x(25 + 7.7), g.cell_y(25.0)) == CellState::Unoccupied);
    CHECK(g.at(g.cell_x(25 + 8.3), g.cell_y(25.0)) == CellState::Unexplored);
}

TEST_CASE("coasting matches straight-line extrapolation") {
    TrackedObstacle t;
    t.id = 0;
    t.position = {0, 0};
    t.velocity = {1, 0};
    t.covariance = {};
    const TrackedObstacle one = kf_predict(t, 1.0);
    CHECK_EQ(one.position.x, 1.0);
    CHECK_EQ(one.position.y, 0.0);
    CHECK_EQ(one.velocity.x, 1.0);

    // Ten short coasts land on the same mean as one long coast.
    TrackedObstacle chained = t;
    for (int i = 0; i < 10; ++i) chained = kf_predict(chained, 0.1);
    CHECK_LE(std::abs(chained.position.x - one.position.x), 1e-12);
    CHECK_LE(std::abs(chained.position.y - one.position.y), 1e-12);
    CHECK_EQ(chained.velocity.x, one.velocity.x);
}

TEST_CASE("coasting strictly inflates covariance") {
    TrackedObstacle t;
    t.covariance = detail::reset_covariance();
    double prev_trace = 4e-6;
    for (int i = 0; i < 50; ++i) {
        t = kf_predict(t, kDt);
        const double trace =
            t.covariance[0] + t.covariance[5] + t.covariance[10] + t.covariance[15];
        CHECK_GT(trace, prev_trace);
        prev_trace = trace;
    }
}

TEST_CASE("narrowing the wedge never reveals more") {
    Rng rng(2024);
    for (int trial = 0; trial < 20; ++trial) {
        World world = bare_world();
        const int n = 4 + static_cast<int>(rng.next_below(5));
        for (int i = 0; i < n; ++i) {
            add_obstacle(world, i,
                         {rng.uniform(5, 45), rng.uniform(5, 45)},
                         {rng.uniform(-2, 2), rng.uniform(-2, 2)},
                         rng.uniform(0.5, 1.5));
        }
        const Vec2 eye{rng.uniform(10, 40), rng.uniform(10, 40)};
        const double heading = rng.uniform(0.0, kTwoPi);

        PerceptionFrame wide = PerceptionFrame::make(50, 50);
        sense_into(wide, world, fov_at(eye, heading, kTwoPi));
        PerceptionFrame narrow = PerceptionFrame::make(50, 50);
        sense_into(narrow, world, fov_at(eye, heading, kPi / 2.0));

        for (const TrackedObstacle& t : narrow.trackers) {
            if (!t.visible_now) continue;
            const TrackedObstacle* w = wide.find(t.id);
            REQUIRE(w != nullptr);
            CHECK(w->visible_now);
            // Ground-truth snap: zero estimate error while visible.
            const Obstacle& truth = world.obstacles[static_cast<std::size_t>(t.id)];
            CHECK_EQ(t.position.x, truth.position.x);
            CHECK_EQ(t.position.y, truth.position.y);
            CHECK_EQ(t.velocity.x, truth.velocity.x);
            CHECK_EQ(t.velocity.y, truth.velocity.y);
        }
    }
}

TEST_CASE("a fresh map is uncovered monotonically") {
    const auto specs = generate_dataset_I(
        [] {
            DatasetIParams p;
            p.n_obs_set = {20};
            p.r_obs_set = {1.0};
            p.v_obs_set = {4.0};
            p.seeds_per_cell = 1;
            return p;
        }(),
        31);
    World world = expand(specs[0]);
    PerceptionFrame frame = PerceptionFrame::make(50, 50);

    std::size_t unexplored = frame.grid.cells.size();
    double heading = 0.0;
    for (int tick = 0; tick < 100; ++tick) {
        advance(world, kDt);
        heading = wrap_angle(heading + 1.4 * kDt);
        sense_into(frame, world, fov_at({25, 25}, heading, kPi / 2.0));
        const std::size_t now = frame.grid.count(CellState::Unexplored);
        CHECK_LE(now, unexplored);
        unexplored = now;
        CHECK_LE(frame.time, world.time);
    }
    CHECK_LT(unexplored, frame.grid.cells.size());
}

TEST_CASE("occlusion keeps hidden cells and hidden obstacles unknown") {
    World world = bare_world();
    add_obstacle(world, 0, {29, 25}, {0, 0}, 1.0);   // 4 m away, blocks +x
    add_obstacle(world, 1, {32, 25}, {0, 0}, 0.8);   // fully shadowed
    PerceptionFrame frame = PerceptionFrame::make(50, 50);
    sense_into(frame, world, fov_at({25, 25}, 0.0, kPi / 2.0));

    REQUIRE_EQ(frame.trackers.size(), 1);
    CHECK_EQ(frame.trackers[0].id, 0);

    const OccupancyGrid& g = frame.grid;
    // Free space before the obstacle, occupied at its near surface, unknown behind.
    CHECK(g.at(g.cell_x(27.0), g.cell_y(25.0)) == CellState::Unoccupied);
    CHECK(g.at(g.cell_x(28.1), g.cell_y(25.0)) == CellState::Occupied);
    CHECK(g.at(g.cell_x(30.5), g.cell_y(25.0)) == CellState::Unexplored);
    // Occluded cells still count as swept for staleness purposes.
    CHECK_EQ(g.last_update[g.index(g.cell_x(30.5), g.cell_y(25.0))], world.time);

    // A partially protruding obstacle behind the first is still spotted.
    World world2 = bare_world();
    add_obstacle(world2, 0, {29, 25}, {0, 0}, 1.0);
    add_obstacle(world2, 1, {31.5, 26.8}, {0, 0}, 1.0);  // edge peeks out
    PerceptionFrame frame2 = PerceptionFrame::make(50, 50);
    sense_into(frame2, world2, fov_at({25, 25}, 0.0, kPi / 2.0));
    CHECK(frame2.find(1) != nullptr);
}

TEST_CASE("wedge classification agrees with a dense-walk oracle") {
    World world = bare_world();
    add_obstacle(world, 0, {30, 27}, {0, 0}, 1.2);
    add_obstacle(world, 1, {28, 22}, {0, 0}, 0.7);
    add_obstacle(world, 2, {33, 25}, {0, 0}, 1.0);

    const FieldOfView fov = fov_at({25, 25}, 0.2, kPi / 2.0);
    PerceptionFrame frame = PerceptionFrame::make(50, 50);
    sense_into(frame, world, fov);
    const OccupancyGrid& g = frame.grid;

    std::size_t checked = 0, agreed = 0;
    for (int iy = 0; iy < g.ny; ++iy) {
        for (int ix = 0; ix < g.nx; ++ix) {
            const Vec2 c = g.center_of(ix, iy);
            const Vec2 d = c - fov.center;
            const double dist = d.norm();
            if (dist > fov.depth || dist < 1e-9) continue;
            if (!fov.contains_angle(std::atan2(d.y, d.x))) continue;

            // Walk the sight line in 1 mm steps; the first sample inside any
            // disc decides the classification.
            CellState expected = CellState::Unoccupied;
            const Vec2 dir = d / dist;
            for (double s = 0.0; s <= dist; s += 1e-3) {
                const Vec2 p = fov.center + dir * s;
                bool inside = false;
                for (const Obstacle& ob : world.obstacles) {
                    if ((p - ob.position).norm_sq() <= ob.radius * ob.radius) {
                        inside = true;
                        break;
                    }
                }
                if (inside) {
                    expected = (g.cell_x(p.x) == ix && g.cell_y(p.y) == iy)
                                   ? CellState::Occupied
                                   : CellState::Unexplored;
                    break;
                }
            }
            ++checked;
            if (g.at(ix, iy) == expected) ++agreed;
        }
    }
    REQUIRE_GT(checked, 150);  // quarter wedge of depth 8 covers ~200 cells
    CHECK_GE(static_cast<double>(agreed) / static_cast<double>(checked), 0.99);
}
