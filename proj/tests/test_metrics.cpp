#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "dynobench/metrics.hpp"
#include "dynobench/world.hpp"

using namespace dynobench;

namespace {

World empty_world(const std::string& id = "empty") {
    World w;
    w.spec.id = id;
    w.spec.width_m = 50.0;
    w.spec.height_m = 50.0;
    w.spec.n_obs = 0;
    w.spec.profile = MotionProfile::cvm();
    w.spec.dataset_tag = DatasetTag::Custom;
    return w;
}

Obstacle disc(int id, Vec2 p, Vec2 v, double r) {
    Obstacle ob;
    ob.id = id;
    ob.position = p;
    ob.velocity = v;
    ob.radius = r;
    ob.profile = MotionProfile::cvm();
    return ob;
}

World with_obstacles(std::vector<Obstacle> obstacles, const std::string& id = "hand") {
    World w = empty_world(id);
    w.spec.n_obs = static_cast<int>(obstacles.size());
    w.obstacles = std::move(obstacles);
    return w;
}

SampleLattice point_lattice(std::vector<Vec2> positions) {
    SampleLattice lat;
    lat.positions = std::move(positions);
    return lat;
}

MapSpec dataset_cell(std::uint64_t base_seed, std::size_t index) {
    DatasetIParams params;
    params.seeds_per_cell = 1;
    return generate_dataset_I(params, base_seed).at(index);
}

/// Dense-time reference: first sampled instant with strict disc penetration.
double brute_survival(const ReplayLog& log, Vec2 p, double t_max,
                      double robot_radius, double step) {
    for (double t = 0.0; t <= t_max + 1e-12; t += step) {
        for (const ObstacleSnapshot& ob : log.at(t)) {
            const double R = ob.radius + robot_radius;
            if ((ob.position - p).norm_sq() < R * R) return t;
        }
    }
    return t_max;
}

int infeasible_count(const ReplayLog& log, Vec2 pos, int n_vel) {
    SampleLattice lat = point_lattice({pos});
    lat.velocity_samples = n_vel;
    const double vo = vo_feasibility(log, lat);
    return static_cast<int>(std::llround((1.0 - vo) * n_vel));
}

}  // namespace

TEST_CASE("obstacle density is the disc-area fraction") {
    CHECK_EQ(obstacle_density(ReplayLog::record(empty_world(), 0.0)), 0.0);

    MapSpec ten;
    ten.id = "ten";
    ten.n_obs = 10;
    ten.size_min = ten.size_max = 0.5;
    ten.speed_min = ten.speed_max = 2.0;
    ten.profile = MotionProfile::cvm();
    ten.seed = 7;
    CHECK_EQ(obstacle_density(ten),
             doctest::Approx(10.0 * kPi * 0.25 / 2500.0).epsilon(1e-12));

    MapSpec thirty = ten;
    thirty.id = "thirty";
    thirty.n_obs = 30;
    thirty.size_min = thirty.size_max = 1.5;
    CHECK_EQ(obstacle_density(thirty),
             doctest::Approx(30.0 * kPi * 2.25 / 2500.0).epsilon(1e-12));
}

TEST_CASE("empty-map traversability matches the square's closed form") {
    // From the center of a 50 m square, four axis rays reach walls at 25 m
    // and four diagonal rays at 25*sqrt(2) m.
    const ReplayLog log = ReplayLog::record(empty_world(), 0.0);
    const double expected = (4.0 * 25.0 + 4.0 * 25.0 * std::sqrt(2.0)) / 8.0;
    CHECK_EQ(traversability(log, point_lattice({{25, 25}})),
             doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("a ray stops at the first disc edge") {
    const ReplayLog log =
        ReplayLog::record(with_obstacles({disc(0, {25, 25}, {0, 0}, 1.0)}), 0.0);
    SampleLattice lat = point_lattice({{23, 25}});
    lat.directions_per_position = 1;  // theta = 0 only: straight at the disc
    CHECK_EQ(traversability(log, lat), doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("a position inside an obstacle contributes zero distance") {
    const ReplayLog log =
        ReplayLog::record(with_obstacles({disc(0, {25, 25}, {0, 0}, 2.0)}), 0.0);
    CHECK_EQ(traversability(log, point_lattice({{25, 25}})), 0.0);
}

TEST_CASE("dynamic traversability averages replayed instants") {
    SUBCASE("one time sample reduces to plain traversability") {
        const MapSpec map = dataset_cell(5, 13);
        SampleLattice lat = make_lattice(50, 50);
        lat.time_samples = 1;
        CHECK_EQ(dynamic_traversability(map, lat), traversability(map, lat));
    }

    SUBCASE("matches naive per-instant recomputation on a moving map") {
        const MapSpec map = dataset_cell(2, 13);
        SampleLattice lat = make_lattice(50, 50);
        lat.time_samples = 5;
        const double combined = dynamic_traversability(map, lat);
        double naive = 0.0;
        for (int j = 0; j < 5; ++j) {
            const World at_tj = replay(map, j * lat.t_sample);
            naive += traversability(ReplayLog::record(at_tj, 0.0), lat);
        }
        CHECK_EQ(combined, doctest::Approx(naive / 5.0).epsilon(1e-12));
    }

    SUBCASE("time-invariant for a static map") {
        MapSpec map = dataset_cell(4, 13);
        map.speed_min = map.speed_max = 0.0;
        const SampleLattice lat = make_lattice(50, 50);
        CHECK_EQ(dynamic_traversability(map, lat),
                 doctest::Approx(traversability(map, lat)).epsilon(1e-12));
    }
}

TEST_CASE("velocity-obstacle feasibility counts cone-free directions") {
    SUBCASE("four samples against one static disc leave three free") {
        // Disc 6 m ahead, combined radius 2 m: the cone half-angle is
        // asin(1/3) (~19.5 deg), so of the four compass velocities only the
        // one aimed straight at the disc is blocked.
        const ReplayLog log =
            ReplayLog::record(with_obstacles({disc(0, {31, 25}, {0, 0}, 1.0)}), 0.0);
        SampleLattice lat = point_lattice({{25, 25}});
        lat.velocity_samples = 4;
        CHECK_EQ(vo_feasibility(log, lat), 0.75);
    }

    SUBCASE("distance does not widen feasibility for a dead-on aim") {
        const ReplayLog log =
            ReplayLog::record(with_obstacles({disc(0, {45, 25}, {0, 0}, 1.0)}), 0.0);
        SampleLattice lat = point_lattice({{25, 25}});
        lat.velocity_samples = 4;
        CHECK_EQ(vo_feasibility(log, lat), 0.75);
    }

    SUBCASE("an empty map blocks nothing") {
        const ReplayLog log = ReplayLog::record(empty_world(), 0.0);
        CHECK_EQ(vo_feasibility(log, point_lattice({{25, 25}})), 1.0);
    }

    SUBCASE("a position swallowed by an inflated disc has no free velocity") {
        const ReplayLog log =
            ReplayLog::record(with_obstacles({disc(0, {25.5, 25}, {0, 0}, 1.0)}), 0.0);
        CHECK_EQ(vo_feasibility(log, point_lattice({{25, 25}})), 0.0);
    }
}

TEST_CASE("velocity-obstacle feasibility is translation invariant") {
    const Vec2 shift{6.3, 7.9};
    std::vector<Obstacle> base = {disc(0, {26, 20}, {-1, 2}, 1.5),
                                  disc(1, {15, 24}, {2, -1}, 0.8),
                                  disc(2, {22, 13}, {0, 3}, 1.2)};
    std::vector<Obstacle> moved = base;
    for (Obstacle& ob : moved) ob.position += shift;

    SampleLattice lat_a = point_lattice({{20, 20}});
    SampleLattice lat_b = point_lattice({Vec2{20, 20} + shift});
    lat_a.velocity_samples = lat_b.velocity_samples = 64;

    const double a = vo_feasibility(ReplayLog::record(with_obstacles(base), 0.0), lat_a);
    const double b =
        vo_feasibility(ReplayLog::record(with_obstacles(moved), 0.0), lat_b);
    CHECK_EQ(a, b);
}

TEST_CASE("the blocked arc is stable under sideways obstacle motion") {
    // One disc 6 m along +x with combined radius 2 m blocks an arc of
    // exactly 2*asin(1/3) of the sampled speed circle. Giving the obstacle a
    // velocity perpendicular to the line of sight slides that arc around the
    // circle without changing its width, so at 1-degree sampling the blocked
    // count may shift by at most one sample.
    const Vec2 pos{25, 25};
    const int n_vel = 360;
    std::vector<int> counts;
    for (double vy : {0.0, 1.0, 1.5, -2.5, 3.0}) {
        const ReplayLog log = ReplayLog::record(
            with_obstacles({disc(0, {31, 25}, {0, vy}, 1.0)}), 0.0);
        counts.push_back(infeasible_count(log, pos, n_vel));
    }
    for (std::size_t i = 1; i < counts.size(); ++i) {
        CHECK_LE(std::abs(counts[i] - counts[0]), 1);
    }
    // And the absolute width pins to the closed-form arc.
    const double arc = 2.0 * std::asin(1.0 / 3.0);
    CHECK_LE(std::abs(counts[0] - arc / (kTwoPi / n_vel)), 1.0);
}

TEST_CASE("survivability averages exact contact times") {
    SUBCASE("one doomed and one safe sample average the worked value") {
        // Disc of radius 1 charges the first sample head-on at 4 m/s from
        // 10 m away: contact when the 2 m combined radius is reached, at
        // t = 2 s. The second sample is 15 m off the disc's track and
        // survives the full 3 s cap: mean (3 + 2) / 2 = 2.5.
        const World w = with_obstacles({disc(0, {35, 25}, {-4, 0}, 1.0)});
        const ReplayLog log = ReplayLog::record(w, 3.0);
        const SampleLattice lat = point_lattice({{25, 25}, {12.5, 40}});
        CHECK_EQ(survivability(log, lat, 3.0, 1.0),
                 doctest::Approx(2.5).epsilon(1e-9));
    }

    SUBCASE("an empty map survives to the cap everywhere") {
        const ReplayLog log = ReplayLog::record(empty_world(), 20.0);
        CHECK_EQ(survivability(log, make_lattice(50, 50), 20.0, 1.0), 20.0);
    }

    SUBCASE("a head-on charge hits at the closed-form instant") {
        const World w = with_obstacles({disc(0, {10, 25}, {3, 0}, 0.8)});
        const ReplayLog log = ReplayLog::record(w, 10.0);
        const SampleLattice lat = point_lattice({{23.5, 25}});
        // Gap (13.5 - 0.8 - 1.0) m closed at 3 m/s.
        CHECK_EQ(survivability(log, lat, 10.0, 1.0),
                 doctest::Approx(11.7 / 3.0).epsilon(1e-9));
    }

    SUBCASE("a sample starting inside an obstacle dies immediately") {
        const World w = with_obstacles({disc(0, {25.4, 25}, {1, 0}, 1.0)});
        const ReplayLog log = ReplayLog::record(w, 2.0);
        CHECK_EQ(survivability(log, point_lattice({{25, 25}}), 2.0, 1.0), 0.0);
    }

    SUBCASE("a non-positive cap is rejected") {
        const ReplayLog log = ReplayLog::record(empty_world(), 0.0);
        CHECK_THROWS_AS(survivability(log, make_lattice(50, 50), 0.0, 1.0),
                        std::invalid_argument);
    }
}

TEST_CASE("global survivability is the worst case across simultaneous robots") {
    SUBCASE("empty map reaches the cap") {
        const ReplayLog log = ReplayLog::record(empty_world(), 29.0);
        CHECK_EQ(global_survivability(log, make_lattice(50, 50), 20.0, 1.0), 20.0);
    }

    SUBCASE("a single position and start reduces to survivability") {
        const World w = with_obstacles({disc(0, {35, 25}, {-4, 0}, 1.0)});
        const ReplayLog log = ReplayLog::record(w, 5.0);
        SampleLattice lat = point_lattice({{25, 25}});
        lat.start_time_samples = 1;
        CHECK_EQ(global_survivability(log, lat, 5.0, 1.0),
                 survivability(log, lat, 5.0, 1.0));
    }

    SUBCASE("one early death dominates the minimum") {
        // The first sample is hit at 1 s; the others never are.
        const World w = with_obstacles({disc(0, {29, 25}, {-2, 0}, 1.0)});
        const ReplayLog log = ReplayLog::record(w, 6.0);
        SampleLattice lat = point_lattice({{25, 25}, {12.5, 40}, {40, 12.5}});
        lat.start_time_samples = 1;
        CHECK_EQ(global_survivability(log, lat, 6.0, 1.0),
                 doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("the contact scan agrees with dense-time brute force") {
    const SampleLattice lat = make_lattice(50, 50);
    const double t_max = 5.0;
    for (std::uint64_t base = 0; base < 20; ++base) {
        const MapSpec map = dataset_cell(base, 13);  // 20 discs, r = 1, 4 m/s
        const ReplayLog log = ReplayLog::record(map, t_max);
        for (const Vec2& p : lat.positions) {
            const double scan = detail::survival_from(log, p, 0.0, t_max, 1.0);
            const double brute = brute_survival(log, p, t_max, 1.0, kDt / 10.0);
            CHECK_LE(scan, brute + 1e-9);
            CHECK_LE(brute - scan, kDt);
        }
    }
}

TEST_CASE("adding an obstacle never makes a map read easier") {
    const SampleLattice lat = make_lattice(50, 50);
    const double t_max = 6.0;
    const double span = metric_replay_span(lat, t_max);
    for (std::uint64_t idx : {0u, 7u, 13u, 20u, 26u}) {
        const World before = expand(dataset_cell(3, idx));
        World after = before;
        after.obstacles.push_back(disc(static_cast<int>(after.obstacles.size()),
                                       {17.3, 8.9}, from_polar(3.0, 2.1), 1.2));
        const ReplayLog log_a = ReplayLog::record(before, span);
        const ReplayLog log_b = ReplayLog::record(after, span);

        CHECK_GE(obstacle_density(log_b), obstacle_density(log_a));
        CHECK_LE(traversability(log_b, lat), traversability(log_a, lat) + 1e-12);
        CHECK_LE(dynamic_traversability(log_b, lat),
                 dynamic_traversability(log_a, lat) + 1e-12);
        CHECK_LE(vo_feasibility(log_b, lat), vo_feasibility(log_a, lat) + 1e-12);
        CHECK_LE(survivability(log_b, lat, t_max, 1.0),
                 survivability(log_a, lat, t_max, 1.0) + 1e-12);
        CHECK_LE(global_survivability(log_b, lat, t_max, 1.0),
                 global_survivability(log_a, lat, t_max, 1.0) + 1e-12);

        // With a single shared start, the simultaneous worst case can never
        // beat the per-position average.
        SampleLattice one_start = lat;
        one_start.start_time_samples = 1;
        CHECK_LE(global_survivability(log_b, one_start, t_max, 1.0),
                 survivability(log_b, one_start, t_max, 1.0) + 1e-12);
    }
}

TEST_CASE("a frozen map reduces to the time-invariant forms") {
    MapSpec map = dataset_cell(11, 22);  // 30 discs before freezing
    map.speed_min = map.speed_max = 0.0;
    const World w = expand(map);
    const SampleLattice lat = make_lattice(50, 50);
    const ReplayLog log = ReplayLog::record(w, metric_replay_span(lat, 20.0));

    CHECK_EQ(dynamic_traversability(log, lat),
             doctest::Approx(traversability(log, lat)).epsilon(1e-12));

    // Samples either start inside an inflated disc (die at 0) or are never
    // reached: the mean is t_max scaled by the count of safe positions.
    int dead = 0;
    for (const Vec2& p : lat.positions) {
        for (const Obstacle& ob : w.obstacles) {
            if ((p - ob.position).norm() < ob.radius + 1.0) {
                ++dead;
                break;
            }
        }
    }
    const double expected =
        20.0 * static_cast<double>(lat.positions.size() - dead) /
        static_cast<double>(lat.positions.size());
    CHECK_EQ(survivability(log, lat, 20.0, 1.0),
             doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("preprocessing rescales onto the ten-point difficulty scale") {
    auto report = [](const std::string& id, const std::string& metric, double v) {
        MetricReport r;
        r.map_id = id;
        r.raw[metric] = v;
        return r;
    };

    SUBCASE("already-scaled values pass through unreversed") {
        std::vector<MetricReport> reports = {report("a", "obstacle_density", 0.0),
                                             report("b", "obstacle_density", 5.0),
                                             report("c", "obstacle_density", 10.0)};
        preprocess(reports);
        CHECK_EQ(reports[0].preprocessed["obstacle_density"], 0.0);
        CHECK_EQ(reports[1].preprocessed["obstacle_density"], 5.0);
        CHECK_EQ(reports[2].preprocessed["obstacle_density"], 10.0);
    }

    SUBCASE("reversed metrics are reflected") {
        std::vector<MetricReport> reports = {report("a", "traversability", 0.0),
                                             report("b", "traversability", 5.0),
                                             report("c", "traversability", 10.0)};
        preprocess(reports);
        CHECK_EQ(reports[0].preprocessed["traversability"], 10.0);
        CHECK_EQ(reports[1].preprocessed["traversability"], 5.0);
        CHECK_EQ(reports[2].preprocessed["traversability"], 0.0);
    }

    SUBCASE("a two-point reversed set maps onto the scale ends") {
        std::vector<MetricReport> reports = {report("a", "survivability", 2.0),
                                             report("b", "survivability", 4.0)};
        preprocess(reports);
        CHECK_EQ(reports[0].preprocessed["survivability"], 10.0);
        CHECK_EQ(reports[1].preprocessed["survivability"], 0.0);
    }

    SUBCASE("identical values degenerate to zero and are flagged") {
        std::vector<MetricReport> reports = {report("a", "vo_feasibility", 0.7),
                                             report("b", "vo_feasibility", 0.7)};
        const Normalization norm = preprocess(reports);
        CHECK(norm.degenerate("vo_feasibility"));
        CHECK_EQ(reports[0].preprocessed["vo_feasibility"], 0.0);
        CHECK_EQ(reports[1].preprocessed["vo_feasibility"], 0.0);
    }

    SUBCASE("held-out projections clamp into range and round-trip JSON") {
        std::vector<MetricReport> reports = {report("a", "obstacle_density", 0.0),
                                             report("b", "obstacle_density", 10.0)};
        const Normalization norm = preprocess(reports);
        CHECK_EQ(norm.project("obstacle_density", 12.0), 10.0);
        CHECK_EQ(norm.project("obstacle_density", -3.0), 0.0);
        CHECK_THROWS_AS(norm.project("no_such_metric", 1.0), std::out_of_range);

        const Normalization back = Normalization::from_json(norm.to_json());
        CHECK_EQ(back.project("obstacle_density", 7.0), 7.0);
        CHECK_FALSE(back.degenerate("obstacle_density"));
    }
}

TEST_CASE("metric reports serialize with the pinned header and order") {
    MetricReport m1, m2;
    m1.map_id = "m1";
    m1.raw = {{"obstacle_density", 0.1},      {"traversability", 30.0},
              {"dynamic_traversability", 25.0}, {"vo_feasibility", 0.8},
              {"survivability", 15.0},          {"global_survivability", 10.0}};
    m2.map_id = "m2";
    m2.raw = {{"obstacle_density", 0.3},      {"traversability", 20.0},
              {"dynamic_traversability", 15.0}, {"vo_feasibility", 0.5},
              {"survivability", 5.0},           {"global_survivability", 2.0}};
    std::vector<MetricReport> reports = {m1, m2};
    preprocess(reports);

    std::ostringstream out;
    write_metrics_csv(out, reports);
    std::istringstream lines(out.str());
    std::string line;
    REQUIRE(std::getline(lines, line));
    CHECK_EQ(line, "map_id,metric,raw,preprocessed");
    REQUIRE(std::getline(lines, line));
    CHECK_EQ(line, "m1,obstacle_density,0.1,0");
    REQUIRE(std::getline(lines, line));
    CHECK_EQ(line, "m1,traversability,30,0");

    int rows = 2;
    while (std::getline(lines, line)) {
        if (!line.empty()) ++rows;
    }
    CHECK_EQ(rows, 12);

    std::istringstream in(out.str());
    const std::vector<MetricReport> parsed = read_metrics_csv(in);
    REQUIRE_EQ(parsed.size(), 2);
    CHECK_EQ(parsed[0].map_id, "m1");
    CHECK_EQ(parsed[0].raw.at("vo_feasibility"), 0.8);
    CHECK_EQ(parsed[1].preprocessed.at("traversability"), 10.0);
    CHECK_EQ(parsed[1].raw.at("global_survivability"), 2.0);
}

TEST_CASE("replay logs record, interpolate, and round-trip through CSV") {
    const World w = with_obstacles(
        {disc(0, {10, 10}, {2, 1}, 1.0), disc(1, {30, 40}, {-1, -2}, 0.5)});
    const ReplayLog log = ReplayLog::record(w, 0.5);
    REQUIRE_EQ(log.frames().size(), 11);
    CHECK_EQ(log.duration(), doctest::Approx(0.5).epsilon(1e-12));

    SUBCASE("mid-tick queries interpolate linearly") {
        const auto half = log.at(0.025);
        const Vec2 p0 = log.frames()[0].obstacles[0].position;
        const Vec2 p1 = log.frames()[1].obstacles[0].position;
        CHECK_LE((half[0].position - (p0 + p1) * 0.5).norm(), 1e-12);
        // Outside the span, queries clamp to the nearest frame.
        CHECK_EQ(log.at(99.0)[1].position.x, log.frames().back().obstacles[1].position.x);
    }

    SUBCASE("CSV round-trip preserves poses and recovers velocities") {
        std::istringstream in(log.to_csv());
        const ReplayLog back = ReplayLog::parse_csv(in);
        REQUIRE_EQ(back.frames().size(), log.frames().size());
        for (std::size_t k = 0; k < log.frames().size(); ++k) {
            for (std::size_t o = 0; o < 2; ++o) {
                const ObstacleSnapshot& a = log.frames()[k].obstacles[o];
                const ObstacleSnapshot& b = back.frames()[k].obstacles[o];
                CHECK_EQ(a.id, b.id);
                CHECK_LE((a.position - b.position).norm(), 1e-6);
                CHECK_EQ(a.radius, b.radius);
            }
        }
        // Straight-line motion: finite differences reproduce the velocity.
        CHECK_LE((back.frames()[3].obstacles[0].velocity - Vec2{2, 1}).norm(), 1e-6);
    }

    SUBCASE("headerless text parses too") {
        std::istringstream in("0,0,10,10,1\n0.1,0,10.2,10.1,1\n");
        const ReplayLog parsed = ReplayLog::parse_csv(in);
        REQUIRE_EQ(parsed.frames().size(), 2);
        CHECK_EQ(parsed.frames()[1].obstacles[0].position.x, 10.2);
    }

    SUBCASE("malformed logs are rejected") {
        std::istringstream dup("0,1,5,5,1\n0,1,6,6,1\n");
        CHECK_THROWS_AS(ReplayLog::parse_csv(dup), std::invalid_argument);
        std::istringstream differ("0,1,5,5,1\n1,2,6,6,1\n");
        CHECK_THROWS_AS(ReplayLog::parse_csv(differ), std::invalid_argument);
        std::istringstream backwards("1,1,5,5,1\n0,1,5,5,1\n");
        CHECK_THROWS_AS(ReplayLog::parse_csv(backwards), std::invalid_argument);
        std::istringstream garbage("0,0,10,10,1\nnot a row\n");
        CHECK_THROWS_AS(ReplayLog::parse_csv(garbage), std::invalid_argument);
        std::istringstream flat("0,0,10,10,0\n");
        CHECK_THROWS_AS(ReplayLog::parse_csv(flat), std::invalid_argument);
    }
}

TEST_CASE("lattice construction matches the documented densities") {
    const SampleLattice nine = make_lattice(50, 50, 12.5);
    CHECK_EQ(nine.positions.size(), 9);
    CHECK_EQ(nine.positions.front().x, 12.5);
    CHECK_EQ(nine.positions[4].x, 25.0);
    CHECK_EQ(nine.positions[4].y, 25.0);

    CHECK_EQ(make_lattice(50, 50, 10.0).positions.size(), 16);
    CHECK_THROWS_AS(make_lattice(50, 50, 60.0), std::invalid_argument);

    SampleLattice bad = nine;
    bad.time_samples = 0;
    const ReplayLog log = ReplayLog::record(empty_world(), 0.0);
    CHECK_THROWS_AS(dynamic_traversability(log, bad), std::invalid_argument);
}

TEST_CASE("a full report carries all six metrics within their ranges") {
    MapSpec map = dataset_cell(1, 0);  // 10 discs, r = 0.5, 2 m/s
    const MetricReport report = compute_metrics(map, 12.5, 8.0);
    for (const char* name : metric_names()) {
        REQUIRE_MESSAGE(report.raw.count(name) == 1, name);
    }
    CHECK_EQ(report.raw.at("obstacle_density"),
             doctest::Approx(10.0 * kPi * 0.25 / 2500.0).epsilon(1e-12));
    CHECK_GE(report.raw.at("vo_feasibility"), 0.0);
    CHECK_LE(report.raw.at("vo_feasibility"), 1.0);
    CHECK_GT(report.raw.at("traversability"), 0.0);
    CHECK_LE(report.raw.at("survivability"), 8.0);
    CHECK_LE(report.raw.at("global_survivability"), 8.0);
    CHECK_EQ(report.map_id, map.id);
}
