#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <queue>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "dynobench/geometry.hpp"
#include "dynobench/perception.hpp"

namespace dynobench {

struct RobotConfig {
    double radius{1.0};
    double a_max{4.0};
    double v_cruise{4.0};
    double yaw_rate_max{1.4};
    double fov_width{kPi / 2.0};
    double fov_depth{8.0};
};

struct RobotState {
    Vec2 position;
    Vec2 velocity;
    double heading{0.0};
    double time{0.0};
};

struct TrajectorySample {
    double t{0.0};
    Vec2 position;
    Vec2 velocity;
    Vec2 acceleration;
};

/// Planned motion, sampled on the simulation tick. samples[0] matches the
/// robot state the plan was made from; sample times are k * kDt.
struct Trajectory {
    std::vector<TrajectorySample> samples;
    double horizon{0.0};

    bool empty() const { return samples.empty(); }

    /// Sample at time t from plan start, clamped to [0, horizon].
    const TrajectorySample& at_time(double t) const {
        if (samples.size() == 1 || t <= 0.0) return samples.front();
        const std::size_t k = static_cast<std::size_t>(std::llround(t / kDt));
        return samples[std::min(k, samples.size() - 1)];
    }
};

enum class PlanKind { Trajectory, Brake };

struct PlanOutcome {
    PlanKind kind{PlanKind::Brake};
    Trajectory trajectory;  // for Brake: the deceleration-to-rest profile
    double yaw_rate{0.0};
};

constexpr double kGoalTolerance = 1.0;  // m, also the harness success radius

/// Decelerate along -v at a_max until rest, then hold.
inline Trajectory make_brake_profile(const RobotState& state, const RobotConfig& cfg) {
    Trajectory traj;
    const double speed = state.velocity.norm();
    const double t_stop = speed / cfg.a_max;
    const Vec2 dir = speed > 1e-12 ? state.velocity / speed : Vec2{0, 0};
    const int n = static_cast<int>(std::ceil(t_stop / kDt + 1e-9));
    traj.samples.reserve(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k <= n; ++k) {
        const double t = std::min(k * kDt, t_stop);
        TrajectorySample s;
        s.t = k * kDt;
        s.position = state.position + state.velocity * t - dir * (0.5 * cfg.a_max * t * t);
        s.velocity = dir * std::max(0.0, speed - cfg.a_max * t);
        s.acceleration = (t < t_stop) ? dir * -cfg.a_max : Vec2{0, 0};
        traj.samples.push_back(s);
    }
    traj.horizon = n * kDt;
    return traj;
}

inline PlanOutcome make_brake_outcome(const RobotState& state, const RobotConfig& cfg) {
    PlanOutcome out;
    out.kind = PlanKind::Brake;
    out.trajectory = make_brake_profile(state, cfg);
    out.yaw_rate = 0.0;
    return out;
}

namespace detail {

/// Planner-side obstacle model: tracked estimates coasted at constant
/// velocity, plus the occupied cells of the belief grid dilated by the robot
/// radius. Built once per plan call.
class CollisionModel {
public:
    // Inflation soaks up the gap between the discrete collision-check times
    // and the finer trajectory sampling (parabolic sag between checkpoints).
    static constexpr double kInflation = 0.02;

    CollisionModel() = default;

    void build(const PerceptionFrame& frame, const RobotConfig& cfg,
               double horizon_reach) {
        robot_radius_ = cfg.radius;
        trackers_.clear();
        for (const TrackedObstacle& t : frame.trackers) {
            trackers_.push_back(
                {t.position, t.velocity, t.radius_estimate + cfg.radius + kInflation});
        }
        (void)horizon_reach;

        // Occupied-cell dilation, reusing the stamp buffer across calls.
        const OccupancyGrid& grid = frame.grid;
        nx_ = grid.nx;
        ny_ = grid.ny;
        res_ = grid.resolution;
        const std::size_t n = static_cast<std::size_t>(nx_) * ny_;
        if (stamps_.size() != n) {
            stamps_.assign(n, 0);
            stamp_ = 0;
        }
        ++stamp_;

        const double reach = cfg.radius + kInflation + 0.5 * res_ * 1.4142135623730951;
        const int k = static_cast<int>(std::ceil(reach / res_));
        offsets_.clear();
        for (int dy = -k; dy <= k; ++dy) {
            for (int dx = -k; dx <= k; ++dx) {
                if (std::sqrt(double(dx * dx + dy * dy)) * res_ <= reach) {
                    offsets_.push_back({dx, dy});
                }
            }
        }
        for (int iy = 0; iy < ny_; ++iy) {
            for (int ix = 0; ix < nx_; ++ix) {
                if (grid.cells[grid.index(ix, iy)] != CellState::Occupied) continue;
                for (const auto [dx, dy] : offsets_) {
                    const int jx = ix + dx, jy = iy + dy;
                    if (jx >= 0 && jx < nx_ && jy >= 0 && jy < ny_) {
                        stamps_[static_cast<std::size_t>(jy) * nx_ + jx] = stamp_;
                    }
                }
            }
        }
    }

    /// Is the robot disc in predicted contact at plan-relative time t?
    bool blocked(const Vec2& p, double t) const {
        for (const PredictedDisc& d : trackers_) {
            const Vec2 q = d.position + d.velocity * t;
            if ((p - q).norm_sq() < d.keepout * d.keepout) return true;
        }
        return blocked_by_grid(p);
    }

    bool blocked_by_grid(const Vec2& p) const {
        if (nx_ == 0) return false;
        const int ix = static_cast<int>(std::floor(p.x / res_));
        const int iy = static_cast<int>(std::floor(p.y / res_));
        if (ix < 0 || ix >= nx_ || iy < 0 || iy >= ny_) return false;
        return stamps_[static_cast<std::size_t>(iy) * nx_ + ix] == stamp_;
    }

    /// Smallest separation margin over trackers at time t (no grid term).
    double tracker_margin(const Vec2& p, double t) const {
        double worst = std::numeric_limits<double>::infinity();
        for (const PredictedDisc& d : trackers_) {
            const Vec2 q = d.position + d.velocity * t;
            worst = std::min(worst, (p - q).norm() - d.keepout);
        }
        return worst;
    }

private:
    struct PredictedDisc {
        Vec2 position;
        Vec2 velocity;
        double keepout;  // r_est + robot radius + inflation
    };
    std::vector<PredictedDisc> trackers_;
    double robot_radius_{1.0};

    int nx_{0}, ny_{0};
    double res_{0.5};
    std::vector<std::uint32_t> stamps_;
    std::uint32_t stamp_{0};
    std::vector<std::pair<int, int>> offsets_;
};

/// Evaluate constant-acceleration motion.
inline void integrate_const_accel(const Vec2& p0, const Vec2& v0, const Vec2& a,
                                  double t, Vec2& p, Vec2& v) {
    p = p0 + v0 * t + a * (0.5 * t * t);
    v = v0 + a * t;
}

}  // namespace detail

class Planner {
public:
    virtual ~Planner() = default;
    virtual PlanOutcome plan(const PerceptionFrame& frame, const RobotState& state,
                             const Vec2& goal, const RobotConfig& cfg) = 0;
    virtual void reset() {}
    virtual const char* id() const = 0;
};

// ---------------------------------------------------------------------------
// Lattice planner over constant-acceleration motion primitives.

class GlobalPrimitivePlanner final : public Planner {
public:
    static constexpr double kEdgeDuration = 1.0;   // s per primitive
    static constexpr int kMaxExpansions = 3000;
    static constexpr int kMaxDepth = 40;
    static constexpr double kCheckStep = 0.1;      // collision sampling along edges

    const char* id() const override { return "global-primitive"; }

    PlanOutcome plan(const PerceptionFrame& frame, const RobotState& state,
                     const Vec2& goal, const RobotConfig& cfg) override {
        if ((goal - state.position).norm() <= kGoalTolerance) {
            return already_there(state);
        }
        model_.build(frame, cfg, 0.0);

        nodes_.clear();
        visited_.clear();
        std::priority_queue<QueueEntry, std::vector<QueueEntry>, std::greater<>> open;

        nodes_.push_back(Node{state.position, state.velocity, Vec2{}, 0.0, -1, 0.0});
        visited_.insert(key_of(state.position, state.velocity));
        open.push({heuristic(state.position, goal, cfg), 0});

        int expansions = 0;
        while (!open.empty() && expansions < kMaxExpansions) {
            const QueueEntry top = open.top();
            open.pop();
            const int node_idx = top.node;
            ++expansions;

            const int depth = static_cast<int>(
                std::llround(nodes_[static_cast<std::size_t>(node_idx)].g /
                             kEdgeDuration));
            if (depth >= kMaxDepth) continue;

            for (const Vec2& accel : primitive_set(node_idx, goal, cfg)) {
                const Node parent = nodes_[static_cast<std::size_t>(node_idx)];
                Vec2 p_end, v_end;
                detail::integrate_const_accel(parent.position, parent.velocity, accel,
                                              kEdgeDuration, p_end, v_end);
                if (p_end.x < cfg.radius || p_end.x > frame.grid.nx * frame.grid.resolution - cfg.radius ||
                    p_end.y < cfg.radius || p_end.y > frame.grid.ny * frame.grid.resolution - cfg.radius) {
                    continue;
                }

                // Walk the edge; reject on predicted contact, accept early on goal.
                bool blocked = false;
                double reached_goal_at = -1.0;
                for (double tau = kCheckStep; tau <= kEdgeDuration + 1e-9;
                     tau += kCheckStep) {
                    Vec2 p, v;
                    detail::integrate_const_accel(parent.position, parent.velocity,
                                                  accel, tau, p, v);
                    if (model_.blocked(p, parent.g + tau)) {
                        blocked = true;
                        break;
                    }
                    if ((p - goal).norm() <= kGoalTolerance) {
                        reached_goal_at = tau;
                        break;
                    }
                }
                if (blocked) continue;

                Node child{p_end, v_end, accel, parent.g + kEdgeDuration, node_idx,
                           0.0};
                if (reached_goal_at > 0.0) {
                    child.g = parent.g + reached_goal_at;
                    nodes_.push_back(child);
                    return extract(static_cast<int>(nodes_.size()) - 1,
                                   reached_goal_at, state, cfg);
                }
                const std::uint64_t key = key_of(p_end, v_end);
                if (!visited_.insert(key).second) continue;
                nodes_.push_back(child);
                open.push({child.g + heuristic(p_end, goal, cfg),
                           static_cast<int>(nodes_.size()) - 1});
            }
        }
        return make_brake_outcome(state, cfg);
    }

private:
    struct Node {
        Vec2 position;
        Vec2 velocity;
        Vec2 accel_from_parent;
        double g;  // seconds from plan start
        int parent;
        double pad;
    };
    struct QueueEntry {
        double f;
        int node;
        bool operator>(const QueueEntry& o) const {
            return f != o.f ? f > o.f : node > o.node;
        }
    };

    static double heuristic(const Vec2& p, const Vec2& goal, const RobotConfig& cfg) {
        return (p - goal).norm() / cfg.v_cruise;
    }

    static std::uint64_t key_of(const Vec2& p, const Vec2& v) {
        const auto q = [](double x) {
            return static_cast<std::uint64_t>(
                       static_cast<std::int64_t>(std::llround(x * 2.0)) & 0xFFFF);
        };
        return q(p.x) | (q(p.y) << 16) | (q(v.x) << 32) | (q(v.y) << 48);
    }

    /// Eleven primitives: coast, brake, and steer-to-cruise toward the goal
    /// bearing plus eight compass bearings. Steering targets the cruise-speed
    /// circle, so lattice speeds never exceed v_cruise.
    std::vector<Vec2> primitive_set(int node_idx, const Vec2& goal,
                                    const RobotConfig& cfg) {
        const Node& n = nodes_[static_cast<std::size_t>(node_idx)];
        std::vector<Vec2> accels;
        accels.reserve(11);
        accels.push_back({0, 0});
        accels.push_back(clamp_norm(-n.velocity / kEdgeDuration, cfg.a_max));
        const Vec2 to_goal = (goal - n.position).normalized();
        auto steer = [&](const Vec2& dir) {
            return clamp_norm((dir * cfg.v_cruise - n.velocity) / kEdgeDuration,
                              cfg.a_max);
        };
        if (to_goal.norm_sq() > 0.0) accels.push_back(steer(to_goal));
        for (int i = 0; i < 8; ++i) {
            const double theta = i * (kTwoPi / 8.0);
            accels.push_back(steer({std::cos(theta), std::sin(theta)}));
        }
        return accels;
    }

    PlanOutcome already_there(const RobotState& state) {
        PlanOutcome out;
        out.kind = PlanKind::Trajectory;
        out.trajectory.samples.push_back(
            {0.0, state.position, state.velocity, Vec2{}});
        out.trajectory.horizon = 0.0;
        return out;
    }

    PlanOutcome extract(int leaf, double last_edge_len, const RobotState& state,
                        const RobotConfig& cfg) {
        std::vector<int> chain;
        for (int i = leaf; i >= 0; i = nodes_[static_cast<std::size_t>(i)].parent) {
            chain.push_back(i);
        }
        std::reverse(chain.begin(), chain.end());

        PlanOutcome out;
        out.kind = PlanKind::Trajectory;
        Trajectory& traj = out.trajectory;
        traj.samples.push_back({0.0, state.position, state.velocity, Vec2{}});

        double t0 = 0.0;
        for (std::size_t e = 1; e < chain.size(); ++e) {
            const Node& child = nodes_[static_cast<std::size_t>(chain[e])];
            const Node& parent = nodes_[static_cast<std::size_t>(chain[e - 1])];
            const double edge_len =
                (e + 1 == chain.size()) ? last_edge_len : kEdgeDuration;
            const int ticks = static_cast<int>(std::llround(edge_len / kDt));
            for (int k = 1; k <= ticks; ++k) {
                const double tau = k * kDt;
                Vec2 p, v;
                detail::integrate_const_accel(parent.position, parent.velocity,
                                              child.accel_from_parent, tau, p, v);
                traj.samples.push_back({t0 + tau, p, v, child.accel_from_parent});
                if (traj.samples.size() >= 200) break;
            }
            traj.samples[traj.samples.size() - 1].acceleration = Vec2{};
            if (traj.samples.size() >= 200) break;
            t0 += edge_len;
        }
        // Re-tag accelerations: each sample carries the accel applied *from*
        // it until the next sample.
        for (std::size_t i = 0; i + 1 < traj.samples.size(); ++i) {
            const Vec2 dv = traj.samples[i + 1].velocity - traj.samples[i].velocity;
            traj.samples[i].acceleration = dv / kDt;
        }
        traj.samples.back().acceleration = Vec2{};
        traj.horizon = traj.samples.back().t;
        (void)cfg;
        return out;
    }

    detail::CollisionModel model_;
    std::vector<Node> nodes_;
    std::unordered_set<std::uint64_t> visited_;
};

// ---------------------------------------------------------------------------
// Receding-horizon planner: quadratic goal objective, disc keep-out
// constraints via an escalating penalty, projected gradient descent.

class MpcPlanner final : public Planner {
public:
    static constexpr int kSteps = 20;
    static constexpr double kStepDt = 0.1;
    static constexpr double kMargin = 0.1;    // m beyond summed radii
    static constexpr int kIterBudget = 200;
    static constexpr double kControlWeight = 0.01;
    static constexpr double kSpeedWeight = 1.0;

    const char* id() const override { return "mpc"; }

    void reset() override { warm_.clear(); }

    PlanOutcome plan(const PerceptionFrame& frame, const RobotState& state,
                     const Vec2& goal, const RobotConfig& cfg) override {
        discs_.clear();
        for (const TrackedObstacle& t : frame.trackers) {
            discs_.push_back(
                {t.position, t.velocity, t.radius_estimate + cfg.radius + kMargin});
        }

        // Warm start: shift the previous solution by the elapsed ticks.
        std::vector<Vec2> u(kSteps, Vec2{0, 0});
        if (!warm_.empty()) {
            const int shift = std::max(
                0, static_cast<int>(std::llround((state.time - warm_time_) / kStepDt)));
            for (int k = 0; k < kSteps; ++k) {
                const std::size_t j = static_cast<std::size_t>(k + shift);
                u[static_cast<std::size_t>(k)] =
                    j < warm_.size() ? warm_[j] : Vec2{0, 0};
            }
        }
        for (Vec2& uk : u) uk = clamp_norm(uk, cfg.a_max);

        const double rho_stages[3] = {50.0, 500.0, 5000.0};
        const int iters_per_stage = kIterBudget / 3;
        for (double rho : rho_stages) {
            // alpha is the largest control change per step (m/s^2): the raw
            // gradient spans orders of magnitude across penalty stages, so
            // steps are normalized by its largest component.
            double alpha = 0.5;
            double j_prev = objective(u, state, goal, cfg, rho);
            int stale = 0;
            for (int it = 0; it < iters_per_stage; ++it) {
                gradient(u, state, goal, cfg, rho, grad_);
                double g_max = 0.0;
                for (const Vec2& g : grad_) g_max = std::max(g_max, g.norm());
                if (g_max < 1e-12) break;
                bool improved = false;
                for (int bt = 0; bt < 20; ++bt) {
                    const double scale = alpha / g_max;
                    trial_.assign(u.begin(), u.end());
                    for (int k = 0; k < kSteps; ++k) {
                        trial_[static_cast<std::size_t>(k)] = clamp_norm(
                            u[static_cast<std::size_t>(k)] -
                                grad_[static_cast<std::size_t>(k)] * scale,
                            cfg.a_max);
                    }
                    const double j_new = objective(trial_, state, goal, cfg, rho);
                    if (j_new < j_prev) {
                        u.swap(trial_);
                        if (bt == 0) alpha = std::min(alpha * 1.5, 2.0);
                        improved = true;
                        stale = (j_prev - j_new < 1e-10 * (1.0 + j_prev)) ? stale + 1 : 0;
                        j_prev = j_new;
                        break;
                    }
                    alpha *= 0.5;
                }
                if (!improved || stale >= 3) break;
            }
        }

        warm_ = u;
        warm_time_ = state.time;

        // Feasibility: every step must clear every predicted disc. Penalty
        // solutions equilibrate a hair inside the margin, so half of it is
        // accepted as convergence slack; physical separation stays positive.
        Vec2 p = state.position, v = state.velocity;
        bool feasible = true;
        for (int k = 0; k < kSteps && feasible; ++k) {
            detail::integrate_const_accel(p, v, u[static_cast<std::size_t>(k)], kStepDt,
                                          p, v);
            const double t = (k + 1) * kStepDt;
            for (const Disc& d : discs_) {
                if ((p - (d.position + d.velocity * t)).norm() <
                    d.keepout - 0.5 * kMargin) {
                    feasible = false;
                    break;
                }
            }
        }
        if (!feasible) return make_brake_outcome(state, cfg);

        PlanOutcome out;
        out.kind = PlanKind::Trajectory;
        out.trajectory = sample_trajectory(u, state);
        return out;
    }

private:
    struct Disc {
        Vec2 position;
        Vec2 velocity;
        double keepout;
    };

    double objective(const std::vector<Vec2>& u, const RobotState& state,
                     const Vec2& goal, const RobotConfig& cfg, double rho) const {
        double j = 0.0;
        Vec2 p = state.position, v = state.velocity;
        for (int k = 0; k < kSteps; ++k) {
            const Vec2 uk = u[static_cast<std::size_t>(k)];
            detail::integrate_const_accel(p, v, uk, kStepDt, p, v);
            const double t = (k + 1) * kStepDt;
            j += (p - goal).norm_sq() + kControlWeight * uk.norm_sq();
            const double over = v.norm_sq() - cfg.v_cruise * cfg.v_cruise;
            if (over > 0.0) j += kSpeedWeight * over * over;
            for (const Disc& d : discs_) {
                const double gap =
                    d.keepout * d.keepout - (p - (d.position + d.velocity * t)).norm_sq();
                if (gap > 0.0) j += rho * gap * gap;
            }
        }
        return j;
    }

    void gradient(const std::vector<Vec2>& u, const RobotState& state,
                  const Vec2& goal, const RobotConfig& cfg, double rho,
                  std::vector<Vec2>& grad) const {
        // Forward rollout.
        positions_.resize(kSteps + 1);
        velocities_.resize(kSteps + 1);
        positions_[0] = state.position;
        velocities_[0] = state.velocity;
        for (int k = 0; k < kSteps; ++k) {
            detail::integrate_const_accel(positions_[static_cast<std::size_t>(k)],
                                          velocities_[static_cast<std::size_t>(k)],
                                          u[static_cast<std::size_t>(k)], kStepDt,
                                          positions_[static_cast<std::size_t>(k) + 1],
                                          velocities_[static_cast<std::size_t>(k) + 1]);
        }

        // Backward adjoint through the linear dynamics.
        grad.assign(static_cast<std::size_t>(kSteps), Vec2{0, 0});
        Vec2 lam_p{0, 0}, lam_v{0, 0};
        for (int k = kSteps - 1; k >= 0; --k) {
            const Vec2 pk1 = positions_[static_cast<std::size_t>(k) + 1];
            const Vec2 vk1 = velocities_[static_cast<std::size_t>(k) + 1];
            const double t = (k + 1) * kStepDt;

            Vec2 stage_p = (pk1 - goal) * 2.0;
            for (const Disc& d : discs_) {
                const Vec2 rel = pk1 - (d.position + d.velocity * t);
                const double gap = d.keepout * d.keepout - rel.norm_sq();
                if (gap > 0.0) stage_p += rel * (-4.0 * rho * gap);
            }
            Vec2 stage_v{0, 0};
            const double over = vk1.norm_sq() - cfg.v_cruise * cfg.v_cruise;
            if (over > 0.0) stage_v = vk1 * (4.0 * kSpeedWeight * over);

            lam_p += stage_p;
            lam_v += stage_v;
            grad[static_cast<std::size_t>(k)] =
                u[static_cast<std::size_t>(k)] * (2.0 * kControlWeight) +
                lam_p * (0.5 * kStepDt * kStepDt) + lam_v * kStepDt;
            lam_v += lam_p * kStepDt;
        }
    }

    Trajectory sample_trajectory(const std::vector<Vec2>& u,
                                 const RobotState& state) const {
        Trajectory traj;
        traj.horizon = kSteps * kStepDt;
        const int per_step = static_cast<int>(std::llround(kStepDt / kDt));
        traj.samples.reserve(static_cast<std::size_t>(kSteps) * per_step + 1);
        Vec2 p = state.position, v = state.velocity;
        traj.samples.push_back({0.0, p, v, u[0]});
        for (int k = 0; k < kSteps; ++k) {
            const Vec2 uk = u[static_cast<std::size_t>(k)];
            for (int i = 1; i <= per_step; ++i) {
                Vec2 pi, vi;
                detail::integrate_const_accel(p, v, uk, i * kDt, pi, vi);
                const Vec2 next_a =
                    (i == per_step && k + 1 < kSteps)
                        ? u[static_cast<std::size_t>(k) + 1]
                        : (i == per_step ? Vec2{0, 0} : uk);
                traj.samples.push_back({(k * per_step + i) * kDt, pi, vi, next_a});
            }
            detail::integrate_const_accel(p, v, uk, kStepDt, p, v);
        }
        return traj;
    }

    std::vector<Disc> discs_;
    std::vector<Vec2> warm_;
    double warm_time_{0.0};
    mutable std::vector<Vec2> positions_;
    mutable std::vector<Vec2> velocities_;
    std::vector<Vec2> grad_;
    std::vector<Vec2> trial_;
};

// ---------------------------------------------------------------------------
// Local sampler: sixteen targets on two range rings, a jerk-optimal quintic
// to each, best feasible endpoint wins.

class LocalPrimitivePlanner final : public Planner {
public:
    static constexpr double kDuration = 2.0;  // s
    static constexpr double kCheckStep = kDt;  // feasibility sampled per tick
    static constexpr double kSpeedSlack = 1.15;  // fraction of v_cruise allowed

    const char* id() const override { return "local-primitive"; }

    void reset() override { has_prev_ = false; }

    PlanOutcome plan(const PerceptionFrame& frame, const RobotState& state,
                     const Vec2& goal, const RobotConfig& cfg) override {
        if ((goal - state.position).norm() <= kGoalTolerance) {
            PlanOutcome out;
            out.kind = PlanKind::Trajectory;
            out.trajectory.samples.push_back(
                {0.0, state.position, state.velocity, Vec2{}});
            out.trajectory.horizon = 0.0;
            has_prev_ = false;
            return out;
        }
        model_.build(frame, cfg, 0.0);

        // Acceleration continuity across replans: a receding-horizon
        // execution of curves that all start at zero acceleration never
        // builds speed, so the start boundary condition carries over the
        // acceleration the previous plan commanded at this instant.
        Vec2 a0{0, 0};
        if (has_prev_) {
            const double elapsed =
                clamp(state.time - prev_anchor_, 0.0, kDuration);
            a0 = {prev_x_.deriv2(elapsed), prev_y_.deriv2(elapsed)};
        }

        // Ring distances track the current speed so each candidate is a
        // kinematically consistent ramp over the fixed duration: covering
        // L = T * (|v| + v_end) / 2 while ending at v_end needs no loiter
        // phase and no transient above the speed cap. The far ring
        // accelerates toward cruise (clamped to the sensing depth); the near
        // ring at half distance is the slow/maneuver option.
        const double speed0 = state.velocity.norm();
        const double ring_far =
            clamp(0.5 * kDuration * (speed0 + cfg.v_cruise), 1.0, cfg.fov_depth);
        const double rings[2] = {0.5 * ring_far, ring_far};
        double best_cost = std::numeric_limits<double>::infinity();
        Quintic best_x{}, best_y{};
        bool found = false;

        for (double ring : rings) {
            const double end_speed =
                clamp(2.0 * ring / kDuration - speed0, 0.0, cfg.v_cruise);
            for (int i = 0; i < 8; ++i) {
                const double theta = i * (kTwoPi / 8.0);
                const Vec2 target = state.position + from_polar(ring, theta);
                if (target.x < cfg.radius ||
                    target.x > frame.grid.nx * frame.grid.resolution - cfg.radius ||
                    target.y < cfg.radius ||
                    target.y > frame.grid.ny * frame.grid.resolution - cfg.radius) {
                    continue;
                }
                const Vec2 end_dir = (goal - target).normalized();
                const Vec2 end_vel = (goal - target).norm() <= kGoalTolerance
                                         ? Vec2{0, 0}
                                         : end_dir * end_speed;
                const Quintic qx = fit(state.position.x, state.velocity.x, a0.x,
                                       target.x, end_vel.x);
                const Quintic qy = fit(state.position.y, state.velocity.y, a0.y,
                                       target.y, end_vel.y);
                if (!feasible(qx, qy, cfg)) continue;
                const double cost = (target - goal).norm();
                if (cost < best_cost) {
                    best_cost = cost;
                    best_x = qx;
                    best_y = qy;
                    found = true;
                }
            }
        }
        if (!found) {
            has_prev_ = false;
            return make_brake_outcome(state, cfg);
        }

        prev_x_ = best_x;
        prev_y_ = best_y;
        prev_anchor_ = state.time;
        has_prev_ = true;

        PlanOutcome out;
        out.kind = PlanKind::Trajectory;
        out.trajectory = sample(best_x, best_y);
        return out;
    }

private:
    struct Quintic {
        double c[6];
        double value(double t) const {
            return c[0] + t * (c[1] + t * (c[2] + t * (c[3] + t * (c[4] + t * c[5]))));
        }
        double deriv(double t) const {
            return c[1] +
                   t * (2 * c[2] + t * (3 * c[3] + t * (4 * c[4] + t * 5 * c[5])));
        }
        double deriv2(double t) const {
            return 2 * c[2] + t * (6 * c[3] + t * (12 * c[4] + t * 20 * c[5]));
        }
    };

    /// Minimum-jerk 1D boundary problem over [0, kDuration]: start at
    /// (x0, v0, a0), end at (x1, v1, 0 accel).
    static Quintic fit(double x0, double v0, double a0, double x1, double v1) {
        const double T = kDuration;
        const double T2 = T * T, T3 = T2 * T, T4 = T3 * T, T5 = T4 * T;
        Quintic q{};
        q.c[0] = x0;
        q.c[1] = v0;
        q.c[2] = 0.5 * a0;
        const double dp = x1 - x0 - v0 * T - 0.5 * a0 * T2;
        const double dv = v1 - v0 - a0 * T;
        const double da = -a0;
        // Solve for c3..c5 from end position/velocity/acceleration conditions.
        q.c[3] = (10.0 * dp - 4.0 * dv * T + 0.5 * da * T2) / T3;
        q.c[4] = (-15.0 * dp + 7.0 * dv * T - da * T2) / T4;
        q.c[5] = (6.0 * dp - 3.0 * dv * T + 0.5 * da * T2) / T5;
        return q;
    }

    bool feasible(const Quintic& qx, const Quintic& qy, const RobotConfig& cfg) const {
        const double v_cap = cfg.v_cruise * kSpeedSlack;
        for (double t = 0.0; t <= kDuration + 1e-9; t += kCheckStep) {
            const double ax = qx.deriv2(t), ay = qy.deriv2(t);
            if (ax * ax + ay * ay > cfg.a_max * cfg.a_max + 1e-9) return false;
            const double vx = qx.deriv(t), vy = qy.deriv(t);
            if (vx * vx + vy * vy > v_cap * v_cap + 1e-9) return false;
            if (model_.blocked({qx.value(t), qy.value(t)}, t)) return false;
        }
        return true;
    }

    Trajectory sample(const Quintic& qx, const Quintic& qy) const {
        Trajectory traj;
        traj.horizon = kDuration;
        const int n = static_cast<int>(std::llround(kDuration / kDt));
        traj.samples.reserve(static_cast<std::size_t>(n) + 1);
        for (int k = 0; k <= n; ++k) {
            const double t = k * kDt;
            traj.samples.push_back({t,
                                    {qx.value(t), qy.value(t)},
                                    {qx.deriv(t), qy.deriv(t)},
                                    {qx.deriv2(t), qy.deriv2(t)}});
        }
        return traj;
    }

    detail::CollisionModel model_;
    Quintic prev_x_{}, prev_y_{};
    double prev_anchor_{0.0};
    bool has_prev_{false};
};

inline std::unique_ptr<Planner> make_planner(const std::string& planner_id) {
    if (planner_id == "global-primitive") {
        return std::make_unique<GlobalPrimitivePlanner>();
    }
    if (planner_id == "mpc") return std::make_unique<MpcPlanner>();
    if (planner_id == "local-primitive") {
        return std::make_unique<LocalPrimitivePlanner>();
    }
    throw std::invalid_argument("unknown planner id: " + planner_id);
}

/// One-shot functional forms (cold start).
inline PlanOutcome plan_global_primitive(const PerceptionFrame& frame,
                                         const RobotState& state, const Vec2& goal,
                                         const RobotConfig& cfg) {
    return GlobalPrimitivePlanner{}.plan(frame, state, goal, cfg);
}
inline PlanOutcome plan_mpc(const PerceptionFrame& frame, const RobotState& state,
                            const Vec2& goal, const RobotConfig& cfg) {
    return MpcPlanner{}.plan(frame, state, goal, cfg);
}
inline PlanOutcome plan_local_primitive(const PerceptionFrame& frame,
                                        const RobotState& state, const Vec2& goal,
                                        const RobotConfig& cfg) {
    return LocalPrimitivePlanner{}.plan(frame, state, goal, cfg);
}

// ---------------------------------------------------------------------------
// Gaze policies.

enum class GazePolicy { FullRange, LookAhead, LookGoal, Rotating, Finean, Owl };

inline GazePolicy gaze_from_id(const std::string& gaze_id) {
    if (gaze_id == "full-range") return GazePolicy::FullRange;
    if (gaze_id == "look-ahead") return GazePolicy::LookAhead;
    if (gaze_id == "look-goal") return GazePolicy::LookGoal;
    if (gaze_id == "rotating") return GazePolicy::Rotating;
    if (gaze_id == "finean") return GazePolicy::Finean;
    if (gaze_id == "owl") return GazePolicy::Owl;
    throw std::invalid_argument("unknown gaze id: " + gaze_id);
}

inline const char* gaze_id(GazePolicy policy) {
    switch (policy) {
        case GazePolicy::FullRange: return "full-range";
        case GazePolicy::LookAhead: return "look-ahead";
        case GazePolicy::LookGoal: return "look-goal";
        case GazePolicy::Rotating: return "rotating";
        case GazePolicy::Finean: return "finean";
        default: return "owl";
    }
}

/// FullRange senses the whole circle; every other policy steers a 90-degree
/// wedge.
inline bool gaze_uses_full_circle(GazePolicy policy) {
    return policy == GazePolicy::FullRange;
}

namespace detail {

constexpr int kGazeCandidates = 16;
constexpr double kGazeGain = 5.0;  // rad/s per rad of heading error
constexpr double kFineanTrajWeight = 0.7;
constexpr double kFineanStaleWeight = 0.3;

inline double alignment(double theta, double bearing) {
    return 0.5 * (1.0 + std::cos(theta - bearing));
}

/// Per-sector staleness of the belief grid around the robot, normalized to
/// [0, 1] by the stalest sector. Sector i spans bearing i * 2pi/16.
inline void sector_staleness(const PerceptionFrame& frame, const Vec2& center,
                             double reach, double scores[kGazeCandidates]) {
    for (int i = 0; i < kGazeCandidates; ++i) scores[i] = 0.0;
    const OccupancyGrid& g = frame.grid;
    const int ix_lo = std::max(0, g.cell_x(center.x - reach));
    const int ix_hi = std::min(g.nx - 1, g.cell_x(center.x + reach));
    const int iy_lo = std::max(0, g.cell_y(center.y - reach));
    const int iy_hi = std::min(g.ny - 1, g.cell_y(center.y + reach));
    const double reach_sq = reach * reach;
    for (int iy = iy_lo; iy <= iy_hi; ++iy) {
        for (int ix = ix_lo; ix <= ix_hi; ++ix) {
            const Vec2 d = g.center_of(ix, iy) - center;
            const double dist_sq = d.norm_sq();
            if (dist_sq > reach_sq || dist_sq < 1e-12) continue;
            const double bearing = std::atan2(d.y, d.x);
            int sector = static_cast<int>(
                std::floor((bearing + kPi) / (kTwoPi / kGazeCandidates)));
            sector = std::min(std::max(sector, 0), kGazeCandidates - 1);
            scores[sector] += frame.time - g.last_update[g.index(ix, iy)];
        }
    }
    double max_score = 0.0;
    for (int i = 0; i < kGazeCandidates; ++i) max_score = std::max(max_score, scores[i]);
    if (max_score > 0.0) {
        for (int i = 0; i < kGazeCandidates; ++i) scores[i] /= max_score;
    }
}

inline double steer_toward(double desired, double heading, double yaw_rate_max) {
    return clamp(kGazeGain * wrap_angle(desired - heading), -yaw_rate_max,
                 yaw_rate_max);
}

/// Sector center bearing for candidate i, matching sector_staleness binning.
inline double candidate_bearing(int i) {
    return -kPi + (i + 0.5) * (kTwoPi / kGazeCandidates);
}

}  // namespace detail

inline double plan_gaze(GazePolicy policy, const PerceptionFrame& frame,
                        const RobotState& state, const Trajectory& traj,
                        const Vec2& goal, const RobotConfig& cfg) {
    switch (policy) {
        case GazePolicy::FullRange:
            return 0.0;
        case GazePolicy::Rotating:
            return cfg.yaw_rate_max;
        case GazePolicy::LookAhead: {
            if (state.velocity.norm_sq() < 1e-12) return 0.0;
            const double bearing =
                std::atan2(state.velocity.y, state.velocity.x);
            return detail::steer_toward(bearing, state.heading, cfg.yaw_rate_max);
        }
        case GazePolicy::LookGoal: {
            const Vec2 d = goal - state.position;
            if (d.norm_sq() < 1e-12) return 0.0;
            return detail::steer_toward(std::atan2(d.y, d.x), state.heading,
                                        cfg.yaw_rate_max);
        }
        case GazePolicy::Finean:
        case GazePolicy::Owl:
            break;
    }

    double stale[detail::kGazeCandidates];
    detail::sector_staleness(frame, state.position, cfg.fov_depth, stale);

    // Bearing of the trajectory one second out (Finean's look-ahead term).
    double traj_bearing = state.heading;
    if (!traj.empty()) {
        const TrajectorySample& s = traj.at_time(std::min(1.0, traj.horizon));
        const Vec2 d = s.position - state.position;
        if (d.norm_sq() > 1e-12) {
            traj_bearing = std::atan2(d.y, d.x);
        } else if (state.velocity.norm_sq() > 1e-12) {
            traj_bearing = std::atan2(state.velocity.y, state.velocity.x);
        }
    }

    double vel_bearing = state.heading;
    if (state.velocity.norm_sq() > 1e-12) {
        vel_bearing = std::atan2(state.velocity.y, state.velocity.x);
    }
    double goal_bearing = state.heading;
    {
        const Vec2 d = goal - state.position;
        if (d.norm_sq() > 1e-12) goal_bearing = std::atan2(d.y, d.x);
    }
    // Nearest tracked obstacle, if any.
    bool have_track = false;
    double track_bearing = 0.0;
    double best_dist_sq = std::numeric_limits<double>::infinity();
    for (const TrackedObstacle& t : frame.trackers) {
        const Vec2 d = t.position - state.position;
        const double dist_sq = d.norm_sq();
        if (dist_sq < best_dist_sq && dist_sq > 1e-12) {
            best_dist_sq = dist_sq;
            track_bearing = std::atan2(d.y, d.x);
            have_track = true;
        }
    }

    int best = 0;
    double best_score = -1.0;
    for (int i = 0; i < detail::kGazeCandidates; ++i) {
        const double theta = detail::candidate_bearing(i);
        double score;
        if (policy == GazePolicy::Finean) {
            score = detail::kFineanTrajWeight * detail::alignment(theta, traj_bearing) +
                    detail::kFineanStaleWeight * stale[i];
        } else {
            score = 0.25 * detail::alignment(theta, vel_bearing) +
                    0.25 * detail::alignment(theta, goal_bearing) + 0.25 * stale[i] +
                    0.25 * (have_track ? detail::alignment(theta, track_bearing) : 0.5);
        }
        if (score > best_score) {
            best_score = score;
            best = i;
        }
    }
    return detail::steer_toward(detail::candidate_bearing(best), state.heading,
                                cfg.yaw_rate_max);
}

}  // namespace dynobench
