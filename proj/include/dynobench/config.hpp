#pragma once

// Runtime configuration: a flat key-value document mapping every runtime
// tunable of the pipeline to a validated field. Unknown keys are rejected so
// typos fail loudly, and serialize(parse(text)) is idempotent.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dynobench/planning.hpp"
#include "dynobench/world.hpp"

namespace dynobench {

struct RunConfig {
    // Trial simulation.
    double time_limit{60.0};       // s, per trial
    double robot_radius{1.0};      // m
    double a_max{4.0};             // m/s^2
    double v_cruise{4.0};          // m/s, default when not swept by the matrix
    double yaw_rate_max{1.4};      // rad/s
    double fov_width{kPi / 2.0};   // rad
    double fov_depth{8.0};         // m
    double grid_resolution{0.5};   // m per occupancy cell

    // Metric sampling. replay_dt is the tick used when minting replay logs
    // for the metric stage; the trial engine always steps at its native tick.
    double replay_dt{kDt};
    double d_sample{12.5};     // m between lattice positions
    int directions{8};         // ray fan per position
    int velocity_samples{16};  // candidate velocities per position
    int time_samples{10};      // instants averaged by the dynamic variant
    double t_sample{1.0};      // s between those instants / start offsets
    int start_samples{10};     // start offsets for the global form
    double t_max{20.0};        // s, survival cap

    // Dataset shape.
    int seeds_per_cell{2};     // benchmark grid draws per parameter cell
    int dataset2_per_type{4};  // held-out maps per heterogeneous family

    // Analysis.
    double synth_target{5.0};  // difficulty the synthesis stage aims for

    // Execution.
    int jobs{1};
    std::uint64_t base_seed{0};

    RobotConfig robot() const {
        RobotConfig r;
        r.radius = robot_radius;
        r.a_max = a_max;
        r.v_cruise = v_cruise;
        r.yaw_rate_max = yaw_rate_max;
        r.fov_width = fov_width;
        r.fov_depth = fov_depth;
        return r;
    }

    /// Throws std::invalid_argument naming the offending field.
    void validate() const {
        const auto in = [](const char* name, double v, double lo, double hi) {
            if (!(v > lo) || !(v <= hi)) {
                char buf[160];
                std::snprintf(buf, sizeof buf,
                              "config: %s must be in (%g, %g], got %g", name, lo,
                              hi, v);
                throw std::invalid_argument(buf);
            }
        };
        const auto count = [](const char* name, int v, int lo, int hi) {
            if (v < lo || v > hi) {
                char buf[160];
                std::snprintf(buf, sizeof buf,
                              "config: %s must be in [%d, %d], got %d", name, lo,
                              hi, v);
                throw std::invalid_argument(buf);
            }
        };
        in("time_limit", time_limit, 0.0, 600.0);
        in("robot_radius", robot_radius, 0.0, 5.0);
        in("a_max", a_max, 0.0, 100.0);
        in("v_cruise", v_cruise, 0.0, 20.0);
        in("yaw_rate_max", yaw_rate_max, 0.0, 20.0);
        in("fov_width", fov_width, 0.0, 2.0 * kPi);
        in("fov_depth", fov_depth, 0.0, 100.0);
        in("grid_resolution", grid_resolution, 0.0, 5.0);
        in("replay_dt", replay_dt, 0.0, 1.0);
        in("d_sample", d_sample, 0.0, 25.0);
        count("directions", directions, 1, 360);
        count("velocity_samples", velocity_samples, 1, 10000);
        count("time_samples", time_samples, 1, 10000);
        in("t_sample", t_sample, 0.0, 60.0);
        count("start_samples", start_samples, 1, 10000);
        in("t_max", t_max, 0.0, 600.0);
        count("seeds_per_cell", seeds_per_cell, 1, 100);
        count("dataset2_per_type", dataset2_per_type, 1, 1000);
        if (!(synth_target >= -100.0 && synth_target <= 100.0)) {
            throw std::invalid_argument(
                "config: synth_target must be in [-100, 100]");
        }
        count("jobs", jobs, 1, 256);
    }
};

namespace detail {

struct ConfigField {
    const char* key;
    enum class Kind { Double, Int, U64 } kind;
    double RunConfig::* d{nullptr};
    int RunConfig::* i{nullptr};
    std::uint64_t RunConfig::* u{nullptr};
};

inline const std::vector<ConfigField>& config_fields() {
    using K = ConfigField::Kind;
    static const std::vector<ConfigField> fields = {
        {"time_limit", K::Double, &RunConfig::time_limit, nullptr, nullptr},
        {"robot_radius", K::Double, &RunConfig::robot_radius, nullptr, nullptr},
        {"a_max", K::Double, &RunConfig::a_max, nullptr, nullptr},
        {"v_cruise", K::Double, &RunConfig::v_cruise, nullptr, nullptr},
        {"yaw_rate_max", K::Double, &RunConfig::yaw_rate_max, nullptr, nullptr},
        {"fov_width", K::Double, &RunConfig::fov_width, nullptr, nullptr},
        {"fov_depth", K::Double, &RunConfig::fov_depth, nullptr, nullptr},
        {"grid_resolution", K::Double, &RunConfig::grid_resolution, nullptr,
         nullptr},
        {"replay_dt", K::Double, &RunConfig::replay_dt, nullptr, nullptr},
        {"d_sample", K::Double, &RunConfig::d_sample, nullptr, nullptr},
        {"directions", K::Int, nullptr, &RunConfig::directions, nullptr},
        {"velocity_samples", K::Int, nullptr, &RunConfig::velocity_samples,
         nullptr},
        {"time_samples", K::Int, nullptr, &RunConfig::time_samples, nullptr},
        {"t_sample", K::Double, &RunConfig::t_sample, nullptr, nullptr},
        {"start_samples", K::Int, nullptr, &RunConfig::start_samples, nullptr},
        {"t_max", K::Double, &RunConfig::t_max, nullptr, nullptr},
        {"seeds_per_cell", K::Int, nullptr, &RunConfig::seeds_per_cell, nullptr},
        {"dataset2_per_type", K::Int, nullptr, &RunConfig::dataset2_per_type,
         nullptr},
        {"synth_target", K::Double, &RunConfig::synth_target, nullptr, nullptr},
        {"jobs", K::Int, nullptr, &RunConfig::jobs, nullptr},
        {"base_seed", K::U64, nullptr, nullptr, &RunConfig::base_seed},
    };
    return fields;
}

}  // namespace detail

/// Parses `key value` lines ('#' starts a comment, blank lines skipped).
/// Unknown or repeated keys and malformed values are rejected; fields not
/// mentioned keep their defaults. The result is validated before returning.
inline RunConfig parse_run_config(std::istream& in) {
    RunConfig cfg;
    std::vector<std::string> seen;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key)) continue;
        std::string value;
        std::string extra;
        if (!(ls >> value) || (ls >> extra)) {
            throw std::invalid_argument("config: line " + std::to_string(line_no) +
                                        ": expected 'key value'");
        }
        const detail::ConfigField* field = nullptr;
        for (const detail::ConfigField& f : detail::config_fields()) {
            if (key == f.key) {
                field = &f;
                break;
            }
        }
        if (!field) throw std::invalid_argument("config: unknown key '" + key + "'");
        for (const std::string& s : seen) {
            if (s == key)
                throw std::invalid_argument("config: duplicate key '" + key + "'");
        }
        seen.push_back(key);
        try {
            switch (field->kind) {
                case detail::ConfigField::Kind::Double: {
                    std::size_t used = 0;
                    const double v = std::stod(value, &used);
                    if (used != value.size()) throw std::invalid_argument(value);
                    cfg.*(field->d) = v;
                    break;
                }
                case detail::ConfigField::Kind::Int: {
                    std::size_t used = 0;
                    const int v = std::stoi(value, &used);
                    if (used != value.size()) throw std::invalid_argument(value);
                    cfg.*(field->i) = v;
                    break;
                }
                case detail::ConfigField::Kind::U64: {
                    if (!value.empty() && value[0] == '-')
                        throw std::invalid_argument(value);  // stoull would wrap
                    std::size_t used = 0;
                    const unsigned long long v = std::stoull(value, &used);
                    if (used != value.size()) throw std::invalid_argument(value);
                    cfg.*(field->u) = static_cast<std::uint64_t>(v);
                    break;
                }
            }
        } catch (const std::exception&) {
            throw std::invalid_argument("config: bad value for '" + key +
                                        "': " + value);
        }
    }
    cfg.validate();
    return cfg;
}

inline RunConfig parse_run_config(const std::string& text) {
    std::istringstream in(text);
    return parse_run_config(in);
}

/// Canonical text form: every field, fixed order, lossless numbers.
inline std::string serialize_run_config(const RunConfig& cfg) {
    std::string out;
    char buf[128];
    for (const detail::ConfigField& f : detail::config_fields()) {
        switch (f.kind) {
            case detail::ConfigField::Kind::Double:
                std::snprintf(buf, sizeof buf, "%s %.17g\n", f.key, cfg.*(f.d));
                break;
            case detail::ConfigField::Kind::Int:
                std::snprintf(buf, sizeof buf, "%s %d\n", f.key, cfg.*(f.i));
                break;
            case detail::ConfigField::Kind::U64:
                std::snprintf(buf, sizeof buf, "%s %llu\n", f.key,
                              static_cast<unsigned long long>(cfg.*(f.u)));
                break;
        }
        out += buf;
    }
    return out;
}

inline RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path);
    return parse_run_config(in);
}

inline void save_run_config(const RunConfig& cfg, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    os << serialize_run_config(cfg);
}

}  // namespace dynobench
