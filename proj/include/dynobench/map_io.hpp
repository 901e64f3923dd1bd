#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dynobench/world.hpp"

namespace dynobench {

class MapFormatError : public std::runtime_error {
public:
    explicit MapFormatError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

/// 9 significant digits: round-trips every coordinate the toolkit produces
/// while keeping files diffable.
inline std::string fmt_g9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

inline void append_json_string(std::string& out, const std::string& s) {
    out += '"';
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    out += '"';
}

}  // namespace detail

/// Canonical map-file text for a t = 0 world. Field order is fixed and numbers
/// carry 9 significant digits, so identical worlds serialize byte-identically.
inline std::string serialize_map(const World& world) {
    using detail::fmt_g9;
    std::string out;
    out.reserve(128 + world.obstacles.size() * 96);
    out += "{\n  \"id\": ";
    detail::append_json_string(out, world.spec.id);
    out += ",\n  \"width_m\": " + fmt_g9(world.spec.width_m);
    out += ",\n  \"height_m\": " + fmt_g9(world.spec.height_m);
    out += ",\n  \"seed\": " + std::to_string(world.spec.seed);
    out += ",\n  \"dataset_tag\": ";
    detail::append_json_string(out, to_string(world.spec.dataset_tag));
    out += ",\n  \"profile\": {\"kind\": ";
    if (world.spec.profile.kind == ProfileKind::Rvo) {
        const RvoParams params = world.spec.profile.rvo.value_or(RvoParams{});
        out += "\"RVO\", \"rvo_params\": {\"time_horizon\": " +
               fmt_g9(params.time_horizon) +
               ", \"neighbor_dist\": " + fmt_g9(params.neighbor_dist) +
               ", \"preferred_speed\": " + fmt_g9(params.preferred_speed) + "}}";
    } else {
        out += "\"ConstantVelocity\"}";
    }
    out += ",\n  \"obstacles\": [";
    for (std::size_t i = 0; i < world.obstacles.size(); ++i) {
        const Obstacle& ob = world.obstacles[i];
        out += i == 0 ? "\n" : ",\n";
        out += "    {\"id\": " + std::to_string(ob.id);
        out += ", \"x\": " + fmt_g9(ob.position.x);
        out += ", \"y\": " + fmt_g9(ob.position.y);
        out += ", \"vx\": " + fmt_g9(ob.velocity.x);
        out += ", \"vy\": " + fmt_g9(ob.velocity.y);
        out += ", \"r\": " + fmt_g9(ob.radius) + "}";
    }
    out += world.obstacles.empty() ? "]\n}\n" : "\n  ]\n}\n";
    return out;
}

namespace detail {

inline void require_fields(const nlohmann::json& obj,
                           const std::vector<std::string>& fields,
                           const std::string& where) {
    for (const std::string& f : fields) {
        if (!obj.contains(f)) {
            throw MapFormatError("map file: missing field '" + f + "' in " + where);
        }
    }
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (std::find(fields.begin(), fields.end(), it.key()) == fields.end()) {
            throw MapFormatError("map file: unknown field '" + it.key() + "' in " +
                                 where);
        }
    }
}

}  // namespace detail

/// Strict parse of the canonical map format. The file bytes are the source of
/// truth for a dataset: every pipeline stage reads worlds through this.
inline World parse_map(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw MapFormatError(std::string("map file: invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw MapFormatError("map file: top level must be an object");
    detail::require_fields(
        doc, {"id", "width_m", "height_m", "seed", "dataset_tag", "profile", "obstacles"},
        "map");

    World world;
    try {
        world.spec.id = doc.at("id").get<std::string>();
        world.spec.width_m = doc.at("width_m").get<double>();
        world.spec.height_m = doc.at("height_m").get<double>();
        world.spec.seed = doc.at("seed").get<std::uint64_t>();
        world.spec.dataset_tag =
            dataset_tag_from_string(doc.at("dataset_tag").get<std::string>());

        const nlohmann::json& profile = doc.at("profile");
        const std::string kind = profile.at("kind").get<std::string>();
        if (kind == "ConstantVelocity") {
            detail::require_fields(profile, {"kind"}, "profile");
            world.spec.profile = MotionProfile::cvm();
        } else if (kind == "RVO") {
            detail::require_fields(profile, {"kind", "rvo_params"}, "profile");
            const nlohmann::json& rp = profile.at("rvo_params");
            detail::require_fields(
                rp, {"time_horizon", "neighbor_dist", "preferred_speed"}, "rvo_params");
            RvoParams params;
            params.time_horizon = rp.at("time_horizon").get<double>();
            params.neighbor_dist = rp.at("neighbor_dist").get<double>();
            params.preferred_speed = rp.at("preferred_speed").get<double>();
            world.spec.profile = MotionProfile{ProfileKind::Rvo, params};
        } else {
            throw MapFormatError("map file: unknown profile kind '" + kind + "'");
        }

        const nlohmann::json& obstacles = doc.at("obstacles");
        if (!obstacles.is_array()) {
            throw MapFormatError("map file: 'obstacles' must be an array");
        }
        world.obstacles.reserve(obstacles.size());
        for (const nlohmann::json& entry : obstacles) {
            detail::require_fields(entry, {"id", "x", "y", "vx", "vy", "r"}, "obstacle");
            Obstacle ob;
            ob.id = entry.at("id").get<int>();
            ob.position = {entry.at("x").get<double>(), entry.at("y").get<double>()};
            ob.velocity = {entry.at("vx").get<double>(), entry.at("vy").get<double>()};
            ob.radius = entry.at("r").get<double>();
            if (!(ob.radius > 0.0)) {
                throw MapFormatError("map file: obstacle radius must be > 0");
            }
            ob.profile = world.spec.profile;
            world.obstacles.push_back(ob);
        }
    } catch (const nlohmann::json::exception& e) {
        throw MapFormatError(std::string("map file: bad field type: ") + e.what());
    }

    world.spec.n_obs = static_cast<int>(world.obstacles.size());
    if (!world.obstacles.empty()) {
        double r_lo = world.obstacles[0].radius, r_hi = r_lo;
        double s_lo = world.obstacles[0].velocity.norm(), s_hi = s_lo;
        for (const Obstacle& ob : world.obstacles) {
            r_lo = std::min(r_lo, ob.radius);
            r_hi = std::max(r_hi, ob.radius);
            const double s = ob.velocity.norm();
            s_lo = std::min(s_lo, s);
            s_hi = std::max(s_hi, s);
        }
        world.spec.size_min = r_lo;
        world.spec.size_max = r_hi;
        world.spec.speed_min = s_lo;
        world.spec.speed_max = s_hi;
    }
    world.time = 0.0;
    init_waypoints(world);
    return world;
}

inline void write_map_file(const World& world, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for write: " + path.string());
    out << serialize_map(world);
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

inline World load_map_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open map file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_map(buf.str());
    } catch (const MapFormatError& e) {
        throw MapFormatError(path.string() + ": " + e.what());
    }
}

}  // namespace dynobench
