#include "evmod/synth.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <numbers>
#include <numeric>

#include "evmod/error.hpp"
#include "evmod/io.hpp"
#include "evmod/rng.hpp"

namespace evmod {

namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

constexpr double kTau = 2.0 * std::numbers::pi;

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed,
                         const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        if (std::find_if(allowed.begin(), allowed.end(),
                         [&](const char* a) { return key == a; }) == allowed.end()) {
            throw ConfigError(where + ": unknown key '" + key + "'");
        }
    }
}

const json& require(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) {
        throw ConfigError(where + ": missing '" + std::string(key) + "'");
    }
    return obj.at(key);
}

double get_number(const json& v, const std::string& where) {
    if (!v.is_number()) throw ConfigError(where + ": expected a number");
    return v.get<double>();
}

std::uint64_t get_unsigned(const json& v, const std::string& where) {
    if (!v.is_number_unsigned()) throw ConfigError(where + ": expected a non-negative integer");
    return v.get<std::uint64_t>();
}

void get_point(const json& v, const std::string& where, double& x, double& y) {
    if (!v.is_array() || v.size() != 2) throw ConfigError(where + ": expected [x, y]");
    x = get_number(v[0], where);
    y = get_number(v[1], where);
}

struct BoundaryPoint {
    double off_x, off_y;  // offset from the object center
    double nx, ny;        // outward normal
};

std::vector<BoundaryPoint> boundary_points(const SceneObject& object) {
    std::vector<BoundaryPoint> points;
    if (object.shape == SceneObject::Shape::disk) {
        const int m = std::max(12, int(std::ceil(kTau * object.radius)));
        points.reserve(std::size_t(m));
        for (int j = 0; j < m; ++j) {
            double theta = kTau * double(j) / double(m);
            double c = std::cos(theta), s = std::sin(theta);
            points.push_back({object.radius * c, object.radius * s, c, s});
        }
    } else {
        const double hw = object.width / 2.0, hh = object.height / 2.0;
        const int nx_pts = std::max(1, int(std::ceil(object.width)));
        const int ny_pts = std::max(1, int(std::ceil(object.height)));
        for (int j = 0; j < nx_pts; ++j) {
            double x = -hw + (double(j) + 0.5) * object.width / double(nx_pts);
            points.push_back({x, -hh, 0.0, -1.0});
            points.push_back({x, hh, 0.0, 1.0});
        }
        for (int j = 0; j < ny_pts; ++j) {
            double y = -hh + (double(j) + 0.5) * object.height / double(ny_pts);
            points.push_back({-hw, y, -1.0, 0.0});
            points.push_back({hw, y, 1.0, 0.0});
        }
    }
    return points;
}

double center_speed(const SceneObject& object) {
    const Trajectory& t = object.trajectory;
    if (t.kind == Trajectory::Kind::linear) return std::hypot(t.vel_x, t.vel_y);
    return t.orbit_radius * std::abs(t.angular_velocity);
}

// Extremes of cos/sin over the angle interval [lo, hi].
struct ArcExtent {
    double min_cos, max_cos, min_sin, max_sin;
};

ArcExtent arc_extent(double lo, double hi) {
    if (hi - lo >= kTau) return {-1.0, 1.0, -1.0, 1.0};
    auto contains = [&](double a) {
        double shifted = a + kTau * std::ceil((lo - a) / kTau);
        return shifted <= hi;
    };
    ArcExtent e{};
    e.max_cos = contains(0.0) ? 1.0 : std::max(std::cos(lo), std::cos(hi));
    e.min_cos = contains(std::numbers::pi) ? -1.0 : std::min(std::cos(lo), std::cos(hi));
    e.max_sin = contains(std::numbers::pi / 2.0) ? 1.0 : std::max(std::sin(lo), std::sin(hi));
    e.min_sin = contains(-std::numbers::pi / 2.0) ? -1.0 : std::min(std::sin(lo), std::sin(hi));
    return e;
}

}  // namespace

bool is_static(const SceneObject& object) {
    const Trajectory& t = object.trajectory;
    if (t.kind == Trajectory::Kind::linear) return t.vel_x == 0.0 && t.vel_y == 0.0;
    return t.angular_velocity == 0.0 || t.orbit_radius == 0.0;
}

void object_center(const Trajectory& t, double t_us, double& x, double& y) {
    const double s = t_us * 1e-6;
    if (t.kind == Trajectory::Kind::linear) {
        x = t.start_x + t.vel_x * s;
        y = t.start_y + t.vel_y * s;
    } else {
        double phi = t.phase + t.angular_velocity * s;
        x = t.center_x + t.orbit_radius * std::cos(phi);
        y = t.center_y + t.orbit_radius * std::sin(phi);
    }
}

void object_velocity(const Trajectory& t, double t_us, double& vx, double& vy) {
    if (t.kind == Trajectory::Kind::linear) {
        vx = t.vel_x;
        vy = t.vel_y;
    } else {
        double phi = t.phase + t.angular_velocity * (t_us * 1e-6);
        vx = -t.orbit_radius * t.angular_velocity * std::sin(phi);
        vy = t.orbit_radius * t.angular_velocity * std::cos(phi);
    }
}

BoundingBox analytic_box(const SceneObject& object, double t0_us, double t1_us) {
    const double hx = object.shape == SceneObject::Shape::disk ? object.radius
                                                               : object.width / 2.0;
    const double hy = object.shape == SceneObject::Shape::disk ? object.radius
                                                               : object.height / 2.0;
    double x_lo, x_hi, y_lo, y_hi;
    const Trajectory& t = object.trajectory;
    if (t.kind == Trajectory::Kind::linear) {
        double xa, ya, xb, yb;
        object_center(t, t0_us, xa, ya);
        object_center(t, t1_us, xb, yb);
        x_lo = std::min(xa, xb);
        x_hi = std::max(xa, xb);
        y_lo = std::min(ya, yb);
        y_hi = std::max(ya, yb);
    } else {
        double phi0 = t.phase + t.angular_velocity * (t0_us * 1e-6);
        double phi1 = t.phase + t.angular_velocity * (t1_us * 1e-6);
        ArcExtent e = arc_extent(std::min(phi0, phi1), std::max(phi0, phi1));
        x_lo = t.center_x + t.orbit_radius * e.min_cos;
        x_hi = t.center_x + t.orbit_radius * e.max_cos;
        y_lo = t.center_y + t.orbit_radius * e.min_sin;
        y_hi = t.center_y + t.orbit_radius * e.max_sin;
    }
    BoundingBox box;
    box.x_min = std::int32_t(std::floor(x_lo - hx));
    box.y_min = std::int32_t(std::floor(y_lo - hy));
    box.x_max = std::int32_t(std::ceil(x_hi + hx));
    box.y_max = std::int32_t(std::ceil(y_hi + hy));
    return box;
}

SceneScript parse_scene_script(const std::string& json_text, const std::string& where) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(where + ": " + e.what());
    }
    if (!doc.is_object()) throw ConfigError(where + ": expected a JSON object");
    reject_unknown_keys(doc, {"sensor", "duration_us", "frame_interval_us", "objects", "noise"},
                        where);

    SceneScript script;
    {
        const json& sensor = require(doc, "sensor", where);
        reject_unknown_keys(sensor, {"width", "height"}, where + ".sensor");
        std::uint64_t w = get_unsigned(require(sensor, "width", where + ".sensor"),
                                       where + ".sensor.width");
        std::uint64_t h = get_unsigned(require(sensor, "height", where + ".sensor"),
                                       where + ".sensor.height");
        if (w == 0 || h == 0 || w > 65535 || h > 65535) {
            throw ConfigError(where + ".sensor: dimensions must lie in [1, 65535]");
        }
        script.sensor_width = std::uint16_t(w);
        script.sensor_height = std::uint16_t(h);
    }
    script.duration_us = get_unsigned(require(doc, "duration_us", where), where + ".duration_us");
    script.frame_interval_us =
        get_unsigned(require(doc, "frame_interval_us", where), where + ".frame_interval_us");
    if (script.duration_us == 0) throw ConfigError(where + ".duration_us: must be positive");
    if (script.frame_interval_us == 0) {
        throw ConfigError(where + ".frame_interval_us: must be positive");
    }

    if (doc.contains("objects")) {
        if (!doc["objects"].is_array()) throw ConfigError(where + ".objects: expected an array");
        std::size_t idx = 0;
        for (const json& o : doc["objects"]) {
            const std::string ow = where + ".objects[" + std::to_string(idx++) + "]";
            reject_unknown_keys(
                o, {"shape", "radius", "width", "height", "trajectory",
                    "events_per_pixel_crossing"},
                ow);
            SceneObject object;
            const json& shape = require(o, "shape", ow);
            if (shape == "disk") {
                object.shape = SceneObject::Shape::disk;
                object.radius = get_number(require(o, "radius", ow), ow + ".radius");
                if (object.radius <= 0.0) throw ConfigError(ow + ".radius: must be positive");
                if (o.contains("width") || o.contains("height")) {
                    throw ConfigError(ow + ": width/height are rectangle fields");
                }
            } else if (shape == "rectangle") {
                object.shape = SceneObject::Shape::rectangle;
                object.width = get_number(require(o, "width", ow), ow + ".width");
                object.height = get_number(require(o, "height", ow), ow + ".height");
                if (object.width <= 0.0 || object.height <= 0.0) {
                    throw ConfigError(ow + ": width and height must be positive");
                }
                if (o.contains("radius")) throw ConfigError(ow + ": radius is a disk field");
            } else {
                throw ConfigError(ow + ".shape: expected 'disk' or 'rectangle'");
            }

            const json& traj = require(o, "trajectory", ow);
            const std::string tw = ow + ".trajectory";
            const json& kind = require(traj, "type", tw);
            if (kind == "linear") {
                reject_unknown_keys(traj, {"type", "start", "velocity"}, tw);
                object.trajectory.kind = Trajectory::Kind::linear;
                get_point(require(traj, "start", tw), tw + ".start", object.trajectory.start_x,
                          object.trajectory.start_y);
                get_point(require(traj, "velocity", tw), tw + ".velocity",
                          object.trajectory.vel_x, object.trajectory.vel_y);
            } else if (kind == "circular") {
                reject_unknown_keys(traj, {"type", "center", "radius", "angular_velocity", "phase"},
                                    tw);
                object.trajectory.kind = Trajectory::Kind::circular;
                get_point(require(traj, "center", tw), tw + ".center",
                          object.trajectory.center_x, object.trajectory.center_y);
                object.trajectory.orbit_radius =
                    get_number(require(traj, "radius", tw), tw + ".radius");
                if (object.trajectory.orbit_radius < 0.0) {
                    throw ConfigError(tw + ".radius: must be non-negative");
                }
                object.trajectory.angular_velocity =
                    get_number(require(traj, "angular_velocity", tw), tw + ".angular_velocity");
                if (traj.contains("phase")) {
                    object.trajectory.phase = get_number(traj["phase"], tw + ".phase");
                }
            } else {
                throw ConfigError(tw + ".type: expected 'linear' or 'circular'");
            }

            if (o.contains("events_per_pixel_crossing")) {
                object.events_per_pixel_crossing =
                    get_number(o["events_per_pixel_crossing"], ow + ".events_per_pixel_crossing");
                if (object.events_per_pixel_crossing < 0.0) {
                    throw ConfigError(ow + ".events_per_pixel_crossing: must be non-negative");
                }
            }
            script.objects.push_back(object);
        }
    }

    if (doc.contains("noise")) {
        const json& noise = doc["noise"];
        reject_unknown_keys(noise, {"background_rate", "seed"}, where + ".noise");
        script.noise.background_rate = get_number(
            require(noise, "background_rate", where + ".noise"), where + ".noise.background_rate");
        if (script.noise.background_rate < 0.0) {
            throw ConfigError(where + ".noise.background_rate: must be non-negative");
        }
        if (noise.contains("seed")) {
            script.noise.seed = get_unsigned(noise["seed"], where + ".noise.seed");
        }
    }

    for (std::size_t i = 0; i < script.objects.size(); ++i) {
        BoundingBox full = analytic_box(script.objects[i], 0.0, double(script.duration_us));
        if (full.x_min < 0 || full.y_min < 0 || full.x_max > script.sensor_width - 1 ||
            full.y_max > script.sensor_height - 1) {
            throw ConfigError(where + ".objects[" + std::to_string(i) +
                              "]: trajectory escapes sensor bounds, extent [" +
                              std::to_string(full.x_min) + "," + std::to_string(full.y_min) +
                              "," + std::to_string(full.x_max) + "," +
                              std::to_string(full.y_max) + "] vs " +
                              std::to_string(script.sensor_width) + "x" +
                              std::to_string(script.sensor_height));
        }
    }
    return script;
}

SceneScript read_scene_script(const std::string& path) {
    return parse_scene_script(read_file(path), path);
}

std::string scene_script_json(const SceneScript& script) {
    ordered_json doc;
    doc["sensor"] = {{"width", script.sensor_width}, {"height", script.sensor_height}};
    doc["duration_us"] = script.duration_us;
    doc["frame_interval_us"] = script.frame_interval_us;
    doc["objects"] = ordered_json::array();
    for (const SceneObject& o : script.objects) {
        ordered_json obj;
        if (o.shape == SceneObject::Shape::disk) {
            obj["shape"] = "disk";
            obj["radius"] = o.radius;
        } else {
            obj["shape"] = "rectangle";
            obj["width"] = o.width;
            obj["height"] = o.height;
        }
        ordered_json traj;
        if (o.trajectory.kind == Trajectory::Kind::linear) {
            traj["type"] = "linear";
            traj["start"] = {o.trajectory.start_x, o.trajectory.start_y};
            traj["velocity"] = {o.trajectory.vel_x, o.trajectory.vel_y};
        } else {
            traj["type"] = "circular";
            traj["center"] = {o.trajectory.center_x, o.trajectory.center_y};
            traj["radius"] = o.trajectory.orbit_radius;
            traj["angular_velocity"] = o.trajectory.angular_velocity;
            traj["phase"] = o.trajectory.phase;
        }
        obj["trajectory"] = std::move(traj);
        obj["events_per_pixel_crossing"] = o.events_per_pixel_crossing;
        doc["objects"].push_back(std::move(obj));
    }
    ordered_json noise;
    noise["background_rate"] = script.noise.background_rate;
    if (script.noise.seed) noise["seed"] = *script.noise.seed;
    doc["noise"] = std::move(noise);
    return doc.dump(2) + "\n";
}

SyntheticScene generate(const SceneScript& script, std::uint64_t seed) {
    SyntheticScene scene;
    scene.script = script;
    scene.partition_spec =
        PartitionSpec::uniform(script.frame_interval_us, 0, script.duration_us);
    scene.stream.sensor_width = script.sensor_width;
    scene.stream.sensor_height = script.sensor_height;

    Rng master(seed);
    const double duration_us = double(script.duration_us);

    for (std::size_t o = 0; o < script.objects.size(); ++o) {
        const SceneObject& object = script.objects[o];
        if (is_static(object) || object.events_per_pixel_crossing == 0.0) continue;
        Rng rng = master.fork(1 + std::uint64_t(o));
        const std::vector<BoundaryPoint> boundary = boundary_points(object);
        const double speed = center_speed(object);

        // Steps sized for about half a pixel of center motion.
        std::uint64_t step_us = std::uint64_t(std::clamp(0.5e6 / speed, 1.0, duration_us));
        for (std::uint64_t a = 0; a < script.duration_us; a += step_us) {
            const std::uint64_t b = std::min(a + step_us, script.duration_us);
            const double dt_s = double(b - a) * 1e-6;
            double vx, vy;
            object_velocity(object.trajectory, double(a + b) / 2.0, vx, vy);
            for (const BoundaryPoint& p : boundary) {
                const double normal_speed = std::abs(vx * p.nx + vy * p.ny);
                const double lambda =
                    object.events_per_pixel_crossing * normal_speed * dt_s;
                const std::uint64_t count = rng.next_poisson(lambda);
                for (std::uint64_t e = 0; e < count; ++e) {
                    const std::uint64_t t = a + rng.next_below(b - a);
                    double cx, cy, evx, evy;
                    object_center(object.trajectory, double(t), cx, cy);
                    object_velocity(object.trajectory, double(t), evx, evy);
                    const long px = std::llround(cx + p.off_x);
                    const long py = std::llround(cy + p.off_y);
                    if (px < 0 || py < 0 || px >= long(script.sensor_width) ||
                        py >= long(script.sensor_height)) {
                        throw Error("object event escaped validated bounds");
                    }
                    Event ev;
                    ev.x = std::uint16_t(px);
                    ev.y = std::uint16_t(py);
                    ev.t = t;
                    ev.polarity = (evx * p.nx + evy * p.ny) >= 0.0 ? 1 : -1;
                    scene.stream.events.push_back(ev);
                    scene.source_object.push_back(std::int32_t(o));
                }
            }
        }
    }

    if (script.noise.background_rate > 0.0) {
        Rng rng = script.noise.seed ? Rng(*script.noise.seed) : master.fork(0);
        const double area = double(script.sensor_width) * double(script.sensor_height);
        const double mean = script.noise.background_rate * area * duration_us * 1e-6;
        const std::uint64_t count = rng.next_poisson(mean);
        for (std::uint64_t e = 0; e < count; ++e) {
            Event ev;
            ev.x = std::uint16_t(rng.next_below(script.sensor_width));
            ev.y = std::uint16_t(rng.next_below(script.sensor_height));
            ev.t = rng.next_below(script.duration_us + 1);
            ev.polarity = rng.next_below(2) == 0 ? -1 : 1;
            scene.stream.events.push_back(ev);
            scene.source_object.push_back(-1);
        }
    }

    // Sort by time, carrying provenance along.
    std::vector<std::size_t> order(scene.stream.events.size());
    std::iota(order.begin(), order.end(), std::size_t(0));
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scene.stream.events[a].t < scene.stream.events[b].t;
    });
    std::vector<Event> sorted_events(order.size());
    std::vector<std::int32_t> sorted_source(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        sorted_events[i] = scene.stream.events[order[i]];
        sorted_source[i] = scene.source_object[order[i]];
    }
    scene.stream.events = std::move(sorted_events);
    scene.source_object = std::move(sorted_source);

    // Truth windows are closed on both ends; an event landing exactly on a
    // frame timestamp belongs to the earlier partition, whose window also
    // covers that instant.
    const std::size_t n_parts = scene.partition_spec.count();
    for (std::size_t i = 0; i < n_parts; ++i) {
        GroundTruthFrame frame;
        frame.partition_index = std::uint32_t(i + 1);
        const double lo = i == 0 ? 0.0 : double(scene.partition_spec.frame_timestamps[i - 1]);
        const double hi =
            double(std::min(scene.partition_spec.frame_timestamps[i], script.duration_us));
        for (const SceneObject& object : script.objects) {
            if (is_static(object)) continue;
            frame.boxes.push_back(analytic_box(object, lo, hi));
        }
        scene.truth.push_back(std::move(frame));
    }
    return scene;
}

}  // namespace evmod
