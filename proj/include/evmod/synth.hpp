#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "evmod/eval.hpp"
#include "evmod/events.hpp"
#include "evmod/types.hpp"

namespace evmod {

// Constant-velocity or constant-angular-velocity path of an object's center.
// Positions are pixels, velocities pixels per second, angles radians.
struct Trajectory {
    enum class Kind { linear, circular };
    Kind kind = Kind::linear;
    double start_x = 0.0, start_y = 0.0;
    double vel_x = 0.0, vel_y = 0.0;
    double center_x = 0.0, center_y = 0.0;
    double orbit_radius = 0.0;
    double angular_velocity = 0.0;
    double phase = 0.0;
};

struct SceneObject {
    enum class Shape { disk, rectangle };
    Shape shape = Shape::disk;
    double radius = 0.0;          // disk
    double width = 0.0, height = 0.0;  // rectangle
    Trajectory trajectory;
    double events_per_pixel_crossing = 4.0;
};

struct NoiseSpec {
    double background_rate = 0.0;  // events per pixel per second
    std::optional<std::uint64_t> seed;  // defaults to a stream forked from the scene seed
};

struct SceneScript {
    std::uint16_t sensor_width = 0;
    std::uint16_t sensor_height = 0;
    std::uint64_t duration_us = 0;
    std::uint64_t frame_interval_us = 0;
    std::vector<SceneObject> objects;
    NoiseSpec noise;
};

struct SyntheticScene {
    EventStream stream;
    std::vector<GroundTruthFrame> truth;  // one frame per partition, moving objects only
    PartitionSpec partition_spec;
    SceneScript script;
    // Object index per event aligned with stream.events; -1 marks noise.
    std::vector<std::int32_t> source_object;
};

// An object with no center motion emits no events and never enters the truth.
bool is_static(const SceneObject& object);

// Center position / velocity at a microsecond timestamp.
void object_center(const Trajectory& t, double t_us, double& x, double& y);
void object_velocity(const Trajectory& t, double t_us, double& vx, double& vy);

// Tight integer hull of the object's extent over a closed time window,
// floor/ceil so that every rounded event position stays inside.
BoundingBox analytic_box(const SceneObject& object, double t0_us, double t1_us);

// ConfigError on schema violations, unknown keys, or a trajectory whose
// extent leaves the sensor at any time in [0, duration].
SceneScript parse_scene_script(const std::string& json_text, const std::string& where);
SceneScript read_scene_script(const std::string& path);

// Canonical JSON echo of a parsed script.
std::string scene_script_json(const SceneScript& script);

// Boundary-crossing event model: each boundary point of a moving object
// emits Poisson events at rate proportional to its normal-direction motion,
// polarity +1 on the leading edge and -1 on the trailing edge. Background
// shot noise is uniform over the sensor and the duration. Event times are
// exact microseconds, so partition membership matches the analytic truth
// windows. Deterministic per (script, seed).
SyntheticScene generate(const SceneScript& script, std::uint64_t seed);

}  // namespace evmod
