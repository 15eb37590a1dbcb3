#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "evmod/types.hpp"

namespace evmod {

enum class StreamFormat { csv, binary };

// Frame timestamps T_1 < T_2 < ... < T_S that slice the space-time volume.
struct PartitionSpec {
    std::vector<std::uint64_t> frame_timestamps;

    std::size_t count() const { return frame_timestamps.size(); }

    // Evenly spaced timestamps anchor + i*interval, i = 1..S, where S is the
    // smallest count whose last timestamp reaches t_max. The anchor is snapped
    // to the interval grid at or below t_first so streams that do not start
    // near zero do not produce an absurd number of leading empty partitions.
    static PartitionSpec uniform(std::uint64_t interval_us, std::uint64_t t_first,
                                 std::uint64_t t_max);
};

// Events with T_{i-1} < t <= T_i. Boundary ties go to the earlier partition.
struct EventPartition {
    std::uint32_t index = 0;  // 1-based
    std::uint16_t sensor_width = 0;
    std::uint16_t sensor_height = 0;
    std::vector<Event> events;

    std::size_t size() const { return events.size(); }
};

struct PartitionResult {
    std::vector<EventPartition> partitions;
    std::uint64_t dropped = 0;  // events with t > T_S
};

// N events drawn from one partition, with normalized space-time coordinates.
// Row i of points is (x/W, y/H, (t - t_start)/time_scale) for source_events[i];
// rows are ordered by t. Keeping the originating events makes the
// normalization trivially invertible.
struct SampledEvents {
    std::uint32_t partition_index = 0;
    Eigen::MatrixXd points;  // N x 3
    std::vector<Event> source_events;
    std::uint64_t rng_seed = 0;

    std::uint16_t sensor_width = 0;
    std::uint16_t sensor_height = 0;
    std::uint64_t t_start = 0;
    double time_scale = 1.0;

    std::size_t size() const { return source_events.size(); }

    // Maps a normalized row back to integer pixel/time coordinates.
    Event denormalize(std::size_t row) const;
};

// Reads a stream in the declared format, validating bounds against the file
// header. Out-of-order input is sorted; a note is appended to `warnings` when
// that (or any other recoverable oddity) happens.
EventStream read_event_stream(const std::string& path, StreamFormat format,
                              std::vector<std::string>* warnings = nullptr);

// Sniffs CSV vs binary from the leading magic bytes.
EventStream read_event_stream_auto(const std::string& path,
                                   std::vector<std::string>* warnings = nullptr);

void write_event_stream(const EventStream& stream, const std::string& path, StreamFormat format);

// Splits the stream by the spec timestamps. Every event with t <= T_S lands in
// exactly one partition; later events are counted in `dropped`.
PartitionResult partition(const EventStream& stream, const PartitionSpec& spec);

// Uniform sampling without replacement, deterministic for a fixed seed. Takes
// the whole partition when n >= P_i. time_scale <= 0 selects the partition's
// event time span (so normalized t spans [0, 1]).
SampledEvents sample_uniform(const EventPartition& part, std::size_t n, std::uint64_t seed,
                             double time_scale = 0.0);

// Clustering coordinates for a sample: the normalized 3-vectors, optionally
// with polarity appended as a fourth coordinate mapped to {0, 1}.
Eigen::MatrixXd clustering_coords(const SampledEvents& sample, bool include_polarity);

}  // namespace evmod
