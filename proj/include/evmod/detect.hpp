#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "evmod/config.hpp"
#include "evmod/events.hpp"
#include "evmod/model_select.hpp"
#include "evmod/types.hpp"

namespace evmod {

struct Detection {
    std::uint32_t cluster_id = 0;
    BoundingBox box;
    std::uint32_t event_count = 0;          // sampled events in the cluster
    std::vector<std::uint32_t> member_events;  // indices into the sample
};

struct DetectionReport {
    std::uint32_t partition_index = 0;
    bool insufficient = false;
    std::uint32_t event_count = 0;  // events in the partition before sampling
    int chosen_k = 0;
    double sc = 0.0;
    std::uint32_t suppressed = 0;
    std::vector<Detection> detections;          // ascending cluster_id
    std::vector<SweepCandidate> sweep;          // for the k-vs-silhouette CSV
    std::vector<SkippedK> sweep_skipped;
};

// A report plus the sampled events and per-event labels behind it, enough to
// rasterize the partition. `sample`/`labels` are empty when insufficient.
struct PartitionOutput {
    DetectionReport report;
    SampledEvents sample;
    std::vector<std::uint32_t> labels;       // per sampled event
    std::vector<bool> cluster_suppressed;    // indexed by cluster id
};

// Per-axis quantile-trimmed hull of the members' pixel coordinates: the
// lowest and highest floor(trim * n) values of each axis are dropped before
// taking min/max. trim = 0 gives the exact hull.
BoundingBox extract_box(const std::vector<Event>& members, double trim_fraction);

// One partition end to end: sample, collapse duplicates, k-NN graph,
// silhouette sweep, suppression, boxes. Partitions below min_viable_events,
// or with too few distinct points to sweep, take the insufficient outcome.
PartitionOutput detect_partition(const EventPartition& part, const PipelineConfig& cfg);

// Partitions the stream per cfg.frame_interval_us (0 = one partition) and
// runs detect_partition on each, in partition order.
std::vector<PartitionOutput> detect_stream(const EventStream& stream, const PipelineConfig& cfg);

// JSON with fixed field order; byte-identical across runs with equal inputs.
std::string detection_report_json(const DetectionReport& report, const PipelineConfig& cfg);

// CSV "k,mean_silhouette" rows over the sweep, skipped k values omitted.
std::string sweep_csv(const DetectionReport& report);

// PPM render of a successful partition's sample, labels, and boxes.
std::string render_partition(const PartitionOutput& output);

}  // namespace evmod
