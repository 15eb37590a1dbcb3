#include "evmod/detect.hpp"

#include <algorithm>
#include <json.hpp>

#include "evmod/error.hpp"
#include "evmod/graph.hpp"
#include "evmod/render.hpp"
#include "evmod/rng.hpp"

namespace evmod {

namespace {

using ordered_json = nlohmann::ordered_json;

std::int32_t trimmed_bound(std::vector<std::int32_t>& values, std::size_t drop, bool upper) {
    std::sort(values.begin(), values.end());
    return upper ? values[values.size() - 1 - drop] : values[drop];
}

}  // namespace

BoundingBox extract_box(const std::vector<Event>& members, double trim_fraction) {
    if (members.empty()) throw InvalidArgument("cannot box an empty cluster");
    if (trim_fraction < 0.0 || trim_fraction >= 0.5) {
        throw InvalidArgument("trim_fraction must lie in [0, 0.5)");
    }
    const std::size_t drop = std::size_t(trim_fraction * double(members.size()));

    std::vector<std::int32_t> xs, ys;
    xs.reserve(members.size());
    ys.reserve(members.size());
    for (const Event& e : members) {
        xs.push_back(e.x);
        ys.push_back(e.y);
    }
    BoundingBox box;
    box.x_min = trimmed_bound(xs, drop, false);
    box.x_max = trimmed_bound(xs, drop, true);
    box.y_min = trimmed_bound(ys, drop, false);
    box.y_max = trimmed_bound(ys, drop, true);
    return box;
}

PartitionOutput detect_partition(const EventPartition& part, const PipelineConfig& cfg) {
    PartitionOutput out;
    out.report.partition_index = part.index;
    out.report.event_count = std::uint32_t(part.events.size());
    if (part.events.size() < std::size_t(cfg.min_viable_events)) {
        out.report.insufficient = true;
        return out;
    }

    // All per-partition randomness descends from one forked stream, so
    // partitions are independent and the whole run replays from cfg.seed.
    Rng part_rng = Rng(cfg.seed).fork(part.index);
    const std::uint64_t sample_seed = part_rng.fork(0).next_u64();
    const std::uint64_t solver_seed = part_rng.fork(1).next_u64();

    out.sample = sample_uniform(part, std::size_t(cfg.sample_n), sample_seed, cfg.time_scale);
    Eigen::MatrixXd coords = clustering_coords(out.sample, cfg.include_polarity);
    DedupedPoints dedup = collapse_duplicates(coords);

    const Eigen::Index n_unique = dedup.points.rows();
    if (n_unique < Eigen::Index(cfg.k_range.lo) + 1) {
        out.report.insufficient = true;
        out.sample = SampledEvents{};
        return out;
    }

    const int k_eff = std::min<int>(cfg.knn_k, int(n_unique) - 1);
    NeighborGraph graph = build_knn_graph(dedup.points, k_eff);

    SweepConfig sweep_cfg;
    sweep_cfg.solver.mode = cfg.laplacian_mode;
    sweep_cfg.solver.seed = solver_seed;
    sweep_cfg.solver.kmeans.restarts = cfg.restarts;
    sweep_cfg.solver.kmeans.max_iterations = cfg.max_iterations;
    sweep_cfg.silhouette_space = cfg.silhouette_space;

    KRange range{cfg.k_range.lo, std::min<int>(cfg.k_range.hi, int(n_unique) - 1)};
    SweepResult sweep = sweep_k(dedup.points, graph, range, sweep_cfg);

    out.labels.resize(out.sample.size());
    for (std::size_t i = 0; i < out.labels.size(); ++i) {
        out.labels[i] = sweep.assignment.labels[dedup.origin[i]];
    }

    out.report.chosen_k = sweep.best_k;
    out.report.sc = sweep.sc;
    out.report.sweep = sweep.candidates;
    out.report.sweep_skipped = std::move(sweep.skipped);

    std::vector<std::vector<std::uint32_t>> members(std::size_t(sweep.best_k));
    for (std::uint32_t i = 0; i < out.labels.size(); ++i) {
        members[out.labels[i]].push_back(i);
    }
    out.cluster_suppressed.assign(std::size_t(sweep.best_k), false);
    for (std::uint32_t c = 0; c < members.size(); ++c) {
        if (members[c].size() < std::size_t(cfg.min_cluster_size)) {
            out.cluster_suppressed[c] = true;
            out.report.suppressed += 1;
            continue;
        }
        Detection det;
        det.cluster_id = c;
        det.event_count = std::uint32_t(members[c].size());
        std::vector<Event> cluster_events;
        cluster_events.reserve(members[c].size());
        for (std::uint32_t i : members[c]) {
            cluster_events.push_back(out.sample.source_events[i]);
        }
        det.box = extract_box(cluster_events, cfg.trim_fraction);
        det.member_events = std::move(members[c]);
        out.report.detections.push_back(std::move(det));
    }
    return out;
}

std::vector<PartitionOutput> detect_stream(const EventStream& stream,
                                           const PipelineConfig& cfg) {
    if (stream.events.empty()) throw FormatError("stream contains no events");

    PartitionSpec spec;
    if (cfg.frame_interval_us > 0) {
        spec = PartitionSpec::uniform(cfg.frame_interval_us, stream.events.front().t,
                                      stream.events.back().t);
    } else {
        spec.frame_timestamps.push_back(stream.events.back().t);
    }

    PartitionResult parts = partition(stream, spec);
    std::vector<PartitionOutput> outputs;
    outputs.reserve(parts.partitions.size());
    for (const EventPartition& part : parts.partitions) {
        outputs.push_back(detect_partition(part, cfg));
    }
    return outputs;
}

std::string detection_report_json(const DetectionReport& report, const PipelineConfig& cfg) {
    ordered_json doc;
    doc["partition"] = report.partition_index;
    if (report.insufficient) {
        doc["status"] = "insufficient_events";
        doc["event_count"] = report.event_count;
    } else {
        doc["chosen_k"] = report.chosen_k;
        doc["sc"] = report.sc;
        doc["suppressed"] = report.suppressed;
        doc["detections"] = ordered_json::array();
        for (const Detection& det : report.detections) {
            ordered_json entry;
            entry["cluster_id"] = det.cluster_id;
            entry["box"] = {det.box.x_min, det.box.y_min, det.box.x_max, det.box.y_max};
            entry["event_count"] = det.event_count;
            doc["detections"].push_back(std::move(entry));
        }
    }
    doc["config"] = ordered_json::parse(pipeline_config_json(cfg));
    return doc.dump(2) + "\n";
}

std::string sweep_csv(const DetectionReport& report) {
    std::string out = "k,mean_silhouette\n";
    for (const SweepCandidate& c : report.sweep) {
        out += std::to_string(c.k) + "," + nlohmann::json(c.mean_silhouette).dump() + "\n";
    }
    return out;
}

std::string render_partition(const PartitionOutput& output) {
    if (output.report.insufficient) {
        throw InvalidArgument("insufficient partition has nothing to render");
    }
    std::vector<std::pair<std::uint32_t, BoundingBox>> boxes;
    boxes.reserve(output.report.detections.size());
    for (const Detection& det : output.report.detections) {
        boxes.emplace_back(det.cluster_id, det.box);
    }
    return render_ppm(output.sample.sensor_width, output.sample.sensor_height,
                      output.sample.source_events, output.labels, output.cluster_suppressed,
                      boxes);
}

}  // namespace evmod
