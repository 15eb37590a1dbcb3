#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "evmod/types.hpp"

namespace evmod {

struct GroundTruthFrame {
    std::uint32_t partition_index = 0;
    std::vector<BoundingBox> boxes;
};

struct DetectionFrame {
    std::uint32_t partition_index = 0;
    std::vector<BoundingBox> boxes;
};

struct PartitionScore {
    std::uint32_t partition_index = 0;
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;
};

struct EvalReport {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f_measure = 0.0;
    std::vector<PartitionScore> per_partition;
    double iou_threshold = 0.75;
};

// Intersection over union with inclusive pixel areas: a single-pixel box has
// area 1, width = x_max - x_min + 1.
double iou(const BoundingBox& a, const BoundingBox& b);

// 2PR/(P+R), or 0 when P+R = 0.
double f_measure(double precision, double recall);

// Greedy one-to-one matching per partition: pairs sorted by descending IoU
// (ties toward the lower detection index, then lower truth index), only
// pairs at or above `threshold` match. TP = matched pairs, FP = leftover
// detections, FN = leftover truth boxes, so tp + fn equals the total truth
// count. Every detection partition index must appear in `truth`; truth
// partitions without detections contribute only false negatives.
EvalReport match_and_score(const std::vector<DetectionFrame>& detections,
                           const std::vector<GroundTruthFrame>& truth,
                           double threshold = 0.75);

// Ground-truth JSON: {"partitions":[{"index":N,"boxes":[[x0,y0,x1,y1],...]}]}
std::vector<GroundTruthFrame> read_ground_truth(const std::filesystem::path& path);
void write_ground_truth(const std::filesystem::path& path,
                        const std::vector<GroundTruthFrame>& frames);

// Collects detection boxes from every report_*.json in a directory, as
// written by the detection pipeline. Reports with an insufficient-events
// status contribute an empty frame. A directory with no reports at all is
// almost certainly the wrong one and is rejected.
std::vector<DetectionFrame> read_detection_boxes(const std::filesystem::path& dir);

// EvalReport as JSON text, field order fixed.
std::string eval_report_json(const EvalReport& report);

}  // namespace evmod
