#include "evmod/eval.hpp"

#include <algorithm>
#include <json.hpp>
#include <map>
#include <tuple>

#include "evmod/error.hpp"
#include "evmod/io.hpp"

namespace evmod {

namespace {

using ordered_json = nlohmann::ordered_json;

double inclusive_area(const BoundingBox& b) {
    return double(b.width()) * double(b.height());
}

BoundingBox parse_box(const nlohmann::json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 4 || !std::all_of(j.begin(), j.end(), [](const auto& v) {
            return v.is_number_integer();
        })) {
        throw FormatError(where + ": box must be an array of 4 integers");
    }
    BoundingBox box{j[0].get<std::int32_t>(), j[1].get<std::int32_t>(),
                    j[2].get<std::int32_t>(), j[3].get<std::int32_t>()};
    if (!box.valid()) throw FormatError(where + ": box corners out of order");
    return box;
}

}  // namespace

double iou(const BoundingBox& a, const BoundingBox& b) {
    if (!a.valid() || !b.valid()) throw InvalidArgument("iou of an invalid box");
    const std::int32_t ix0 = std::max(a.x_min, b.x_min);
    const std::int32_t iy0 = std::max(a.y_min, b.y_min);
    const std::int32_t ix1 = std::min(a.x_max, b.x_max);
    const std::int32_t iy1 = std::min(a.y_max, b.y_max);
    if (ix1 < ix0 || iy1 < iy0) return 0.0;
    const double inter = double(ix1 - ix0 + 1) * double(iy1 - iy0 + 1);
    return inter / (inclusive_area(a) + inclusive_area(b) - inter);
}

double f_measure(double precision, double recall) {
    const double sum = precision + recall;
    return sum > 0.0 ? 2.0 * precision * recall / sum : 0.0;
}

EvalReport match_and_score(const std::vector<DetectionFrame>& detections,
                           const std::vector<GroundTruthFrame>& truth,
                           double threshold) {
    if (threshold < 0.0 || threshold > 1.0) {
        throw InvalidArgument("iou threshold must lie in [0, 1]");
    }

    std::map<std::uint32_t, const GroundTruthFrame*> truth_by_index;
    for (const GroundTruthFrame& frame : truth) {
        if (!truth_by_index.emplace(frame.partition_index, &frame).second) {
            throw InvalidArgument("duplicate ground-truth partition " +
                                  std::to_string(frame.partition_index));
        }
    }
    std::map<std::uint32_t, const DetectionFrame*> det_by_index;
    for (const DetectionFrame& frame : detections) {
        if (!det_by_index.emplace(frame.partition_index, &frame).second) {
            throw InvalidArgument("duplicate detection partition " +
                                  std::to_string(frame.partition_index));
        }
        if (!truth_by_index.count(frame.partition_index)) {
            throw InvalidArgument("detections reference partition " +
                                  std::to_string(frame.partition_index) +
                                  " with no ground truth");
        }
    }

    EvalReport report;
    report.iou_threshold = threshold;
    for (const auto& [index, gt_frame] : truth_by_index) {
        const std::vector<BoundingBox>* det_boxes = nullptr;
        if (auto it = det_by_index.find(index); it != det_by_index.end()) {
            det_boxes = &it->second->boxes;
        }
        const std::size_t n_det = det_boxes ? det_boxes->size() : 0;
        const std::size_t n_gt = gt_frame->boxes.size();

        // All candidate pairs at or above the threshold, best first.
        struct Pair {
            double overlap;
            std::size_t det;
            std::size_t gt;
        };
        std::vector<Pair> pairs;
        for (std::size_t d = 0; d < n_det; ++d) {
            for (std::size_t g = 0; g < n_gt; ++g) {
                double overlap = iou((*det_boxes)[d], gt_frame->boxes[g]);
                if (overlap >= threshold) pairs.push_back({overlap, d, g});
            }
        }
        std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
            return std::tie(b.overlap, a.det, a.gt) < std::tie(a.overlap, b.det, b.gt);
        });

        std::vector<bool> det_used(n_det, false);
        std::vector<bool> gt_used(n_gt, false);
        std::uint64_t tp = 0;
        for (const Pair& p : pairs) {
            if (det_used[p.det] || gt_used[p.gt]) continue;
            det_used[p.det] = true;
            gt_used[p.gt] = true;
            ++tp;
        }

        PartitionScore score;
        score.partition_index = index;
        score.tp = tp;
        score.fp = std::uint64_t(n_det) - tp;
        score.fn = std::uint64_t(n_gt) - tp;
        report.per_partition.push_back(score);
        report.tp += score.tp;
        report.fp += score.fp;
        report.fn += score.fn;
    }

    const std::uint64_t det_total = report.tp + report.fp;
    const std::uint64_t gt_total = report.tp + report.fn;
    report.precision = det_total > 0 ? double(report.tp) / double(det_total) : 0.0;
    report.recall = gt_total > 0 ? double(report.tp) / double(gt_total) : 0.0;
    report.f_measure = f_measure(report.precision, report.recall);
    return report;
}

std::vector<GroundTruthFrame> read_ground_truth(const std::filesystem::path& path) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    if (!doc.is_object() || !doc.contains("partitions") || !doc["partitions"].is_array()) {
        throw FormatError(path.string() + ": expected {\"partitions\": [...]}");
    }
    std::vector<GroundTruthFrame> frames;
    for (const auto& entry : doc["partitions"]) {
        if (!entry.is_object() || !entry.contains("index") || !entry.contains("boxes") ||
            !entry["index"].is_number_unsigned() || !entry["boxes"].is_array()) {
            throw FormatError(path.string() + ": partition entries need index and boxes");
        }
        GroundTruthFrame frame;
        frame.partition_index = entry["index"].get<std::uint32_t>();
        for (const auto& b : entry["boxes"]) {
            frame.boxes.push_back(parse_box(
                b, path.string() + " partition " + std::to_string(frame.partition_index)));
        }
        frames.push_back(std::move(frame));
    }
    std::sort(frames.begin(), frames.end(),
              [](const GroundTruthFrame& a, const GroundTruthFrame& b) {
                  return a.partition_index < b.partition_index;
              });
    for (std::size_t i = 1; i < frames.size(); ++i) {
        if (frames[i].partition_index == frames[i - 1].partition_index) {
            throw FormatError(path.string() + ": duplicate partition index " +
                              std::to_string(frames[i].partition_index));
        }
    }
    return frames;
}

void write_ground_truth(const std::filesystem::path& path,
                        const std::vector<GroundTruthFrame>& frames) {
    ordered_json doc;
    doc["partitions"] = ordered_json::array();
    for (const GroundTruthFrame& frame : frames) {
        ordered_json entry;
        entry["index"] = frame.partition_index;
        entry["boxes"] = ordered_json::array();
        for (const BoundingBox& b : frame.boxes) {
            entry["boxes"].push_back({b.x_min, b.y_min, b.x_max, b.y_max});
        }
        doc["partitions"].push_back(std::move(entry));
    }
    atomic_write_file(path, doc.dump(2) + "\n");
}

std::vector<DetectionFrame> read_detection_boxes(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) {
        throw IoError(dir.string() + " is not a directory");
    }
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const std::string name = entry.path().filename().string();
        if (name.rfind("report_", 0) == 0 && name.size() > 5 &&
            name.substr(name.size() - 5) == ".json") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) {
        throw InvalidArgument("no report_*.json files in " + dir.string());
    }

    std::vector<DetectionFrame> frames;
    for (const auto& file : files) {
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(read_file(file));
        } catch (const nlohmann::json::exception& e) {
            throw FormatError(file.string() + ": " + e.what());
        }
        if (!doc.is_object() || !doc.contains("partition") ||
            !doc["partition"].is_number_unsigned()) {
            throw FormatError(file.string() + ": missing partition index");
        }
        DetectionFrame frame;
        frame.partition_index = doc["partition"].get<std::uint32_t>();
        if (doc.contains("detections")) {
            if (!doc["detections"].is_array()) {
                throw FormatError(file.string() + ": detections must be an array");
            }
            for (const auto& det : doc["detections"]) {
                if (!det.is_object() || !det.contains("box")) {
                    throw FormatError(file.string() + ": detection entries need a box");
                }
                frame.boxes.push_back(parse_box(det["box"], file.string()));
            }
        } else if (!doc.contains("status")) {
            throw FormatError(file.string() + ": neither detections nor a status present");
        }
        frames.push_back(std::move(frame));
    }
    std::sort(frames.begin(), frames.end(),
              [](const DetectionFrame& a, const DetectionFrame& b) {
                  return a.partition_index < b.partition_index;
              });
    for (std::size_t i = 1; i < frames.size(); ++i) {
        if (frames[i].partition_index == frames[i - 1].partition_index) {
            throw FormatError(dir.string() + ": duplicate reports for partition " +
                              std::to_string(frames[i].partition_index));
        }
    }
    return frames;
}

std::string eval_report_json(const EvalReport& report) {
    ordered_json doc;
    doc["tp"] = report.tp;
    doc["fp"] = report.fp;
    doc["fn"] = report.fn;
    doc["precision"] = report.precision;
    doc["recall"] = report.recall;
    doc["f_measure"] = report.f_measure;
    doc["per_partition"] = ordered_json::array();
    for (const PartitionScore& score : report.per_partition) {
        ordered_json entry;
        entry["partition"] = score.partition_index;
        entry["tp"] = score.tp;
        entry["fp"] = score.fp;
        entry["fn"] = score.fn;
        doc["per_partition"].push_back(std::move(entry));
    }
    doc["iou_threshold"] = report.iou_threshold;
    return doc.dump(2) + "\n";
}

}  // namespace evmod
