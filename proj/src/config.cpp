#include "evmod/config.hpp"

#include <json.hpp>

#include "evmod/error.hpp"
#include "evmod/io.hpp"

namespace evmod {

namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

int get_int(const json& v, const std::string& where, int lo, int hi) {
    if (!v.is_number_integer()) throw ConfigError(where + ": expected an integer");
    auto value = v.get<std::int64_t>();
    if (value < lo || value > hi) {
        throw ConfigError(where + ": " + std::to_string(value) + " outside [" +
                          std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
    return int(value);
}

double get_real(const json& v, const std::string& where, double lo, double hi) {
    if (!v.is_number()) throw ConfigError(where + ": expected a number");
    double value = v.get<double>();
    if (!(value >= lo && value <= hi)) {
        throw ConfigError(where + ": " + std::to_string(value) + " outside [" +
                          std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
    return value;
}

}  // namespace

void apply_pipeline_config(PipelineConfig& base, const std::string& json_text,
                           const std::string& where) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(where + ": " + e.what());
    }
    if (!doc.is_object()) throw ConfigError(where + ": expected a JSON object");

    for (const auto& [key, value] : doc.items()) {
        const std::string field = where + ": " + key;
        if (key == "knn_k") {
            base.knn_k = get_int(value, field, 1, 1 << 20);
        } else if (key == "sample_n") {
            base.sample_n = get_int(value, field, 2, 1 << 24);
        } else if (key == "k_range") {
            if (!value.is_array() || value.size() != 2) {
                throw ConfigError(field + ": expected [lo, hi]");
            }
            base.k_range.lo = get_int(value[0], field + "[0]", 2, 1 << 16);
            base.k_range.hi = get_int(value[1], field + "[1]", 2, 1 << 16);
            if (base.k_range.lo > base.k_range.hi) {
                throw ConfigError(field + ": lo exceeds hi");
            }
        } else if (key == "laplacian_mode") {
            if (value == "generalized") {
                base.laplacian_mode = LaplacianMode::generalized;
            } else if (value == "unnormalized") {
                base.laplacian_mode = LaplacianMode::unnormalized;
            } else {
                throw ConfigError(field + ": expected 'generalized' or 'unnormalized'");
            }
        } else if (key == "time_scale") {
            if (value == "auto") {
                base.time_scale = 0.0;
            } else {
                base.time_scale = get_real(value, field, 1e-9, 1e18);
            }
        } else if (key == "silhouette_space") {
            if (value == "original") {
                base.silhouette_space = SilhouetteSpace::original_spacetime;
            } else if (value == "embedding") {
                base.silhouette_space = SilhouetteSpace::embedding;
            } else {
                throw ConfigError(field + ": expected 'original' or 'embedding'");
            }
        } else if (key == "trim_fraction") {
            base.trim_fraction = get_real(value, field, 0.0, 0.499999);
        } else if (key == "min_cluster_size") {
            base.min_cluster_size = get_int(value, field, 1, 1 << 24);
        } else if (key == "min_viable_events") {
            base.min_viable_events = get_int(value, field, 1, 1 << 30);
        } else if (key == "seed") {
            if (!value.is_number_unsigned()) {
                throw ConfigError(field + ": expected a non-negative integer");
            }
            base.seed = value.get<std::uint64_t>();
        } else if (key == "restarts") {
            base.restarts = get_int(value, field, 1, 10000);
        } else if (key == "max_iterations") {
            base.max_iterations = get_int(value, field, 1, 1 << 20);
        } else if (key == "frame_interval_us") {
            if (!value.is_number_unsigned()) {
                throw ConfigError(field + ": expected a non-negative integer");
            }
            base.frame_interval_us = value.get<std::uint64_t>();
        } else if (key == "include_polarity") {
            if (!value.is_boolean()) throw ConfigError(field + ": expected a boolean");
            base.include_polarity = value.get<bool>();
        } else {
            throw ConfigError(where + ": unknown key '" + key + "'");
        }
    }
}

PipelineConfig parse_pipeline_config(const std::string& json_text, const std::string& where) {
    PipelineConfig cfg;
    apply_pipeline_config(cfg, json_text, where);
    return cfg;
}

PipelineConfig read_pipeline_config(const std::string& path) {
    return parse_pipeline_config(read_file(path), path);
}

std::string pipeline_config_json(const PipelineConfig& cfg) {
    ordered_json doc;
    doc["knn_k"] = cfg.knn_k;
    doc["sample_n"] = cfg.sample_n;
    doc["k_range"] = {cfg.k_range.lo, cfg.k_range.hi};
    doc["laplacian_mode"] =
        cfg.laplacian_mode == LaplacianMode::generalized ? "generalized" : "unnormalized";
    if (cfg.time_scale > 0.0) {
        doc["time_scale"] = cfg.time_scale;
    } else {
        doc["time_scale"] = "auto";
    }
    doc["silhouette_space"] =
        cfg.silhouette_space == SilhouetteSpace::embedding ? "embedding" : "original";
    doc["trim_fraction"] = cfg.trim_fraction;
    doc["min_cluster_size"] = cfg.min_cluster_size;
    doc["min_viable_events"] = cfg.min_viable_events;
    doc["seed"] = cfg.seed;
    doc["restarts"] = cfg.restarts;
    doc["max_iterations"] = cfg.max_iterations;
    doc["frame_interval_us"] = cfg.frame_interval_us;
    doc["include_polarity"] = cfg.include_polarity;
    return doc.dump(2);
}

}  // namespace evmod
