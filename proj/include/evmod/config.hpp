#pragma once

#include <cstdint>
#include <string>

#include "evmod/model_select.hpp"
#include "evmod/spectral.hpp"

namespace evmod {

// Resolved pipeline settings. JSON echoes of this struct ride along in every
// report so a run can be reproduced from its outputs alone.
struct PipelineConfig {
    int knn_k = 30;
    int sample_n = 1000;
    KRange k_range;  // [2, 10]
    LaplacianMode laplacian_mode = LaplacianMode::generalized;
    double time_scale = 0.0;  // microseconds; 0 = span of each partition's events
    SilhouetteSpace silhouette_space = SilhouetteSpace::original_spacetime;
    double trim_fraction = 0.02;
    int min_cluster_size = 5;
    int min_viable_events = 16;
    std::uint64_t seed = 1;
    int restarts = 10;
    int max_iterations = 300;
    std::uint64_t frame_interval_us = 0;  // 0 = one partition spanning the stream
    bool include_polarity = false;
};

// Applies the keys present in `json_text` onto `base`; unknown keys and
// out-of-range values raise ConfigError naming the offending field.
void apply_pipeline_config(PipelineConfig& base, const std::string& json_text,
                           const std::string& where);

PipelineConfig parse_pipeline_config(const std::string& json_text, const std::string& where);
PipelineConfig read_pipeline_config(const std::string& path);

// Full canonical echo, every field explicit. time_scale 0 echoes as "auto".
std::string pipeline_config_json(const PipelineConfig& cfg);

}  // namespace evmod
