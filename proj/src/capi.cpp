#include "evmod.h"

#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#include "evmod/config.hpp"
#include "evmod/detect.hpp"
#include "evmod/error.hpp"
#include "evmod/eval.hpp"
#include "evmod/events.hpp"
#include "evmod/io.hpp"
#include "evmod/synth.hpp"

struct evmod_stream {
    evmod::EventStream data;
};

struct evmod_config {
    evmod::PipelineConfig data;
};

struct evmod_result {
    std::vector<evmod::PartitionOutput> outputs;
    evmod::PipelineConfig config;
};

struct evmod_eval {
    evmod::EvalReport report;
};

struct evmod_scene {
    evmod::SyntheticScene scene;
};

namespace {

thread_local std::string g_last_error;

evmod_status fail(evmod_status status, const char* message) {
    g_last_error = message;
    return status;
}

template <typename Fn>
evmod_status guard(Fn&& fn) {
    try {
        fn();
        return EVMOD_OK;
    } catch (const evmod::ConfigError& e) {
        return fail(EVMOD_ERR_CONFIG, e.what());
    } catch (const evmod::FormatError& e) {
        return fail(EVMOD_ERR_FORMAT, e.what());
    } catch (const evmod::IoError& e) {
        return fail(EVMOD_ERR_IO, e.what());
    } catch (const evmod::InvalidArgument& e) {
        return fail(EVMOD_ERR_INVALID_ARGUMENT, e.what());
    } catch (const std::exception& e) {
        return fail(EVMOD_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(EVMOD_ERR_INTERNAL, "unknown error");
    }
}

char* dup_string(const std::string& text) {
    char* out = static_cast<char*>(std::malloc(text.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, text.data(), text.size() + 1);
    return out;
}

evmod_status require(bool ok, const char* what) {
    return ok ? EVMOD_OK : fail(EVMOD_ERR_INVALID_ARGUMENT, what);
}

const evmod::PartitionOutput* output_at(const evmod_result* result, size_t index) {
    if (!result || index >= result->outputs.size()) return nullptr;
    return &result->outputs[index];
}

}  // namespace

extern "C" {

const char* evmod_version(void) { return "0.1.0"; }

const char* evmod_last_error(void) { return g_last_error.c_str(); }

void evmod_string_free(char* text) { std::free(text); }

evmod_status evmod_stream_open(const char* path, evmod_stream** out) {
    if (evmod_status s = require(path && out, "stream_open: NULL argument")) return s;
    return guard([&] {
        auto handle = new evmod_stream{evmod::read_event_stream_auto(path)};
        *out = handle;
    });
}

evmod_status evmod_stream_write(const evmod_stream* stream, const char* path, int binary) {
    if (evmod_status s = require(stream && path, "stream_write: NULL argument")) return s;
    return guard([&] {
        evmod::write_event_stream(stream->data, path,
                                  binary ? evmod::StreamFormat::binary
                                         : evmod::StreamFormat::csv);
    });
}

evmod_status evmod_stream_info(const evmod_stream* stream, uint16_t* width, uint16_t* height,
                               uint64_t* event_count) {
    if (evmod_status s = require(stream != nullptr, "stream_info: NULL stream")) return s;
    if (width) *width = stream->data.sensor_width;
    if (height) *height = stream->data.sensor_height;
    if (event_count) *event_count = stream->data.events.size();
    return EVMOD_OK;
}

void evmod_stream_free(evmod_stream* stream) { delete stream; }

evmod_status evmod_config_default(evmod_config** out) {
    if (evmod_status s = require(out != nullptr, "config_default: NULL out")) return s;
    return guard([&] { *out = new evmod_config{}; });
}

evmod_status evmod_config_load(const char* path, evmod_config** out) {
    if (evmod_status s = require(path && out, "config_load: NULL argument")) return s;
    return guard([&] { *out = new evmod_config{evmod::read_pipeline_config(path)}; });
}

evmod_status evmod_config_update_json(evmod_config* config, const char* json_text) {
    if (evmod_status s = require(config && json_text, "config_update_json: NULL argument")) {
        return s;
    }
    return guard([&] { evmod::apply_pipeline_config(config->data, json_text, "config update"); });
}

evmod_status evmod_config_dump_json(const evmod_config* config, char** out_json) {
    if (evmod_status s = require(config && out_json, "config_dump_json: NULL argument")) return s;
    return guard([&] { *out_json = dup_string(evmod::pipeline_config_json(config->data)); });
}

void evmod_config_free(evmod_config* config) { delete config; }

evmod_status evmod_detect_run(const evmod_stream* stream, const evmod_config* config,
                              evmod_result** out) {
    if (evmod_status s = require(stream && config && out, "detect_run: NULL argument")) return s;
    return guard([&] {
        auto result = new evmod_result{};
        try {
            result->outputs = evmod::detect_stream(stream->data, config->data);
            result->config = config->data;
        } catch (...) {
            delete result;
            throw;
        }
        *out = result;
    });
}

size_t evmod_result_count(const evmod_result* result) {
    return result ? result->outputs.size() : 0;
}

evmod_status evmod_result_summary(const evmod_result* result, size_t index,
                                  evmod_partition_summary* out) {
    const evmod::PartitionOutput* output = output_at(result, index);
    if (evmod_status s = require(output && out, "result_summary: bad result, index, or out")) {
        return s;
    }
    const evmod::DetectionReport& r = output->report;
    out->partition = r.partition_index;
    out->status = r.insufficient ? 1 : 0;
    out->chosen_k = r.chosen_k;
    out->sc = r.sc;
    out->detection_count = uint32_t(r.detections.size());
    out->suppressed = r.suppressed;
    out->event_count = r.event_count;
    return EVMOD_OK;
}

evmod_status evmod_result_report_json(const evmod_result* result, size_t index,
                                      char** out_json) {
    const evmod::PartitionOutput* output = output_at(result, index);
    if (evmod_status s = require(output && out_json, "result_report_json: bad result or index")) {
        return s;
    }
    return guard([&] {
        *out_json = dup_string(evmod::detection_report_json(output->report, result->config));
    });
}

evmod_status evmod_result_sweep_csv(const evmod_result* result, size_t index, char** out_csv) {
    const evmod::PartitionOutput* output = output_at(result, index);
    if (evmod_status s = require(output && out_csv, "result_sweep_csv: bad result or index")) {
        return s;
    }
    return guard([&] { *out_csv = dup_string(evmod::sweep_csv(output->report)); });
}

evmod_status evmod_result_write_render(const evmod_result* result, size_t index,
                                       const char* path) {
    const evmod::PartitionOutput* output = output_at(result, index);
    if (evmod_status s = require(output && path, "result_write_render: bad result or index")) {
        return s;
    }
    return guard([&] { evmod::atomic_write_file(path, evmod::render_partition(*output)); });
}

void evmod_result_free(evmod_result* result) { delete result; }

evmod_status evmod_eval_run(const char* detections_dir, const char* truth_path,
                            double iou_threshold, evmod_eval** out) {
    if (evmod_status s = require(detections_dir && truth_path && out, "eval_run: NULL argument")) {
        return s;
    }
    return guard([&] {
        auto detections = evmod::read_detection_boxes(detections_dir);
        auto truth = evmod::read_ground_truth(truth_path);
        *out = new evmod_eval{evmod::match_and_score(detections, truth, iou_threshold)};
    });
}

evmod_status evmod_eval_metrics(const evmod_eval* eval, double* recall, double* precision,
                                double* f_measure) {
    if (evmod_status s = require(eval != nullptr, "eval_metrics: NULL eval")) return s;
    if (recall) *recall = eval->report.recall;
    if (precision) *precision = eval->report.precision;
    if (f_measure) *f_measure = eval->report.f_measure;
    return EVMOD_OK;
}

evmod_status evmod_eval_json(const evmod_eval* eval, char** out_json) {
    if (evmod_status s = require(eval && out_json, "eval_json: NULL argument")) return s;
    return guard([&] { *out_json = dup_string(evmod::eval_report_json(eval->report)); });
}

void evmod_eval_free(evmod_eval* eval) { delete eval; }

evmod_status evmod_scene_generate(const char* script_path, uint64_t seed, evmod_scene** out) {
    if (evmod_status s = require(script_path && out, "scene_generate: NULL argument")) return s;
    return guard([&] {
        evmod::SceneScript script = evmod::read_scene_script(script_path);
        *out = new evmod_scene{evmod::generate(script, seed)};
    });
}

evmod_status evmod_scene_write_events(const evmod_scene* scene, const char* path, int binary) {
    if (evmod_status s = require(scene && path, "scene_write_events: NULL argument")) return s;
    return guard([&] {
        evmod::write_event_stream(scene->scene.stream, path,
                                  binary ? evmod::StreamFormat::binary
                                         : evmod::StreamFormat::csv);
    });
}

evmod_status evmod_scene_write_truth(const evmod_scene* scene, const char* path) {
    if (evmod_status s = require(scene && path, "scene_write_truth: NULL argument")) return s;
    return guard([&] { evmod::write_ground_truth(path, scene->scene.truth); });
}

evmod_status evmod_scene_info(const evmod_scene* scene, uint64_t* event_count,
                              uint32_t* partition_count, uint32_t* object_count) {
    if (evmod_status s = require(scene != nullptr, "scene_info: NULL scene")) return s;
    if (event_count) *event_count = scene->scene.stream.events.size();
    if (partition_count) *partition_count = uint32_t(scene->scene.partition_spec.count());
    if (object_count) *object_count = uint32_t(scene->scene.script.objects.size());
    return EVMOD_OK;
}

void evmod_scene_free(evmod_scene* scene) { delete scene; }

}  // extern "C"
