/* C interface to the event-stream moving-object detection pipeline.
 *
 * Every function that can fail returns evmod_status; on failure the
 * thread-local message from evmod_last_error() describes what went wrong.
 * Objects returned through out-parameters are owned by the caller and
 * released with the matching *_free function. Strings returned through
 * char** out-parameters are released with evmod_string_free.
 */
#ifndef EVMOD_H
#define EVMOD_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define EVMOD_API __declspec(dllexport)
#else
#define EVMOD_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum evmod_status {
    EVMOD_OK = 0,
    EVMOD_ERR_INVALID_ARGUMENT = 1,
    EVMOD_ERR_IO = 2,
    EVMOD_ERR_FORMAT = 3,
    EVMOD_ERR_CONFIG = 4,
    EVMOD_ERR_INTERNAL = 5,
} evmod_status;

typedef struct evmod_stream evmod_stream;
typedef struct evmod_config evmod_config;
typedef struct evmod_result evmod_result;
typedef struct evmod_eval evmod_eval;
typedef struct evmod_scene evmod_scene;

typedef struct evmod_partition_summary {
    uint32_t partition;       /* 1-based index */
    int32_t status;           /* 0 = detected, 1 = insufficient events */
    int32_t chosen_k;         /* 0 when insufficient */
    double sc;                /* silhouette coefficient at chosen_k */
    uint32_t detection_count; /* surviving clusters */
    uint32_t suppressed;      /* clusters dropped for being too small */
    uint32_t event_count;     /* partition events before sampling */
} evmod_partition_summary;

EVMOD_API const char* evmod_version(void);

/* Message for the most recent failure on this thread; never NULL. */
EVMOD_API const char* evmod_last_error(void);

EVMOD_API void evmod_string_free(char* text);

/* ---- event streams ---- */

/* Opens CSV or binary event files; the format is sniffed from the content. */
EVMOD_API evmod_status evmod_stream_open(const char* path, evmod_stream** out);
EVMOD_API evmod_status evmod_stream_write(const evmod_stream* stream, const char* path,
                                          int binary);
EVMOD_API evmod_status evmod_stream_info(const evmod_stream* stream, uint16_t* width,
                                         uint16_t* height, uint64_t* event_count);
EVMOD_API void evmod_stream_free(evmod_stream* stream);

/* ---- pipeline configuration ---- */

EVMOD_API evmod_status evmod_config_default(evmod_config** out);
EVMOD_API evmod_status evmod_config_load(const char* path, evmod_config** out);

/* Applies the keys present in a JSON fragment onto the config. */
EVMOD_API evmod_status evmod_config_update_json(evmod_config* config, const char* json_text);
EVMOD_API evmod_status evmod_config_dump_json(const evmod_config* config, char** out_json);
EVMOD_API void evmod_config_free(evmod_config* config);

/* ---- detection ---- */

/* Partitions the stream and runs the full pipeline on every partition. */
EVMOD_API evmod_status evmod_detect_run(const evmod_stream* stream, const evmod_config* config,
                                        evmod_result** out);
EVMOD_API size_t evmod_result_count(const evmod_result* result);
EVMOD_API evmod_status evmod_result_summary(const evmod_result* result, size_t index,
                                            evmod_partition_summary* out);
EVMOD_API evmod_status evmod_result_report_json(const evmod_result* result, size_t index,
                                                char** out_json);
EVMOD_API evmod_status evmod_result_sweep_csv(const evmod_result* result, size_t index,
                                              char** out_csv);

/* Writes the partition's PPM render; fails for insufficient partitions. */
EVMOD_API evmod_status evmod_result_write_render(const evmod_result* result, size_t index,
                                                 const char* path);
EVMOD_API void evmod_result_free(evmod_result* result);

/* ---- evaluation ---- */

/* Scores report_*.json files in a directory against a ground-truth file. */
EVMOD_API evmod_status evmod_eval_run(const char* detections_dir, const char* truth_path,
                                      double iou_threshold, evmod_eval** out);
EVMOD_API evmod_status evmod_eval_metrics(const evmod_eval* eval, double* recall,
                                          double* precision, double* f_measure);
EVMOD_API evmod_status evmod_eval_json(const evmod_eval* eval, char** out_json);
EVMOD_API void evmod_eval_free(evmod_eval* eval);

/* ---- synthetic scenes ---- */

EVMOD_API evmod_status evmod_scene_generate(const char* script_path, uint64_t seed,
                                            evmod_scene** out);
EVMOD_API evmod_status evmod_scene_write_events(const evmod_scene* scene, const char* path,
                                                int binary);
EVMOD_API evmod_status evmod_scene_write_truth(const evmod_scene* scene, const char* path);
EVMOD_API evmod_status evmod_scene_info(const evmod_scene* scene, uint64_t* event_count,
                                        uint32_t* partition_count, uint32_t* object_count);
EVMOD_API void evmod_scene_free(evmod_scene* scene);

#ifdef __cplusplus
}
#endif

#endif /* EVMOD_H */
