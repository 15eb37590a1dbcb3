#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include <CLI11.hpp>

#include "evmod.h"

namespace {

namespace fs = std::filesystem;

int exit_for(evmod_status status) {
    switch (status) {
        case EVMOD_OK:
            return 0;
        case EVMOD_ERR_CONFIG:
        case EVMOD_ERR_INVALID_ARGUMENT:
            return 1;
        default:
            return 2;  // IO, format, internal
    }
}

[[nodiscard]] int complain(evmod_status status) {
    std::fprintf(stderr, "error: %s\n", evmod_last_error());
    return exit_for(status);
}

bool write_file_atomic(const fs::path& path, const char* data, size_t size) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out.write(data, std::streamsize(size))) return false;
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    return !ec;
}

int fail_write(const fs::path& path) {
    std::fprintf(stderr, "error: cannot write %s\n", path.string().c_str());
    return 2;
}

struct ConfigHandle {
    evmod_config* ptr = nullptr;
    ~ConfigHandle() { evmod_config_free(ptr); }
};

struct StreamHandle {
    evmod_stream* ptr = nullptr;
    ~StreamHandle() { evmod_stream_free(ptr); }
};

struct ResultHandle {
    evmod_result* ptr = nullptr;
    ~ResultHandle() { evmod_result_free(ptr); }
};

struct OwnedString {
    char* ptr = nullptr;
    ~OwnedString() { evmod_string_free(ptr); }
};

struct PipelineOptions {
    std::string input;
    std::string config_path;
    std::string out_dir = ".";
    std::string k_range;
    std::uint64_t seed = 0;
    int knn = 0;
    bool seed_set = false, knn_set = false;
};

// Builds the resolved config from --config plus flag overrides.
int load_config(const PipelineOptions& opt, ConfigHandle& config) {
    evmod_status status = opt.config_path.empty()
                              ? evmod_config_default(&config.ptr)
                              : evmod_config_load(opt.config_path.c_str(), &config.ptr);
    if (status != EVMOD_OK) return complain(status);

    std::string fragment;
    if (opt.seed_set) fragment += "\"seed\": " + std::to_string(opt.seed) + ", ";
    if (opt.knn_set) fragment += "\"knn_k\": " + std::to_string(opt.knn) + ", ";
    if (!opt.k_range.empty()) {
        auto sep = opt.k_range.find("..");
        int lo = 0, hi = 0;
        bool ok = sep != std::string::npos;
        if (ok) {
            try {
                size_t used = 0;
                lo = std::stoi(opt.k_range.substr(0, sep), &used);
                ok = used == sep;
                std::string rest = opt.k_range.substr(sep + 2);
                hi = std::stoi(rest, &used);
                ok = ok && used == rest.size() && !rest.empty();
            } catch (...) {
                ok = false;
            }
        }
        if (!ok) {
            std::fprintf(stderr, "error: --k-range expects A..B, got '%s'\n",
                         opt.k_range.c_str());
            return 1;
        }
        fragment +=
            "\"k_range\": [" + std::to_string(lo) + ", " + std::to_string(hi) + "], ";
    }
    if (!fragment.empty()) {
        fragment = "{" + fragment.substr(0, fragment.size() - 2) + "}";
        status = evmod_config_update_json(config.ptr, fragment.c_str());
        if (status != EVMOD_OK) return complain(status);
    }
    return 0;
}

int prepare_out_dir(const std::string& out_dir) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) {
        std::fprintf(stderr, "error: cannot create %s: %s\n", out_dir.c_str(),
                     ec.message().c_str());
        return 2;
    }
    return 0;
}

int run_pipeline(const PipelineOptions& opt, bool render, bool emit_reports) {
    ConfigHandle config;
    if (int code = load_config(opt, config)) return code;
    if (int code = prepare_out_dir(opt.out_dir)) return code;

    StreamHandle stream;
    evmod_status status = evmod_stream_open(opt.input.c_str(), &stream.ptr);
    if (status != EVMOD_OK) return complain(status);

    ResultHandle result;
    status = evmod_detect_run(stream.ptr, config.ptr, &result.ptr);
    if (status != EVMOD_OK) return complain(status);

    const size_t count = evmod_result_count(result.ptr);
    for (size_t i = 0; i < count; ++i) {
        evmod_partition_summary summary{};
        status = evmod_result_summary(result.ptr, i, &summary);
        if (status != EVMOD_OK) return complain(status);

        char name[64];
        if (emit_reports) {
            OwnedString json;
            status = evmod_result_report_json(result.ptr, i, &json.ptr);
            if (status != EVMOD_OK) return complain(status);
            std::snprintf(name, sizeof name, "report_%06u.json", summary.partition);
            fs::path path = fs::path(opt.out_dir) / name;
            if (!write_file_atomic(path, json.ptr, std::strlen(json.ptr))) {
                return fail_write(path);
            }
        }

        if (summary.status != 0) {
            std::printf("partition %u: insufficient events (%u)\n", summary.partition,
                        summary.event_count);
            continue;
        }

        if (!emit_reports) {  // sweep mode emits the per-k CSV instead
            OwnedString csv;
            status = evmod_result_sweep_csv(result.ptr, i, &csv.ptr);
            if (status != EVMOD_OK) return complain(status);
            std::snprintf(name, sizeof name, "sweep_%06u.csv", summary.partition);
            fs::path path = fs::path(opt.out_dir) / name;
            if (!write_file_atomic(path, csv.ptr, std::strlen(csv.ptr))) {
                return fail_write(path);
            }
            std::printf("partition %u: best_k=%d sc=%.4f\n", summary.partition,
                        summary.chosen_k, summary.sc);
            continue;
        }

        if (render) {
            std::snprintf(name, sizeof name, "render_%06u.ppm", summary.partition);
            fs::path path = fs::path(opt.out_dir) / name;
            status = evmod_result_write_render(result.ptr, i, path.string().c_str());
            if (status != EVMOD_OK) return complain(status);
        }
        std::printf("partition %u: k=%d sc=%.4f detections=%u suppressed=%u events=%u\n",
                    summary.partition, summary.chosen_k, summary.sc, summary.detection_count,
                    summary.suppressed, summary.event_count);
    }
    return 0;
}

void add_pipeline_options(CLI::App* cmd, PipelineOptions& opt) {
    cmd->add_option("input", opt.input, "event stream (CSV or binary)")->required();
    cmd->add_option("--config", opt.config_path, "pipeline config JSON");
    cmd->add_option("--seed", opt.seed, "override the config seed")
        ->each([&](const std::string&) { opt.seed_set = true; });
    cmd->add_option("--knn", opt.knn, "override the k-NN neighbor count")
        ->each([&](const std::string&) { opt.knn_set = true; });
    cmd->add_option("--k-range", opt.k_range, "cluster sweep range A..B");
    cmd->add_option("--out", opt.out_dir, "output directory (default .)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"moving-object detection in event-camera streams"};
    app.require_subcommand(1);

    PipelineOptions detect_opt;
    bool render = false;
    CLI::App* detect = app.add_subcommand("detect", "detect objects per partition");
    add_pipeline_options(detect, detect_opt);
    detect->add_flag("--render", render, "write a PPM render per partition");

    PipelineOptions sweep_opt;
    CLI::App* sweep = app.add_subcommand("sweep", "emit k-vs-silhouette CSVs");
    add_pipeline_options(sweep, sweep_opt);

    std::string eval_dir, truth_path, eval_out = ".";
    double iou_threshold = 0.75;
    CLI::App* eval = app.add_subcommand("eval", "score detections against ground truth");
    eval->add_option("detections", eval_dir, "directory of report_*.json")->required();
    eval->add_option("truth", truth_path, "ground-truth JSON")->required();
    eval->add_option("--iou-threshold", iou_threshold, "match threshold (default 0.75)");
    eval->add_option("--out", eval_out, "output directory (default .)");

    std::string script_path, synth_out = ".";
    std::uint64_t synth_seed = 1;
    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic scene");
    synth->add_option("script", script_path, "scene script JSON")->required();
    synth->add_option("--seed", synth_seed, "generation seed (default 1)");
    synth->add_option("--out", synth_out, "output directory (default .)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (detect->parsed()) return run_pipeline(detect_opt, render, true);
    if (sweep->parsed()) return run_pipeline(sweep_opt, false, false);

    if (eval->parsed()) {
        evmod_eval* handle = nullptr;
        evmod_status status =
            evmod_eval_run(eval_dir.c_str(), truth_path.c_str(), iou_threshold, &handle);
        if (status != EVMOD_OK) return complain(status);
        if (int code = prepare_out_dir(eval_out)) {
            evmod_eval_free(handle);
            return code;
        }
        OwnedString json;
        status = evmod_eval_json(handle, &json.ptr);
        if (status != EVMOD_OK) {
            evmod_eval_free(handle);
            return complain(status);
        }
        fs::path path = fs::path(eval_out) / "eval.json";
        if (!write_file_atomic(path, json.ptr, std::strlen(json.ptr))) {
            evmod_eval_free(handle);
            return fail_write(path);
        }
        double recall = 0, precision = 0, f = 0;
        evmod_eval_metrics(handle, &recall, &precision, &f);
        evmod_eval_free(handle);
        std::printf("%.2f %.2f %.2f\n", recall * 100.0, precision * 100.0, f * 100.0);
        return 0;
    }

    if (synth->parsed()) {
        if (int code = prepare_out_dir(synth_out)) return code;
        evmod_scene* scene = nullptr;
        evmod_status status = evmod_scene_generate(script_path.c_str(), synth_seed, &scene);
        if (status != EVMOD_OK) return complain(status);
        fs::path events_path = fs::path(synth_out) / "events.evm";
        fs::path truth_out = fs::path(synth_out) / "truth.json";
        status = evmod_scene_write_events(scene, events_path.string().c_str(), 1);
        if (status == EVMOD_OK) {
            status = evmod_scene_write_truth(scene, truth_out.string().c_str());
        }
        if (status != EVMOD_OK) {
            evmod_scene_free(scene);
            return complain(status);
        }
        uint64_t events = 0;
        uint32_t partitions = 0, objects = 0;
        evmod_scene_info(scene, &events, &partitions, &objects);
        evmod_scene_free(scene);
        std::printf("events=%" PRIu64 " partitions=%u objects=%u\n", events, partitions,
                    objects);
        return 0;
    }
    return 1;
}
