#include <doctest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "temp_dir.hpp"

using testutil::TempDir;
using testutil::read_text;
using testutil::write_text;

namespace {

struct RunResult {
    int code = -1;
    std::string out;
    std::string err;
};

// Spawns the binary named by EVMOD_CLI with redirected output.
struct CliRunner {
    TempDir io;
    int n = 0;

    RunResult run(const std::string& args) {
        const char* bin = std::getenv("EVMOD_CLI");
        REQUIRE(bin != nullptr);
        const std::string out_path = io.file("out_" + std::to_string(n) + ".txt");
        const std::string err_path = io.file("err_" + std::to_string(n) + ".txt");
        ++n;
        const std::string cmd =
            std::string(bin) + " " + args + " > " + out_path + " 2> " + err_path;
        const int raw = std::system(cmd.c_str());
        REQUIRE(raw != -1);
        RunResult result;
        result.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
        result.out = read_text(out_path);
        result.err = read_text(err_path);
        return result;
    }
};

const char* kTwoDiskScript =
    "{\"sensor\": {\"width\": 240, \"height\": 180},"
    " \"duration_us\": 40000, \"frame_interval_us\": 40000,"
    " \"objects\": ["
    "  {\"shape\": \"disk\", \"radius\": 8.0,"
    "   \"trajectory\": {\"type\": \"linear\", \"start\": [50, 50],"
    "                    \"velocity\": [150, 0]},"
    "   \"events_per_pixel_crossing\": 5.0},"
    "  {\"shape\": \"disk\", \"radius\": 8.0,"
    "   \"trajectory\": {\"type\": \"linear\", \"start\": [180, 130],"
    "                    \"velocity\": [-150, 0]},"
    "   \"events_per_pixel_crossing\": 5.0}],"
    " \"noise\": {\"background_rate\": 0.0}}";

const char* kPipelineConfig = "{\"sample_n\": 400, \"time_scale\": 200000.0, \"seed\": 1}";

std::size_t count_lines(const std::string& text) {
    std::size_t n = 0;
    for (char c : text) n += c == '\n';
    return n;
}

}  // namespace

TEST_CASE("synth writes a deterministic scene") {
    CliRunner cli;
    TempDir work;
    write_text(work.file("scene.json"), kTwoDiskScript);

    RunResult a = cli.run("synth " + work.file("scene.json") + " --seed 4 --out " +
                          work.file("a"));
    REQUIRE(a.code == 0);
    CHECK(a.out.rfind("events=", 0) == 0);
    CHECK(a.out.find(" partitions=1 objects=2\n") != std::string::npos);
    CHECK(count_lines(a.out) == 1);

    RunResult b = cli.run("synth " + work.file("scene.json") + " --seed 4 --out " +
                          work.file("b"));
    REQUIRE(b.code == 0);
    const std::string events_a = read_text(work.file("a") + "/events.evm");
    REQUIRE(!events_a.empty());
    CHECK(events_a == read_text(work.file("b") + "/events.evm"));
    CHECK(read_text(work.file("a") + "/truth.json") ==
          read_text(work.file("b") + "/truth.json"));

    RunResult c = cli.run("synth " + work.file("scene.json") + " --seed 5 --out " +
                          work.file("c"));
    REQUIRE(c.code == 0);
    CHECK(events_a != read_text(work.file("c") + "/events.evm"));
}

TEST_CASE("detect, sweep, and eval flow end to end") {
    CliRunner cli;
    TempDir work;
    write_text(work.file("scene.json"), kTwoDiskScript);
    write_text(work.file("cfg.json"), kPipelineConfig);
    REQUIRE(cli.run("synth " + work.file("scene.json") + " --seed 4 --out " +
                    work.file("synth"))
                .code == 0);
    const std::string events = work.file("synth") + "/events.evm";

    RunResult det = cli.run("detect " + events + " --config " + work.file("cfg.json") +
                            " --out " + work.file("det1"));
    REQUIRE(det.code == 0);
    CHECK(det.out.rfind("partition 1: k=2 sc=0.", 0) == 0);
    CHECK(det.out.find(" detections=2 suppressed=0 events=") != std::string::npos);
    CHECK(count_lines(det.out) == 1);
    CHECK(det.err.empty());
    const std::string report = read_text(work.file("det1") + "/report_000001.json");
    REQUIRE(!report.empty());
    CHECK(report.find("\"partition\": 1") != std::string::npos);

    // Byte-identical on rerun.
    REQUIRE(cli.run("detect " + events + " --config " + work.file("cfg.json") + " --out " +
                    work.file("det2"))
                .code == 0);
    CHECK(read_text(work.file("det2") + "/report_000001.json") == report);

    // A different seed samples differently and changes the report.
    REQUIRE(cli.run("detect " + events + " --config " + work.file("cfg.json") +
                    " --seed 2 --out " + work.file("det3"))
                .code == 0);
    CHECK(read_text(work.file("det3") + "/report_000001.json") != report);

    RunResult render = cli.run("detect " + events + " --config " + work.file("cfg.json") +
                               " --render --out " + work.file("det4"));
    REQUIRE(render.code == 0);
    const std::string ppm = read_text(work.file("det4") + "/render_000001.ppm");
    CHECK(ppm.rfind("P6\n240 180\n255\n", 0) == 0);
    CHECK(ppm.size() == 15 + std::size_t(240) * 180 * 3);

    RunResult sweep = cli.run("sweep " + events + " --config " + work.file("cfg.json") +
                              " --out " + work.file("sw"));
    REQUIRE(sweep.code == 0);
    CHECK(sweep.out.rfind("partition 1: best_k=2 sc=0.", 0) == 0);
    const std::string csv = read_text(work.file("sw") + "/sweep_000001.csv");
    CHECK(csv.rfind("k,mean_silhouette\n2,", 0) == 0);
    CHECK(count_lines(csv) == 10);  // header + k = 2..10

    // Narrowing the sweep range narrows the CSV.
    REQUIRE(cli.run("sweep " + events + " --config " + work.file("cfg.json") +
                    " --k-range 2..3 --out " + work.file("sw23"))
                .code == 0);
    CHECK(count_lines(read_text(work.file("sw23") + "/sweep_000001.csv")) == 3);

    RunResult eval = cli.run("eval " + work.file("det1") + " " + work.file("synth") +
                             "/truth.json --iou-threshold 0.5 --out " + work.file("ev"));
    REQUIRE(eval.code == 0);
    CHECK(eval.out == "100.00 100.00 100.00\n");
    const std::string eval_json = read_text(work.file("ev") + "/eval.json");
    CHECK(eval_json.find("\"tp\": 2") != std::string::npos);
    CHECK(eval_json.find("\"fn\": 0") != std::string::npos);
}

TEST_CASE("eval reproduces hand-built metrics") {
    // 9156 exact matches, 844 spurious detections, 941 missed objects spread
    // over 101 partitions: expect recall 90.68, precision 91.56, F 91.12.
    const std::uint64_t kTp = 9156, kFp = 844, kFn = 941;
    const std::uint32_t kParts = 101;

    std::vector<std::vector<std::array<int, 4>>> det(kParts + 1), tru(kParts + 1);
    std::vector<int> slot(kParts + 1, 0);
    auto next_box = [&](std::uint32_t p) {
        const int s = slot[p]++;
        return std::array<int, 4>{2 * s, 0, 2 * s, 0};
    };
    for (std::uint64_t i = 0; i < kTp; ++i) {
        const std::uint32_t p = 1 + std::uint32_t(i % kParts);
        const auto box = next_box(p);
        det[p].push_back(box);
        tru[p].push_back(box);
    }
    for (std::uint64_t i = 0; i < kFp; ++i) {
        const std::uint32_t p = 1 + std::uint32_t(i % kParts);
        det[p].push_back(next_box(p));
    }
    for (std::uint64_t i = 0; i < kFn; ++i) {
        const std::uint32_t p = 1 + std::uint32_t(i % kParts);
        tru[p].push_back(next_box(p));
    }

    auto box_json = [](const std::array<int, 4>& b) {
        return "[" + std::to_string(b[0]) + "," + std::to_string(b[1]) + "," +
               std::to_string(b[2]) + "," + std::to_string(b[3]) + "]";
    };

    TempDir work;
    std::string truth = "{\"partitions\": [";
    for (std::uint32_t p = 1; p <= kParts; ++p) {
        if (p > 1) truth += ",";
        truth += "{\"index\": " + std::to_string(p) + ", \"boxes\": [";
        for (std::size_t i = 0; i < tru[p].size(); ++i) {
            if (i > 0) truth += ",";
            truth += box_json(tru[p][i]);
        }
        truth += "]}";
    }
    truth += "]}";
    write_text(work.file("truth.json"), truth);

    std::filesystem::create_directories(work.file("reports"));
    for (std::uint32_t p = 1; p <= kParts; ++p) {
        std::string report = "{\"partition\": " + std::to_string(p) + ", \"detections\": [";
        for (std::size_t i = 0; i < det[p].size(); ++i) {
            if (i > 0) report += ",";
            report += "{\"box\": " + box_json(det[p][i]) + "}";
        }
        report += "]}";
        char name[32];
        std::snprintf(name, sizeof name, "report_%06u.json", p);
        write_text(work.file("reports") + "/" + name, report);
    }

    CliRunner cli;
    RunResult eval = cli.run("eval " + work.file("reports") + " " + work.file("truth.json") +
                             " --out " + work.file("ev"));
    REQUIRE(eval.code == 0);
    CHECK(eval.out == "90.68 91.56 91.12\n");
}

TEST_CASE("exit codes separate config errors from data errors") {
    CliRunner cli;
    TempDir work;
    write_text(work.file("scene.json"), kTwoDiskScript);
    REQUIRE(cli.run("synth " + work.file("scene.json") + " --seed 4 --out " +
                    work.file("synth"))
                .code == 0);
    const std::string events = work.file("synth") + "/events.evm";

    write_text(work.file("bad_cfg.json"), "{\"knn_q\": 1}");
    RunResult bad_key = cli.run("detect " + events + " --config " + work.file("bad_cfg.json") +
                                " --out " + work.file("o1"));
    CHECK(bad_key.code == 1);
    CHECK(bad_key.err.find("knn_q") != std::string::npos);

    CHECK(cli.run("detect " + work.file("nosuch.evm") + " --out " + work.file("o2")).code == 2);

    write_text(work.file("garbage.csv"), "hello there\n");
    CHECK(cli.run("detect " + work.file("garbage.csv") + " --out " + work.file("o3")).code ==
          2);

    RunResult bad_range =
        cli.run("detect " + events + " --k-range 5..x --out " + work.file("o4"));
    CHECK(bad_range.code == 1);
    CHECK(bad_range.err.find("--k-range") != std::string::npos);
    CHECK(cli.run("detect " + events + " --k-range 1..5 --out " + work.file("o5")).code == 1);

    write_text(work.file("bad_scene.json"), "{\"sensor\": {\"width\": 10}}");
    CHECK(cli.run("synth " + work.file("bad_scene.json") + " --out " + work.file("o6")).code ==
          1);
    CHECK(cli.run("synth " + work.file("no_scene.json") + " --out " + work.file("o7")).code ==
          2);

    std::filesystem::create_directories(work.file("empty"));
    CHECK(cli.run("eval " + work.file("empty") + " " + work.file("synth") +
                  "/truth.json --out " + work.file("o8"))
              .code == 1);

    // Unknown subcommand is a usage error.
    CHECK(cli.run("frobnicate").code == 1);
}
