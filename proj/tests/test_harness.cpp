#include "lumalink/eval.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

using namespace lumalink;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("lumalink_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("ppm round trip is byte exact") {
    const fs::path dir = temp_dir("ppm");
    const RgbFrame in = make_source_frame("texture", 37, 23, 2);
    write_ppm(dir / "f.ppm", in);
    const RgbFrame out = read_ppm(dir / "f.ppm");
    CHECK(out.width == in.width);
    CHECK(out.height == in.height);
    CHECK(out.data == in.data);
    fs::remove_all(dir);
}

TEST_CASE("frame store round trip and validation") {
    const fs::path dir = temp_dir("store");
    std::vector<RgbFrame> frames;
    for (int i = 0; i < 5; ++i) frames.push_back(make_source_frame("texture", 40, 30, i));
    FrameStore::write(dir, frames, 30.0);

    StoreManifest manifest;
    const auto back = FrameStore::read(dir, &manifest);
    CHECK(manifest.width == 40);
    CHECK(manifest.height == 30);
    CHECK(manifest.count == 5);
    CHECK(manifest.fps == 30.0);
    REQUIRE(back.size() == 5);
    for (int i = 0; i < 5; ++i) CHECK(back[i].data == frames[i].data);

    fs::remove(dir / "frame_000004.ppm");
    CHECK_THROWS_AS(FrameStore::read(dir), std::runtime_error);
    fs::remove_all(dir);
    CHECK_THROWS_AS(FrameStore::read(dir), std::runtime_error);
}

TEST_CASE("ground truth and capture sidecars round trip") {
    const fs::path dir = temp_dir("sidecar");

    EncodedSequence seq;
    seq.fps_tx = 60.0;
    seq.schedule = {{{1, 0}, 0, 2}, {{1, 1}, 2, 2}, {{2, 7}, 4, 2}};
    write_ground_truth(dir / "gt.txt", seq, EncodeMode::pair);
    const GroundTruth gt = read_ground_truth(dir / "gt.txt");
    CHECK(gt.mode == EncodeMode::pair);
    CHECK(gt.fps_tx == 60.0);
    REQUIRE(gt.schedule.size() == 3);
    CHECK(gt.schedule[2].payload == Payload{2, 7});
    CHECK(gt.schedule[2].first_frame == 4);

    CapturedSequence cap;
    cap.params.fps_rx = 60.0;
    cap.frames.resize(3);
    cap.frames[0].timestamp_ms = 0.0;
    cap.frames[0].source_index = 0;
    cap.frames[1].timestamp_ms = 1000.0 / 60.0;
    cap.frames[1].source_index = 1;
    cap.frames[1].dropped = true;
    cap.frames[2].timestamp_ms = 2000.0 / 60.0;
    cap.frames[2].source_index = 2;
    write_capture_meta(dir / "cap.txt", cap);
    const CaptureMeta meta = read_capture_meta(dir / "cap.txt");
    CHECK(meta.fps_rx == 60.0);
    REQUIRE(meta.slots.size() == 3);
    CHECK(meta.slots[1].dropped);
    CHECK_FALSE(meta.slots[2].dropped);
    CHECK(meta.slots[2].source_index == 2);
    fs::remove_all(dir);
}

TEST_CASE("synthetic sources are deterministic and pattern-dependent") {
    const RgbFrame a = make_source_frame("texture", 64, 48, 7);
    const RgbFrame b = make_source_frame("texture", 64, 48, 7);
    const RgbFrame c = make_source_frame("texture", 64, 48, 8);
    CHECK(a.data == b.data);
    CHECK(a.data != c.data);
    CHECK_THROWS_AS(make_source_frame("lava", 16, 16, 0), std::invalid_argument);
    for (const char* p : {"gray", "gradient", "checker"}) {
        const RgbFrame f = make_source_frame(p, 32, 32, 0);
        CHECK(f.valid());
    }
}

TEST_CASE("channel presets: the four camera tuples plus ideal and handheld") {
    for (const std::string& name :
         {std::string("ideal"), std::string("iso50-s90"), std::string("iso50-s350"),
          std::string("iso200-s90"), std::string("iso200-s350"), std::string("handheld")}) {
        const ChannelParams cp = channel_preset(name, 60.0);
        CHECK(cp.fps_rx == 60.0);
        CHECK_NOTHROW(cp.validate(60.0));
    }
    CHECK(channel_preset("ideal", 60.0).noise_sigma == 0.0);
    CHECK(channel_preset("iso50-s90", 60.0).noise_sigma < channel_preset("iso200-s90", 60.0).noise_sigma);
    CHECK(channel_preset("handheld", 60.0).jitter.enabled());
    CHECK_THROWS_AS(channel_preset("iso9000", 60.0), std::invalid_argument);
    CHECK(channel_preset_names().size() == 6);
}

TEST_CASE("run_link_trial: ideal channel decodes everything") {
    TrialSpec spec;
    spec.packets = 12;
    spec.width = 224;
    spec.height = 168;
    spec.source_pattern = "texture";
    spec.mod.layout.count = 1;
    spec.mod.layout.module_px = 4;
    spec.mod.fps_tx = 60.0;
    spec.channel.fps_rx = 60.0;
    const TrialResult r = run_link_trial(spec);
    CHECK(r.metrics.psr == 1.0);
    CHECK(r.metrics.packets_transmitted == 12);
    CHECK(r.final_state.synced);
}

TEST_CASE("experiment spec: an 11-point sweep makes 11 conditions") {
    nlohmann::json j = {
        {"packets", 4},
        {"trials", 2},
        {"seed", 9},
        {"width", 224},
        {"height", 168},
        {"source", "texture"},
        {"encoder", {{"tiles", 1}, {"module_px", 4}, {"fps_tx", 60.0}, {"ec", "L"}}},
        {"channel", {{"preset", "ideal"}}},
        {"grid",
         {{"delta_e00", {1.0, 1.2, 1.4, 1.6, 1.8, 2.0, 2.2, 2.4, 2.6, 2.8, 3.0}}}},
    };
    const ExperimentSpec spec = ExperimentSpec::from_json(j);
    CHECK(spec.grid.size() == 11);
    CHECK(spec.trials == 2);
    CHECK(spec.grid.front().delta_e00 == 1.0);
    CHECK(spec.grid.back().delta_e00 == 3.0);
    CHECK(spec.grid.front().id != spec.grid.back().id);
}

TEST_CASE("run_experiment writes a stable CSV and CDF files") {
    nlohmann::json j = {
        {"packets", 6},
        {"trials", 1},
        {"seed", 5},
        {"width", 224},
        {"height", 168},
        {"source", "texture"},
        {"encoder", {{"tiles", 1}, {"module_px", 4}, {"fps_tx", 60.0}}},
        {"channel", {{"preset", "ideal"}}},
        {"grid", {{"gaussian", {true, false}}}},
    };
    const ExperimentSpec spec = ExperimentSpec::from_json(j);
    REQUIRE(spec.grid.size() == 2);

    const fs::path out1 = temp_dir("exp1");
    const fs::path out2 = temp_dir("exp2");
    run_experiment(spec, out1);
    run_experiment(spec, out2);

    const std::string csv1 = slurp(out1 / "results.csv");
    CHECK(csv1 == slurp(out2 / "results.csv"));  // byte-stable reruns
    CHECK(csv1.find("condition_id,trial,delta_e00,tiles,ec_level,mode,gaussian,motion_comp,"
                    "channel_preset,psr,rt_p50_ms,rt_p95_ms") == 0);
    // one row per condition x trial plus header
    const long rows = std::count(csv1.begin(), csv1.end(), '\n');
    CHECK(rows == 3);
    for (const Condition& c : spec.grid) {
        CHECK(fs::exists(out1 / ("cdf_" + c.id + ".csv")));
    }
    fs::remove_all(out1);
    fs::remove_all(out2);
}

TEST_CASE("percentile uses nearest-rank on sorted samples") {
    CHECK(percentile({4.0, 1.0, 3.0, 2.0}, 0.5) == 2.0);
    CHECK(percentile({4.0, 1.0, 3.0, 2.0}, 0.95) == 4.0);
    CHECK(percentile({7.0}, 0.5) == 7.0);
    CHECK(std::isnan(percentile({}, 0.5)));
}

TEST_CASE("metrics and results files have a stable schema") {
    const fs::path dir = temp_dir("reports");
    LinkMetrics m;
    m.psr = 0.5;
    m.packets_transmitted = 4;
    m.packets_decoded = 2;
    m.attempts = 6;
    m.successes = 2;
    m.response_time_samples_ms = {10.0, 20.0};
    write_metrics_file(dir / "metrics.txt", m);
    const std::string text = slurp(dir / "metrics.txt");
    CHECK(text.find("psr 0.5000") == 0);
    CHECK(text.find("packets_transmitted 4") != std::string::npos);
    CHECK(text.find("rt_p50_ms 10.000") != std::string::npos);

    PacketResult r;
    r.payload = {1, 2};
    r.capture_timestamp_ms = 33.0;
    r.decode_latency_ms = 1.5;
    r.frame_a = 0;
    r.frame_b = 1;
    write_results_file(dir / "results.txt", {r});
    const std::string rt = slurp(dir / "results.txt");
    CHECK(rt.find("1 2 33.000 1.500 0 1") != std::string::npos);
    fs::remove_all(dir);
}
