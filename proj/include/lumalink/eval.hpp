#pragma once

#include "lumalink/decoder.hpp"
#include "lumalink/framestore.hpp"

#include <nlohmann/json_fwd.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace lumalink {

/// Named channel presets. The iso*/shutter names are analogues of camera
/// settings, not calibrated reproductions: faster shutter lowers gain,
/// higher ISO raises gain and noise.
ChannelParams channel_preset(const std::string& name, double fps_tx);
std::vector<std::string> channel_preset_names();

/// Deterministic synthetic source frames (grayscale content):
///   gray      uniform mid gray
///   gradient  horizontal lightness ramp
///   texture   seeded rectangles over a wavy base; corner-rich
///   checker   high-contrast checkerboard
RgbFrame make_source_frame(const std::string& pattern, int width, int height, std::uint64_t seed);

/// One encode -> capture -> decode run over a synthetic source.
struct TrialSpec {
    int packets = 50;
    int width = 256;
    int height = 192;
    std::string source_pattern = "gray";
    std::uint64_t song_id = 1;
    std::uint64_t first_frame_num = 0;
    ModulationParams mod;
    ChannelParams channel;
    DecoderConfig decoder;
    std::uint64_t source_seed = 1;
    int batch_packets = 8;
};

struct TrialResult {
    LinkMetrics metrics;
    SyncState final_state;
};

TrialResult run_link_trial(const TrialSpec& spec);

/// One grid point of an experiment.
struct Condition {
    std::string id;
    double delta_e00 = 2.0;
    int tiles = 6;
    EcLevel ec = EcLevel::L;
    EncodeMode mode = EncodeMode::pair;
    bool gaussian = true;
    bool motion_comp = false;
    std::string channel_preset = "ideal";
};

struct ExperimentSpec {
    TrialSpec base;
    int trials = 1;
    std::uint64_t seed = 1;
    std::vector<Condition> grid;

    static ExperimentSpec from_json(const nlohmann::json& j);
    static ExperimentSpec from_file(const std::filesystem::path& file);
};

/// Runs every (condition, trial), writes results.csv plus one CDF point file
/// per condition into out_dir. Deterministic given spec + seed.
void run_experiment(const ExperimentSpec& spec, const std::filesystem::path& out_dir);

/// Plain-text reports shared by the CLI.
void write_results_file(const std::filesystem::path& file, const std::vector<PacketResult>& results);
void write_metrics_file(const std::filesystem::path& file, const LinkMetrics& m);

double percentile(std::vector<double> samples, double p);

}  // namespace lumalink
