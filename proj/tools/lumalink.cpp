#include "lumalink/eval.hpp"
#include "lumalink/sync.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace lumalink;

namespace {

ModulationParams load_encoder_config(const std::string& config_path) {
    ModulationParams mod;
    if (config_path.empty()) return mod;
    std::ifstream in(config_path);
    if (!in) throw std::runtime_error("cannot open config " + config_path);
    nlohmann::json j;
    in >> j;
    const nlohmann::json& enc = j.contains("encoder") ? j["encoder"] : j;
    if (enc.contains("delta_e00")) mod.perception.delta_e00 = enc["delta_e00"].get<double>();
    if (enc.contains("k_l")) mod.perception.k_l = enc["k_l"].get<double>();
    if (enc.contains("k")) mod.texture.k = enc["k"].get<double>();
    if (enc.contains("window")) mod.texture.window = enc["window"].get<int>();
    if (enc.contains("ng")) mod.texture.ng = enc["ng"].get<int>();
    if (enc.contains("tiles")) mod.layout.count = enc["tiles"].get<int>();
    if (enc.contains("module_px")) mod.layout.module_px = enc["module_px"].get<int>();
    if (enc.contains("quiet_zone")) mod.layout.quiet_zone = enc["quiet_zone"].get<int>();
    if (enc.contains("ec")) mod.ec = ec_level_from_string(enc["ec"].get<std::string>());
    if (enc.contains("mode")) mod.mode = encode_mode_from_string(enc["mode"].get<std::string>());
    if (enc.contains("sigma")) mod.smoothing_sigma = enc["sigma"].get<double>();
    return mod;
}

int cmd_encode(const std::string& in_dir, const std::string& out_dir, const std::string& config,
               std::uint64_t song_id, std::uint64_t first_frame, const std::string& ec,
               const std::string& mode, double delta_e00, int tiles, double sigma, int module_px) {
    ModulationParams mod = load_encoder_config(config);
    if (!ec.empty()) mod.ec = ec_level_from_string(ec);
    if (!mode.empty()) mod.mode = encode_mode_from_string(mode);
    if (delta_e00 > 0) mod.perception.delta_e00 = delta_e00;
    if (tiles > 0) mod.layout.count = tiles;
    if (sigma >= 0) mod.smoothing_sigma = sigma;
    if (module_px > 0) mod.layout.module_px = module_px;

    StoreManifest manifest;
    const std::vector<RgbFrame> source = FrameStore::read(in_dir, &manifest);
    mod.fps_tx = manifest.fps * mod.frames_per_packet();

    std::vector<Payload> payloads;
    payloads.reserve(source.size());
    for (std::size_t i = 0; i < source.size(); ++i) {
        payloads.push_back({song_id, first_frame + i});
    }
    const EncodedSequence seq = encode_video(source, payloads, mod);

    std::vector<RgbFrame> out_frames;
    out_frames.reserve(seq.frames.size());
    for (const LabFrame& f : seq.frames) out_frames.push_back(lab_to_srgb(f));
    FrameStore::write(out_dir, out_frames, seq.fps_tx);
    write_ground_truth(fs::path(out_dir) / "ground_truth.txt", seq, mod.mode);
    std::printf("encoded %zu source frames -> %zu display frames at %.6g fps\n", source.size(),
                seq.frames.size(), seq.fps_tx);
    return 0;
}

int cmd_simulate(const std::string& in_dir, const std::string& out_dir, const std::string& preset,
                 std::uint64_t seed, double noise_sigma, double gain, double fps_rx,
                 double drop_prob, double jitter_px, double jitter_deg, double jitter_scale,
                 double shutter_band) {
    StoreManifest manifest;
    const std::vector<RgbFrame> frames = FrameStore::read(in_dir, &manifest);

    EncodedSequence enc;
    enc.fps_tx = manifest.fps;
    enc.frames.reserve(frames.size());
    for (const RgbFrame& f : frames) enc.frames.push_back(srgb_to_lab<float>(f));

    ChannelParams cp = channel_preset(preset, manifest.fps);
    if (fps_rx > 0) cp.fps_rx = fps_rx;
    if (noise_sigma >= 0) cp.noise_sigma = noise_sigma;
    if (gain > 0) cp.gain = gain;
    if (drop_prob >= 0) cp.drop_prob = drop_prob;
    if (jitter_px >= 0) cp.jitter.translation_px_max = jitter_px;
    if (jitter_deg >= 0) cp.jitter.rotation_deg_max = jitter_deg;
    if (jitter_scale >= 0) cp.jitter.scale_max = jitter_scale;
    if (shutter_band >= 0) cp.shutter_band = shutter_band;
    cp.seed = seed;

    const CapturedSequence cap = capture(enc, cp);

    std::vector<RgbFrame> kept;
    for (const CapturedFrame& cf : cap.frames) {
        if (!cf.dropped) kept.push_back(lab_to_srgb(cf.frame));
    }
    if (kept.empty()) throw std::runtime_error("simulate: every frame was dropped");
    FrameStore::write(out_dir, kept, cp.fps_rx);
    write_capture_meta(fs::path(out_dir) / "capture.txt", cap);
    if (fs::exists(fs::path(in_dir) / "ground_truth.txt")) {
        fs::copy_file(fs::path(in_dir) / "ground_truth.txt",
                      fs::path(out_dir) / "ground_truth.txt", fs::copy_options::overwrite_existing);
    }
    std::printf("captured %zu slots (%zu kept) at %.6g fps\n", cap.frames.size(), kept.size(),
                cp.fps_rx);
    return 0;
}

int cmd_decode(const std::string& in_dir, const std::string& out_dir, bool motion_comp,
               double roi_threshold, int min_region, int resync, const std::string& truth_path) {
    StoreManifest manifest;
    const std::vector<RgbFrame> frames = FrameStore::read(in_dir, &manifest);
    if (frames.size() < 2) throw std::runtime_error("decode: store must hold at least 2 frames");

    DecoderConfig cfg;
    cfg.motion_comp = motion_comp;
    cfg.roi_threshold = roi_threshold;
    cfg.min_region_px = min_region;
    cfg.resync_failures = resync;

    // Timestamps: the capture sidecar when present, otherwise the frame grid.
    std::vector<double> ts(frames.size());
    std::vector<long> slots(frames.size());
    const fs::path meta_path = fs::path(in_dir) / "capture.txt";
    if (fs::exists(meta_path)) {
        const CaptureMeta meta = read_capture_meta(meta_path);
        std::size_t k = 0;
        for (std::size_t i = 0; i < meta.slots.size() && k < frames.size(); ++i) {
            if (meta.slots[i].dropped) continue;
            ts[k] = meta.slots[i].timestamp_ms;
            slots[k] = static_cast<long>(i);
            ++k;
        }
        if (k != frames.size()) throw std::runtime_error("decode: capture.txt does not match store");
    } else {
        for (std::size_t i = 0; i < frames.size(); ++i) {
            ts[i] = 1000.0 * static_cast<double>(i) / manifest.fps;
            slots[i] = static_cast<long>(i);
        }
    }

    StreamDecoder dec(cfg);
    for (std::size_t i = 0; i < frames.size(); ++i) {
        dec.push(srgb_to_lab<float>(frames[i]), ts[i], slots[i]);
    }

    fs::create_directories(out_dir);
    write_results_file(fs::path(out_dir) / "results.txt", dec.results());

    fs::path gt_path = truth_path.empty() ? fs::path(in_dir) / "ground_truth.txt"
                                          : fs::path(truth_path);
    LinkMetrics metrics;
    if (fs::exists(gt_path)) {
        const GroundTruth gt = read_ground_truth(gt_path);
        metrics = compute_metrics(dec.results(), gt.schedule, gt.fps_tx, dec.attempts(),
                                  dec.successes());
    } else {
        metrics.attempts = dec.attempts();
        metrics.successes = dec.successes();
    }
    write_metrics_file(fs::path(out_dir) / "metrics.txt", metrics);
    std::printf("decoded %zu packets from %zu frames (psr %.4f)\n", dec.results().size(),
                frames.size(), metrics.psr);
    return 0;
}

int cmd_evaluate(const std::string& config, const std::string& out_dir, std::int64_t seed) {
    ExperimentSpec spec = ExperimentSpec::from_file(config);
    if (seed >= 0) spec.seed = static_cast<std::uint64_t>(seed);
    run_experiment(spec, out_dir);
    std::printf("wrote %s with %zu conditions x %d trials\n",
                (fs::path(out_dir) / "results.csv").string().c_str(), spec.grid.size(),
                spec.trials);
    return 0;
}

int cmd_sync_demo(const std::string& registry_path, const std::string& in_dir, bool motion_comp) {
    const TrackRegistry registry = TrackRegistry::load(registry_path);

    StoreManifest manifest;
    const std::vector<RgbFrame> frames = FrameStore::read(in_dir, &manifest);
    if (frames.size() < 2) throw std::runtime_error("sync-demo: store must hold at least 2 frames");

    DecoderConfig cfg;
    cfg.motion_comp = motion_comp;
    StreamDecoder dec(cfg);
    std::size_t printed = 0;
    for (std::size_t i = 0; i < frames.size(); ++i) {
        const double ts = 1000.0 * static_cast<double>(i) / manifest.fps;
        dec.push(srgb_to_lab<float>(frames[i]), ts, static_cast<long>(i));
        for (; printed < dec.results().size(); ++printed) {
            const PacketResult& r = dec.results()[printed];
            const double now = r.capture_timestamp_ms + r.decode_latency_ms;
            const PlaybackQuery q = playback_position(r, registry, now);
            if (q.ok()) {
                const auto& track = registry.tracks.at(q.song_id);
                std::printf("t=%.1fms  song %llu (%s)  position %.1f ms\n",
                            r.capture_timestamp_ms,
                            static_cast<unsigned long long>(q.song_id), track.title.c_str(),
                            q.position_ms);
            } else {
                std::printf("t=%.1fms  song %llu  error: %s\n", r.capture_timestamp_ms,
                            static_cast<unsigned long long>(q.song_id),
                            q.error == PlaybackError::unknown_track ? "unknown-track"
                                                                    : "position-out-of-range");
            }
        }
    }
    if (dec.results().empty()) {
        std::printf("no packets decoded\n");
        return 1;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"lumalink: invisible lightness-modulated codes in video, with a display-to-camera "
                 "channel simulator, receiver and evaluation harness"};
    app.require_subcommand(1);

    // encode
    std::string in_dir, out_dir, config, ec_name, mode_name, truth_path, preset = "ideal";
    std::string registry_path;
    std::uint64_t song_id = 1, first_frame = 0, seed = 1;
    double delta_e00 = -1, sigma = -1, noise_sigma = -1, gain = -1, fps_rx = -1, drop_prob = -1;
    double jitter_px = -1, jitter_deg = -1, jitter_scale = -1, shutter_band = -1;
    double roi_threshold = 1.0;
    int tiles = -1, module_px = -1, min_region = 64, resync = 5;
    std::int64_t eval_seed = -1;
    bool motion_comp = false;

    auto* enc = app.add_subcommand("encode", "embed payloads into a frame store");
    enc->add_option("--in", in_dir, "input frame store")->required();
    enc->add_option("--out", out_dir, "output frame store")->required();
    enc->add_option("--config", config, "JSON config with an 'encoder' object");
    enc->add_option("--song-id", song_id, "payload song id");
    enc->add_option("--first-frame", first_frame, "payload frame number of the first packet");
    enc->add_option("--ec", ec_name, "error correction level L|M|Q|H");
    enc->add_option("--mode", mode_name, "pair|trivial4|step4");
    enc->add_option("--delta-e00", delta_e00, "target perceived difference");
    enc->add_option("--tiles", tiles, "barcode copies per frame (1 or 6)");
    enc->add_option("--sigma", sigma, "Gaussian smoothing sigma, 0 disables");
    enc->add_option("--module-px", module_px, "pixels per barcode module");

    auto* sim = app.add_subcommand("simulate", "run the display-to-camera channel");
    sim->add_option("--in", in_dir, "encoded frame store")->required();
    sim->add_option("--out", out_dir, "captured frame store")->required();
    sim->add_option("--preset", preset, "ideal|iso50-s90|iso50-s350|iso200-s90|iso200-s350|handheld");
    sim->add_option("--seed", seed, "channel seed");
    sim->add_option("--noise-sigma", noise_sigma, "override additive noise sigma (L*)");
    sim->add_option("--gain", gain, "override lightness gain (0,1]");
    sim->add_option("--fps-rx", fps_rx, "override capture rate");
    sim->add_option("--drop-prob", drop_prob, "override frame drop probability");
    sim->add_option("--jitter-px", jitter_px, "override max translation jitter");
    sim->add_option("--jitter-deg", jitter_deg, "override max rotation jitter");
    sim->add_option("--jitter-scale", jitter_scale, "override max scale jitter");
    sim->add_option("--shutter-band", shutter_band, "override rolling-shutter band fraction");

    auto* dec = app.add_subcommand("decode", "decode a captured frame store");
    dec->add_option("--in", in_dir, "captured frame store")->required();
    dec->add_option("--out", out_dir, "output directory for results and metrics")->required();
    dec->add_flag("--motion-comp", motion_comp, "enable the hand-motion filter");
    dec->add_option("--roi-threshold", roi_threshold, "ROI |diff| threshold in L*");
    dec->add_option("--min-region", min_region, "minimum connected-component area");
    dec->add_option("--resync", resync, "consecutive failures before resync");
    dec->add_option("--truth", truth_path, "ground-truth sidecar (default: <in>/ground_truth.txt)");

    auto* eval = app.add_subcommand("evaluate", "run an experiment grid from a JSON spec");
    eval->add_option("--config", config, "experiment JSON")->required();
    eval->add_option("--out", out_dir, "report directory")->required();
    eval->add_option("--seed", eval_seed, "override the experiment seed");

    auto* demo = app.add_subcommand("sync-demo", "map decoded packets to playback positions");
    demo->add_option("--registry", registry_path, "track registry file")->required();
    demo->add_option("--in", in_dir, "captured frame store")->required();
    demo->add_flag("--motion-comp", motion_comp, "enable the hand-motion filter");

    CLI11_PARSE(app, argc, argv);

    try {
        if (enc->parsed()) {
            return cmd_encode(in_dir, out_dir, config, song_id, first_frame, ec_name, mode_name,
                              delta_e00, tiles, sigma, module_px);
        }
        if (sim->parsed()) {
            return cmd_simulate(in_dir, out_dir, preset, seed, noise_sigma, gain, fps_rx, drop_prob,
                                jitter_px, jitter_deg, jitter_scale, shutter_band);
        }
        if (dec->parsed()) {
            return cmd_decode(in_dir, out_dir, motion_comp, roi_threshold, min_region, resync,
                              truth_path);
        }
        if (eval->parsed()) return cmd_evaluate(config, out_dir, eval_seed);
        if (demo->parsed()) return cmd_sync_demo(registry_path, in_dir, motion_comp);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
