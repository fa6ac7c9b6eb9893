#include "lumalink/eval.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

namespace lumalink {

namespace fs = std::filesystem;

namespace {

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    std::uint64_t x = a ^ (b + 0x9E3779B97F4A7C15ULL + (a << 6) + (a >> 2));
    x ^= x >> 33;
    x *= 0xFF51AFD7ED558CCDULL;
    x ^= x >> 33;
    return x;
}

std::string format_double(double v, const char* fmt) {
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

}  // namespace

ChannelParams channel_preset(const std::string& name, double fps_tx) {
    ChannelParams cp;
    cp.fps_rx = fps_tx;
    if (name == "ideal") {
        return cp;
    }
    if (name == "iso50-s90") {
        cp.gain = 0.95;
        cp.noise_sigma = 0.35;
        return cp;
    }
    if (name == "iso50-s350") {
        cp.gain = 0.70;
        cp.noise_sigma = 0.55;
        return cp;
    }
    if (name == "iso200-s90") {
        cp.gain = 1.0;
        cp.noise_sigma = 0.85;
        return cp;
    }
    if (name == "iso200-s350") {
        cp.gain = 0.85;
        cp.noise_sigma = 1.30;
        return cp;
    }
    if (name == "handheld") {
        cp.gain = 0.95;
        cp.noise_sigma = 0.35;
        cp.jitter.translation_px_max = 3.0;
        cp.jitter.rotation_deg_max = 0.6;
        cp.jitter.scale_max = 0.008;
        return cp;
    }
    throw std::invalid_argument("unknown channel preset '" + name + "'");
}

std::vector<std::string> channel_preset_names() {
    return {"ideal", "iso50-s90", "iso50-s350", "iso200-s90", "iso200-s350", "handheld"};
}

RgbFrame make_source_frame(const std::string& pattern, int width, int height, std::uint64_t seed) {
    RgbFrame frame(width, height);
    auto set_gray = [&frame](int y, int x, int g) {
        std::uint8_t* p = frame.px(y, x);
        p[0] = p[1] = p[2] = static_cast<std::uint8_t>(std::clamp(g, 0, 255));
    };

    if (pattern == "gray") {
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x) set_gray(y, x, 119);
    } else if (pattern == "gradient") {
        for (int y = 0; y < height; ++y) {
            for (int x = 0; x < width; ++x) {
                set_gray(y, x, 40 + 175 * x / std::max(1, width - 1));
            }
        }
    } else if (pattern == "checker") {
        for (int y = 0; y < height; ++y) {
            for (int x = 0; x < width; ++x) {
                set_gray(y, x, ((x / 24 + y / 24) % 2) ? 160 : 90);
            }
        }
    } else if (pattern == "texture") {
        std::mt19937_64 rng(mix_seed(seed, 0xA11CE));
        for (int y = 0; y < height; ++y) {
            for (int x = 0; x < width; ++x) {
                const double wave = 18.0 * std::sin(2 * M_PI * x / 53.0) * std::sin(2 * M_PI * y / 41.0);
                set_gray(y, x, static_cast<int>(123 + wave));
            }
        }
        std::uniform_int_distribution<int> gx(0, width - 1), gy(0, height - 1);
        std::uniform_int_distribution<int> gw(6, std::max(7, width / 6));
        std::uniform_int_distribution<int> gh(6, std::max(7, height / 6));
        std::uniform_int_distribution<int> gv(55, 205);
        for (int i = 0; i < 48; ++i) {
            const int x0 = gx(rng), y0 = gy(rng);
            const int w = gw(rng), h = gh(rng), v = gv(rng);
            for (int y = y0; y < std::min(height, y0 + h); ++y) {
                for (int x = x0; x < std::min(width, x0 + w); ++x) set_gray(y, x, v);
            }
        }
    } else {
        throw std::invalid_argument("unknown source pattern '" + pattern + "'");
    }
    return frame;
}

TrialResult run_link_trial(const TrialSpec& spec) {
    spec.mod.validate();
    spec.channel.validate(spec.mod.fps_tx);
    spec.decoder.validate();
    if (spec.packets < 1) throw std::invalid_argument("run_link_trial: packets >= 1");

    const RgbFrame source = make_source_frame(spec.source_pattern, spec.width, spec.height,
                                              spec.source_seed);
    const LabFrame lab = srgb_to_lab<float>(source);

    StreamDecoder dec(spec.decoder);
    std::vector<PacketSchedule> schedule;
    schedule.reserve(spec.packets);

    long slot_base = 0;
    std::size_t frame_base = 0;
    const int batch = std::max(1, spec.batch_packets);
    for (int done = 0; done < spec.packets; done += batch) {
        const int n = std::min(batch, spec.packets - done);
        std::vector<LabFrame> frames(n, lab);
        std::vector<Payload> payloads;
        payloads.reserve(n);
        for (int i = 0; i < n; ++i) {
            payloads.push_back({spec.song_id, spec.first_frame_num + done + i});
        }
        EncodedSequence enc = encode_video_lab(frames, payloads, spec.mod);
        for (PacketSchedule p : enc.schedule) {
            p.first_frame += frame_base;
            schedule.push_back(p);
        }
        const CapturedSequence cap = capture(enc, spec.channel, slot_base);
        for (std::size_t k = 0; k < cap.frames.size(); ++k) {
            const CapturedFrame& cf = cap.frames[k];
            if (cf.dropped) continue;
            dec.push(cf.frame, cf.timestamp_ms, slot_base + static_cast<long>(k));
        }
        slot_base += static_cast<long>(cap.frames.size());
        frame_base += enc.frames.size();
    }

    TrialResult result;
    result.metrics = compute_metrics(dec.results(), schedule, spec.mod.fps_tx, dec.attempts(),
                                     dec.successes());
    result.final_state = dec.sync();
    return result;
}

namespace {

void parse_encoder(const nlohmann::json& j, ModulationParams* mod) {
    mod->perception.delta_e00 = j.value("delta_e00", mod->perception.delta_e00);
    mod->perception.k_l = j.value("k_l", mod->perception.k_l);
    mod->texture.k = j.value("k", mod->texture.k);
    mod->texture.window = j.value("window", mod->texture.window);
    mod->texture.ng = j.value("ng", mod->texture.ng);
    mod->layout.count = j.value("tiles", mod->layout.count);
    mod->layout.module_px = j.value("module_px", mod->layout.module_px);
    mod->layout.quiet_zone = j.value("quiet_zone", mod->layout.quiet_zone);
    if (j.contains("ec")) mod->ec = ec_level_from_string(j["ec"].get<std::string>());
    if (j.contains("mode")) mod->mode = encode_mode_from_string(j["mode"].get<std::string>());
    mod->smoothing_sigma = j.value("sigma", mod->smoothing_sigma);
    mod->fps_tx = j.value("fps_tx", mod->fps_tx);
}

void parse_channel(const nlohmann::json& j, double fps_tx, ChannelParams* cp) {
    if (j.contains("preset")) *cp = channel_preset(j["preset"].get<std::string>(), fps_tx);
    cp->fps_rx = j.value("fps_rx", cp->fps_rx > 0 ? cp->fps_rx : fps_tx);
    cp->gain = j.value("gain", cp->gain);
    cp->noise_sigma = j.value("noise_sigma", cp->noise_sigma);
    cp->drop_prob = j.value("drop_prob", cp->drop_prob);
    cp->shutter_band = j.value("shutter_band", cp->shutter_band);
    cp->jitter.translation_px_max = j.value("jitter_px", cp->jitter.translation_px_max);
    cp->jitter.rotation_deg_max = j.value("jitter_deg", cp->jitter.rotation_deg_max);
    cp->jitter.scale_max = j.value("jitter_scale", cp->jitter.scale_max);
    cp->seed = j.value("seed", cp->seed);
}

void parse_decoder(const nlohmann::json& j, DecoderConfig* cfg) {
    cfg->roi_threshold = j.value("roi_threshold", cfg->roi_threshold);
    cfg->min_region_px = j.value("min_region_px", cfg->min_region_px);
    cfg->resync_failures = j.value("resync_failures", cfg->resync_failures);
    cfg->motion_comp = j.value("motion_comp", cfg->motion_comp);
    cfg->binarize_threshold = j.value("binarize_threshold", cfg->binarize_threshold);
}

std::string condition_id(const Condition& c) {
    std::string id = "de" + format_double(c.delta_e00, "%.2f");
    id += "-t" + std::to_string(c.tiles);
    id += "-ec";
    id += to_string(c.ec);
    id += "-";
    id += to_string(c.mode);
    id += c.gaussian ? "-g1" : "-g0";
    id += c.motion_comp ? "-mc1" : "-mc0";
    id += "-" + c.channel_preset;
    return id;
}

}  // namespace

ExperimentSpec ExperimentSpec::from_json(const nlohmann::json& j) {
    ExperimentSpec spec;
    spec.base.packets = j.value("packets", spec.base.packets);
    spec.base.width = j.value("width", spec.base.width);
    spec.base.height = j.value("height", spec.base.height);
    spec.base.source_pattern = j.value("source", spec.base.source_pattern);
    spec.base.song_id = j.value("song_id", spec.base.song_id);
    spec.trials = j.value("trials", spec.trials);
    spec.seed = j.value("seed", spec.seed);
    spec.base.source_seed = spec.seed;
    if (j.contains("encoder")) parse_encoder(j["encoder"], &spec.base.mod);
    if (j.contains("channel")) parse_channel(j["channel"], spec.base.mod.fps_tx, &spec.base.channel);
    if (spec.base.channel.fps_rx <= 0) spec.base.channel.fps_rx = spec.base.mod.fps_tx;
    if (j.contains("decoder")) parse_decoder(j["decoder"], &spec.base.decoder);
    if (spec.trials < 1) throw std::invalid_argument("ExperimentSpec: trials >= 1");

    Condition base_cond;
    base_cond.delta_e00 = spec.base.mod.perception.delta_e00;
    base_cond.tiles = spec.base.mod.layout.count;
    base_cond.ec = spec.base.mod.ec;
    base_cond.mode = spec.base.mod.mode;
    base_cond.gaussian = spec.base.mod.smoothing_sigma > 0;
    base_cond.motion_comp = spec.base.decoder.motion_comp;
    base_cond.channel_preset = j.contains("channel") && j["channel"].contains("preset")
                                   ? j["channel"]["preset"].get<std::string>()
                                   : "custom";

    const nlohmann::json grid = j.value("grid", nlohmann::json::object());
    auto list_d = [&grid](const char* key, double fallback) {
        std::vector<double> v;
        if (grid.contains(key)) {
            for (const auto& x : grid[key]) v.push_back(x.get<double>());
        } else {
            v.push_back(fallback);
        }
        return v;
    };
    auto list_i = [&grid](const char* key, int fallback) {
        std::vector<int> v;
        if (grid.contains(key)) {
            for (const auto& x : grid[key]) v.push_back(x.get<int>());
        } else {
            v.push_back(fallback);
        }
        return v;
    };
    auto list_b = [&grid](const char* key, bool fallback) {
        std::vector<bool> v;
        if (grid.contains(key)) {
            for (const auto& x : grid[key]) v.push_back(x.get<bool>());
        } else {
            v.push_back(fallback);
        }
        return v;
    };
    auto list_s = [&grid](const char* key, std::string fallback) {
        std::vector<std::string> v;
        if (grid.contains(key)) {
            for (const auto& x : grid[key]) v.push_back(x.get<std::string>());
        } else {
            v.push_back(std::move(fallback));
        }
        return v;
    };

    for (double de : list_d("delta_e00", base_cond.delta_e00)) {
        for (int tiles : list_i("tiles", base_cond.tiles)) {
            for (const std::string& ec : list_s("ec", to_string(base_cond.ec))) {
                for (const std::string& mode : list_s("mode", to_string(base_cond.mode))) {
                    for (bool gaussian : list_b("gaussian", base_cond.gaussian)) {
                        for (bool mc : list_b("motion_comp", base_cond.motion_comp)) {
                            for (const std::string& preset :
                                 list_s("channel_preset", base_cond.channel_preset)) {
                                Condition c = base_cond;
                                c.delta_e00 = de;
                                c.tiles = tiles;
                                c.ec = ec_level_from_string(ec);
                                c.mode = encode_mode_from_string(mode);
                                c.gaussian = gaussian;
                                c.motion_comp = mc;
                                c.channel_preset = preset;
                                c.id = condition_id(c);
                                spec.grid.push_back(c);
                            }
                        }
                    }
                }
            }
        }
    }
    return spec;
}

ExperimentSpec ExperimentSpec::from_file(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("ExperimentSpec: cannot open " + file.string());
    nlohmann::json j;
    in >> j;
    return from_json(j);
}

double percentile(std::vector<double> samples, double p) {
    if (samples.empty()) return std::nan("");
    std::sort(samples.begin(), samples.end());
    const std::size_t rank = static_cast<std::size_t>(std::ceil(p * samples.size()));
    return samples[std::min(samples.size() - 1, rank > 0 ? rank - 1 : 0)];
}

void run_experiment(const ExperimentSpec& spec, const fs::path& out_dir) {
    fs::create_directories(out_dir);
    std::ofstream csv(out_dir / "results.csv");
    if (!csv) throw std::runtime_error("run_experiment: cannot write results.csv");
    csv << "condition_id,trial,delta_e00,tiles,ec_level,mode,gaussian,motion_comp,"
           "channel_preset,psr,rt_p50_ms,rt_p95_ms\n";

    for (const Condition& cond : spec.grid) {
        std::vector<double> pooled_samples;
        for (int trial = 0; trial < spec.trials; ++trial) {
            TrialSpec t = spec.base;
            t.mod.perception.delta_e00 = cond.delta_e00;
            t.mod.layout.count = cond.tiles;
            t.mod.ec = cond.ec;
            t.mod.mode = cond.mode;
            const double base_sigma =
                spec.base.mod.smoothing_sigma > 0 ? spec.base.mod.smoothing_sigma : 1.0;
            t.mod.smoothing_sigma = cond.gaussian ? base_sigma : 0.0;
            t.decoder.motion_comp = cond.motion_comp;
            if (cond.channel_preset != "custom") {
                const double fps_rx = t.channel.fps_rx;
                t.channel = channel_preset(cond.channel_preset, t.mod.fps_tx);
                if (fps_rx > 0) t.channel.fps_rx = fps_rx;
            }
            // Same channel noise for every condition at a given trial: paired
            // comparisons across the grid.
            t.channel.seed = mix_seed(spec.seed, static_cast<std::uint64_t>(trial));

            const TrialResult r = run_link_trial(t);
            pooled_samples.insert(pooled_samples.end(),
                                  r.metrics.response_time_samples_ms.begin(),
                                  r.metrics.response_time_samples_ms.end());

            csv << cond.id << "," << trial << "," << format_double(cond.delta_e00, "%.2f") << ","
                << cond.tiles << "," << to_string(cond.ec) << "," << to_string(cond.mode) << ","
                << (cond.gaussian ? 1 : 0) << "," << (cond.motion_comp ? 1 : 0) << ","
                << cond.channel_preset << "," << format_double(r.metrics.psr, "%.4f") << ","
                << format_double(percentile(r.metrics.response_time_samples_ms, 0.50), "%.3f")
                << ","
                << format_double(percentile(r.metrics.response_time_samples_ms, 0.95), "%.3f")
                << "\n";
        }
        std::ofstream cdf(out_dir / ("cdf_" + cond.id + ".csv"));
        cdf << "response_time_ms,cum_fraction\n";
        for (const auto& [ms, frac] : response_time_cdf(pooled_samples)) {
            cdf << format_double(ms, "%.3f") << "," << format_double(frac, "%.6f") << "\n";
        }
    }
}

void write_results_file(const fs::path& file, const std::vector<PacketResult>& results) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write " + file.string());
    out << "# song_id frame_num capture_ts_ms latency_ms slot_a slot_b\n";
    for (const PacketResult& r : results) {
        out << r.payload.song_id << " " << r.payload.frame_num << " "
            << format_double(r.capture_timestamp_ms, "%.3f") << " "
            << format_double(r.decode_latency_ms, "%.3f") << " " << r.frame_a << " " << r.frame_b
            << "\n";
    }
}

void write_metrics_file(const fs::path& file, const LinkMetrics& m) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write " + file.string());
    out << "psr " << format_double(m.psr, "%.4f") << "\n";
    out << "packets_transmitted " << m.packets_transmitted << "\n";
    out << "packets_decoded " << m.packets_decoded << "\n";
    out << "attempts " << m.attempts << "\n";
    out << "successes " << m.successes << "\n";
    out << "rt_p50_ms " << format_double(percentile(m.response_time_samples_ms, 0.50), "%.3f")
        << "\n";
    out << "rt_p95_ms " << format_double(percentile(m.response_time_samples_ms, 0.95), "%.3f")
        << "\n";
}

}  // namespace lumalink
