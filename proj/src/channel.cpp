#include "lumalink/channel.hpp"

#include <cmath>
#include <random>

namespace lumalink {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::mt19937_64 slot_rng(std::uint64_t seed, long slot) {
    return std::mt19937_64(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(slot))));
}

}  // namespace

LabFrame apply_motion_jitter(const LabFrame& frame, const SimilarityTransform& t) {
    if (t.is_identity()) return frame;
    const int h = frame.height();
    const int w = frame.width();
    const double cx = (w - 1) / 2.0;
    const double cy = (h - 1) / 2.0;
    const double cos_t = std::cos(t.rot_rad);
    const double sin_t = std::sin(t.rot_rad);

    LabFrame out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            // Invert p' = s*R*(p-c) + c + t.
            const double dx = x - cx - t.tx;
            const double dy = y - cy - t.ty;
            const double sx = (cos_t * dx + sin_t * dy) / t.scale + cx;
            const double sy = (-sin_t * dx + cos_t * dy) / t.scale + cy;
            out.L(y, x) = sample_bilinear_clamped(frame.L, sx, sy);
            out.a(y, x) = sample_bilinear_clamped(frame.a, sx, sy);
            out.b(y, x) = sample_bilinear_clamped(frame.b, sx, sy);
        }
    }
    return out;
}

LabFrame apply_rolling_shutter(const LabFrame& curr, const LabFrame& prev, double rho) {
    if (rho < 0 || rho >= 1) throw std::invalid_argument("apply_rolling_shutter: rho in [0,1)");
    if (!curr.same_shape(prev)) throw std::invalid_argument("apply_rolling_shutter: shape mismatch");
    const int band = static_cast<int>(rho * curr.height());
    if (band == 0) return curr;
    LabFrame out = curr;
    out.L.topRows(band) = prev.L.topRows(band);
    out.a.topRows(band) = prev.a.topRows(band);
    out.b.topRows(band) = prev.b.topRows(band);
    return out;
}

CapturedSequence capture(const EncodedSequence& enc, const ChannelParams& cp, long slot_offset) {
    cp.validate(enc.fps_tx);
    if (enc.frames.empty()) throw std::invalid_argument("capture: empty sequence");

    const long n_tx = static_cast<long>(enc.frames.size());
    const long slots = std::llround(n_tx * cp.fps_rx / enc.fps_tx);

    CapturedSequence cap;
    cap.params = cp;
    cap.fps_tx = enc.fps_tx;
    cap.frames.reserve(slots);

    for (long k = 0; k < slots; ++k) {
        const long global_slot = slot_offset + k;
        long src = static_cast<long>(std::floor(k * enc.fps_tx / cp.fps_rx + 1e-9));
        if (src >= n_tx) src = n_tx - 1;

        CapturedFrame cf;
        cf.timestamp_ms = 1000.0 * global_slot / cp.fps_rx;
        cf.source_index = src;

        auto rng = slot_rng(cp.seed, global_slot);
        std::uniform_real_distribution<double> uni(0.0, 1.0);

        if (cp.drop_prob > 0 && uni(rng) < cp.drop_prob) {
            cf.dropped = true;
            cap.frames.push_back(std::move(cf));
            continue;
        }

        LabFrame frame = enc.frames[src];
        if (cp.shutter_band > 0 && src > 0) {
            frame = apply_rolling_shutter(frame, enc.frames[src - 1], cp.shutter_band);
        }
        if (cp.jitter.enabled()) {
            SimilarityTransform t;
            t.tx = (2 * uni(rng) - 1) * cp.jitter.translation_px_max;
            t.ty = (2 * uni(rng) - 1) * cp.jitter.translation_px_max;
            t.rot_rad = (2 * uni(rng) - 1) * cp.jitter.rotation_deg_max * M_PI / 180.0;
            t.scale = 1.0 + (2 * uni(rng) - 1) * cp.jitter.scale_max;
            frame = apply_motion_jitter(frame, t);
        }
        if (cp.gain != 1.0) frame.L *= static_cast<float>(cp.gain);
        if (cp.noise_sigma > 0) {
            std::normal_distribution<double> gauss(0.0, cp.noise_sigma);
            for (int y = 0; y < frame.height(); ++y) {
                for (int x = 0; x < frame.width(); ++x) {
                    frame.L(y, x) += static_cast<float>(gauss(rng));
                }
            }
        }
        cf.frame = std::move(frame);
        cap.frames.push_back(std::move(cf));
    }
    return cap;
}

}  // namespace lumalink
