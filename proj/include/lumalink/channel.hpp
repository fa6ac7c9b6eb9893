#pragma once

#include "lumalink/encoder.hpp"

#include <cstdint>

namespace lumalink {

/// Per-frame camera pose disturbance, sampled uniformly within bounds.
struct JitterParams {
    double translation_px_max = 0.0;
    double rotation_deg_max = 0.0;
    double scale_max = 0.0;  // fractional, e.g. 0.01 -> scale in [0.99, 1.01]

    bool enabled() const {
        return translation_px_max > 0 || rotation_deg_max > 0 || scale_max > 0;
    }
};

struct SimilarityTransform {
    double scale = 1.0;
    double rot_rad = 0.0;
    double tx = 0.0;
    double ty = 0.0;

    bool is_identity() const { return scale == 1.0 && rot_rad == 0.0 && tx == 0.0 && ty == 0.0; }
};

/// Display-to-camera channel model. ISO/shutter behavior is abstracted as a
/// (gain, noise_sigma) pair; passive screens attenuate, so gain <= 1.
struct ChannelParams {
    double fps_rx = 60.0;
    double gain = 1.0;          // multiplicative lightness factor in (0,1]
    double noise_sigma = 0.0;   // additive Gaussian on L*, in L* units
    double drop_prob = 0.0;     // in [0,1)
    JitterParams jitter;
    double shutter_band = 0.0;  // fraction of rows from the previous frame, [0,1)
    std::uint64_t seed = 0;

    void validate(double fps_tx) const {
        if (!(fps_rx >= fps_tx)) {
            throw std::invalid_argument("ChannelParams: fps_rx must be >= fps_tx");
        }
        if (!(gain > 0.0) || gain > 1.0) {
            throw std::invalid_argument("ChannelParams: gain must be in (0,1]");
        }
        if (noise_sigma < 0) throw std::invalid_argument("ChannelParams: noise_sigma must be >= 0");
        if (drop_prob < 0 || drop_prob >= 1) {
            throw std::invalid_argument("ChannelParams: drop_prob must be in [0,1)");
        }
        if (shutter_band < 0 || shutter_band >= 1) {
            throw std::invalid_argument("ChannelParams: shutter_band must be in [0,1)");
        }
    }
};

struct CapturedFrame {
    LabFrame frame;          // empty when dropped
    double timestamp_ms = 0;
    long source_index = -1;  // emitted-frame index this capture sampled
    bool dropped = false;
};

struct CapturedSequence {
    std::vector<CapturedFrame> frames;
    ChannelParams params;
    double fps_tx = 0;  // of the source sequence
};

/// Warp a frame by a similarity transform about the frame center, bilinear
/// resampling, out-of-frame samples clamped to the border.
LabFrame apply_motion_jitter(const LabFrame& frame, const SimilarityTransform& t);

/// Top floor(rho * height) rows from the previously displayed frame.
LabFrame apply_rolling_shutter(const LabFrame& curr, const LabFrame& prev, double rho);

/// Sample-and-hold resample from fps_tx to fps_rx, then per captured frame:
/// rolling-shutter mix, jitter, gain, noise, drop. Fully reproducible from
/// the seed; per-slot RNG streams make captures independent of chunking.
/// slot_offset shifts the global slot index (and timestamps) so long runs can
/// be captured in packet-aligned chunks.
CapturedSequence capture(const EncodedSequence& enc, const ChannelParams& cp,
                         long slot_offset = 0);

}  // namespace lumalink
