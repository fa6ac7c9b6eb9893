#pragma once

#include "lumalink/barcode.hpp"
#include "lumalink/channel.hpp"

#include <optional>
#include <vector>

namespace lumalink {

struct DecoderConfig {
    double roi_threshold = 1.0;     // L* units on |diff|
    int min_region_px = 64;         // connected components below this are noise
    int resync_failures = 5;        // R: consecutive failures before resync
    bool motion_comp = false;
    double binarize_threshold = 0.0;  // sign threshold on the diff

    void validate() const {
        if (!(roi_threshold > 0)) throw std::invalid_argument("DecoderConfig: roi_threshold > 0");
        if (resync_failures < 1) throw std::invalid_argument("DecoderConfig: resync_failures >= 1");
        if (min_region_px < 1) throw std::invalid_argument("DecoderConfig: min_region_px >= 1");
    }
};

/// q = [a -b; b a] p + (tx, ty), mapping reference coordinates into the
/// observed frame.
struct AffineSimilarity {
    double a = 1.0, b = 0.0, tx = 0.0, ty = 0.0;

    bool is_identity() const { return a == 1.0 && b == 0.0 && tx == 0.0 && ty == 0.0; }
    std::pair<double, double> apply(double x, double y) const {
        return {a * x - b * y + tx, b * x + a * y + ty};
    }
};

struct AlignResult {
    AffineSimilarity transform;  // prev coords -> curr coords
    LabFrame aligned;            // curr resampled onto prev coordinates
    int inliers = 0;
    bool fallback_identity = false;
};

/// Feature-based registration of curr onto prev: corner detection, local
/// patch matching, robust similarity fit with iterative inlier
/// re-estimation. Falls back to identity below 8 inlier matches.
AlignResult align_frames(const LabFrame& prev, const LabFrame& curr);

/// Signed per-pixel lightness difference a.L - b.L.
using DiffFrame = PlaneF;
DiffFrame subtract(const LabFrame& a, const LabFrame& b);

struct BBox {
    int x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // inclusive
    int width() const { return x1 - x0 + 1; }
    int height() const { return y1 - y0 + 1; }
};

/// Bounding box of |diff| > threshold after discarding connected components
/// smaller than min_region_px. none when nothing survives.
std::optional<BBox> detect_roi(const DiffFrame& d, const DecoderConfig& cfg);

/// Crop and sign-binarize the diff into barcode-decoder gray range (0..255).
/// Returns both polarities; which frame of a complementary pair arrived
/// first is unknown, so the decoder tries both.
std::pair<PlaneF, PlaneF> binarize_roi(const DiffFrame& d, const BBox& box,
                                       double threshold = 0.0);

struct PacketResult {
    Payload payload;
    double capture_timestamp_ms = 0;  // timestamp of the later frame of the pair
    double decode_latency_ms = 0;     // wall-clock pipeline latency
    long frame_a = -1, frame_b = -1;  // capture slots used
};

struct SyncState {
    bool synced = false;
    int parity = 0;  // pair index parity that decodes, valid when synced
    int consecutive_failures = 0;
};

struct LinkMetrics {
    double psr = 0.0;
    std::vector<double> response_time_samples_ms;
    long attempts = 0;
    long successes = 0;
    long packets_transmitted = 0;
    long packets_decoded = 0;
};

/// Incremental receiver: feed captured frames in order; dropped slots are
/// simply never pushed. Keeps the parity-synchronization state across
/// arbitrarily chunked input.
class StreamDecoder {
public:
    explicit StreamDecoder(const DecoderConfig& cfg);

    void push(const LabFrame& frame, double timestamp_ms, long slot);

    const std::vector<PacketResult>& results() const { return results_; }
    const SyncState& sync() const { return state_; }
    long attempts() const { return attempts_; }
    long successes() const { return successes_; }

private:
    DecoderConfig cfg_;
    SyncState state_;
    std::vector<PacketResult> results_;
    long attempts_ = 0;
    long successes_ = 0;
    long kept_index_ = -1;  // index of the last pushed frame among kept frames
    LabFrame prev_;
    double prev_ts_ = 0;
    long prev_slot_ = -1;
    bool have_prev_ = false;
};

/// Run the receiver over a captured sequence.
struct StreamOutput {
    std::vector<PacketResult> results;
    long attempts = 0;
    long successes = 0;
    SyncState final_state;
};
StreamOutput stream_decode(const CapturedSequence& cap, const DecoderConfig& cfg);

/// PSR against the transmitted schedule plus capture-timeline response-time
/// samples: for every packet start time, the wait until the next successful
/// decode at or after it.
LinkMetrics compute_metrics(const std::vector<PacketResult>& results,
                            const std::vector<PacketSchedule>& ground_truth, double fps_tx,
                            long attempts = 0, long successes = 0);

/// Empirical CDF of response-time samples: sorted (ms, cumulative fraction).
std::vector<std::pair<double, double>> response_time_cdf(std::vector<double> samples);

}  // namespace lumalink
