#pragma once

#include "lumalink/channel.hpp"
#include "lumalink/encoder.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace lumalink {

/// Directory of numbered binary PPM frames plus a plain-text manifest.
/// Lexicographic file order is temporal order.
struct StoreManifest {
    int width = 0;
    int height = 0;
    int count = 0;
    double fps = 0;
    std::string format = "ppm";
};

void write_ppm(const std::filesystem::path& file, const RgbFrame& frame);
RgbFrame read_ppm(const std::filesystem::path& file);

class FrameStore {
public:
    static void write(const std::filesystem::path& dir, const std::vector<RgbFrame>& frames,
                      double fps);
    static std::vector<RgbFrame> read(const std::filesystem::path& dir,
                                      StoreManifest* manifest = nullptr);
    static StoreManifest read_manifest(const std::filesystem::path& dir);
};

/// Ground-truth sidecar: the payload schedule of an encoded store.
struct GroundTruth {
    EncodeMode mode = EncodeMode::pair;
    double fps_tx = 0;
    std::vector<PacketSchedule> schedule;
};

void write_ground_truth(const std::filesystem::path& file, const EncodedSequence& seq,
                        EncodeMode mode);
GroundTruth read_ground_truth(const std::filesystem::path& file);

/// Capture sidecar: one line per capture slot with timestamp, source frame
/// index and drop flag.
struct CaptureMeta {
    double fps_rx = 0;
    struct Slot {
        double timestamp_ms;
        long source_index;
        bool dropped;
    };
    std::vector<Slot> slots;
};

void write_capture_meta(const std::filesystem::path& file, const CapturedSequence& cap);
CaptureMeta read_capture_meta(const std::filesystem::path& file);

}  // namespace lumalink
