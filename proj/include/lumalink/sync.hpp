#pragma once

#include "lumalink/decoder.hpp"

#include <filesystem>
#include <map>
#include <string>

namespace lumalink {

struct TrackInfo {
    std::string title;
    double duration_ms = 0;
    double fps_tx = 0;
};

/// Registered tracks the receiver can synchronize to, keyed by song id.
struct TrackRegistry {
    std::map<std::uint64_t, TrackInfo> tracks;

    void add(std::uint64_t id, TrackInfo info);
    static TrackRegistry load(const std::filesystem::path& file);
    void save(const std::filesystem::path& file) const;
};

/// Absolute media time of a decoded frame index:
/// t_abs = (2 * f_num / fps_tx) * 1000 ms; the factor 2 because each code
/// frame is carried by two complementary display frames.
double frame_to_abs_time(std::uint64_t f_num, double fps_tx);

enum class PlaybackError { none, unknown_track, out_of_range };

struct PlaybackQuery {
    PlaybackError error = PlaybackError::none;
    std::uint64_t song_id = 0;
    double position_ms = 0;

    bool ok() const { return error == PlaybackError::none; }
};

/// Playback position implied by a decoded packet: t_abs plus the time elapsed
/// since the pair was captured.
PlaybackQuery playback_position(const PacketResult& r, const TrackRegistry& reg, double now_ms);

}  // namespace lumalink
