#include "lumalink/sync.hpp"

#include <fstream>
#include <sstream>

namespace lumalink {

void TrackRegistry::add(std::uint64_t id, TrackInfo info) {
    if (tracks.contains(id)) throw std::invalid_argument("TrackRegistry: duplicate id");
    if (!(info.duration_ms > 0)) throw std::invalid_argument("TrackRegistry: duration must be > 0");
    if (!(info.fps_tx > 0)) throw std::invalid_argument("TrackRegistry: fps_tx must be > 0");
    tracks.emplace(id, std::move(info));
}

TrackRegistry TrackRegistry::load(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("TrackRegistry: cannot open " + file.string());

    TrackRegistry reg;
    std::string line;
    bool in_track = false;
    std::uint64_t id = 0;
    bool have_id = false;
    TrackInfo info;

    auto flush = [&] {
        if (!in_track) return;
        if (!have_id) throw std::runtime_error("TrackRegistry: track without id");
        reg.add(id, info);
        info = {};
        have_id = false;
    };

    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        const auto last = line.find_last_not_of(" \t\r");
        const std::string trimmed = line.substr(first, last - first + 1);

        if (trimmed == "[track]") {
            flush();
            in_track = true;
            continue;
        }
        const auto eq = trimmed.find('=');
        if (!in_track || eq == std::string::npos) {
            throw std::runtime_error("TrackRegistry: bad line " + std::to_string(line_no));
        }
        auto strip = [](std::string s) {
            const auto b = s.find_first_not_of(" \t");
            const auto e = s.find_last_not_of(" \t");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        const std::string key = strip(trimmed.substr(0, eq));
        const std::string value = strip(trimmed.substr(eq + 1));
        if (key == "id") {
            id = std::stoull(value);
            have_id = true;
        } else if (key == "title") {
            info.title = value;
        } else if (key == "duration_ms") {
            info.duration_ms = std::stod(value);
        } else if (key == "fps_tx") {
            info.fps_tx = std::stod(value);
        } else {
            throw std::runtime_error("TrackRegistry: unknown key '" + key + "'");
        }
    }
    flush();
    return reg;
}

void TrackRegistry::save(const std::filesystem::path& file) const {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("TrackRegistry: cannot write " + file.string());
    for (const auto& [id, info] : tracks) {
        out << "[track]\n";
        out << "id = " << id << "\n";
        out << "title = " << info.title << "\n";
        out << "duration_ms = " << info.duration_ms << "\n";
        out << "fps_tx = " << info.fps_tx << "\n\n";
    }
}

double frame_to_abs_time(std::uint64_t f_num, double fps_tx) {
    if (!(fps_tx > 0)) throw std::invalid_argument("frame_to_abs_time: fps_tx must be > 0");
    return 2.0 * static_cast<double>(f_num) / fps_tx * 1000.0;
}

PlaybackQuery playback_position(const PacketResult& r, const TrackRegistry& reg, double now_ms) {
    PlaybackQuery q;
    q.song_id = r.payload.song_id;
    const auto it = reg.tracks.find(r.payload.song_id);
    if (it == reg.tracks.end()) {
        q.error = PlaybackError::unknown_track;
        return q;
    }
    const double t_abs = frame_to_abs_time(r.payload.frame_num, it->second.fps_tx);
    q.position_ms = t_abs + (now_ms - r.capture_timestamp_ms);
    if (q.position_ms < 0 || q.position_ms > it->second.duration_ms) {
        q.error = PlaybackError::out_of_range;
    }
    return q;
}

}  // namespace lumalink
