#include "lumalink/framestore.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace lumalink {

namespace fs = std::filesystem;

void write_ppm(const fs::path& file, const RgbFrame& frame) {
    if (!frame.valid()) throw std::invalid_argument("write_ppm: invalid frame");
    std::ofstream out(file, std::ios::binary);
    if (!out) throw std::runtime_error("write_ppm: cannot open " + file.string());
    out << "P6\n" << frame.width << " " << frame.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(frame.data.data()),
              static_cast<std::streamsize>(frame.data.size()));
    if (!out) throw std::runtime_error("write_ppm: write failed for " + file.string());
}

RgbFrame read_ppm(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw std::runtime_error("read_ppm: cannot open " + file.string());
    std::string magic;
    in >> magic;
    if (magic != "P6") throw std::runtime_error("read_ppm: not a binary PPM: " + file.string());

    auto next_token = [&in, &file]() {
        std::string tok;
        while (in >> tok) {
            if (tok[0] == '#') {
                std::string rest;
                std::getline(in, rest);
                continue;
            }
            return tok;
        }
        throw std::runtime_error("read_ppm: truncated header: " + file.string());
    };
    const int w = std::stoi(next_token());
    const int h = std::stoi(next_token());
    const int maxval = std::stoi(next_token());
    if (w < 1 || h < 1 || maxval != 255) throw std::runtime_error("read_ppm: unsupported header");
    in.get();  // single whitespace after maxval

    RgbFrame frame(w, h);
    in.read(reinterpret_cast<char*>(frame.data.data()),
            static_cast<std::streamsize>(frame.data.size()));
    if (in.gcount() != static_cast<std::streamsize>(frame.data.size())) {
        throw std::runtime_error("read_ppm: truncated pixel data: " + file.string());
    }
    return frame;
}

namespace {

std::string frame_name(int index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "frame_%06d.ppm", index);
    return buf;
}

}  // namespace

void FrameStore::write(const fs::path& dir, const std::vector<RgbFrame>& frames, double fps) {
    if (frames.empty()) throw std::invalid_argument("FrameStore::write: no frames");
    fs::create_directories(dir);
    for (std::size_t i = 0; i < frames.size(); ++i) {
        if (frames[i].width != frames[0].width || frames[i].height != frames[0].height) {
            throw std::invalid_argument("FrameStore::write: mixed frame sizes");
        }
        write_ppm(dir / frame_name(static_cast<int>(i)), frames[i]);
    }
    std::ofstream out(dir / "manifest.txt");
    out << "format: ppm\n";
    out << "width: " << frames[0].width << "\n";
    out << "height: " << frames[0].height << "\n";
    out << "count: " << frames.size() << "\n";
    char fps_buf[32];
    std::snprintf(fps_buf, sizeof fps_buf, "%.6g", fps);
    out << "fps: " << fps_buf << "\n";
}

StoreManifest FrameStore::read_manifest(const fs::path& dir) {
    std::ifstream in(dir / "manifest.txt");
    if (!in) throw std::runtime_error("FrameStore: missing manifest in " + dir.string());
    StoreManifest m;
    std::string key;
    while (in >> key) {
        if (key == "format:") in >> m.format;
        else if (key == "width:") in >> m.width;
        else if (key == "height:") in >> m.height;
        else if (key == "count:") in >> m.count;
        else if (key == "fps:") in >> m.fps;
        else {
            std::string rest;
            std::getline(in, rest);
        }
    }
    if (m.width < 1 || m.height < 1 || m.count < 1 || !(m.fps > 0)) {
        throw std::runtime_error("FrameStore: malformed manifest in " + dir.string());
    }
    return m;
}

std::vector<RgbFrame> FrameStore::read(const fs::path& dir, StoreManifest* manifest) {
    const StoreManifest m = read_manifest(dir);
    std::vector<RgbFrame> frames;
    frames.reserve(m.count);
    for (int i = 0; i < m.count; ++i) {
        RgbFrame f = read_ppm(dir / frame_name(i));
        if (f.width != m.width || f.height != m.height) {
            throw std::runtime_error("FrameStore: frame size does not match manifest");
        }
        frames.push_back(std::move(f));
    }
    if (manifest) *manifest = m;
    return frames;
}

void write_ground_truth(const fs::path& file, const EncodedSequence& seq, EncodeMode mode) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("write_ground_truth: cannot open " + file.string());
    char fps_buf[32];
    std::snprintf(fps_buf, sizeof fps_buf, "%.6g", seq.fps_tx);
    out << "mode " << to_string(mode) << "\n";
    out << "fps_tx " << fps_buf << "\n";
    out << "packets " << seq.schedule.size() << "\n";
    out << "# packet song_id frame_num first_frame frame_count\n";
    for (std::size_t i = 0; i < seq.schedule.size(); ++i) {
        const PacketSchedule& p = seq.schedule[i];
        out << i << " " << p.payload.song_id << " " << p.payload.frame_num << " " << p.first_frame
            << " " << p.frame_count << "\n";
    }
}

GroundTruth read_ground_truth(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("read_ground_truth: cannot open " + file.string());
    GroundTruth gt;
    std::string key, mode;
    std::size_t count = 0;
    in >> key >> mode;
    if (key != "mode") throw std::runtime_error("read_ground_truth: bad header");
    gt.mode = encode_mode_from_string(mode);
    in >> key >> gt.fps_tx;
    in >> key >> count;
    std::string comment;
    std::getline(in, comment);
    std::getline(in, comment);
    for (std::size_t i = 0; i < count; ++i) {
        std::size_t idx;
        PacketSchedule p;
        in >> idx >> p.payload.song_id >> p.payload.frame_num >> p.first_frame >> p.frame_count;
        if (!in) throw std::runtime_error("read_ground_truth: truncated schedule");
        gt.schedule.push_back(p);
    }
    return gt;
}

void write_capture_meta(const fs::path& file, const CapturedSequence& cap) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("write_capture_meta: cannot open " + file.string());
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", cap.params.fps_rx);
    out << "fps_rx " << buf << "\n";
    out << "slots " << cap.frames.size() << "\n";
    out << "# slot timestamp_ms source_index dropped\n";
    for (std::size_t i = 0; i < cap.frames.size(); ++i) {
        const CapturedFrame& f = cap.frames[i];
        std::snprintf(buf, sizeof buf, "%.3f", f.timestamp_ms);
        out << i << " " << buf << " " << f.source_index << " " << (f.dropped ? 1 : 0) << "\n";
    }
}

CaptureMeta read_capture_meta(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("read_capture_meta: cannot open " + file.string());
    CaptureMeta meta;
    std::string key;
    std::size_t count = 0;
    in >> key >> meta.fps_rx;
    in >> key >> count;
    std::string comment;
    std::getline(in, comment);
    std::getline(in, comment);
    for (std::size_t i = 0; i < count; ++i) {
        std::size_t idx;
        CaptureMeta::Slot s{};
        int dropped;
        in >> idx >> s.timestamp_ms >> s.source_index >> dropped;
        if (!in) throw std::runtime_error("read_capture_meta: truncated");
        s.dropped = dropped != 0;
        meta.slots.push_back(s);
    }
    return meta;
}

}  // namespace lumalink
