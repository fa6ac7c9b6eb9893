#include "lumalink/barcode.hpp"

#include <charconv>

namespace lumalink {

const char* to_string(EcLevel ec) {
    switch (ec) {
        case EcLevel::L: return "L";
        case EcLevel::M: return "M";
        case EcLevel::Q: return "Q";
        default: return "H";
    }
}

EcLevel ec_level_from_string(const std::string& name) {
    if (name == "L") return EcLevel::L;
    if (name == "M") return EcLevel::M;
    if (name == "Q") return EcLevel::Q;
    if (name == "H") return EcLevel::H;
    throw std::invalid_argument("unknown EC level '" + name + "'");
}

std::string Payload::serialize() const {
    return "{\"s\":" + std::to_string(song_id) + ",\"f\":" + std::to_string(frame_num) + "}";
}

std::optional<Payload> Payload::parse(const std::string& text) {
    // Strict match of {"s":<digits>,"f":<digits>}.
    const std::string_view sv(text);
    constexpr std::string_view head = "{\"s\":";
    constexpr std::string_view mid = ",\"f\":";
    if (!sv.starts_with(head)) return std::nullopt;
    std::size_t pos = head.size();

    Payload p;
    auto [ptr1, ec1] = std::from_chars(sv.data() + pos, sv.data() + sv.size(), p.song_id);
    if (ec1 != std::errc{} || ptr1 == sv.data() + pos) return std::nullopt;
    pos = static_cast<std::size_t>(ptr1 - sv.data());
    if (sv.substr(pos, mid.size()) != mid) return std::nullopt;
    pos += mid.size();

    auto [ptr2, ec2] = std::from_chars(sv.data() + pos, sv.data() + sv.size(), p.frame_num);
    if (ec2 != std::errc{} || ptr2 == sv.data() + pos) return std::nullopt;
    pos = static_cast<std::size_t>(ptr2 - sv.data());
    if (pos + 1 != sv.size() || sv[pos] != '}') return std::nullopt;
    return p;
}

qr::Matrix encode_payload(const Payload& p, EcLevel ec) {
    return qr::encode_bytes(p.serialize(), ec);
}

std::vector<TileRect> tile_rects(int matrix_side, int frame_w, int frame_h,
                                 const TileLayout& layout) {
    layout.validate();
    const int modules = matrix_side + 2 * layout.quiet_zone;
    const int tile_px = modules * layout.module_px;
    const int rows = layout.grid_rows();
    const int cols = layout.grid_cols();
    const int cell_w = frame_w / cols;
    const int cell_h = frame_h / rows;
    if (tile_px > cell_w || tile_px > cell_h) {
        throw std::runtime_error("render_tiles: layout overflow, tile " + std::to_string(tile_px) +
                                 "px does not fit cell " + std::to_string(cell_w) + "x" +
                                 std::to_string(cell_h));
    }
    std::vector<TileRect> rects;
    rects.reserve(static_cast<std::size_t>(rows) * cols);
    for (int gr = 0; gr < rows; ++gr) {
        for (int gc = 0; gc < cols; ++gc) {
            rects.push_back({gc * cell_w + (cell_w - tile_px) / 2,
                             gr * cell_h + (cell_h - tile_px) / 2, tile_px});
        }
    }
    return rects;
}

BitPlane render_tiles(const qr::Matrix& m, int frame_w, int frame_h, const TileLayout& layout) {
    if (m.rows() != m.cols() || m.rows() < 21) {
        throw std::invalid_argument("render_tiles: not a module matrix");
    }
    const auto rects = tile_rects(static_cast<int>(m.rows()), frame_w, frame_h, layout);

    BitPlane plane = BitPlane::Zero(frame_h, frame_w);
    for (const TileRect& rect : rects) {
        // Quiet zone first (light), then modules.
        plane.block(rect.y0, rect.x0, rect.side, rect.side).setConstant(1);
        for (int r = 0; r < m.rows(); ++r) {
            for (int c = 0; c < m.cols(); ++c) {
                if (!m(r, c)) continue;
                plane.block(rect.y0 + (layout.quiet_zone + r) * layout.module_px,
                            rect.x0 + (layout.quiet_zone + c) * layout.module_px, layout.module_px,
                            layout.module_px)
                    .setConstant(-1);
            }
        }
    }
    return plane;
}

std::optional<Payload> decode_matrix(const PlaneF& gray) {
    for (const auto& det : qr::detect_and_decode(gray)) {
        if (auto p = Payload::parse(det.payload)) return p;
    }
    return std::nullopt;
}

}  // namespace lumalink
