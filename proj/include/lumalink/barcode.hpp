#pragma once

#include "lumalink/image.hpp"
#include "lumalink/qr.hpp"

#include <optional>
#include <string>

namespace lumalink {

using qr::EcLevel;

const char* to_string(EcLevel ec);
EcLevel ec_level_from_string(const std::string& name);

/// Sync packet carried by each barcode: a track id and a frame index.
/// Wire format is the exact ASCII string {"s":<id>,"f":<index>} with no
/// whitespace; it is transmitted content, so serialization is byte-stable.
struct Payload {
    std::uint64_t song_id = 0;
    std::uint64_t frame_num = 0;

    std::string serialize() const;
    static std::optional<Payload> parse(const std::string& text);

    bool operator==(const Payload&) const = default;
};

/// Spatial arrangement of barcode copies inside a frame. One centered tile,
/// or six copies on a 2x3 grid.
struct TileLayout {
    int count = 6;
    int module_px = 3;
    int quiet_zone = 4;  // modules on each side, rendered light

    int grid_rows() const { return count == 1 ? 1 : 2; }
    int grid_cols() const { return count == 1 ? 1 : 3; }

    void validate() const {
        if (count != 1 && count != 6) throw std::invalid_argument("TileLayout: count must be 1 or 6");
        if (module_px < 1) throw std::invalid_argument("TileLayout: module_px must be >= 1");
        if (quiet_zone < 0) throw std::invalid_argument("TileLayout: quiet_zone must be >= 0");
    }
};

/// Frame-sized ternary code layout: +1 light module, -1 dark module,
/// 0 unmodulated background. Exactly the tile regions are nonzero.
using BitPlane = PlaneI8;

/// Serialize and encode a payload into a module matrix at the smallest
/// fitting version. Throws std::length_error when the payload cannot fit.
qr::Matrix encode_payload(const Payload& p, EcLevel ec);

/// Pixel footprint of one rendered tile (quiet zone included).
struct TileRect {
    int x0 = 0;
    int y0 = 0;
    int side = 0;
};

/// Placement of every tile for a given matrix side length; the same geometry
/// render_tiles stamps. Throws on layout overflow.
std::vector<TileRect> tile_rects(int matrix_side, int frame_w, int frame_h,
                                 const TileLayout& layout);

/// Stamp identical copies of the matrix into a frame-sized bit plane.
/// Throws std::runtime_error when a tile does not fit its grid cell.
BitPlane render_tiles(const qr::Matrix& m, int frame_w, int frame_h, const TileLayout& layout);

/// Scan a gray image (0..255) for barcodes and parse the first payload that
/// matches the wire format. Failure is a value, not an exception.
std::optional<Payload> decode_matrix(const PlaneF& gray);

}  // namespace lumalink
