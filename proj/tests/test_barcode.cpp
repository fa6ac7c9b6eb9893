#include "lumalink/barcode.hpp"

#include <doctest.h>

#include <random>

using namespace lumalink;

namespace {

// Matrix for {"s":1,"f":120} at EC=L produced by an independent QR encoder
// (1 = dark). Decoding it checks conformance, not just self-consistency.
const char* kReferenceMatrix[21] = {
    "111111100010101111111",
    "100000101110101000001",
    "101110100011101011101",
    "101110101101001011101",
    "101110100101001011101",
    "100000101001101000001",
    "111111101010101111111",
    "000000000100100000000",
    "111110111000110101010",
    "110001000111000110101",
    "101110111010101100000",
    "001000010110010101111",
    "101010111100101011001",
    "000000001001010110111",
    "111111101000101101010",
    "100000100101100000111",
    "101110101100101100011",
    "101110101001000010100",
    "101110101100101100000",
    "100000101110000110100",
    "111111101000011111010",
};

PlaneF bitplane_to_gray(const BitPlane& plane) {
    PlaneF gray(plane.rows(), plane.cols());
    for (Eigen::Index y = 0; y < plane.rows(); ++y) {
        for (Eigen::Index x = 0; x < plane.cols(); ++x) {
            gray(y, x) = 127.5f + 127.5f * plane(y, x);
        }
    }
    return gray;
}

}  // namespace

TEST_CASE("payload wire format is byte-exact") {
    CHECK(Payload{1, 120}.serialize() == "{\"s\":1,\"f\":120}");
    CHECK(Payload{0, 0}.serialize() == "{\"s\":0,\"f\":0}");

    const auto p = Payload::parse("{\"s\":42,\"f\":123456}");
    REQUIRE(p.has_value());
    CHECK(p->song_id == 42);
    CHECK(p->frame_num == 123456);

    CHECK_FALSE(Payload::parse("{\"f\":1,\"s\":2}").has_value());
    CHECK_FALSE(Payload::parse("{\"s\": 1,\"f\":2}").has_value());
    CHECK_FALSE(Payload::parse("{\"s\":1,\"f\":2} ").has_value());
    CHECK_FALSE(Payload::parse("{\"s\":1,\"f\":}").has_value());
    CHECK_FALSE(Payload::parse("").has_value());

    std::mt19937_64 rng(11);
    for (int i = 0; i < 100; ++i) {
        const Payload in{rng() % 1000000, rng() % 1000000};
        const auto back = Payload::parse(in.serialize());
        REQUIRE(back.has_value());
        CHECK(*back == in);
    }
}

TEST_CASE("an independently produced matrix decodes to the payload") {
    qr::Matrix m(21, 21);
    for (int r = 0; r < 21; ++r)
        for (int c = 0; c < 21; ++c) m(r, c) = kReferenceMatrix[r][c] == '1';
    const auto text = qr::decode_matrix_bits(m);
    REQUIRE(text.has_value());
    CHECK(*text == "{\"s\":1,\"f\":120}");
}

TEST_CASE("encode_payload round-trips at every EC level") {
    const Payload payload{1, 120};
    int prev_side = 0;
    for (auto ec : {EcLevel::L, EcLevel::M, EcLevel::Q, EcLevel::H}) {
        const qr::Matrix m = encode_payload(payload, ec);
        const auto text = qr::decode_matrix_bits(m);
        REQUIRE(text.has_value());
        CHECK(*text == payload.serialize());
        CHECK(m.rows() >= prev_side);  // higher redundancy never shrinks the symbol
        prev_side = static_cast<int>(m.rows());
    }
}

TEST_CASE("payload too large raises") {
    const std::string big(500, 'x');
    CHECK_THROWS_AS(qr::encode_bytes(big, EcLevel::H), std::length_error);
}

TEST_CASE("corruption up to the reported correctable count still decodes at H") {
    const Payload payload{1, 120};
    const qr::Matrix m = encode_payload(payload, EcLevel::H);
    const int side = static_cast<int>(m.rows());
    const auto info = qr::symbol_info((side - 17) / 4, EcLevel::H);
    for (int trial = 0; trial < 50; ++trial) {
        std::mt19937_64 rng(trial);
        qr::Matrix corrupted = m;
        std::uniform_int_distribution<int> d(0, side - 1);
        for (int f = 0; f < info.correctable_per_block; ++f) corrupted(d(rng), d(rng)) ^= 1;
        const auto text = qr::decode_matrix_bits(corrupted);
        CAPTURE(trial);
        REQUIRE(text.has_value());
        CHECK(*text == payload.serialize());
    }
}

TEST_CASE("30 percent corruption at EC=L fails as a value") {
    const Payload payload{1, 120};
    const qr::Matrix m = encode_payload(payload, EcLevel::L);
    const int side = static_cast<int>(m.rows());
    const int flips = static_cast<int>(0.30 * side * side);
    for (int trial = 0; trial < 50; ++trial) {
        std::mt19937_64 rng(31337 + trial);
        qr::Matrix corrupted = m;
        std::uniform_int_distribution<int> d(0, side - 1);
        for (int f = 0; f < flips; ++f) corrupted(d(rng), d(rng)) ^= 1;
        CHECK_FALSE(qr::decode_matrix_bits(corrupted).has_value());
    }
}

TEST_CASE("render_tiles: single centered tile covers exactly its rect") {
    const qr::Matrix m = encode_payload({1, 5}, EcLevel::L);
    TileLayout layout;
    layout.count = 1;
    layout.module_px = 3;
    const BitPlane plane = render_tiles(m, 200, 160, layout);
    const auto rects = tile_rects(static_cast<int>(m.rows()), 200, 160, layout);
    REQUIRE(rects.size() == 1);

    int x_min = 1 << 30, x_max = -1, y_min = 1 << 30, y_max = -1;
    for (int y = 0; y < 160; ++y) {
        for (int x = 0; x < 200; ++x) {
            if (plane(y, x) != 0) {
                x_min = std::min(x_min, x);
                x_max = std::max(x_max, x);
                y_min = std::min(y_min, y);
                y_max = std::max(y_max, y);
            }
        }
    }
    CHECK(x_min == rects[0].x0);
    CHECK(y_min == rects[0].y0);
    CHECK(x_max == rects[0].x0 + rects[0].side - 1);
    CHECK(y_max == rects[0].y0 + rects[0].side - 1);
}

TEST_CASE("render_tiles: six copies are disjoint and all nonzero") {
    const qr::Matrix m = encode_payload({1, 5}, EcLevel::L);
    TileLayout layout;
    layout.count = 6;
    layout.module_px = 3;
    const BitPlane plane = render_tiles(m, 384, 288, layout);
    const auto rects = tile_rects(static_cast<int>(m.rows()), 384, 288, layout);
    REQUIRE(rects.size() == 6);

    long nonzero = (plane != 0).count();
    long expected = 0;
    for (const auto& r : rects) expected += static_cast<long>(r.side) * r.side;
    CHECK(nonzero == expected);  // nonzero pixels exactly tile the rects
    for (std::size_t i = 0; i < rects.size(); ++i) {
        for (std::size_t j = i + 1; j < rects.size(); ++j) {
            const bool overlap_x = rects[i].x0 < rects[j].x0 + rects[j].side &&
                                   rects[j].x0 < rects[i].x0 + rects[i].side;
            const bool overlap_y = rects[i].y0 < rects[j].y0 + rects[j].side &&
                                   rects[j].y0 < rects[i].y0 + rects[i].side;
            CHECK_FALSE((overlap_x && overlap_y));
        }
    }
}

TEST_CASE("render_tiles overflows on a frame smaller than one tile") {
    const qr::Matrix m = encode_payload({1, 5}, EcLevel::L);
    TileLayout layout;
    layout.count = 1;
    layout.module_px = 4;
    CHECK_THROWS_AS(render_tiles(m, 64, 64, layout), std::runtime_error);
}

TEST_CASE("decode_matrix: rendered tiles round-trip, uniform gray fails") {
    const Payload payload{9, 7777};
    TileLayout layout;
    layout.count = 1;
    layout.module_px = 4;
    const qr::Matrix m = encode_payload(payload, EcLevel::M);
    const BitPlane plane = render_tiles(m, 220, 220, layout);
    const auto decoded = decode_matrix(bitplane_to_gray(plane));
    REQUIRE(decoded.has_value());
    CHECK(*decoded == payload);

    CHECK_FALSE(decode_matrix(PlaneF::Constant(128, 128, 100.0f)).has_value());
}

TEST_CASE("encode -> render -> sample-back -> decode is the identity") {
    std::mt19937_64 rng(77);
    for (auto ec : {EcLevel::L, EcLevel::M, EcLevel::Q, EcLevel::H}) {
        for (int count : {1, 6}) {
            const Payload payload{rng() % 100, rng() % 100000};
            TileLayout layout;
            layout.count = count;
            layout.module_px = 3;
            const qr::Matrix m = encode_payload(payload, ec);
            const BitPlane plane = render_tiles(m, 384, 288, layout);
            const auto decoded = decode_matrix(bitplane_to_gray(plane));
            CAPTURE(to_string(ec));
            CAPTURE(count);
            REQUIRE(decoded.has_value());
            CHECK(*decoded == payload);
        }
    }
}

TEST_CASE("with six tiles any single surviving tile decodes") {
    const Payload payload{3, 999};
    TileLayout layout;
    layout.count = 6;
    layout.module_px = 3;
    const qr::Matrix m = encode_payload(payload, EcLevel::L);
    BitPlane plane = render_tiles(m, 384, 288, layout);
    const auto rects = tile_rects(static_cast<int>(m.rows()), 384, 288, layout);

    // Blank out all but tile 4.
    for (std::size_t i = 0; i < rects.size(); ++i) {
        if (i == 4) continue;
        plane.block(rects[i].y0, rects[i].x0, rects[i].side, rects[i].side).setConstant(0);
    }
    const auto decoded = decode_matrix(bitplane_to_gray(plane));
    REQUIRE(decoded.has_value());
    CHECK(*decoded == payload);
}

TEST_CASE("ec level names round trip") {
    for (auto ec : {EcLevel::L, EcLevel::M, EcLevel::Q, EcLevel::H}) {
        CHECK(ec_level_from_string(to_string(ec)) == ec);
    }
    CHECK_THROWS_AS(ec_level_from_string("Z"), std::invalid_argument);
}
