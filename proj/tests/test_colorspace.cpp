#include "lumalink/colorspace.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace lumalink;

namespace {

RgbFrame solid(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    RgbFrame f(1, 1);
    f.data = {r, g, b};
    return f;
}

}  // namespace

TEST_CASE("white and black map to the Lab poles") {
    const auto white = srgb_to_lab<double>(solid(255, 255, 255));
    CHECK(white.L(0, 0) == doctest::Approx(100.0).epsilon(1e-4));
    CHECK(std::abs(white.a(0, 0)) < 1e-6);
    CHECK(std::abs(white.b(0, 0)) < 1e-6);

    const auto black = srgb_to_lab<double>(solid(0, 0, 0));
    CHECK(std::abs(black.L(0, 0)) < 1e-9);
    CHECK(std::abs(black.a(0, 0)) < 1e-9);
    CHECK(std::abs(black.b(0, 0)) < 1e-9);
}

TEST_CASE("mid gray 119 sits at L* ~= 50") {
    const auto lab = srgb_to_lab<double>(solid(119, 119, 119));
    // Reference conversion puts (119,119,119) at L* = 50.034.
    CHECK(lab.L(0, 0) == doctest::Approx(50.034).epsilon(5e-4));
    CHECK(std::abs(lab.a(0, 0)) < 1e-6);
}

TEST_CASE("lab_to_srgb inverts the poles") {
    LabFrameT<double> white(1, 1);
    white.L(0, 0) = 100.0;
    const RgbFrame w = lab_to_srgb(white);
    CHECK(w.data[0] == 255);
    CHECK(w.data[1] == 255);
    CHECK(w.data[2] == 255);

    LabFrameT<double> black(1, 1);
    const RgbFrame b = lab_to_srgb(black);
    CHECK(b.data[0] == 0);
    CHECK(b.data[1] == 0);
    CHECK(b.data[2] == 0);
}

TEST_CASE("round trip is exact on every 8-bit gray") {
    for (int v = 0; v < 256; ++v) {
        const RgbFrame in = solid(v, v, v);
        const RgbFrame out = lab_to_srgb(srgb_to_lab<double>(in));
        CAPTURE(v);
        CHECK(out.data == in.data);
    }
}

TEST_CASE("round trip is exact on random 8-bit colors") {
    std::mt19937_64 rng(42);
    std::uniform_int_distribution<int> d(0, 255);
    const int w = 512, h = 256;  // 131072 colors per frame
    RgbFrame in(w, h);
    for (auto& byte : in.data) byte = static_cast<std::uint8_t>(d(rng));
    const RgbFrame out = lab_to_srgb(srgb_to_lab<double>(in));
    CHECK(out.data == in.data);

    // Float-stored frames must survive the trip as well.
    const RgbFrame outf = lab_to_srgb(srgb_to_lab<float>(in));
    CHECK(outf.data == in.data);
}

TEST_CASE("perceptual_delta matches closed-form spot values") {
    PerceptionParams p;
    p.delta_e00 = 2.0;
    CHECK(perceptual_delta(50.0, p) == doctest::Approx(2.0).epsilon(1e-12));

    p.delta_e00 = 1.0;
    // 1 + 37.5 / sqrt(2520) = 1.747017880833996
    CHECK(perceptual_delta(0.0, p) == doctest::Approx(1.747017880833996).epsilon(1e-9));
    CHECK(perceptual_delta(100.0, p) == perceptual_delta(0.0, p));
}

TEST_CASE("perceptual_delta is minimized at L=50 and monotone in |L-50|") {
    PerceptionParams p;
    p.delta_e00 = 1.7;
    double prev_hi = perceptual_delta(50.0, p);
    double prev_lo = prev_hi;
    CHECK(prev_hi == doctest::Approx(p.delta_e00));
    for (int d = 1; d <= 50; ++d) {
        const double hi = perceptual_delta(50.0 + d, p);
        const double lo = perceptual_delta(50.0 - d, p);
        CHECK(hi >= prev_hi);
        CHECK(lo >= prev_lo);
        prev_hi = hi;
        prev_lo = lo;
    }
}

TEST_CASE("perceptual_delta is linear in delta_e00 and k_l") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> lu(0.0, 100.0), su(0.1, 4.0);
    for (int i = 0; i < 200; ++i) {
        const double l = lu(rng);
        PerceptionParams p;
        p.delta_e00 = su(rng);
        p.k_l = su(rng);
        const double base = perceptual_delta(l, p);
        PerceptionParams p2 = p;
        p2.delta_e00 *= 3.0;
        CHECK(perceptual_delta(l, p2) == doctest::Approx(3.0 * base).epsilon(1e-12));
        PerceptionParams p3 = p;
        p3.k_l *= 2.0;
        CHECK(perceptual_delta(l, p3) == doctest::Approx(2.0 * base).epsilon(1e-12));
        CHECK(base > 0.0);
    }
}

TEST_CASE("perceptual_delta_map agrees with the scalar form") {
    PerceptionParams p;
    p.delta_e00 = 2.4;
    PlaneD l(3, 5);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> lu(0.0, 100.0);
    for (int y = 0; y < 3; ++y)
        for (int x = 0; x < 5; ++x) l(y, x) = lu(rng);
    const PlaneD m = perceptual_delta_map(l, p);
    for (int y = 0; y < 3; ++y) {
        for (int x = 0; x < 5; ++x) {
            CHECK(m(y, x) == doctest::Approx(perceptual_delta(l(y, x), p)).epsilon(1e-12));
        }
    }
}

TEST_CASE("parameter invariants are enforced") {
    PerceptionParams p;
    p.delta_e00 = 0.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p.delta_e00 = 2.0;
    p.k_l = 0.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    CHECK_THROWS_AS(srgb_to_lab<float>(RgbFrame{}), std::invalid_argument);
}
