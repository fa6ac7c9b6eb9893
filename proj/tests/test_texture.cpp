#include "lumalink/texture.hpp"

#include <doctest.h>

#include <random>

using namespace lumalink;

namespace {

PlaneI random_levels(int w, int h, int ng, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> d(0, ng - 1);
    PlaneI img(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) img(y, x) = d(rng);
    return img;
}

}  // namespace

TEST_CASE("constant images have zero contrast on both paths") {
    TextureParams p;
    const PlaneI img = PlaneI::Constant(9, 13, 42);
    CHECK((glcm_contrast_reference(img, p) == 0.0).all());
    const PlaneD imgd = img.cast<double>();
    CHECK((contrast_optimized(imgd, p) == 0.0).all());
}

TEST_CASE("2x2 image with one horizontal step has contrast g^2") {
    TextureParams p;
    p.window = 3;
    const int g = 7;
    PlaneI img(2, 2);
    img << 0, g, 0, g;
    // Every clamped window covers the whole image: two pairs, both |diff|=g.
    const PlaneD imgd = img.cast<double>();
    const PlaneD ref = glcm_contrast_reference(img, p);
    const PlaneD opt = contrast_optimized(imgd, p);
    for (int y = 0; y < 2; ++y) {
        for (int x = 0; x < 2; ++x) {
            CHECK(ref(y, x) == doctest::Approx(g * g).epsilon(1e-12));
            CHECK(opt(y, x) == doctest::Approx(g * g).epsilon(1e-12));
        }
    }
}

TEST_CASE("column-alternating image has contrast g^2 everywhere") {
    const int g = 9;
    PlaneD img(8, 8);
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) img(y, x) = (x % 2) ? g : 0;
    for (int window : {3, 5, 7}) {
        TextureParams p;
        p.window = window;
        const PlaneD c = contrast_optimized(img, p);
        CHECK(c.minCoeff() == doctest::Approx(g * g).epsilon(1e-12));
        CHECK(c.maxCoeff() == doctest::Approx(g * g).epsilon(1e-12));
    }
}

TEST_CASE("closed form equals the GLCM reference on random quantized images") {
    std::mt19937_64 rng(1234);
    std::uniform_int_distribution<int> size(8, 32);
    for (int i = 0; i < 30; ++i) {
        const int w = size(rng), h = size(rng);
        const PlaneI img = random_levels(w, h, 101, 1000 + i);
        const PlaneD imgd = img.cast<double>();
        for (int window : {3, 5, 7}) {
            TextureParams p;
            p.window = window;
            const PlaneD ref = glcm_contrast_reference(img, p);
            const PlaneD opt = contrast_optimized(imgd, p);
            CAPTURE(w);
            CAPTURE(h);
            CAPTURE(window);
            CHECK((ref - opt).abs().maxCoeff() < 1e-9);
        }
    }
}

TEST_CASE("oversized windows are rejected, partially-fitting ones clamp") {
    TextureParams p;
    p.window = 9;  // cannot clamp onto a 4x4 image (9 > 2*4-1)
    const PlaneI small = PlaneI::Zero(4, 4);
    const PlaneD smalld = PlaneD::Zero(4, 4);
    CHECK_THROWS_AS(glcm_contrast_reference(small, p), std::invalid_argument);
    CHECK_THROWS_AS(contrast_optimized(smalld, p), std::invalid_argument);
    p.window = 9;
    const PlaneD wide = PlaneD::Zero(4, 64);
    CHECK_NOTHROW(contrast_optimized(wide, p));
}

TEST_CASE("reference rejects out-of-range levels") {
    TextureParams p;
    p.ng = 8;
    PlaneI img = PlaneI::Constant(6, 6, 7);
    CHECK_NOTHROW(glcm_contrast_reference(img, p));
    img(3, 3) = 8;
    CHECK_THROWS_AS(glcm_contrast_reference(img, p), std::invalid_argument);
}

TEST_CASE("texture_metric divides by the clamped window pixel count") {
    TextureParams p;
    p.window = 5;
    PlaneD c = PlaneD::Constant(9, 9, 25.0);
    const PlaneD t = texture_metric(c, p);
    CHECK(t(4, 4) == doctest::Approx(1.0));  // interior: S = 25
    CHECK(t(0, 0) == doctest::Approx(25.0 / 9.0));  // corner: S = 9

    PlaneD c2 = PlaneD::Zero(9, 9);
    c2(0, 0) = 9.0;
    CHECK(texture_metric(c2, p)(0, 0) == doctest::Approx(1.0));
    const PlaneD zeros = PlaneD::Zero(7, 7);
    CHECK((texture_metric(zeros, p) == 0.0).all());
}

TEST_CASE("texture_scaling spans [k, 1] and handles the degenerate frame") {
    TextureParams p;
    PlaneD t(1, 3);
    t << 0.0, 2.0, 4.0;  // T_max = 4
    const PlaneD a = texture_scaling(t, p);
    CHECK(a(0, 0) == doctest::Approx(0.5));
    CHECK(a(0, 1) == doctest::Approx(0.75));
    CHECK(a(0, 2) == doctest::Approx(1.0));

    const PlaneD zero_t = PlaneD::Zero(4, 4);
    const PlaneD flat = texture_scaling(zero_t, p);
    CHECK((flat == 0.5).all());
}

TEST_CASE("alpha stays in [k,1] and is monotone in T") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 37.0);
    TextureParams p;
    p.k = 0.25;
    PlaneD t(16, 16);
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x) t(y, x) = u(rng);
    const PlaneD a = texture_scaling(t, p);
    CHECK(a.minCoeff() >= p.k - 1e-12);
    CHECK(a.maxCoeff() <= 1.0 + 1e-12);
    for (int i = 0; i < 255; ++i) {
        const int x0 = i % 16, y0 = i / 16, x1 = (i + 1) % 16, y1 = (i + 1) / 16;
        if (t(y0, x0) <= t(y1, x1)) {
            CHECK(a(y0, x0) <= a(y1, x1) + 1e-12);
        }
    }
}

TEST_CASE("modulation_depth is the pixel product and checks shapes") {
    PlaneD d1 = PlaneD::Constant(2, 2, 2.0);
    PlaneD alpha = PlaneD::Constant(2, 2, 0.75);
    const PlaneD d2 = modulation_depth(d1, alpha);
    CHECK((d2 == 1.5).all());
    const PlaneD wrong = PlaneD::Zero(3, 2);
    CHECK_THROWS_AS(modulation_depth(d1, wrong), std::invalid_argument);
}

TEST_CASE("contrast is translation-equivariant away from borders") {
    TextureParams p;
    p.window = 3;
    const PlaneI inner = random_levels(10, 10, 101, 5);
    PlaneI a = PlaneI::Zero(20, 20), b = PlaneI::Zero(20, 20);
    a.block(2, 3, 10, 10) = inner;
    b.block(5, 7, 10, 10) = inner;  // shifted by (dy=3, dx=4)
    const PlaneD ad = a.cast<double>();
    const PlaneD bd = b.cast<double>();
    const PlaneD ca = contrast_optimized(ad, p);
    const PlaneD cb = contrast_optimized(bd, p);
    // Compare interior of the embedded patch only.
    for (int y = 2; y < 10 - 2; ++y) {
        for (int x = 2; x < 10 - 2; ++x) {
            CHECK(ca(2 + y, 3 + x) == doctest::Approx(cb(5 + y, 7 + x)).epsilon(1e-12));
        }
    }
}

TEST_CASE("quantize_levels rounds and clamps") {
    PlaneD l(1, 4);
    l << -3.0, 49.4, 49.6, 140.0;
    const PlaneI q = quantize_levels(l, 101);
    CHECK(q(0, 0) == 0);
    CHECK(q(0, 1) == 49);
    CHECK(q(0, 2) == 50);
    CHECK(q(0, 3) == 100);
}
