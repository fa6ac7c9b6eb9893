#include "lumalink/sync.hpp"

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <random>

using namespace lumalink;

TEST_CASE("frame_to_abs_time spot values") {
    CHECK(frame_to_abs_time(0, 60.0) == 0.0);
    CHECK(frame_to_abs_time(30, 60.0) == 1000.0);
    CHECK(frame_to_abs_time(750, 30.0) == 50000.0);
    CHECK_THROWS_AS(frame_to_abs_time(1, 0.0), std::invalid_argument);
}

TEST_CASE("frame_to_abs_time matches hand computation on random pairs") {
    std::mt19937_64 rng(17);
    const double fps_choices[] = {24, 25, 30, 48, 50, 60, 90, 120};
    for (int i = 0; i < 20; ++i) {
        const std::uint64_t f = rng() % 1000000;
        const double fps = fps_choices[rng() % 8];
        const double got = frame_to_abs_time(f, fps);
        const std::uint64_t numer = 2000ULL * f;
        if (numer % static_cast<std::uint64_t>(fps) == 0) {
            // divisible: exact integer milliseconds
            CHECK(got == static_cast<double>(numer / static_cast<std::uint64_t>(fps)));
        } else {
            CHECK(got == doctest::Approx(static_cast<double>(numer) / fps).epsilon(1e-12));
        }
    }
}

TEST_CASE("frame_to_abs_time is linear with slope 2000/fps") {
    const double fps = 48.0;
    const double slope = frame_to_abs_time(1, fps);
    CHECK(slope == doctest::Approx(2000.0 / fps).epsilon(1e-12));
    for (std::uint64_t f : {2ULL, 10ULL, 555ULL}) {
        CHECK(frame_to_abs_time(f, fps) ==
              doctest::Approx(static_cast<double>(f) * slope).epsilon(1e-12));
    }
}

TEST_CASE("playback_position composes t_abs with elapsed time") {
    TrackRegistry reg;
    reg.add(1, {"Demo", 240000.0, 60.0});

    PacketResult r;
    r.payload = {1, 30};
    r.capture_timestamp_ms = 500.0;
    const PlaybackQuery q = playback_position(r, reg, 620.0);  // elapsed 120 ms
    REQUIRE(q.ok());
    CHECK(q.song_id == 1);
    CHECK(q.position_ms == doctest::Approx(1120.0).epsilon(1e-12));
}

TEST_CASE("playback_position errors are values") {
    TrackRegistry reg;
    reg.add(1, {"Demo", 1500.0, 60.0});

    PacketResult unknown;
    unknown.payload = {2, 0};
    CHECK(playback_position(unknown, reg, 0.0).error == PlaybackError::unknown_track);

    PacketResult late;
    late.payload = {1, 60};  // t_abs = 2000 ms > duration
    late.capture_timestamp_ms = 0.0;
    CHECK(playback_position(late, reg, 0.0).error == PlaybackError::out_of_range);
}

TEST_CASE("consecutive packets advance the position by the elapsed capture time") {
    TrackRegistry reg;
    reg.add(7, {"Track", 600000.0, 60.0});
    PacketResult a, b;
    a.payload = {7, 100};
    a.capture_timestamp_ms = 4000.0;
    b.payload = {7, 101};
    b.capture_timestamp_ms = 4000.0 + 2000.0 / 60.0;  // one code period later
    const double now = 5000.0;
    const PlaybackQuery qa = playback_position(a, reg, now);
    const PlaybackQuery qb = playback_position(b, reg, now);
    REQUIRE(qa.ok());
    REQUIRE(qb.ok());
    CHECK(qb.position_ms == doctest::Approx(qa.position_ms).epsilon(1e-9));
}

TEST_CASE("registry file round trip and validation") {
    TrackRegistry reg;
    reg.add(1, {"First Song", 180000.0, 60.0});
    reg.add(2, {"Second Song", 240000.0, 30.0});

    const auto path = std::filesystem::temp_directory_path() / "lumalink_registry_test.txt";
    reg.save(path);
    const TrackRegistry back = TrackRegistry::load(path);
    REQUIRE(back.tracks.size() == 2);
    CHECK(back.tracks.at(1).title == "First Song");
    CHECK(back.tracks.at(1).duration_ms == 180000.0);
    CHECK(back.tracks.at(2).fps_tx == 30.0);
    std::filesystem::remove(path);

    CHECK_THROWS_AS(reg.add(1, {"dup", 1.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(reg.add(3, {"bad", 0.0, 60.0}), std::invalid_argument);
    CHECK_THROWS_AS(TrackRegistry::load("/nonexistent/registry.txt"), std::runtime_error);
}
