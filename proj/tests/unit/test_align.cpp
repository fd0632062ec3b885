#include <algorithm>
#include <filesystem>
#include <random>
#include <sstream>

#include "doctest.h"

#include "atelier/align.hpp"
#include "atelier/error.hpp"

using namespace atelier;

TEST_CASE("expand_and_clamp examples") {
    CHECK(expand_and_clamp({100, 100, 200, 200}, 32, 400, 400) == BBox{84, 84, 216, 216});
    CHECK(expand_and_clamp({4, 4, 60, 60}, 32, 400, 400) == BBox{0, 0, 76, 76});
    CHECK(expand_and_clamp({10, 10, 20, 20}, 0, 100, 100) == BBox{10, 10, 20, 20});
    CHECK(expand_and_clamp({380, 370, 400, 400}, 32, 400, 400) == BBox{364, 354, 400, 400});
}

TEST_CASE("expand_and_clamp errors") {
    CHECK_THROWS_AS(expand_and_clamp({10, 10, 10, 20}, 32, 100, 100), DomainError);
    CHECK_THROWS_AS(expand_and_clamp({10, 20, 20, 20}, 32, 100, 100), DomainError);
    CHECK_THROWS_AS(expand_and_clamp({10, 10, 20, 20}, 31, 100, 100), DomainError);
    CHECK_THROWS_AS(expand_and_clamp({10, 10, 20, 20}, -2, 100, 100), DomainError);
    CHECK_THROWS_AS(expand_and_clamp({10, 10, 120, 20}, 2, 100, 100), DomainError);
}

TEST_CASE("crop_resize preserves constants") {
    PixelGrid image(50, 40, 3, 77);
    const auto out = crop_resize(image, {3, 5, 31, 22}, 160);
    CHECK(out.width() == 160);
    CHECK(out.height() == 160);
    CHECK(out.channels() == 3);
    CHECK(std::all_of(out.samples().begin(), out.samples().end(), [](auto v) { return v == 77; }));
}

TEST_CASE("crop_resize is the identity at equal size") {
    std::mt19937 rng(7);
    std::vector<std::uint8_t> samples(30 * 30);
    for (auto& s : samples) s = static_cast<std::uint8_t>(rng() & 0xFF);
    const PixelGrid image(30, 30, 1, samples);
    const auto out = crop_resize(image, {5, 7, 25, 27}, 20);
    for (int y = 0; y < 20; ++y)
        for (int x = 0; x < 20; ++x) REQUIRE(out.at(x, y) == image.at(x + 5, y + 7));
}

TEST_CASE("crop_resize bilinear 2x2 to 4x4") {
    // Rows {0, 0} and {100, 100}: output rows sample y = 0, 1/3, 2/3, 1.
    const PixelGrid image(2, 2, 1, {0, 0, 100, 100});
    const auto out = crop_resize(image, {0, 0, 2, 2}, 4);
    const int expected[4] = {0, 33, 67, 100};
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) CHECK(out.at(x, y) == expected[y]);
    CHECK(out.at(0, 0) == 0);
    CHECK(out.at(3, 3) == 100);
}

TEST_CASE("crop_resize output stays within the region's value range") {
    std::mt19937 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const int w = 2 + static_cast<int>(rng() % 40);
        const int h = 2 + static_cast<int>(rng() % 40);
        std::vector<std::uint8_t> samples(static_cast<std::size_t>(w) * h);
        for (auto& s : samples) s = static_cast<std::uint8_t>(rng() % 256);
        const PixelGrid image(w, h, 1, samples);
        const BBox box{0, 0, w, h};
        const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
        const auto out = crop_resize(image, box, 1 + static_cast<int>(rng() % 64));
        for (auto v : out.samples()) {
            REQUIRE(v >= *lo);
            REQUIRE(v <= *hi);
        }
    }
}

TEST_CASE("crop_resize rejects boxes outside the image") {
    const PixelGrid image(10, 10, 1);
    CHECK_THROWS_AS(crop_resize(image, {0, 0, 11, 10}, 4), DomainError);
    CHECK_THROWS_AS(crop_resize(image, {0, 0, 5, 5}, 0), DomainError);
}

TEST_CASE("face ids link back to paintings") {
    CHECK(face_id_for("p1", 2) == "p1__2");
    CHECK(painting_of_face("p1__2") == "p1");
    CHECK(painting_of_face("a__b__0") == "a__b");
    CHECK(painting_of_face("plain") == "plain");
}

TEST_CASE("detections sidecar parsing") {
    std::istringstream in(R"({"painting_id":"p1","face_index":0,"x1":1,"y1":2,"x2":30,"y2":40}
{"painting_id":"p1","face_index":1,"x1":5,"y1":6,"x2":7,"y2":8})");
    const auto dets = parse_detections(in);
    REQUIRE(dets.size() == 2);
    CHECK(dets[1].face_index == 1);
    CHECK(dets[0].bbox == BBox{1, 2, 30, 40});
    std::istringstream bad(R"({"painting_id":"p1","x1":1})");
    CHECK_THROWS_AS(parse_detections(bad), ParseError);
}

TEST_CASE("align_face produces a 160x160 crop with the default margin") {
    PixelGrid image(300, 200, 3, 5);
    const auto face = align_face(image, {"p9", 1, {100, 50, 180, 150}});
    CHECK(face.face_id == "p9__1");
    CHECK(face.bbox == BBox{84, 34, 196, 166});
    CHECK(face.crop.width() == 160);
    CHECK(face.crop.height() == 160);
}

TEST_CASE("netpbm round trip") {
    const auto dir = std::filesystem::temp_directory_path() / "atelier_netpbm_test";
    std::filesystem::create_directories(dir);
    std::vector<std::uint8_t> rgb(4 * 3 * 3);
    for (std::size_t i = 0; i < rgb.size(); ++i) rgb[i] = static_cast<std::uint8_t>(i * 7);
    const PixelGrid color(4, 3, 3, rgb);
    write_netpbm(dir / "c.ppm", color);
    CHECK(read_netpbm(dir / "c.ppm") == color);
    const PixelGrid gray(5, 2, 1, 9);
    write_netpbm(dir / "g.pgm", gray);
    CHECK(read_netpbm(dir / "g.pgm") == gray);
    std::filesystem::remove_all(dir);
}
