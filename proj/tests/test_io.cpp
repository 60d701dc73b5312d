#include "doctest.h"

#include <png.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <random>

#include "qtc/io.hpp"
#include "test_util.hpp"

using namespace qtc;
namespace fs = std::filesystem;

namespace {

using qtc::testing::TempDir;

std::string bytes_of(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void write_rgb_png(const fs::path& p, unsigned w, unsigned h, const std::vector<unsigned char>& rgb) {
    png_image img;
    std::memset(&img, 0, sizeof img);
    img.version = PNG_IMAGE_VERSION;
    img.width = w;
    img.height = h;
    img.format = PNG_FORMAT_RGB;
    REQUIRE(png_image_write_to_file(&img, p.c_str(), 0, rgb.data(), 0, nullptr));
}

}  // namespace

TEST_CASE("tensor container roundtrips bitwise") {
    TempDir td;
    std::mt19937_64 rng(1);
    for (const Dims& d : {Dims{3, 4, 5}, Dims{7, 2}, Dims{1, 1, 1, 2}}) {
        QTensor t = qtc::testing::random_tensor(d, rng);
        t.set(0, Quat{-0.0, std::numeric_limits<double>::denorm_min(), 1e308, -1e-300});
        const fs::path p = td.path / "t.qten";
        write_qtensor(p, t);
        const QTensor back = read_qtensor(p);
        CHECK(back.dims() == d);
        for (int c = 0; c < 4; ++c)
            for (Index i = 0; i < t.numel(); ++i)
                CHECK(std::bit_cast<std::uint64_t>(back.part(c)(i)) == std::bit_cast<std::uint64_t>(t.part(c)(i)));
        CHECK(fs::file_size(p) == 5 + 8 + 8 * d.size() + 32 * static_cast<std::size_t>(t.numel()));
    }
}

TEST_CASE("tensor container layout is little-endian W, X, Y, Z") {
    TempDir td;
    QTensor t({2, 1});
    t.set(0, Quat{1.0, 2.0, 3.0, 4.0});
    t.set(1, Quat{5.0, 6.0, 7.0, 8.0});
    const fs::path p = td.path / "t.qten";
    write_qtensor(p, t);
    const std::string b = bytes_of(p);
    CHECK(b.substr(0, 5) == "QTEN1");
    CHECK(static_cast<unsigned char>(b[5]) == 2);  // k
    for (int i = 6; i < 13; ++i) CHECK(b[static_cast<std::size_t>(i)] == 0);
    CHECK(static_cast<unsigned char>(b[13]) == 2);  // dims[0]
    CHECK(static_cast<unsigned char>(b[21]) == 1);  // dims[1]
    // 1.0 = 0x3FF0000000000000, stored low byte first.
    const std::size_t w0 = 29;
    CHECK(static_cast<unsigned char>(b[w0 + 7]) == 0x3F);
    CHECK(static_cast<unsigned char>(b[w0 + 6]) == 0xF0);
    // Second W entry is 5.0 = 0x4014000000000000, then X starts with 2.0.
    CHECK(static_cast<unsigned char>(b[w0 + 15]) == 0x40);
    CHECK(static_cast<unsigned char>(b[w0 + 14]) == 0x14);
    CHECK(static_cast<unsigned char>(b[w0 + 23]) == 0x40);
    CHECK(static_cast<unsigned char>(b[w0 + 22]) == 0x00);
}

TEST_CASE("container errors carry the file name") {
    TempDir td;
    const fs::path p = td.path / "bad.qten";
    std::ofstream(p, std::ios::binary) << "QTEN1xx";
    CHECK_THROWS_WITH_AS(read_qtensor(p), doctest::Contains("bad.qten"), std::runtime_error);
    std::ofstream(p, std::ios::binary) << "NOPE!";
    CHECK_THROWS_WITH_AS(read_qtensor(p), doctest::Contains("magic"), std::runtime_error);
    CHECK_THROWS_AS(read_qtensor(td.path / "missing.qten"), std::runtime_error);
    write_qtensor(p, QTensor({2, 2}));
    std::ofstream(p, std::ios::binary | std::ios::app) << "x";
    CHECK_THROWS_WITH_AS(read_qtensor(p), doctest::Contains("payload"), std::runtime_error);
    CHECK_THROWS_AS(read_mask(p), std::runtime_error);
}

TEST_CASE("mask container roundtrips") {
    TempDir td;
    std::vector<std::uint8_t> v{1, 0, 0, 1, 1, 0};
    const ObsMask m({3, 2}, v);
    const fs::path p = td.path / "m.qmsk";
    write_mask(p, m);
    CHECK(read_mask(p) == m);
    const std::string b = bytes_of(p);
    CHECK(b.substr(0, 5) == "QMSK1");
    CHECK(b.size() == 5 + 8 + 16 + 6);
    CHECK(b.substr(b.size() - 6) == std::string("\x01\x00\x00\x01\x01\x00", 6));
}

TEST_CASE("byte conversion clamps and rounds half away from zero") {
    CHECK(to_byte(-3.2) == 0);
    CHECK(to_byte(260.7) == 255);
    CHECK(to_byte(2.5) == 3);
    CHECK(to_byte(2.4999) == 2);
    CHECK(to_byte(254.5) == 255);
    CHECK(to_byte(0.49) == 0);
    CHECK(to_byte(std::nan("")) == 0);
}

TEST_CASE("load_frames reads RGB into i, j, k") {
    TempDir td;
    // 2 x 2 image, pixel (0, 0) red; the others carry distinct values.
    write_rgb_png(td.path / "a.png", 2, 2, {255, 0, 0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
    const QTensor t = load_frames(td.path);
    CHECK(t.dims() == Dims{2, 2, 1});
    CHECK(t.at({0, 0, 0}) == Quat{0.0, 255.0, 0.0, 0.0});
    CHECK(t.at({0, 1, 0}) == Quat{0.0, 1.0, 2.0, 3.0});
    CHECK(t.at({1, 0, 0}) == Quat{0.0, 4.0, 5.0, 6.0});
    CHECK(t.part(0).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("load_frames orders files and rejects bad input") {
    TempDir td;
    write_rgb_png(td.path / "b.png", 1, 1, {20, 20, 20});
    write_rgb_png(td.path / "a.png", 1, 1, {10, 10, 10});
    std::ofstream(td.path / "notes.txt") << "ignored";
    const QTensor t = load_frames(td.path);
    CHECK(t.dims() == Dims{1, 1, 2});
    CHECK(t.at({0, 0, 0}).x == 10.0);
    CHECK(t.at({0, 0, 1}).x == 20.0);

    write_rgb_png(td.path / "c.png", 2, 1, {1, 1, 1, 2, 2, 2});
    CHECK_THROWS_WITH_AS(load_frames(td.path), doctest::Contains("c.png"), std::runtime_error);

    TempDir empty;
    CHECK_THROWS_AS(load_frames(empty.path), std::runtime_error);
    std::ofstream(empty.path / "x.png") << "not a png";
    CHECK_THROWS_WITH_AS(load_frames(empty.path), doctest::Contains("x.png"), std::runtime_error);
}

TEST_CASE("integer tensors survive save then load") {
    TempDir td;
    std::mt19937_64 rng(2);
    std::uniform_int_distribution<int> px(0, 255);
    QTensor t({5, 7, 3});
    for (int c = 1; c < 4; ++c)
        for (Index i = 0; i < t.numel(); ++i) t.part(c)(i) = px(rng);
    save_frames(t, td.path / "out");
    CHECK(fs::exists(td.path / "out" / "frame_0000.png"));
    CHECK(fs::exists(td.path / "out" / "frame_0002.png"));
    CHECK(load_frames(td.path / "out") == t);

    // Frame directory roundtrip: load, save, load again.
    const QTensor once = load_frames(td.path / "out");
    save_frames(once, td.path / "again");
    CHECK(load_frames(td.path / "again") == once);
}

TEST_CASE("save_frames clamps out-of-range values") {
    TempDir td;
    QTensor t({1, 2});
    t.set(0, Quat{7.0, -3.2, 260.7, 127.5});
    t.set(1, Quat{0.0, 0.4, 0.5, 254.49});
    save_frames(t, td.path);
    const QTensor back = load_frames(td.path);
    CHECK(back.at({0, 0, 0}) == Quat{0.0, 0.0, 255.0, 128.0});
    CHECK(back.at({0, 1, 0}) == Quat{0.0, 0.0, 1.0, 254.0});
}

TEST_CASE("config parsing") {
    const auto kv = parse_config("# comment\n\n rho = 0.5 \nsolver=lrl-rqtc\r\nout = a=b\n");
    REQUIRE(kv.size() == 3);
    CHECK(kv[0] == std::pair<std::string, std::string>{"rho", "0.5"});
    CHECK(kv[1] == std::pair<std::string, std::string>{"solver", "lrl-rqtc"});
    CHECK(kv[2] == std::pair<std::string, std::string>{"out", "a=b"});
    CHECK_THROWS_WITH_AS(parse_config("a = 1\nnonsense\n"), doctest::Contains("line 2"), std::runtime_error);
    CHECK_THROWS_WITH_AS(parse_config("a = 1\na = 2\n"), doctest::Contains("repeated"), std::runtime_error);
    CHECK_THROWS_AS(parse_config(" = 3\n"), std::runtime_error);

    TempDir td;
    std::ofstream(td.path / "c.cfg") << "x = 1\nbroken\n";
    CHECK_THROWS_WITH_AS(read_config(td.path / "c.cfg"), doctest::Contains("c.cfg"), std::runtime_error);
    CHECK_THROWS_AS(read_config(td.path / "none.cfg"), std::runtime_error);
}
