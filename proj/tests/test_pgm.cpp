#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "atomladder/errors.hpp"
#include "atomladder/pgm.hpp"

using namespace atomladder;

namespace {

std::string scratch(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "atomladder-tests";
    std::filesystem::create_directories(dir);
    return (dir / name).string();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

template <class F>
ErrorKind kind_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("no atomladder::Error thrown");
    return ErrorKind::Config;
}

} // namespace

TEST_SUITE("pgm") {

TEST_CASE("16-bit round trip is big-endian") {
    GreyImage img;
    img.width = 3;
    img.height = 2;
    img.pixels = {0, 1, 256, 65535, 4660, 7};
    const auto path = scratch("rt16.pgm");
    write_pgm(path, img);
    const auto back = read_pgm(path);
    CHECK(back.width == 3);
    CHECK(back.height == 2);
    CHECK(back.maxval == 65535);
    CHECK(back.pixels == img.pixels);

    std::ifstream in(path, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), {});
    const auto data = bytes.substr(bytes.size() - 12);
    CHECK(static_cast<unsigned char>(data[4]) == 0x01); // 256 -> 01 00
    CHECK(static_cast<unsigned char>(data[5]) == 0x00);
}

TEST_CASE("8-bit binary and plain files with comments") {
    const auto p5 = scratch("bin8.pgm");
    write_text(p5, std::string("P5\n# made by hand\n2 2\n255\n") + std::string("\x00\x10\x80\xff", 4));
    const auto a = read_pgm(p5);
    CHECK(a.maxval == 255);
    CHECK(a.pixels == std::vector<std::uint16_t>{0, 16, 128, 255});
    CHECK(unit_values(a)[3] == 1.0);

    const auto p2 = scratch("plain.pgm");
    write_text(p2, "P2 # comment\n3 1\n# more\n10\n0 5 10\n");
    const auto b = read_pgm(p2);
    CHECK(b.pixels == std::vector<std::uint16_t>{0, 5, 10});
    CHECK(unit_values(b)[1] == doctest::Approx(0.5));
}

TEST_CASE("malformed files are I/O errors") {
    const auto path = scratch("bad.pgm");
    write_text(path, "P6\n1 1\n255\n\x01");
    CHECK(kind_of([&] { read_pgm(path); }) == ErrorKind::Io);
    write_text(path, "P5\n4 4\n255\n\x01\x02");
    CHECK(kind_of([&] { read_pgm(path); }) == ErrorKind::Io);
    write_text(path, "P2\n2 1\n10\n3 11\n");
    CHECK(kind_of([&] { read_pgm(path); }) == ErrorKind::Io);
    write_text(path, "P2\n0 1\n10\n");
    CHECK(kind_of([&] { read_pgm(path); }) == ErrorKind::Io);
    CHECK(kind_of([] { read_pgm("/nonexistent/none.pgm"); }) == ErrorKind::Io);
}

TEST_CASE("value scaling") {
    const auto img = to_grey16({-1.0, 0.0, 1.0, 2.0}, 2, 2, -1.0, 1.0);
    CHECK(img.pixels[0] == 0);
    CHECK(img.pixels[1] == 32768);
    CHECK(img.pixels[2] == 65535);
    CHECK(img.pixels[3] == 65535); // clamped
    CHECK(kind_of([] { to_grey16({0.0}, 2, 2, 0.0, 1.0); }) == ErrorKind::Config);
}

} // TEST_SUITE
