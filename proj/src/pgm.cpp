#include "atomladder/pgm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "atomladder/errors.hpp"

namespace atomladder {

namespace {

// Next header token, skipping whitespace and # comments.
std::string token(std::istream& in, const std::string& path) {
    std::string t;
    char c;
    while (in.get(c)) {
        if (c == '#') {
            std::string rest;
            std::getline(in, rest);
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!t.empty()) return t;
            continue;
        }
        t.push_back(c);
    }
    if (t.empty()) fail(ErrorKind::Io, path + ": truncated PGM header");
    return t;
}

int number(std::istream& in, const std::string& path) {
    const std::string t = token(in, path);
    try {
        std::size_t used = 0;
        const int v = std::stoi(t, &used);
        if (used == t.size()) return v;
    } catch (const std::exception&) {
    }
    fail(ErrorKind::Io, path + ": malformed PGM header field '" + t + "'");
}

} // namespace

GreyImage read_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Io, "cannot open " + path);
    const std::string magic = token(in, path);
    if (magic != "P5" && magic != "P2") fail(ErrorKind::Io, path + ": not a PGM file (magic " + magic + ")");
    GreyImage img;
    img.width = number(in, path);
    img.height = number(in, path);
    img.maxval = number(in, path);
    if (img.width <= 0 || img.height <= 0) fail(ErrorKind::Io, path + ": PGM dimensions must be positive");
    if (img.maxval <= 0 || img.maxval > 65535) fail(ErrorKind::Io, path + ": PGM maxval out of range");
    const std::size_t n = static_cast<std::size_t>(img.width) * img.height;
    img.pixels.resize(n);
    if (magic == "P2") {
        for (auto& p : img.pixels) {
            int v = 0;
            if (!(in >> v)) fail(ErrorKind::Io, path + ": truncated PGM data");
            if (v < 0 || v > img.maxval) fail(ErrorKind::Io, path + ": PGM sample exceeds maxval");
            p = static_cast<std::uint16_t>(v);
        }
        return img;
    }
    // token() consumed exactly one whitespace byte after maxval.
    const int bytes = img.maxval < 256 ? 1 : 2;
    std::vector<unsigned char> raw(n * bytes);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (in.gcount() != static_cast<std::streamsize>(raw.size())) fail(ErrorKind::Io, path + ": truncated PGM data");
    for (std::size_t i = 0; i < n; ++i) {
        const unsigned v = bytes == 1 ? raw[i] : (unsigned(raw[2 * i]) << 8) | raw[2 * i + 1];
        if (v > static_cast<unsigned>(img.maxval)) fail(ErrorKind::Io, path + ": PGM sample exceeds maxval");
        img.pixels[i] = static_cast<std::uint16_t>(v);
    }
    return img;
}

void write_pgm(const std::string& path, const GreyImage& image) {
    if (image.width <= 0 || image.height <= 0 ||
        image.pixels.size() != static_cast<std::size_t>(image.width) * image.height)
        fail(ErrorKind::Io, path + ": image size does not match its pixel buffer");
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::Io, "cannot open " + path + " for writing");
    out << "P5\n" << image.width << ' ' << image.height << '\n' << image.maxval << '\n';
    const bool wide = image.maxval > 255;
    std::vector<unsigned char> raw;
    raw.reserve(image.pixels.size() * (wide ? 2 : 1));
    for (auto p : image.pixels) {
        if (wide) raw.push_back(static_cast<unsigned char>(p >> 8));
        raw.push_back(static_cast<unsigned char>(p & 0xff));
    }
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!out) fail(ErrorKind::Io, "failed writing " + path);
}

GreyImage to_grey16(const std::vector<double>& values, int width, int height, double lo, double hi) {
    if (values.size() != static_cast<std::size_t>(width) * height)
        fail(ErrorKind::Config, "value grid does not match the image size");
    if (!(hi > lo)) fail(ErrorKind::Config, "grey scale needs hi > lo");
    GreyImage img;
    img.width = width;
    img.height = height;
    img.maxval = 65535;
    img.pixels.resize(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double u = std::clamp((values[i] - lo) / (hi - lo), 0.0, 1.0);
        img.pixels[i] = static_cast<std::uint16_t>(std::lround(u * 65535.0));
    }
    return img;
}

std::vector<double> unit_values(const GreyImage& image) {
    std::vector<double> out(image.pixels.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = double(image.pixels[i]) / image.maxval;
    return out;
}

} // namespace atomladder
