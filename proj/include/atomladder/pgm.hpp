#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace atomladder {

// Grey image, row-major, values as stored in the file.
struct GreyImage {
    int width = 0;
    int height = 0;
    int maxval = 65535;
    std::vector<std::uint16_t> pixels;

    std::uint16_t at(int row, int col) const { return pixels[static_cast<std::size_t>(row) * width + col]; }
};

// Reads binary (P5) or plain (P2) PGM with 8- or 16-bit samples.
GreyImage read_pgm(const std::string& path);

// Writes binary P5; 16-bit samples are big-endian as the format requires.
void write_pgm(const std::string& path, const GreyImage& image);

// Maps values in [lo, hi] onto 0..65535.
GreyImage to_grey16(const std::vector<double>& values, int width, int height, double lo, double hi);

// Samples scaled to [0, 1] by maxval.
std::vector<double> unit_values(const GreyImage& image);

} // namespace atomladder
