#pragma once

#include <optional>
#include <string>
#include <vector>

#include "atomladder/pgm.hpp"
#include "atomladder/wavefunction.hpp"

namespace atomladder {

// Desired pattern f(x, y) in [-1, 1], row-major.
struct TargetPattern {
    int width = 0;
    int height = 0;
    double pitch = 1e-6; // m per pixel
    std::vector<double> f;
};

// g = arccos f, in [0, pi].
struct PhaseMask {
    int width = 0;
    int height = 0;
    double pitch = 1e-6;        // pitch of the atomic pattern, input pitch / magnification
    double magnification = 1.0;
    std::vector<double> g;
};

// The two internal-state components after an equal split.
struct TwoComponentField {
    int width = 0;
    int height = 0;
    std::vector<cplx> psi1;
    std::vector<cplx> psi2;

    static TwoComponentField equal_split(int width, int height);
};

// Maps grey levels u in [0, 1] to f = 2u - 1.
TargetPattern target_from_image(const GreyImage& image, double pitch);

// Raw f values, one image row per line, comma separated. No range check.
TargetPattern read_pattern_csv(const std::string& path, double pitch);

// Throws a normalization error if any value lies outside [-1, 1].
PhaseMask encode(const TargetPattern& target, double magnification = 1.0);

// psi2 <- psi2 exp(i kappa_t g); psi1 is untouched.
void imprint(TwoComponentField& field, const PhaseMask& mask, double kappa_t = 1.0);

struct Interference {
    std::vector<double> intensity; // |psi1 + psi2|^2 / 2, the recombined output port
    std::vector<double> contrast;  // 2 |psi1| |psi2| / (|psi1|^2 + |psi2|^2) per pixel
    std::optional<std::string> warning;
};

Interference interfere(const TwoComponentField& field);

struct Roundtrip {
    TargetPattern recovered; // 2 I - 1
    PhaseMask mask;
    double max_error = 0.0;
    double rms_error = 0.0;
    std::optional<std::string> warning;
};

Roundtrip roundtrip(const TargetPattern& target, double magnification = 1.0);

// Recovered pattern as a 16-bit image, f = -1 .. 1 mapped to 0 .. 65535.
GreyImage pattern_image(const TargetPattern& pattern);

// One row per pixel (x, y, f, recovered, error) after a summary header.
void write_error_csv(const TargetPattern& target, const Roundtrip& result, const std::string& path);

// A gear silhouette: a toothed disc with a hub hole, 1 inside and 0 outside,
// anti-aliased at the edges.
GreyImage gear_image(int size = 64, int teeth = 12);

} // namespace atomladder
