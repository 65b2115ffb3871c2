#pragma once

#include <string>
#include <vector>

#include "atomladder/interferometer.hpp"

namespace atomladder {

// One plane-wave component of the recombined atom.
struct FringeArm {
    cplx amplitude{1.0, 0.0};
    int nz = 0;
    int nx = 0;
    double phase = 0.0; // extra phase on top of the amplitude, rad
    Level level = Level::A;
};

// Arms of a recombined state that lie within one cloud size of the most
// populated one.
std::vector<FringeArm> fringe_arms(const ArmState& state, double cloud_size);

struct GridSpec {
    int nz = 4096;          // samples along z (columns)
    int nx = 1;             // samples along x (rows); 1 gives a 1D pattern
    double pitch = 0.25e-9; // m per sample
};

struct CoherenceEnvelope {
    double length = 300e-6; // m

    // Degree of coherence between points a distance r from the pattern centre.
    double factor(double r) const;
};

// Intensity samples, row-major with rows along x and columns along z. The
// grid is centred on the origin.
struct FringePattern {
    int rows = 1;
    int cols = 0;
    double pitch = 0.0;
    std::vector<double> samples;

    int dims() const { return rows > 1 ? 2 : 1; }
    double at(int row, int col) const { return samples[static_cast<std::size_t>(row) * cols + col]; }
    double z(int col) const { return (col - 0.5 * (cols - 1)) * pitch; }
    double x(int row) const { return (row - 0.5 * (rows - 1)) * pitch; }
};

// |sum_j a_j exp(i k n_j . r + i phi_j)|^2 with the cross terms scaled by the
// coherence envelope, normalized to peak 1. Mixed internal levels cannot
// interfere and raise a physics error.
FringePattern synthesize(const std::vector<FringeArm>& arms, const GridSpec& grid, const AtomParams& atom,
                         const CoherenceEnvelope& envelope = {}, int threads = 1);

struct Spacing {
    double period = 0.0;      // m
    double uncertainty = 0.0; // one frequency bin, m
    int bin = 0;
    double peak_to_background = 0.0;
};

// Dominant spatial period along an axis from the averaged line power spectra.
Spacing extract_spacing(const FringePattern& pattern, Axis axis);

// (max - min) / (max + min) over the samples within half a coherence length of
// the centre.
double contrast(const FringePattern& pattern, const CoherenceEnvelope& envelope = {});

struct RamseyPoint {
    double delta = 0.0;      // rad/s
    double population = 0.0; // of level c
};

struct RamseyAnalysis {
    double tau = 0.0;           // s
    double period_hz = 0.0;     // mean spacing of the P_c minima in delta / 2 pi
    double central_width_hz = 0.0; // half the distance between the minima bracketing delta = 0
    double width_scale_hz = 0.0;   // 1 / (2 pi tau)
    double phase = 0.0;         // fitted fringe phase phi in P_c = (1 - cos(delta tau + phi)) / 2, rad
    double shift_hz = 0.0;      // translation of the pattern in delta / 2 pi, -phi / (2 pi tau)
    double population_at_zero = 0.0;
    std::vector<double> minima_hz;
};

struct RamseyScan {
    std::vector<RamseyPoint> points;
    RamseyAnalysis analysis;
    PlanResult central; // the plan evaluated at the point closest to delta = 0
};

// Analysis of a sampled fringe; tau only scales the fit and the width scale.
RamseyAnalysis analyze_ramsey(const std::vector<RamseyPoint>& points, double tau);

// Runs the Ramsey plan at every detuning. The grid must cover at least 3
// fringe periods with 20 points per period. Points are independent and
// spread over `threads` workers.
RamseyScan ramsey_scan(const RamseyParams& params, const std::vector<double>& deltas,
                       const InterferometerConfig& config, int threads = 1);

// Evenly spaced detunings (rad/s) spanning `periods` fringe periods around zero.
std::vector<double> ramsey_grid(double tau, double periods, int points_per_period);

void write_pattern_csv(const FringePattern& pattern, const std::string& path);
// 16-bit P5 image plus `path + ".txt"` with pitch and axis metadata.
void write_pattern_pgm(const FringePattern& pattern, const std::string& path);
void write_ramsey_csv(const std::vector<RamseyPoint>& points, const std::string& path);

} // namespace atomladder
