#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "atomladder/errors.hpp"
#include "atomladder/fringes.hpp"

using namespace atomladder;

namespace {

constexpr double kTwoPi = 2.0 * constants::pi;

std::vector<FringeArm> pair_of(int dn, double p1 = 0.5, double p2 = 0.5) {
    return {FringeArm{std::sqrt(p1), 0, 0, 0.0, Level::A}, FringeArm{std::sqrt(p2), dn, 0, 0.0, Level::A}};
}

template <class F>
ErrorKind kind_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("no atomladder::Error thrown");
    return ErrorKind::Io;
}

std::filesystem::path scratch(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "atomladder-tests";
    std::filesystem::create_directories(dir);
    return dir / name;
}

} // namespace

TEST_SUITE("fringes") {

TEST_CASE("spacing follows lambda over delta n") {
    const AtomParams atom;
    for (int dn : {10, 50, 94, 100, 190}) {
        CAPTURE(dn);
        const auto pattern = synthesize(pair_of(dn), {}, atom);
        const auto s = extract_spacing(pattern, Axis::Z);
        const double exact = atom.lattice_wavelength() / dn;
        CHECK(std::abs(s.period - exact) <= s.uncertainty);
        CHECK(s.peak_to_background > 5.0);
    }
}

TEST_CASE("pattern is normalized and centred") {
    const AtomParams atom;
    const auto p = synthesize(pair_of(100), {1001, 1, 0.25e-9}, atom);
    CHECK(p.dims() == 1);
    CHECK(p.cols == 1001);
    CHECK(p.z(500) == 0.0);
    double peak = 0.0;
    for (double v : p.samples) peak = std::max(peak, v);
    CHECK(peak == doctest::Approx(1.0));
    // Equal arms in phase: bright at the centre.
    CHECK(p.at(0, 500) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("contrast of unequal arms") {
    const AtomParams atom;
    const CoherenceEnvelope wide{1.0};
    // 100 recoils over 0.25 nm pitch: an odd commensurate grid samples the nodes.
    const GridSpec grid{3121, 1, atom.lattice_wavelength() / 100.0 / 32.0};
    CHECK(contrast(synthesize(pair_of(100), grid, atom, wide), wide) == doctest::Approx(1.0).epsilon(1e-9));
    // 2 sqrt(p1 p2) / (p1 + p2)
    CHECK(contrast(synthesize(pair_of(100, 0.8, 0.2), grid, atom, wide), wide) == doctest::Approx(0.8).epsilon(1e-9));
}

TEST_CASE("coherence envelope damps the cross terms only") {
    const CoherenceEnvelope env{300e-6};
    CHECK(env.factor(0.0) == 1.0);
    CHECK(env.factor(300e-6) == doctest::Approx(std::exp(-0.5)));
    const AtomParams atom;
    const CoherenceEnvelope tiny{50e-9};
    const auto p = synthesize(pair_of(100), {4097, 1, 0.25e-9}, atom, tiny);
    // Far from the centre only the incoherent background 1/2 of the peak is left.
    CHECK(p.at(0, 0) == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("arm phase translates the fringes") {
    const AtomParams atom;
    auto arms = pair_of(100);
    arms[1].phase = constants::pi;
    const auto p = synthesize(arms, {1001, 1, 0.25e-9}, atom);
    CHECK(p.at(0, 500) < 1e-6);
}

TEST_CASE("two-dimensional lattice spacings") {
    const AtomParams atom;
    std::vector<FringeArm> arms;
    for (int nz : {0, 94})
        for (int nx : {0, 188}) arms.push_back({0.5, nz, nx, 0.0, Level::A});
    const auto p = synthesize(arms, {512, 512, 0.25e-9}, atom, {}, 2);
    CHECK(p.dims() == 2);
    const auto sz = extract_spacing(p, Axis::Z);
    const auto sx = extract_spacing(p, Axis::X);
    CHECK(std::abs(sz.period - atom.lattice_wavelength() / 94) <= sz.uncertainty);
    CHECK(std::abs(sx.period - atom.lattice_wavelength() / 188) <= sx.uncertainty);
    // Threads do not change the result.
    const auto q = synthesize(arms, {512, 512, 0.25e-9}, atom, {}, 1);
    CHECK(q.samples == p.samples);
}

TEST_CASE("failure modes") {
    const AtomParams atom;
    std::vector<FringeArm> flat{{1.0, 0, 0, 0.0, Level::A}};
    const auto p = synthesize(flat, {}, atom);
    CHECK(kind_of([&] { extract_spacing(p, Axis::Z); }) == ErrorKind::NoFringe);
    CHECK(kind_of([&] { extract_spacing(p, Axis::X); }) == ErrorKind::NoFringe);

    auto mixed = pair_of(100);
    mixed[1].level = Level::C;
    CHECK(kind_of([&] { synthesize(mixed, {}, atom); }) == ErrorKind::Physics);

    std::vector<FringeArm> dark{{0.0, 0, 0, 0.0, Level::A}, {0.0, 94, 0, 0.0, Level::A}};
    CHECK(kind_of([&] { synthesize(dark, {}, atom); }) == ErrorKind::Degenerate);
}

TEST_CASE("Ramsey analysis of an ideal fringe") {
    const double tau = 0.102;
    const double phi = 0.7;
    const auto deltas = ramsey_grid(tau, 3.5, 21);
    std::vector<RamseyPoint> points;
    for (double d : deltas) points.push_back({d, 0.5 * (1.0 - std::cos(d * tau + phi))});
    const auto a = analyze_ramsey(points, tau);
    CHECK(a.period_hz == doctest::Approx(1.0 / tau).epsilon(1e-4));
    CHECK(a.width_scale_hz == doctest::Approx(1.0 / (kTwoPi * tau)));
    CHECK(a.phase == doctest::Approx(phi).epsilon(1e-9));
    CHECK(a.shift_hz == doctest::Approx(-phi / (kTwoPi * tau)).epsilon(1e-9));
    CHECK(a.minima_hz.size() >= 3);

    CHECK(deltas.front() == doctest::Approx(-deltas.back()));
    CHECK(kind_of([&] { analyze_ramsey({{0.0, 0.0}, {1.0, 0.0}}, tau); }) == ErrorKind::Config);
}

TEST_CASE("Ramsey scan rejects undersampled grids") {
    RamseyParams params;
    params.base.n_split = 1;
    params.base.drift1 = 0.1;
    InterferometerConfig config;
    const std::vector<double> coarse{-10.0, 0.0, 10.0};
    CHECK(kind_of([&] { ramsey_scan(params, coarse, config); }) == ErrorKind::Config);
}

TEST_CASE("writers") {
    const AtomParams atom;
    const auto p = synthesize(pair_of(100), {64, 1, 0.25e-9}, atom);
    const auto csv = scratch("fringe.csv");
    write_pattern_csv(p, csv.string());
    std::ifstream in(csv);
    std::string header;
    std::getline(in, header);
    CHECK(header == "position_nm,value");
    int rows = 0;
    for (std::string line; std::getline(in, line);) ++rows;
    CHECK(rows == 64);

    const auto q = synthesize(pair_of(100), {16, 8, 0.25e-9}, atom);
    const auto pgm = scratch("fringe.pgm");
    write_pattern_pgm(q, pgm.string());
    CHECK(std::filesystem::exists(pgm.string() + ".txt"));
    CHECK(kind_of([&] { write_pattern_csv(p, "/nonexistent/dir/x.csv"); }) == ErrorKind::Io);
}

} // TEST_SUITE
