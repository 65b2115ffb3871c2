#include <doctest.h>

#include <cmath>
#include <vector>

#include "atomladder/engine.hpp"
#include "atomladder/errors.hpp"
#include "atomladder/hamiltonian.hpp"
#include "atomladder/propagator.hpp"
#include "atomladder/wavefunction.hpp"

using namespace atomladder;

namespace {

constexpr double kTwoPi = 2.0 * constants::pi;

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

PulseEvent resonant_ac(double rabi, double duration, double detuning = 0.0) {
    RamanToneSpec spec;
    spec.rabi = rabi;
    spec.area = rabi * duration;
    spec.detuning = detuning;
    return raman_tone(spec);
}

} // namespace

TEST_SUITE("core") {

TEST_CASE("rubidium recoil constants") {
    const auto atom = AtomParams::rubidium87();
    CHECK(atom.recoil_velocity() == doctest::Approx(5.88454e-3).epsilon(1e-5));
    CHECK(atom.recoil_frequency() == doctest::Approx(kTwoPi * 3.7710e3).epsilon(1e-4));
    CHECK(atom.wavenumber(Line::D1) < atom.wavenumber(Line::D2));
    CHECK_NOTHROW(atom.validate());
    AtomParams bad = atom;
    bad.mass = -1.0;
    CHECK(kind_of([&] { bad.validate(); }) == ErrorKind::Config);
}

TEST_CASE("level names round-trip") {
    for (Level l : kAllLevels) CHECK(level_from_string(to_string(l)) == l);
    CHECK(axis_from_string(to_string(Axis::X)) == Axis::X);
    CHECK(kind_of([] { level_from_string("q"); }) == ErrorKind::Config);
    CHECK(is_excited(Level::E1));
    CHECK_FALSE(is_excited(Level::C));
}

TEST_CASE("rectangular basis is ordered and indexed") {
    const std::vector<Level> levels{Level::B, Level::A};
    const Basis basis = build_basis(levels, {-2, 2}, {0, 1});
    REQUIRE(basis.size() == 2 * 5 * 2);
    for (std::size_t i = 1; i < basis.size(); ++i) CHECK(basis[i - 1] < basis[i]);
    for (std::size_t i = 0; i < basis.size(); ++i) CHECK(basis.index_of(basis[i]) == i);
    CHECK_FALSE(basis.contains({Level::C, 0, 0}));
    CHECK_FALSE(basis.contains({Level::A, 3, 0}));
}

TEST_CASE("neighbourhood basis covers the guard band along driven axes only") {
    const std::vector<RecoilState> seeds{{Level::A, 0, 0}, {Level::B, 10, 4}};
    const std::vector<Level> levels{Level::A, Level::B};
    const Basis basis = neighbourhood_basis(seeds, levels, 2, true, false);
    CHECK(basis.size() == 2 * 5 * 2);
    CHECK(basis.contains({Level::B, -2, 0}));
    CHECK(basis.contains({Level::A, 12, 4}));
    CHECK_FALSE(basis.contains({Level::A, 0, 1}));
    CHECK_FALSE(basis.contains({Level::A, 3, 0}));
}

TEST_CASE("wavefunction bookkeeping") {
    WaveFunction psi(1.5);
    psi.set({Level::A, 0, 0}, {0.6, 0.0});
    psi.set({Level::B, 4, 0}, {0.0, 0.8});
    psi.add({Level::B, 4, 0}, {0.0, 0.0});
    psi.set({Level::C, 1, 0}, 1e-9);
    CHECK(psi.norm_squared() == doctest::Approx(1.0 + 1e-18));
    CHECK(psi.population({Level::B, 4, 0}) == doctest::Approx(0.64));
    CHECK(psi.amplitude({Level::C, 7, 0}) == cplx{});

    const double removed = psi.prune(1e-14);
    CHECK(removed == doctest::Approx(1e-18));
    CHECK(psi.size() == 2);

    const std::vector<Level> ground{Level::A, Level::B};
    const auto obs = observables(psi, ground, Axis::Z);
    CHECK(obs.population == doctest::Approx(1.0));
    CHECK(*obs.mean == doctest::Approx(0.64 * 4));
    CHECK(*obs.spread == doctest::Approx(std::sqrt(0.64 * 16 - std::pow(0.64 * 4, 2))));
    const std::vector<Level> none{Level::E2};
    CHECK_FALSE(observables(psi, none, Axis::Z).mean.has_value());

    const Basis basis = build_basis(ground, {-1, 5}, {0, 0});
    const auto back = WaveFunction::from_vector(basis, psi.to_vector(basis), psi.time());
    CHECK(back.amplitude({Level::B, 4, 0}) == psi.amplitude({Level::B, 4, 0}));
    CHECK(back.time() == 1.5);
}

TEST_CASE("dark state of the Lambda system") {
    const auto psi = dark_state(3.0, 4.0, 10, -1);
    CHECK(psi.amplitude({Level::A, 10, 0}).real() == doctest::Approx(0.8));
    CHECK(psi.amplitude({Level::B, 8, 0}).real() == doctest::Approx(-0.6));
    CHECK(psi.norm_squared() == doctest::Approx(1.0));
    CHECK(kind_of([] { dark_state(0.0, 0.0, 0, 1); }) == ErrorKind::Degenerate);
    CHECK(kind_of([] { dark_state(1.0, 1.0, 0, 2); }) == ErrorKind::Config);
}

TEST_CASE("assembled Hamiltonian is Hermitian without loss") {
    const auto atom = AtomParams::rubidium87();
    PairSpec ps;
    ps.half_overlap = 50e-9;
    ps.coupling = kTwoPi * 100e6;
    ps.source_momentum = 6;
    const auto pair = counter_intuitive_pair(ps, atom);
    const std::vector<Level> levels{Level::A, Level::B, Level::E1};
    const Basis basis = build_basis(levels, {0, 10}, {0, 0});
    const std::vector<PulseEvent> events(pair.events.begin(), pair.events.end());

    const auto h = assemble(basis, events, 1.5 * ps.half_overlap, atom);
    CHECK(h.is_hermitian());
    CHECK(h.max_element() > 0.0);
    // Diagonal is the kinetic energy.
    const auto i = *basis.index_of({Level::A, 6, 0});
    CHECK(h.diagonal[i] == doctest::Approx(36.0 * atom.recoil_frequency()));

    AssembleOptions lossy;
    lossy.decay_rate = kTwoPi * 6e6;
    CHECK_FALSE(assemble(basis, events, 1.5 * ps.half_overlap, atom, lossy).is_hermitian());

    HamiltonianModel model(basis, events, atom);
    const auto snap = model.snapshot(1.5 * ps.half_overlap);
    CHECK(snap.is_hermitian());
}

TEST_CASE("detuned square pulse follows the generalized Rabi formula") {
    const auto atom = AtomParams::rubidium87();
    const double rabi = kTwoPi * 1e6;
    const double delta = 0.7 * rabi;
    const double duration = 1.3e-6;
    const PulseEvent tone = resonant_ac(rabi, duration, delta);
    const std::vector<Level> levels{Level::A, Level::C};
    const Basis basis = build_basis(levels, {0, 0}, {0, 0});
    AssembleOptions opt;
    opt.kinetic = false;
    HamiltonianModel model(basis, {tone}, atom, opt);
    std::vector<cplx> v{1.0, 0.0};
    IntegratorOptions io;
    io.dt = duration / 4000;
    evolve(v, model, 0.0, duration, io);
    const double omega = std::hypot(rabi, delta);
    const double expected = rabi * rabi / (omega * omega) * std::pow(std::sin(0.5 * omega * duration), 2);
    CHECK(std::norm(v[1]) == doctest::Approx(expected).epsilon(1e-9));
    CHECK(std::norm(v[0]) + std::norm(v[1]) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("Gauss-Legendre keeps the norm over ten thousand steps") {
    const auto atom = AtomParams::rubidium87();
    AdiabaticLadderSpec spec;
    spec.pairs = 3;
    const auto plan = build_adiabatic_sequence(spec, atom);
    const std::vector<Level> levels{Level::A, Level::B, Level::E1};
    const Basis basis = build_basis(levels, {-8, 2}, {0, 0});
    HamiltonianModel model(basis, plan.events, atom);
    auto v = WaveFunction::single({}).to_vector(basis);
    IntegratorOptions io;
    io.dt = plan.duration() / 10000;
    long calls = 0;
    double worst = 0.0;
    evolve(v, model, plan.start_time, plan.end_time(), io,
           [&](double, std::span<const cplx> x) {
               ++calls;
               double n = 0.0;
               for (const auto& a : x) n += std::norm(a);
               worst = std::max(worst, std::abs(n - 1.0));
           });
    CHECK(calls == 10000);
    CHECK(worst < 1e-7);

    // The explicit scheme at the same step is accurate but not norm-exact.
    io.scheme = Scheme::RungeKutta4;
    auto w = WaveFunction::single({}).to_vector(basis);
    evolve(w, model, plan.start_time, plan.end_time(), io);
    CHECK(std::norm(w[*basis.index_of({Level::B, -6, 0})]) ==
          doctest::Approx(std::norm(v[*basis.index_of({Level::B, -6, 0})])).epsilon(1e-5));
}

TEST_CASE("time step above the stability bound is rejected with a suggestion") {
    const auto atom = AtomParams::rubidium87();
    const PulseEvent tone = resonant_ac(kTwoPi * 1e6, 0.5e-6);
    const std::vector<Level> levels{Level::A, Level::C};
    const Basis basis = build_basis(levels, {-2, 2}, {0, 0});
    HamiltonianModel model(basis, {tone}, atom);
    const double dt = default_time_step(model);
    CHECK(dt * model.max_element() == doctest::Approx(1.0 / kDefaultStepFactor));
    CHECK_NOTHROW(check_time_step(model, dt));
    try {
        check_time_step(model, 10.0 * dt);
        FAIL("expected an integration error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Integration);
        CHECK(std::string(e.what()).find("suggested dt") != std::string::npos);
    }
    CHECK(kind_of([&] { check_time_step(model, 0.0); }) == ErrorKind::Integration);
}

TEST_CASE("free evolution is an exact phase") {
    const auto atom = AtomParams::rubidium87();
    auto psi = WaveFunction::single({Level::A, 3, 0});
    free_evolve(psi, 1e-3, atom, {});
    const cplx a = psi.amplitude({Level::A, 3, 0});
    CHECK(std::abs(a) == doctest::Approx(1.0));
    CHECK(std::arg(a) == doctest::Approx(std::remainder(-9.0 * atom.recoil_frequency() * 1e-3, kTwoPi)));
    CHECK(psi.time() == doctest::Approx(1e-3));
    CHECK(kind_of([&] { free_evolve(psi, -1.0, atom, {}); }) == ErrorKind::Integration);
}

TEST_CASE("engine leaves no population outside its basis") {
    const auto atom = AtomParams::rubidium87();
    AdiabaticLadderSpec spec;
    spec.pairs = 4;
    const auto plan = build_adiabatic_sequence(spec, atom);
    EngineReport report;
    const auto out = propagate_sequence(WaveFunction::single({}), plan, atom, {}, {}, 0, &report);
    CHECK(report.epochs >= 1);
    CHECK(report.pruned_norm < 1e-8);
    CHECK(out.norm_squared() == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(out.population({Level::A, -8, 0}) > 0.999);
    CHECK(out.time() == doctest::Approx(plan.end_time()));

    EngineOptions tight;
    tight.max_states = 4;
    CHECK(kind_of([&] { propagate_sequence(WaveFunction::single({}), plan, atom, tight); }) ==
          ErrorKind::Integration);
}

} // TEST_SUITE
