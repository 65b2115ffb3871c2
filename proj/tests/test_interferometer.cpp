#include <doctest.h>

#include <cmath>
#include <vector>

#include "atomladder/errors.hpp"
#include "atomladder/interferometer.hpp"

using namespace atomladder;

namespace {

constexpr double kTwoPi = 2.0 * constants::pi;

ArmTrack arm_at(int id, const RecoilState& s, double z, double population = 1.0) {
    ArmTrack a;
    a.id = id;
    a.state = s;
    a.amplitude = std::sqrt(population);
    a.position.z = z;
    return a;
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

} // namespace

TEST_SUITE("interferometer") {

TEST_CASE("ballistic kinematics of a 100-recoil pair") {
    InterferometerConfig config;
    ArmState state;
    state.arms = {arm_at(1, {Level::A, 100, 0}, 0.0, 0.5), arm_at(2, {Level::C, 0, 0}, 0.0, 0.5)};
    const double vr = config.atom.recoil_velocity();
    CHECK(100.0 * vr == doctest::Approx(0.588454).epsilon(1e-5));

    free_flight(state, 3.3e-3, config);
    const double sep = state.arms[0].position.z - state.arms[1].position.z;
    CHECK(sep == doctest::Approx(1.94190e-3).epsilon(1e-4));
    CHECK(-state.arms[1].position.y == doctest::Approx(53.40e-6).epsilon(1e-3));
    CHECK(state.arms[1].drift.y == doctest::Approx(-config.atom.gravity * 3.3e-3));
    // Phase of the kinetic energy.
    CHECK(state.arms[0].phase == doctest::Approx(-1e4 * config.atom.recoil_frequency() * 3.3e-3));
    CHECK(state.norm_squared() == doctest::Approx(1.0));

    free_flight(state, 50e-3 - 3.3e-3, config);
    CHECK(state.arms[0].position.z - state.arms[1].position.z == doctest::Approx(2.9423e-2).epsilon(1e-4));
    CHECK(state.time == doctest::Approx(50e-3));

    config.gravity = false;
    ArmState flat = ArmState::single({});
    free_flight(flat, 1.0, config);
    CHECK(flat.arms[0].position.y == 0.0);
    CHECK(kind_of([&] { free_flight(flat, -1.0, config); }) == ErrorKind::Config);
}

TEST_CASE("clusters group nearby arms but never duplicate a state") {
    std::vector<ArmTrack> arms{arm_at(1, {Level::A, 0, 0}, 0.0, 0.4), arm_at(2, {Level::C, 2, 0}, 0.2e-3, 0.3),
                               arm_at(3, {Level::A, 0, 0}, 0.1e-3, 0.2), arm_at(4, {Level::A, 4, 0}, 5e-3, 0.1)};
    const auto clusters = cluster_arms(arms, 1e-3);
    REQUIRE(clusters.size() == 3);
    CHECK(clusters[0] == std::vector<std::size_t>{0, 1});
    CHECK(clusters[1] == std::vector<std::size_t>{2});
    CHECK(clusters[2] == std::vector<std::size_t>{3});
}

TEST_CASE("closure time of converging arms") {
    const AtomParams atom;
    const auto a = arm_at(1, {Level::A, 4, 0}, 0.0);
    const auto b = arm_at(2, {Level::C, 0, 0}, 1e-3);
    const auto t = closure_time(a, b, Axis::Z, atom);
    REQUIRE(t.has_value());
    CHECK(*t == doctest::Approx(1e-3 / (4.0 * atom.recoil_velocity())));
    CHECK_FALSE(closure_time(b, arm_at(3, {Level::A, 0, 0}, 0.0), Axis::Z, atom).has_value());
    CHECK_FALSE(closure_time(arm_at(3, {Level::A, -4, 0}, 0.0), b, Axis::Z, atom).has_value());
}

TEST_CASE("selective pulses address only the arm inside the beam") {
    InterferometerConfig config;
    config.gravity = false;
    const PulseEvent pi = copropagating_pulse(constants::pi, CopropagatingTransition::PiPiX, kTwoPi * 1e6, 0.0);
    const SelectiveRegion region{Axis::Z, 0.0, config.beam_width, Level::A};

    ArmState state;
    state.arms = {arm_at(1, {Level::A, 0, 0}, 0.0, 0.5), arm_at(2, {Level::A, 10, 0}, 5e-3, 0.5)};
    state.next_id = 3;
    const auto outcome = selective_transfer(state, pi, region, config, "test");
    CHECK(outcome.addressed == std::vector<int>{1});
    CHECK_FALSE(outcome.warning.has_value());
    const auto* moved = state.find({Level::C, 0, 0});
    REQUIRE(moved != nullptr);
    CHECK(moved->population() == doctest::Approx(0.5).epsilon(1e-8));
    REQUIRE(state.find({Level::A, 10, 0}) != nullptr);
    CHECK(state.find({Level::A, 10, 0})->population() == doctest::Approx(0.5));

    // An arm just outside the beam but inside the exclusion margin.
    ArmState close;
    close.arms = {arm_at(1, {Level::A, 0, 0}, 0.0, 0.5), arm_at(2, {Level::A, 10, 0}, 1e-3, 0.5)};
    CHECK(kind_of([&] { selective_transfer(close, pi, region, config, "test"); }) == ErrorKind::Selectivity);
    // A significant arm of another level inside the beam.
    ArmState mixed;
    mixed.arms = {arm_at(1, {Level::A, 0, 0}, 0.0, 0.5), arm_at(2, {Level::C, 10, 0}, 0.0, 0.5)};
    CHECK(kind_of([&] { selective_transfer(mixed, pi, region, config, "test"); }) == ErrorKind::Selectivity);
    // Nothing inside: skipped with a warning.
    ArmState away;
    away.arms = {arm_at(1, {Level::A, 0, 0}, 1e-2)};
    CHECK(selective_transfer(away, pi, region, config, "test").warning.has_value());
}

TEST_CASE("apply_sequence runs the ladder on every cluster") {
    InterferometerConfig config;
    config.gravity = false;
    AdiabaticLadderSpec spec;
    spec.pairs = 2;
    const auto plan = build_adiabatic_sequence(spec, config.atom);
    ArmState state = ArmState::single({});
    EngineReport report;
    apply_sequence(state, plan, config, &report);
    CHECK(state.time == doctest::Approx(plan.end_time()));
    const auto* arm = state.find({Level::A, -4, 0});
    REQUIRE(arm != nullptr);
    CHECK(arm->population() > 0.9998);
    CHECK(state.norm_squared() + report.pruned_norm == doctest::Approx(1.0).epsilon(1e-9));
    // The centroid moves with the mean velocity across the ladder.
    CHECK(arm->position.z < 0.0);
}

TEST_CASE("short one-dimensional adiabatic interferometer closes") {
    InterferometerConfig config;
    Plan1DParams params;
    params.n_split = 1;
    params.drift1 = 0.1;
    const auto result = run_plan_1d_adiabatic(params, config);
    CHECK(result.metrics.at("relative_momentum") == 4.0);
    CHECK(result.metrics.at("adiabaticity") == doctest::Approx(0.0318).epsilon(0.01));
    CHECK(result.metrics.at("split_population_resting") == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(result.metrics.at("split_population_deflected") == doctest::Approx(0.5 * 0.99994 * 0.99994).epsilon(2e-5));
    CHECK(result.metrics.at("closure_mismatch_m") < 1e-6);
    CHECK(result.metrics.at("separation_after_drift1_m") ==
          doctest::Approx(4.0 * config.atom.recoil_velocity() * 0.1).epsilon(1e-3));
    CHECK(result.warnings.empty());
    CHECK(result.log.size() >= 4);
    CHECK(result.final.norm_squared() + result.engine.pruned_norm == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("plan errors") {
    InterferometerConfig config;
    Plan1DParams params;
    params.n_split = 1;
    params.drift1 = 1e-5; // arms still overlap at the selective pulse
    CHECK(kind_of([&] { run_plan_1d_adiabatic(params, config); }) == ErrorKind::Selectivity);
    params.drift1 = 0.1;
    params.pulses.coupling = kTwoPi * 1e6;
    CHECK(kind_of([&] { run_plan_1d_adiabatic(params, config); }) == ErrorKind::Adiabaticity);
    params.pulses.coupling = kTwoPi * 100e6;
    params.n_split = 0;
    CHECK(kind_of([&] { run_plan_1d_adiabatic(params, config); }) == ErrorKind::Config);
}

TEST_CASE("Raman variant along z") {
    InterferometerConfig config;
    Plan2DParams params;
    params.split_x = false;
    const auto result = run_plan_2d(params, config);
    CHECK(result.metrics.at("z_relative_momentum") == 94.0);
    CHECK(result.metrics.at("closure_mismatch_m") < 1e-6);
    CHECK(result.metrics.at("z_separation_after_drift_m") == doctest::Approx(1.91e-3).epsilon(0.01));
}

TEST_CASE("two-dimensional Raman plan leaves four equal arms") {
    InterferometerConfig config;
    const auto result = run_plan_2d({}, config);
    const auto sig = result.final.significant();
    REQUIRE(sig.size() == 4);
    for (const auto* arm : sig) CHECK(arm->population() == doctest::Approx(0.25).epsilon(0.02));
    CHECK(result.metrics.at("closure_mismatch_m") < 0.1 * config.cloud_size);
}

TEST_CASE("Ramsey fringe of a short interferometer") {
    InterferometerConfig config;
    RamseyParams params;
    params.base.n_split = 1;
    params.base.drift1 = 0.1;
    const auto prepared = prepare_ramsey(params, config);
    CHECK(prepared.tau == doctest::Approx(0.2).epsilon(1e-5));
    CHECK(prepared.moving.nz - prepared.resting.nz == 2);
    const double half = constants::pi / prepared.tau;
    CHECK(ramsey_population(prepared, params, 0.0, config) < 1e-6);
    CHECK(ramsey_population(prepared, params, half, config) > 0.99);
    CHECK(ramsey_population(prepared, params, 2.0 * half, config) < 1e-3);

    // A phase of pi on the moving arm swaps bright and dark.
    params.arm_phase = constants::pi;
    CHECK(ramsey_population(prepared, params, 0.0, config) > 0.99);
}

} // TEST_SUITE
