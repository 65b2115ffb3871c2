#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "atomladder/engine.hpp"
#include "atomladder/pulses.hpp"

namespace atomladder {

struct Vec3 {
    double x = 0.0;
    double y = 0.0; // vertical, gravity points along -y
    double z = 0.0;

    double along(Axis axis) const { return axis == Axis::Z ? z : x; }
};

// Arms below this population are carried along but never steer a plan
// (selectivity margins, closure, separations).
inline constexpr double kSignificantPopulation = 1e-3;

// One basis component of the atom with a classical centroid.
struct ArmTrack {
    int id = 0;
    cplx amplitude{1.0, 0.0};
    RecoilState state;
    Vec3 position;
    Vec3 drift;         // velocity not carried by the recoil momentum (cloud motion, gravity)
    double phase = 0.0; // free-flight phase accumulated so far, rad

    double population() const { return std::norm(amplitude); }
    Vec3 velocity(const AtomParams& atom) const;
};

struct ArmState {
    std::vector<ArmTrack> arms;
    double time = 0.0;
    int next_id = 1;

    static ArmState single(const RecoilState& state, double time = 0.0);

    double norm_squared() const;
    const ArmTrack* find(const RecoilState& state) const;
    std::vector<const ArmTrack*> significant() const;
};

struct InterferometerConfig {
    AtomParams atom;
    EngineOptions engine;
    double cloud_size = 1e-3;   // m
    double beam_width = 0.5e-3; // m, selective beams
    bool gravity = true;
    // Clusters holding less population than this skip the pulses of a plan
    // and only evolve freely; their total is EngineReport::bypassed_norm.
    // Zero pulses every cluster.
    double bypass_population = kSignificantPopulation;
};

// Ballistic flight of every arm: exact constant-gravity kinematics and the
// phase of each arm's energy (kinetic plus level offset).
void free_flight(ArmState& state, double duration, const InterferometerConfig& config);

// Groups arms whose centroids lie within one cloud size of a seed arm. Arms
// with the same basis state never share a group.
std::vector<std::vector<std::size_t>> cluster_arms(const std::vector<ArmTrack>& arms, double cloud_size);

// Runs a pulse plan on every cluster independently; the state ends at the
// plan's end time.
void apply_sequence(ArmState& state, const SequencePlan& plan, const InterferometerConfig& config,
                    EngineReport* report = nullptr);

struct SelectiveRegion {
    Axis axis = Axis::Z;
    double center = 0.0;
    double width = 0.0; // the beam covers [center - width/2, center + width/2]
    std::optional<Level> intended; // when set, significant arms of other levels may not be inside

    bool contains(const Vec3& p) const;
    double distance(const Vec3& p) const; // zero inside
};

struct SelectiveOutcome {
    std::vector<int> addressed; // arm ids inside the region
    std::optional<std::string> warning;
};

// Applies `pulse` only to arms whose centroid lies inside the region. Any
// significant arm outside the region but closer than beam width plus cloud
// size is a selectivity failure.
SelectiveOutcome selective_transfer(ArmState& state, const PulseEvent& pulse, const SelectiveRegion& region,
                                    const InterferometerConfig& config, std::string_view stage);

// Time until two arms meet along an axis; nullopt when they do not approach.
std::optional<double> closure_time(const ArmTrack& a, const ArmTrack& b, Axis axis, const AtomParams& atom);

enum class StageKind { QuantumSequence, Drift, SelectivePulse, Measurement };

std::string_view to_string(StageKind kind);

struct LevelSummary {
    double population = 0.0;
    std::optional<double> mean_nz;
    std::optional<double> mean_nx;
};

struct StageRecord {
    std::string name;
    StageKind kind = StageKind::Measurement;
    double t_start = 0.0;
    double t_end = 0.0;
    std::map<Level, LevelSummary> levels;
    double sep_z = 0.0;  // spread of significant centroids along z, m
    double sep_x = 0.0;
    double drop_y = 0.0; // population-weighted fall since the start, m
    double norm = 0.0;
};

struct PlanResult {
    ArmState final;
    std::vector<StageRecord> log;
    std::vector<std::string> warnings;
    std::map<std::string, double> metrics;
    EngineReport engine;
};

// Writes the stage log, one row per stage and populated level.
void write_stage_csv(const std::vector<StageRecord>& log, const std::string& path);

struct AdiabaticPulseParams {
    double coupling = 2.0 * constants::pi * 100e6; // g, rad/s
    double half_overlap = 50e-9;                   // T, s
    bool chirp = true;
    EnvelopeShape shape = EnvelopeShape::SineSquared;
    double copropagating_rabi = 2.0 * constants::pi * 1e6; // effective Rabi frequency of the co-propagating pulses
};

struct Plan1DParams {
    int n_split = 25;     // 2N pairs in the splitter
    int n_reverse = 0;    // 2N pairs in the reversal; 0 means 2 n_split
    double drift1 = 3.3e-3;
    AdiabaticPulseParams pulses;
};

PlanResult run_plan_1d_adiabatic(const Plan1DParams& params, const InterferometerConfig& config);

struct RamseyParams {
    Plan1DParams base{25, 0, 51e-3, {}};
    int n_third = 0;          // pairs in the third sequence; 0 means 2 n_split - 1
    double raman_rabi = 2.0 * constants::pi * 1e6; // final pi/2 pulse, rad/s
    double arm_phase = 0.0;   // phase injected on the moving arm before the final pulse
};

// Everything up to (not including) the final pi/2 pulse. Independent of the
// two-photon detuning, so one preparation serves a whole scan.
struct RamseyPrepared {
    PlanResult result;
    double split_end = 0.0;   // the c arm exists from here on
    double probe_start = 0.0; // start of the final pi/2 pulse
    double tau = 0.0;         // first split pulse to last recombining pulse
    RecoilState moving;       // b arm that meets |c,0>
    RecoilState resting;
};

RamseyPrepared prepare_ramsey(const RamseyParams& params, const InterferometerConfig& config);

// Population of c after the final pulse for two-photon detuning delta (rad/s).
double ramsey_population(const RamseyPrepared& prepared, const RamseyParams& params, double delta,
                         const InterferometerConfig& config, PlanResult* finished = nullptr);

PlanResult run_plan_ramsey(const RamseyParams& params, double delta, const InterferometerConfig& config);

struct RamanPulseParams {
    double pulse_time = 1e-6; // T', duration of a pi pulse
    bool chirp = true;
    double copropagating_rabi = 2.0 * constants::pi * 1e6;
};

struct Plan2DParams {
    int z_split = 24;   // pi pulses after the z pi/2 (2P)
    int z_reverse = 48; // z reversal pi pulses
    int x_split = 48;   // pi pulses after the x pi/2 (2Q)
    int x_reverse = 96; // x reversal pi pulses
    double drift_z = 3.3e-3;
    bool split_x = true; // false: z stage only (one-dimensional Raman interferometer)
    RamanPulseParams pulses;
};

PlanResult run_plan_2d(const Plan2DParams& params, const InterferometerConfig& config);

} // namespace atomladder
