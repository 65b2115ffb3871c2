#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "atomladder/atom.hpp"
#include "atomladder/basis.hpp"

namespace atomladder {

enum class EnvelopeShape { SineSquared, Square };

std::string_view to_string(EnvelopeShape shape);
EnvelopeShape envelope_shape_from_string(std::string_view name);

// Rabi-frequency envelope (rad/s). Zero outside [start, start + duration].
struct PulseEnvelope {
    EnvelopeShape shape = EnvelopeShape::SineSquared;
    double peak = 0.0;
    double start = 0.0;
    double duration = 0.0;

    double end() const { return start + duration; }
    bool active(double t) const { return t >= start && t <= end(); }
    double value(double t) const;
    double area() const; // time integral of value()
};

enum class Polarization { SigmaPlus, SigmaMinus, PiLegA, PiLegC };
enum class Channel { AdiabaticLambda, RamanEffective };

std::string_view to_string(Polarization p);
Polarization polarization_from_string(std::string_view name);
std::string_view to_string(Channel c);
Channel channel_from_string(std::string_view name);

// One laser pulse (adiabatic channel) or one two-photon tone (Raman channel).
//
// Adiabatic Lambda legs: sigma+ drives A <-> E1, sigma- drives B <-> E1; the
// photon travels along `direction` (+1/-1) of `axis`, so (g, n) <-> (E1, n + direction).
// Raman-effective tones drive lower <-> upper directly with (lower, n) <-> (upper,
// n + 2 direction); direction 0 is a copropagating pair with no net kick.
//
// The coupling matrix element is H[upper][lower] = envelope/2 * exp(i phase) * exp(-i detuning t)
// in a fixed frame with bare ground levels degenerate.
struct PulseEvent {
    PulseEnvelope envelope;
    Polarization polarization = Polarization::SigmaPlus;
    Axis axis = Axis::Z;
    int direction = 1;
    double detuning = 0.0;
    Channel channel = Channel::AdiabaticLambda;
    Level lower = Level::A; // Raman channel only
    Level upper = Level::C; // Raman channel only
    double phase = 0.0;
    std::vector<int> targets; // lower-level momenta along axis addressed by the tone; empty = all
    std::string label;

    // Recoil change (lower -> upper) along axis.
    int kick() const { return channel == Channel::AdiabaticLambda ? direction : 2 * direction; }
};

// Levels coupled by an event, validated against the selection rules.
std::array<Level, 2> coupled_levels(const PulseEvent& event);

struct DriftInterval {
    double start = 0.0;
    double duration = 0.0;
};

struct SequencePlan {
    std::vector<PulseEvent> events;
    std::vector<DriftInterval> drifts;
    double start_time = 0.0;
    std::vector<RecoilState> predicted; // ladder bookkeeping of the populated states after the plan
    std::vector<double> adiabaticity;   // per counter-intuitive pair

    double end_time() const;
    double duration() const { return end_time() - start_time; }
    void append(const SequencePlan& other);
};

inline constexpr double kAdiabaticityLimit = 0.1;

// (2 pi g T)^-1 with g in Hz, i.e. 1 / (g T) with g in rad/s.
double adiabaticity_parameter(double coupling, double half_overlap);

struct PairSpec {
    int index = 0;             // position j in the ladder
    double half_overlap = 0.0; // T: each pulse lasts 2T, the second starts T after the first
    double coupling = 0.0;     // g, rad/s; each leg peaks at Rabi frequency 2g
    double start = 0.0;
    int direction = -1;        // ladder direction: source n -> target n + 2 direction
    int source_momentum = 0;   // n_z of the populated ground state
    Level source_level = Level::A;
    bool chirp = true;
    EnvelopeShape shape = EnvelopeShape::SineSquared;
};

struct CounterIntuitivePair {
    std::array<PulseEvent, 2> events; // [0] leads (couples the empty level), [1] follows
    RecoilState source;
    RecoilState target;
    double adiabaticity = 0.0;
    bool adiabatic = true;
};

CounterIntuitivePair counter_intuitive_pair(const PairSpec& spec, const AtomParams& atom);

// Laser offset that makes the two-photon transition from -> to resonant,
// Doppler plus recoil: kinetic(to) - kinetic(from).
double chirp_offset(const RecoilState& from, const RecoilState& to, const AtomParams& atom);

struct AdiabaticLadderSpec {
    int pairs = 1;
    double half_overlap = 50e-9;
    double coupling = 2.0 * constants::pi * 100e6;
    double start_time = 0.0;
    int start_momentum = 0;
    int direction = -1;
    Level start_level = Level::A;
    bool chirp = true;
    EnvelopeShape shape = EnvelopeShape::SineSquared;
};

SequencePlan build_adiabatic_sequence(const AdiabaticLadderSpec& spec, const AtomParams& atom);

struct RamanLadderSpec {
    bool half_pi_first = true;
    int half_pi_direction = -1;
    int pi_pulses = 0;
    int first_pi_direction = 0; // 0: opposite to half_pi_direction
    double pulse_time = 0.0;    // T', duration of a pi pulse
    double rabi = 0.0;          // effective two-photon Rabi frequency, rad/s
    Axis axis = Axis::Z;
    Polarization polarization = Polarization::SigmaPlus;
    std::vector<RecoilState> arms{RecoilState{}}; // populated states before the sequence
    double start_time = 0.0;
    bool chirp = true;
};

SequencePlan build_raman_sequence(const RamanLadderSpec& spec, const AtomParams& atom);

enum class CopropagatingTransition { PiPiX, SigmaSigmaZ };

// Momentum-preserving a <-> c pulse of the given area (rad).
PulseEvent copropagating_pulse(double area, CopropagatingTransition transition, double rabi, double start);

// Square Raman tone between lower and upper with a given area, resonant for
// the addressed lower momentum when chirp is on.
struct RamanToneSpec {
    Level lower = Level::A;
    Level upper = Level::C;
    Axis axis = Axis::Z;
    int direction = 0;
    Polarization polarization = Polarization::SigmaPlus;
    double area = constants::pi;
    double rabi = 0.0;
    double start = 0.0;
    std::vector<int> targets;
    double detuning = 0.0;
};

PulseEvent raman_tone(const RamanToneSpec& spec);

// Phase convention for effective Raman tones: a pi/2 pulse takes |a> to (|a> - |c>)/sqrt 2.
inline constexpr double kRamanPhase = -constants::pi / 2.0;

} // namespace atomladder
