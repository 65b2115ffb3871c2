#include "atomladder/pulses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "atomladder/errors.hpp"
#include "atomladder/hamiltonian.hpp"

namespace atomladder {

using constants::pi;

std::string_view to_string(EnvelopeShape shape) {
    return shape == EnvelopeShape::SineSquared ? "sine-squared" : "square";
}

EnvelopeShape envelope_shape_from_string(std::string_view name) {
    if (name == "sine-squared" || name == "sin2") return EnvelopeShape::SineSquared;
    if (name == "square") return EnvelopeShape::Square;
    fail(ErrorKind::Config, "unknown envelope shape '" + std::string(name) + "'");
}

std::string_view to_string(Polarization p) {
    switch (p) {
    case Polarization::SigmaPlus: return "sigma+";
    case Polarization::SigmaMinus: return "sigma-";
    case Polarization::PiLegA: return "pi-a";
    case Polarization::PiLegC: return "pi-c";
    }
    return "?";
}

Polarization polarization_from_string(std::string_view name) {
    if (name == "sigma+") return Polarization::SigmaPlus;
    if (name == "sigma-") return Polarization::SigmaMinus;
    if (name == "pi-a") return Polarization::PiLegA;
    if (name == "pi-c") return Polarization::PiLegC;
    fail(ErrorKind::Config, "unknown polarization '" + std::string(name) + "'");
}

std::string_view to_string(Channel c) { return c == Channel::AdiabaticLambda ? "adiabatic" : "raman"; }

Channel channel_from_string(std::string_view name) {
    if (name == "adiabatic") return Channel::AdiabaticLambda;
    if (name == "raman") return Channel::RamanEffective;
    fail(ErrorKind::Config, "unknown channel '" + std::string(name) + "'");
}

double PulseEnvelope::value(double t) const {
    if (!active(t)) return 0.0;
    if (shape == EnvelopeShape::Square) return peak;
    const double s = std::sin(pi * (t - start) / duration);
    return peak * s * s;
}

double PulseEnvelope::area() const { return shape == EnvelopeShape::Square ? peak * duration : 0.5 * peak * duration; }

std::array<Level, 2> coupled_levels(const PulseEvent& e) {
    const bool sigma = e.polarization == Polarization::SigmaPlus || e.polarization == Polarization::SigmaMinus;
    if (e.channel == Channel::AdiabaticLambda) {
        if (!sigma) fail(ErrorKind::Config, "adiabatic Lambda legs must be circularly polarized");
        if (e.axis != Axis::Z) fail(ErrorKind::Config, "circularly polarized Lambda legs propagate along z only");
        if (e.direction != 1 && e.direction != -1)
            fail(ErrorKind::Config, "Lambda leg direction must be +1 or -1");
        return {e.polarization == Polarization::SigmaPlus ? Level::A : Level::B, Level::E1};
    }
    if (e.direction < -1 || e.direction > 1) fail(ErrorKind::Config, "Raman direction must be -1, 0 or +1");
    const bool ac = (e.lower == Level::A && e.upper == Level::C);
    const bool bc = (e.lower == Level::B && e.upper == Level::C);
    if (sigma) {
        // sigma-sigma Raman pairs along the quantization axis: a <-> c and b <-> c
        if (e.axis != Axis::Z) fail(ErrorKind::Config, "sigma-sigma Raman pairs propagate along z only");
        if (!ac && !bc) fail(ErrorKind::Config, "sigma-sigma Raman couples a<->c or b<->c only");
    } else if (!ac) {
        fail(ErrorKind::Config, "pi-pi Raman couples a<->c only");
    }
    return {e.lower, e.upper};
}

double SequencePlan::end_time() const {
    double end = start_time;
    for (const auto& e : events) end = std::max(end, e.envelope.end());
    for (const auto& d : drifts) end = std::max(end, d.start + d.duration);
    return end;
}

void SequencePlan::append(const SequencePlan& other) {
    events.insert(events.end(), other.events.begin(), other.events.end());
    drifts.insert(drifts.end(), other.drifts.begin(), other.drifts.end());
    adiabaticity.insert(adiabaticity.end(), other.adiabaticity.begin(), other.adiabaticity.end());
    predicted = other.predicted;
    std::stable_sort(events.begin(), events.end(),
                     [](const PulseEvent& a, const PulseEvent& b) { return a.envelope.start < b.envelope.start; });
}

double adiabaticity_parameter(double coupling, double half_overlap) { return 1.0 / (coupling * half_overlap); }

double chirp_offset(const RecoilState& from, const RecoilState& to, const AtomParams& atom) {
    if (is_excited(from.level) || is_excited(to.level))
        fail(ErrorKind::Config, "chirp offset is defined for ground-state two-photon pairs only");
    const int dz = std::abs(to.nz - from.nz);
    const int dx = std::abs(to.nx - from.nx);
    if (!((dz == 2 && dx == 0) || (dz == 0 && dx == 2)))
        fail(ErrorKind::Config, "two-photon pair must differ by exactly 2 recoils along one axis");
    return kinetic_term(to, atom) - kinetic_term(from, atom);
}

namespace {

Level partner(Level level) { return level == Level::A ? Level::B : Level::A; }

Polarization leg_polarization(Level ground) {
    return ground == Level::A ? Polarization::SigmaPlus : Polarization::SigmaMinus;
}

} // namespace

CounterIntuitivePair counter_intuitive_pair(const PairSpec& spec, const AtomParams& atom) {
    if (!(spec.half_overlap > 0.0)) fail(ErrorKind::Config, "pulse half-overlap T must be positive");
    if (!(spec.coupling > 0.0)) fail(ErrorKind::Config, "coupling g must be positive");
    if (spec.direction != 1 && spec.direction != -1) fail(ErrorKind::Config, "ladder direction must be +1 or -1");
    if (spec.source_level != Level::A && spec.source_level != Level::B)
        fail(ErrorKind::Config, "adiabatic ladder steps start from a or b");

    const int d = spec.direction;
    const int n = spec.source_momentum;
    const double T = spec.half_overlap;
    const double wr = atom.recoil_frequency();

    CounterIntuitivePair pair;
    pair.source = {spec.source_level, n, 0};
    pair.target = {partner(spec.source_level), n + 2 * d, 0};
    pair.adiabaticity = adiabaticity_parameter(spec.coupling, T);
    pair.adiabatic = pair.adiabaticity < kAdiabaticityLimit;

    // The source leg absorbs along d, the target leg re-emits into a beam
    // travelling along -d. Each laser is tuned to its single-photon resonance,
    // so their difference is the two-photon chirp.
    const int ne = n + d;
    const double source_detuning = spec.chirp ? wr * (double(ne) * ne - double(n) * n) : 0.0;
    const double target_detuning = spec.chirp ? wr * (double(ne) * ne - double(n + 2 * d) * (n + 2 * d)) : 0.0;

    PulseEvent lead;
    lead.envelope = {spec.shape, 2.0 * spec.coupling, spec.start, 2.0 * T};
    lead.polarization = leg_polarization(pair.target.level);
    lead.axis = Axis::Z;
    lead.direction = -d;
    lead.detuning = target_detuning;
    lead.channel = Channel::AdiabaticLambda;
    lead.label = "pair" + std::to_string(spec.index) + "-lead";

    PulseEvent follow = lead;
    follow.envelope.start = spec.start + T;
    follow.polarization = leg_polarization(pair.source.level);
    follow.direction = d;
    follow.detuning = source_detuning;
    follow.label = "pair" + std::to_string(spec.index) + "-follow";

    pair.events = {lead, follow};
    return pair;
}

SequencePlan build_adiabatic_sequence(const AdiabaticLadderSpec& spec, const AtomParams& atom) {
    if (spec.pairs < 1) fail(ErrorKind::Config, "adiabatic ladder needs at least one pulse pair");
    SequencePlan plan;
    plan.start_time = spec.start_time;
    Level level = spec.start_level;
    int n = spec.start_momentum;
    for (int j = 0; j < spec.pairs; ++j) {
        PairSpec ps;
        ps.index = j;
        ps.half_overlap = spec.half_overlap;
        ps.coupling = spec.coupling;
        ps.start = spec.start_time + 3.0 * spec.half_overlap * j;
        ps.direction = spec.direction;
        ps.source_momentum = n;
        ps.source_level = level;
        ps.chirp = spec.chirp;
        ps.shape = spec.shape;
        const auto pair = counter_intuitive_pair(ps, atom);
        plan.events.push_back(pair.events[0]);
        plan.events.push_back(pair.events[1]);
        plan.adiabaticity.push_back(pair.adiabaticity);
        level = pair.target.level;
        n = pair.target.nz;
    }
    plan.predicted = {RecoilState{level, n, 0}};
    return plan;
}

PulseEvent raman_tone(const RamanToneSpec& spec) {
    if (!(spec.rabi > 0.0)) fail(ErrorKind::Config, "Raman Rabi frequency must be positive");
    if (!(spec.area > 0.0)) fail(ErrorKind::Config, "pulse area must be positive");
    PulseEvent e;
    e.envelope = {EnvelopeShape::Square, spec.rabi, spec.start, spec.area / spec.rabi};
    e.polarization = spec.polarization;
    e.axis = spec.axis;
    e.direction = spec.direction;
    e.detuning = spec.detuning;
    e.channel = Channel::RamanEffective;
    e.lower = spec.lower;
    e.upper = spec.upper;
    e.phase = kRamanPhase;
    e.targets = spec.targets;
    coupled_levels(e);
    return e;
}

PulseEvent copropagating_pulse(double area, CopropagatingTransition transition, double rabi, double start) {
    RamanToneSpec spec;
    spec.area = area;
    spec.rabi = rabi;
    spec.start = start;
    spec.direction = 0;
    if (transition == CopropagatingTransition::PiPiX) {
        spec.axis = Axis::X;
        spec.polarization = Polarization::PiLegA;
    } else {
        spec.axis = Axis::Z;
        spec.polarization = Polarization::SigmaPlus;
    }
    auto e = raman_tone(spec);
    e.label = transition == CopropagatingTransition::PiPiX ? "copropagating-pi-pi-x" : "copropagating-sigma-sigma-z";
    return e;
}

SequencePlan build_raman_sequence(const RamanLadderSpec& spec, const AtomParams& atom) {
    if (!(spec.pulse_time > 0.0) || !(spec.rabi > 0.0))
        fail(ErrorKind::Config, "Raman pulse time and Rabi frequency must be positive");
    if (std::abs(spec.rabi * spec.pulse_time - pi) > 1e-12 * pi)
        fail(ErrorKind::Config, "Raman ladder requires rabi * T' = pi (pi-pulse condition)");
    if (spec.pi_pulses < 0) fail(ErrorKind::Config, "number of pi pulses must be non-negative");
    if (spec.half_pi_direction != 1 && spec.half_pi_direction != -1)
        fail(ErrorKind::Config, "Raman direction must be +1 or -1");
    for (const auto& arm : spec.arms)
        if (arm.level != Level::A && arm.level != Level::C)
            fail(ErrorKind::Config, "Raman ladder arms must be in a or c");

    const double wr = atom.recoil_frequency();
    SequencePlan plan;
    plan.start_time = spec.start_time;
    std::vector<RecoilState> arms = spec.arms;
    double t = spec.start_time;

    // One tone per populated arm, each resonant with its own transition.
    const auto emit_step = [&](int s, double area, bool split, const std::string& label) {
        std::vector<RecoilState> next;
        std::vector<int> addressed;
        for (const auto& arm : arms) {
            const int n = arm.momentum(spec.axis);
            const int lower_n = arm.level == Level::A ? n : n - 2 * s;
            const RecoilState moved = arm.level == Level::A ? arm.with_level(Level::C).shifted(spec.axis, 2 * s)
                                                            : arm.with_level(Level::A).shifted(spec.axis, -2 * s);
            if (split) next.push_back(arm);
            next.push_back(moved);
            // arms sharing the axis momentum (other-axis clusters) share a tone
            if (std::find(addressed.begin(), addressed.end(), lower_n) != addressed.end()) continue;
            addressed.push_back(lower_n);

            RamanToneSpec tone;
            tone.axis = spec.axis;
            tone.direction = s;
            tone.polarization = spec.polarization;
            tone.area = area;
            tone.rabi = spec.rabi;
            tone.start = t;
            tone.targets = {lower_n};
            tone.detuning = spec.chirp ? wr * (double(lower_n + 2 * s) * (lower_n + 2 * s) - double(lower_n) * lower_n) : 0.0;
            auto e = raman_tone(tone);
            e.label = label;
            plan.events.push_back(std::move(e));
        }
        arms = std::move(next);
        t += area / spec.rabi;
    };

    int s = spec.half_pi_direction;
    if (spec.half_pi_first) emit_step(s, pi / 2.0, true, "raman-half-pi");
    int pi_dir = spec.first_pi_direction != 0 ? spec.first_pi_direction : -spec.half_pi_direction;
    for (int k = 0; k < spec.pi_pulses; ++k) {
        emit_step(pi_dir, pi, false, "raman-pi-" + std::to_string(k));
        pi_dir = -pi_dir;
    }
    std::sort(arms.begin(), arms.end());
    plan.predicted = std::move(arms);
    return plan;
}

} // namespace atomladder
