#include "atomladder/interferometer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "atomladder/errors.hpp"

namespace atomladder {

Vec3 ArmTrack::velocity(const AtomParams& atom) const {
    const double vr = atom.recoil_velocity();
    return {state.nx * vr + drift.x, drift.y, state.nz * vr + drift.z};
}

ArmState ArmState::single(const RecoilState& state, double time) {
    ArmState s;
    s.time = time;
    s.arms.push_back(ArmTrack{s.next_id++, cplx{1.0, 0.0}, state, {}, {}, 0.0});
    return s;
}

double ArmState::norm_squared() const {
    double n = 0.0;
    for (const auto& a : arms) n += a.population();
    return n;
}

const ArmTrack* ArmState::find(const RecoilState& state) const {
    const ArmTrack* best = nullptr;
    for (const auto& a : arms)
        if (a.state == state && (!best || a.population() > best->population())) best = &a;
    return best;
}

std::vector<const ArmTrack*> ArmState::significant() const {
    std::vector<const ArmTrack*> out;
    for (const auto& a : arms)
        if (a.population() >= kSignificantPopulation) out.push_back(&a);
    return out;
}

namespace {

double gravity_of(const InterferometerConfig& config) { return config.gravity ? config.atom.gravity : 0.0; }

// Constant-gravity kinematics; velocity is the arm velocity during the flight.
void move(ArmTrack& arm, double duration, const Vec3& v, double g) {
    arm.position.x += v.x * duration;
    arm.position.z += v.z * duration;
    arm.position.y += v.y * duration - 0.5 * g * duration * duration;
    arm.drift.y -= g * duration;
}

double distance(const Vec3& a, const Vec3& b) {
    return std::hypot(a.x - b.x, a.y - b.y, a.z - b.z);
}

} // namespace

void free_flight(ArmState& state, double duration, const InterferometerConfig& config) {
    if (duration < 0.0) fail(ErrorKind::Config, "drift duration must be non-negative");
    const auto& physics = config.engine.physics;
    const double g = gravity_of(config);
    for (auto& arm : state.arms) {
        const double energy = state_energy(arm.state, config.atom, physics);
        const double loss = is_excited(arm.state.level) ? 0.5 * physics.decay_rate * duration : 0.0;
        arm.amplitude *= std::polar(std::exp(-loss), -energy * duration);
        arm.phase -= energy * duration;
        move(arm, duration, arm.velocity(config.atom), g);
    }
    state.time += duration;
}

std::vector<std::vector<std::size_t>> cluster_arms(const std::vector<ArmTrack>& arms, double cloud_size) {
    std::vector<std::size_t> order(arms.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return arms[a].population() > arms[b].population(); });
    std::vector<std::vector<std::size_t>> clusters;
    std::vector<std::set<RecoilState>> members;
    for (std::size_t i : order) {
        bool placed = false;
        for (std::size_t c = 0; c < clusters.size() && !placed; ++c) {
            const auto& seed = arms[clusters[c].front()];
            if (distance(seed.position, arms[i].position) > cloud_size) continue;
            if (members[c].count(arms[i].state)) continue;
            clusters[c].push_back(i);
            members[c].insert(arms[i].state);
            placed = true;
        }
        if (!placed) {
            clusters.push_back({i});
            members.push_back({arms[i].state});
        }
    }
    return clusters;
}

void apply_sequence(ArmState& state, const SequencePlan& plan, const InterferometerConfig& config,
                    EngineReport* report) {
    const double end = std::max(plan.end_time(), state.time);
    const double duration = end - state.time;
    const double g = gravity_of(config);
    const double vr = config.atom.recoil_velocity();
    bool drive_z = false, drive_x = false;
    for (const auto& e : plan.events)
        if (e.kick() != 0) (e.axis == Axis::Z ? drive_z : drive_x) = true;
    std::vector<ArmTrack> next;
    for (const auto& cluster : cluster_arms(state.arms, config.cloud_size)) {
        WaveFunction psi(state.time);
        for (std::size_t i : cluster) psi.add(state.arms[i].state, state.arms[i].amplitude);

        // A new component comes from the arms that share its momentum on the
        // axes this plan leaves alone; their weighted centroid is its origin.
        struct Origin {
            Vec3 position, drift, velocity;
        };
        const auto origin_of = [&](const RecoilState& s) {
            double weight = 0.0;
            Origin o;
            const auto accumulate = [&](bool strict) {
                for (std::size_t i : cluster) {
                    const auto& arm = state.arms[i];
                    if (strict && ((!drive_z && arm.state.nz != s.nz) || (!drive_x && arm.state.nx != s.nx))) continue;
                    const double w = std::max(arm.population(), 1e-300);
                    const Vec3 v = arm.velocity(config.atom);
                    weight += w;
                    o.position = {o.position.x + w * arm.position.x, o.position.y + w * arm.position.y,
                                  o.position.z + w * arm.position.z};
                    o.drift = {o.drift.x + w * arm.drift.x, o.drift.y + w * arm.drift.y, o.drift.z + w * arm.drift.z};
                    o.velocity = {o.velocity.x + w * v.x, o.velocity.y + w * v.y, o.velocity.z + w * v.z};
                }
            };
            accumulate(true);
            if (weight == 0.0) accumulate(false);
            const auto scale = [&](Vec3 v) { return Vec3{v.x / weight, v.y / weight, v.z / weight}; };
            return Origin{scale(o.position), scale(o.drift), scale(o.velocity)};
        };
        const auto& dominant = state.arms[cluster.front()];

        double weight = 0.0;
        for (std::size_t i : cluster) weight += state.arms[i].population();
        EngineReport local;
        WaveFunction out = psi;
        if (weight < config.bypass_population) {
            free_evolve(out, duration, config.atom, config.engine.physics);
            local.bypassed_norm = weight;
        } else {
            out = propagate_sequence(psi, plan, config.atom, config.engine, {}, 0, &local);
        }
        if (report) {
            report->bypassed_norm += local.bypassed_norm;
            report->pruned_norm += local.pruned_norm;
            report->extensions += local.extensions;
            report->largest_basis = std::max(report->largest_basis, local.largest_basis);
            report->epochs += local.epochs;
        }

        for (const auto& [s, amp] : out.amplitudes()) {
            const ArmTrack* parent = nullptr;
            for (std::size_t i : cluster)
                if (state.arms[i].state == s) parent = &state.arms[i];
            ArmTrack arm;
            arm.state = s;
            arm.amplitude = amp;
            Vec3 v_new;
            if (parent) {
                arm.id = parent->id;
                arm.position = parent->position;
                arm.drift = parent->drift;
                arm.phase = parent->phase;
            } else {
                const auto o = origin_of(s);
                arm.id = state.next_id++;
                arm.position = o.position;
                arm.drift = o.drift;
                arm.phase = dominant.phase;
                v_new = o.velocity;
            }
            // Momentum changes steadily across a ladder, so the centroid moves
            // with the mean of the incoming and outgoing velocities.
            const Vec3 v_in = parent ? parent->velocity(config.atom) : v_new;
            const Vec3 v_out{s.nx * vr + arm.drift.x, arm.drift.y, s.nz * vr + arm.drift.z};
            move(arm, duration, {0.5 * (v_in.x + v_out.x), arm.drift.y, 0.5 * (v_in.z + v_out.z)}, g);
            next.push_back(arm);
        }
    }
    state.arms = std::move(next);
    state.time = end;
}

bool SelectiveRegion::contains(const Vec3& p) const { return std::abs(p.along(axis) - center) <= 0.5 * width; }

double SelectiveRegion::distance(const Vec3& p) const {
    return std::max(0.0, std::abs(p.along(axis) - center) - 0.5 * width);
}

SelectiveOutcome selective_transfer(ArmState& state, const PulseEvent& pulse, const SelectiveRegion& region,
                                    const InterferometerConfig& config, std::string_view stage) {
    if (!(region.width > 0.0)) fail(ErrorKind::Config, "selective region width must be positive");
    const double margin = config.beam_width + config.cloud_size;
    ArmState inside, outside;
    inside.time = outside.time = state.time;
    inside.next_id = state.next_id;
    SelectiveOutcome outcome;
    for (const auto& arm : state.arms) {
        if (region.contains(arm.position)) {
            if (region.intended && arm.state.level != *region.intended && arm.population() >= kSignificantPopulation) {
                std::ostringstream os;
                os << stage << ": arm " << arm.id << " (" << to_string(arm.state.level) << ", nz=" << arm.state.nz
                   << ", nx=" << arm.state.nx << ") lies inside the selective beam";
                fail(ErrorKind::Selectivity, os.str());
            }
            inside.arms.push_back(arm);
            outcome.addressed.push_back(arm.id);
            continue;
        }
        const double d = region.distance(arm.position);
        if (arm.population() >= kSignificantPopulation && d < margin) {
            std::ostringstream os;
            os << stage << ": arm " << arm.id << " (" << to_string(arm.state.level) << ", nz=" << arm.state.nz
               << ", nx=" << arm.state.nx << ") lies " << d * 1e3 << " mm from the beam, inside the "
               << margin * 1e3 << " mm exclusion margin";
            fail(ErrorKind::Selectivity, os.str());
        }
        outside.arms.push_back(arm);
    }

    PulseEvent e = pulse;
    e.envelope.start = state.time;
    SequencePlan plan;
    plan.start_time = state.time;
    plan.events.push_back(e);
    const double duration = e.envelope.duration;

    if (inside.arms.empty()) {
        outcome.warning = std::string(stage) + ": no arm inside the selective beam; pulse skipped";
        free_flight(state, duration, config);
        return outcome;
    }
    apply_sequence(inside, plan, config);
    free_flight(outside, duration, config);
    state.arms = std::move(inside.arms);
    state.arms.insert(state.arms.end(), outside.arms.begin(), outside.arms.end());
    state.next_id = inside.next_id;
    state.time = inside.time;
    return outcome;
}

std::optional<double> closure_time(const ArmTrack& a, const ArmTrack& b, Axis axis, const AtomParams& atom) {
    const double dp = b.position.along(axis) - a.position.along(axis);
    const double dv = b.velocity(atom).along(axis) - a.velocity(atom).along(axis);
    if (dp == 0.0) return 0.0;
    if (dv == 0.0 || dp * dv > 0.0) return std::nullopt;
    return -dp / dv;
}

std::string_view to_string(StageKind kind) {
    switch (kind) {
    case StageKind::QuantumSequence: return "quantum-sequence";
    case StageKind::Drift: return "drift";
    case StageKind::SelectivePulse: return "selective-pulse";
    case StageKind::Measurement: return "measurement";
    }
    return "unknown";
}

namespace {

StageRecord record(const ArmState& state, std::string name, StageKind kind, double t_start) {
    StageRecord r;
    r.name = std::move(name);
    r.kind = kind;
    r.t_start = t_start;
    r.t_end = state.time;
    std::map<Level, std::array<double, 3>> sums;
    double weight = 0.0, y = 0.0;
    for (const auto& arm : state.arms) {
        const double p = arm.population();
        auto& s = sums[arm.state.level];
        s[0] += p;
        s[1] += p * arm.state.nz;
        s[2] += p * arm.state.nx;
        weight += p;
        y += p * arm.position.y;
    }
    for (const auto& [level, s] : sums) {
        LevelSummary l;
        l.population = s[0];
        if (s[0] > 0.0) {
            l.mean_nz = s[1] / s[0];
            l.mean_nx = s[2] / s[0];
        }
        r.levels[level] = l;
    }
    r.norm = weight;
    r.drop_y = weight > 0.0 ? -y / weight : 0.0;
    const auto sig = state.significant();
    if (!sig.empty()) {
        const auto [zlo, zhi] = std::minmax_element(sig.begin(), sig.end(), [](auto a, auto b) {
            return a->position.z < b->position.z;
        });
        const auto [xlo, xhi] = std::minmax_element(sig.begin(), sig.end(), [](auto a, auto b) {
            return a->position.x < b->position.x;
        });
        r.sep_z = (*zhi)->position.z - (*zlo)->position.z;
        r.sep_x = (*xhi)->position.x - (*xlo)->position.x;
    }
    return r;
}

void check_norm(const ArmState& state, std::string_view stage, const InterferometerConfig& config, double pruned) {
    // Decay removes norm on purpose; otherwise only pruning may.
    if (config.engine.physics.decay_rate > 0.0) return;
    const double n = state.norm_squared() + pruned;
    if (std::abs(n - 1.0) > 1e-7) {
        std::ostringstream os;
        os << stage << ": total population " << n << " departs from 1";
        fail(ErrorKind::Integration, os.str());
    }
}

const ArmTrack& require(const ArmState& state, const RecoilState& s, std::string_view stage) {
    const ArmTrack* arm = state.find(s);
    if (!arm || arm->population() < kSignificantPopulation) {
        std::ostringstream os;
        os << stage << ": expected arm (" << to_string(s.level) << ", nz=" << s.nz << ", nx=" << s.nx
           << ") is not populated";
        fail(ErrorKind::Physics, os.str());
    }
    return *arm;
}

void closure_warning(PlanResult& result, const InterferometerConfig& config, std::string_view stage) {
    const auto sig = result.final.significant();
    double worst = 0.0;
    for (const auto* a : sig)
        for (const auto* b : sig)
            worst = std::max({worst, std::abs(a->position.z - b->position.z), std::abs(a->position.x - b->position.x)});
    result.metrics["closure_mismatch_m"] = worst;
    if (worst > 0.1 * config.cloud_size) {
        std::ostringstream os;
        os << stage << ": arms miss each other by " << worst * 1e6 << " um at recombination (cloud "
           << config.cloud_size * 1e6 << " um)";
        result.warnings.push_back(os.str());
    }
}

// Runs one stage and appends its record.
class Timeline {
public:
    Timeline(ArmState& state, PlanResult& result, const InterferometerConfig& config)
        : state_(state), result_(result), config_(config) {
        result_.log.push_back(record(state_, "initial", StageKind::Measurement, state_.time));
    }

    void sequence(const std::string& name, const SequencePlan& plan) {
        const double t0 = state_.time;
        apply_sequence(state_, plan, config_, &result_.engine);
        finish(name, StageKind::QuantumSequence, t0);
    }

    void drift(const std::string& name, double duration) {
        const double t0 = state_.time;
        free_flight(state_, duration, config_);
        finish(name, StageKind::Drift, t0);
    }

    void selective(const std::string& name, const PulseEvent& pulse, const SelectiveRegion& region) {
        const double t0 = state_.time;
        const auto outcome = selective_transfer(state_, pulse, region, config_, name);
        if (outcome.warning) result_.warnings.push_back(*outcome.warning);
        finish(name, StageKind::SelectivePulse, t0);
    }

    void measure(const std::string& name) { finish(name, StageKind::Measurement, state_.time); }

private:
    void finish(const std::string& name, StageKind kind, double t0) {
        check_norm(state_, name, config_, result_.engine.pruned_norm);
        result_.log.push_back(record(state_, name, kind, t0));
    }

    ArmState& state_;
    PlanResult& result_;
    const InterferometerConfig& config_;
};

void check_adiabatic_params(const AdiabaticPulseParams& p) {
    if (!(p.coupling > 0.0) || !(p.half_overlap > 0.0))
        fail(ErrorKind::Config, "coupling g and half-overlap T must be positive");
    if (!(p.copropagating_rabi > 0.0)) fail(ErrorKind::Config, "co-propagating Rabi frequency must be positive");
    const double a = adiabaticity_parameter(p.coupling, p.half_overlap);
    if (a >= kAdiabaticityLimit) {
        std::ostringstream os;
        os << "adiabaticity parameter " << a << " is not below " << kAdiabaticityLimit;
        fail(ErrorKind::Adiabaticity, os.str());
    }
}

SequencePlan ladder(const AdiabaticPulseParams& p, int pairs, const RecoilState& from, int direction, double start,
                    const AtomParams& atom) {
    AdiabaticLadderSpec spec;
    spec.pairs = pairs;
    spec.half_overlap = p.half_overlap;
    spec.coupling = p.coupling;
    spec.start_time = start;
    spec.start_momentum = from.nz;
    spec.start_level = from.level;
    spec.direction = direction;
    spec.chirp = p.chirp;
    spec.shape = p.shape;
    return build_adiabatic_sequence(spec, atom);
}

SequencePlan single_event(const PulseEvent& e) {
    SequencePlan plan;
    plan.start_time = e.envelope.start;
    plan.events.push_back(e);
    return plan;
}

// Split, drift and reversal shared by the 1D and Ramsey plans.
struct AdiabaticCore {
    RecoilState resting{Level::C, 0, 0};
    RecoilState moving;
    double split_end = 0.0;
};

AdiabaticCore run_adiabatic_core(const Plan1DParams& params, Timeline& timeline, ArmState& state,
                                 PlanResult& result, const InterferometerConfig& config) {
    const auto& p = params.pulses;
    check_adiabatic_params(p);
    if (params.n_split < 1) fail(ErrorKind::Config, "n_split must be at least 1");
    if (params.n_reverse < 0) fail(ErrorKind::Config, "n_reverse must be non-negative");
    if (!(params.drift1 > 0.0)) fail(ErrorKind::Config, "drift1 must be positive");
    const int reverse = params.n_reverse > 0 ? params.n_reverse : 2 * params.n_split;
    const AtomParams& atom = config.atom;
    AdiabaticCore core;

    timeline.sequence("split-half-pi",
                      single_event(copropagating_pulse(constants::pi / 2.0, CopropagatingTransition::PiPiX,
                                                       p.copropagating_rabi, state.time)));
    core.split_end = state.time;

    const double t_split = state.time;
    const auto split = ladder(p, 2 * params.n_split, {Level::A, 0, 0}, -1, state.time, atom);
    timeline.sequence("split-ladder", split);
    const RecoilState deflected = split.predicted.front();
    result.metrics["adiabaticity"] = split.adiabaticity.front();
    result.metrics["split_duration_s"] = state.time - t_split;
    result.metrics["split_population_deflected"] = state.find(deflected) ? state.find(deflected)->population() : 0.0;
    result.metrics["split_population_resting"] =
        state.find(core.resting) ? state.find(core.resting)->population() : 0.0;

    const double v_rel = std::abs(deflected.nz) * atom.recoil_velocity();
    result.metrics["split_relative_velocity_m_s"] = v_rel;
    timeline.drift("drift1", params.drift1);
    {
        const auto& a = require(state, deflected, "drift1");
        const auto& c = require(state, core.resting, "drift1");
        result.metrics["separation_after_drift1_m"] = std::abs(a.position.z - c.position.z);
        result.metrics["drop_after_drift1_m"] = -c.position.y;
    }

    const double t_rev = state.time;
    const auto rev = ladder(p, 2 * reverse, deflected, +1, state.time, atom);
    timeline.sequence("reverse-ladder", rev);
    core.moving = rev.predicted.front();
    result.metrics["reversal_duration_s"] = state.time - t_rev;
    result.metrics["relative_momentum"] = core.moving.nz - core.resting.nz;
    result.metrics["relative_velocity_m_s"] = std::abs(core.moving.nz - core.resting.nz) * atom.recoil_velocity();
    return core;
}

double drift_to_closure(ArmState& state, const RecoilState& a, const RecoilState& b, Axis axis,
                        std::string_view stage, const AtomParams& atom) {
    const auto& arm_a = require(state, a, stage);
    const auto& arm_b = require(state, b, stage);
    const auto t = closure_time(arm_a, arm_b, axis, atom);
    if (!t) {
        std::ostringstream os;
        os << stage << ": arms " << arm_a.id << " and " << arm_b.id << " do not converge along "
           << to_string(axis) << " (positions " << arm_a.position.along(axis) << ", " << arm_b.position.along(axis)
           << " m; velocities " << arm_a.velocity(atom).along(axis) << ", " << arm_b.velocity(atom).along(axis)
           << " m/s)";
        fail(ErrorKind::Physics, os.str());
    }
    return *t;
}

} // namespace

void write_stage_csv(const std::vector<StageRecord>& log, const std::string& path) {
    std::ofstream out(path);
    if (!out) fail(ErrorKind::Io, "cannot open " + path + " for writing");
    out.precision(12);
    out << "stage,t_start,t_end,level,population,mean_nz,mean_nx,sep_z_m,sep_x_m,drop_y_m\n";
    for (const auto& r : log) {
        for (const auto& [level, l] : r.levels) {
            out << r.name << ',' << r.t_start << ',' << r.t_end << ',' << to_string(level) << ',' << l.population
                << ',';
            if (l.mean_nz) out << *l.mean_nz;
            out << ',';
            if (l.mean_nx) out << *l.mean_nx;
            out << ',' << r.sep_z << ',' << r.sep_x << ',' << r.drop_y << '\n';
        }
    }
    if (!out) fail(ErrorKind::Io, "failed writing " + path);
}

PlanResult run_plan_1d_adiabatic(const Plan1DParams& params, const InterferometerConfig& config) {
    PlanResult result;
    ArmState state = ArmState::single({Level::A, 0, 0});
    Timeline timeline(state, result, config);
    const auto core = run_adiabatic_core(params, timeline, state, result, config);

    const auto& c = require(state, core.resting, "selective-pi");
    SelectiveRegion region{Axis::Z, c.position.z, config.beam_width, Level::C};
    timeline.selective("selective-pi",
                       copropagating_pulse(constants::pi, CopropagatingTransition::PiPiX,
                                           params.pulses.copropagating_rabi, state.time),
                       region);
    const RecoilState rest{Level::A, 0, 0};
    const double closing = drift_to_closure(state, rest, core.moving, Axis::Z, "closure", config.atom);
    result.metrics["closure_time_s"] = closing;
    timeline.drift("closure", closing);
    timeline.measure("recombination");
    result.final = state;
    closure_warning(result, config, "recombination");
    return result;
}

RamseyPrepared prepare_ramsey(const RamseyParams& params, const InterferometerConfig& config) {
    RamseyPrepared prepared;
    PlanResult& result = prepared.result;
    ArmState state = ArmState::single({Level::A, 0, 0});
    Timeline timeline(state, result, config);
    const auto core = run_adiabatic_core(params.base, timeline, state, result, config);
    prepared.split_end = core.split_end;

    const double closing = drift_to_closure(state, core.resting, core.moving, Axis::Z, "closure", config.atom);
    result.metrics["closure_time_s"] = closing;
    timeline.drift("closure", closing);

    const int third = params.n_third > 0 ? params.n_third : 2 * params.base.n_split - 1;
    const auto plan = ladder(params.base.pulses, third, core.moving, -1, state.time, config.atom);
    timeline.sequence("third-ladder", plan);
    prepared.moving = plan.predicted.front();
    prepared.resting = core.resting;
    prepared.probe_start = state.time;
    // The c arm gathers the detuning phase between the split and the probe.
    prepared.tau = prepared.probe_start - prepared.split_end;
    result.metrics["tau_s"] = prepared.tau;
    result.final = state;
    return prepared;
}

double ramsey_population(const RamseyPrepared& prepared, const RamseyParams& params, double delta,
                         const InterferometerConfig& config, PlanResult* finished) {
    if (!(params.raman_rabi > 0.0)) fail(ErrorKind::Config, "Raman Rabi frequency must be positive");
    const RecoilState& lower = prepared.moving;
    const RecoilState& upper = prepared.resting;
    if (std::abs(upper.nz - lower.nz) != 2 || upper.nx != lower.nx)
        fail(ErrorKind::Physics, "the Ramsey arms do not differ by two recoils along z");

    PlanResult result = prepared.result;
    ArmState& state = result.final;
    // Detuning acts on the c level from the split onwards; the ladders never
    // couple c, so its phase factors out of the pulse sequences.
    const double dwell = prepared.probe_start - prepared.split_end;
    for (auto& arm : state.arms) {
        if (arm.state.level == Level::C) arm.amplitude *= std::polar(1.0, -delta * dwell);
        if (arm.state == lower) arm.amplitude *= std::polar(1.0, params.arm_phase);
    }

    InterferometerConfig probe = config;
    probe.engine.physics.c_offset = delta;
    RamanToneSpec tone;
    tone.lower = lower.level;
    tone.upper = upper.level;
    tone.axis = Axis::Z;
    tone.direction = (upper.nz - lower.nz) / 2;
    tone.polarization = Polarization::SigmaPlus;
    tone.area = constants::pi / 2.0;
    tone.rabi = params.raman_rabi;
    tone.start = state.time;
    tone.targets = {lower.nz};
    tone.detuning = kinetic_term(upper, config.atom) - kinetic_term(lower, config.atom);
    auto e = raman_tone(tone);
    e.label = "ramsey-half-pi";

    const double t0 = state.time;
    apply_sequence(state, single_event(e), probe, &result.engine);
    result.log.push_back(record(state, "ramsey-half-pi", StageKind::QuantumSequence, t0));
    double pc = 0.0;
    for (const auto& arm : state.arms)
        if (arm.state.level == Level::C) pc += arm.population();
    result.log.push_back(record(state, "measurement", StageKind::Measurement, state.time));
    result.metrics["sequence_duration_s"] = state.time - prepared.result.log.front().t_start;
    result.metrics["population_c"] = pc;
    result.metrics["delta_rad_s"] = delta;
    if (finished) *finished = std::move(result);
    return pc;
}

PlanResult run_plan_ramsey(const RamseyParams& params, double delta, const InterferometerConfig& config) {
    const auto prepared = prepare_ramsey(params, config);
    PlanResult result;
    ramsey_population(prepared, params, delta, config, &result);
    return result;
}

namespace {

SequencePlan raman(const RamanPulseParams& p, Axis axis, bool half_pi, int pulses, int first_direction,
                   const std::vector<RecoilState>& arms, double start, const AtomParams& atom) {
    RamanLadderSpec spec;
    spec.half_pi_first = half_pi;
    spec.half_pi_direction = -1;
    spec.pi_pulses = pulses;
    spec.first_pi_direction = first_direction;
    spec.pulse_time = p.pulse_time;
    spec.rabi = constants::pi / p.pulse_time;
    spec.axis = axis;
    spec.polarization = axis == Axis::Z ? Polarization::SigmaPlus : Polarization::PiLegA;
    spec.arms = arms;
    spec.start_time = start;
    spec.chirp = p.chirp;
    return build_raman_sequence(spec, atom);
}

// Direction of the last pi pulse of a ladder whose pi pulses start along +1
// after a pi/2 along -1.
int last_direction(int pulses) { return pulses % 2 == 1 ? 1 : -1; }

std::vector<RecoilState> significant_states(const ArmState& state) {
    std::vector<RecoilState> out;
    for (const auto* a : state.significant())
        if (std::find(out.begin(), out.end(), a->state) == out.end()) out.push_back(a->state);
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace

PlanResult run_plan_2d(const Plan2DParams& params, const InterferometerConfig& config) {
    if (params.z_split < 1 || params.z_reverse < 1 || (params.split_x && (params.x_split < 1 || params.x_reverse < 1)))
        fail(ErrorKind::Config, "Raman ladders need at least one pi pulse");
    if (!(params.drift_z > 0.0)) fail(ErrorKind::Config, "drift_z must be positive");
    if (!(params.pulses.pulse_time > 0.0) || !(params.pulses.copropagating_rabi > 0.0))
        fail(ErrorKind::Config, "Raman pulse time and co-propagating Rabi frequency must be positive");
    const AtomParams& atom = config.atom;
    const double vr = atom.recoil_velocity();
    PlanResult result;
    ArmState state = ArmState::single({Level::A, 0, 0});
    Timeline timeline(state, result, config);

    const auto zsplit = raman(params.pulses, Axis::Z, true, params.z_split, 1, significant_states(state), state.time, atom);
    timeline.sequence("z-split", zsplit);
    timeline.drift("z-drift", params.drift_z);
    result.metrics["z_separation_after_drift_m"] = result.log.back().sep_z;

    const auto zrev = raman(params.pulses, Axis::Z, false, params.z_reverse, last_direction(params.z_split),
                            significant_states(state), state.time, atom);
    timeline.sequence("z-reverse", zrev);
    // zrev.predicted is sorted: the a arm first, the c arm second.
    RecoilState za, zc;
    for (const auto& s : zrev.predicted) (s.level == Level::A ? za : zc) = s;
    if (za.level != Level::A || zc.level != Level::C)
        fail(ErrorKind::Physics, "z reversal must leave one arm in a and one in c");
    result.metrics["z_relative_momentum"] = std::abs(zc.nz - za.nz);
    result.metrics["z_convergence_speed_m_s"] = std::abs(zc.nz - za.nz) * vr;

    const auto& carm = require(state, zc, "z-selective");
    timeline.selective("z-selective",
                       copropagating_pulse(constants::pi, CopropagatingTransition::PiPiX,
                                           params.pulses.copropagating_rabi, state.time),
                       {Axis::Z, carm.position.z, config.beam_width, Level::C});
    const RecoilState za2{Level::A, zc.nz, zc.nx};

    if (params.split_x) {
        const auto xsplit = raman(params.pulses, Axis::X, true, params.x_split, 1, significant_states(state),
                                  state.time, atom);
        timeline.sequence("x-split", xsplit);

        // The remaining z closure time fixes how long the x arms may separate:
        // separation sep0 from the split, drift D at vs, reversal R at the
        // mean velocity, closure at vrev.
        const auto xstates = significant_states(state);
        const auto xrev_probe = raman(params.pulses, Axis::X, false, params.x_reverse, last_direction(params.x_split),
                                      xstates, state.time, atom);
        int split_lo = 1 << 30, split_hi = -(1 << 30), rev_a = 0, rev_c = 0;
        for (const auto& s : xstates) {
            split_lo = std::min(split_lo, s.nx);
            split_hi = std::max(split_hi, s.nx);
        }
        for (const auto& s : xrev_probe.predicted) (s.level == Level::A ? rev_a : rev_c) = s.nx;
        const double vs = (split_hi - split_lo) * vr;
        const double vrev = std::abs(rev_c - rev_a) * vr;
        const double R = xrev_probe.duration();
        const double tz = drift_to_closure(state, {Level::A, za.nz, split_hi}, {Level::A, za2.nz, split_hi},
                                           Axis::Z, "x-split", atom);
        const double sep0 = std::abs(require(state, {Level::A, za.nz, split_hi}, "x-split").position.x -
                                     require(state, {Level::C, za.nz, split_lo}, "x-split").position.x);
        const double D = (tz - sep0 / vrev) / (1.0 + vs / vrev) - 0.5 * R;
        if (!(D > 0.0)) fail(ErrorKind::Physics, "the x arms cannot separate and close within the z closure time");
        result.metrics["x_split_speed_m_s"] = vs;
        result.metrics["x_convergence_speed_m_s"] = vrev;
        result.metrics["x_drift_s"] = D;
        timeline.drift("x-drift", D);
        result.metrics["x_separation_after_drift_m"] = result.log.back().sep_x;

        const auto xrev = raman(params.pulses, Axis::X, false, params.x_reverse, last_direction(params.x_split),
                                significant_states(state), state.time, atom);
        timeline.sequence("x-reverse", xrev);

        double cx = 0.0, w = 0.0;
        for (const auto* a : state.significant())
            if (a->state.level == Level::C) {
                cx += a->population() * a->position.x;
                w += a->population();
            }
        if (w == 0.0) fail(ErrorKind::Physics, "x reversal left no arm in c");
        timeline.selective("x-selective",
                           copropagating_pulse(constants::pi, CopropagatingTransition::SigmaSigmaZ,
                                               params.pulses.copropagating_rabi, state.time),
                           {Axis::X, cx / w, config.beam_width, Level::C});
    }

    const auto sig = state.significant();
    RecoilState left, right;
    for (const auto* a : sig) {
        if (a->state.nz == za.nz) left = a->state;
        if (a->state.nz == zc.nz) right = a->state;
    }
    const double closing = drift_to_closure(state, left, right, Axis::Z, "closure", atom);
    result.metrics["closure_time_s"] = closing;
    timeline.drift("closure", closing);
    timeline.measure("recombination");
    result.final = state;
    closure_warning(result, config, "recombination");
    return result;
}

} // namespace atomladder
