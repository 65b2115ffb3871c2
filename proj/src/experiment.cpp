#include "atomladder/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "atomladder/errors.hpp"
#include "atomladder/fringes.hpp"
#include "atomladder/interferometer.hpp"
#include "atomladder/patterngen.hpp"
#include "atomladder/pgm.hpp"

#ifndef ATOMLADDER_VERSION
#define ATOMLADDER_VERSION "0.0.0"
#endif

namespace atomladder {

namespace fs = std::filesystem;

const std::vector<PlanInfo>& plan_catalog() {
    static const std::vector<PlanInfo> catalog{
        {"figure3", "momentum ladder of counter-intuitive pulse pairs, momentum versus time", "Sec. 4, Fig. 3"},
        {"split1d", "adiabatic 1D interferometer: split, drift, reversal, selective pi, recombination, fringes",
         "Sec. 5, Fig. 4"},
        {"ramsey", "Ramsey variant of the 1D interferometer, P_c scanned against the two-photon detuning",
         "Sec. 5, Ramsey paragraph"},
        {"split2d", "Raman 2D interferometer with P and Q ladders, four-arm lattice pattern", "Sec. 7, Fig. 6"},
        {"fringes", "matter-wave pattern of a recombined plan or of explicit arms, spacing and contrast",
         "Sec. 5 and Sec. 7"},
        {"pattern", "arccos phase-mask pipeline: image -> mask -> imprint -> interference -> image",
         "Sec. 10, Fig. 7"},
    };
    return catalog;
}

const Json& config_defaults() {
    static const Json defaults = Json::parse(R"({
        "plan": "",
        "atom": {
            "mass_amu": 86.909180527,
            "wavelength_d1_nm": 794.979,
            "wavelength_d2_nm": 780.241,
            "gravity_m_s2": 9.80665
        },
        "engine": {
            "scheme": "gauss-legendre4",
            "dt_s": 0.0,
            "tolerance": 1e-13,
            "guard": 3,
            "prune_floor": 1e-14,
            "max_states": 200000,
            "decay_rate_per_s": 0.0,
            "excited_detuning_mhz": 0.0
        },
        "pulses": {
            "pairs": 30,
            "direction": 1,
            "half_overlap_ns": 50.0,
            "coupling_mhz": 100.0,
            "chirp": true,
            "envelope": "sine-squared",
            "copropagating_rabi_mhz": 1.0,
            "raman_pulse_time_us": 1.0,
            "samples_per_pair": 10
        },
        "interferometer": {
            "n_split": 25,
            "n_reverse": 0,
            "drift1_ms": null,
            "cloud_size_mm": 1.0,
            "beam_width_mm": 0.5,
            "gravity": true,
            "bypass_population": 1e-3,
            "z_split": 24,
            "z_reverse": 48,
            "x_split": 48,
            "x_reverse": 96,
            "drift_z_ms": 3.3,
            "split_x": true
        },
        "ramsey": {
            "n_third": 0,
            "raman_rabi_mhz": 1.0,
            "arm_phase_rad": 0.0,
            "periods": 3.0,
            "points_per_period": 20,
            "deltas_hz": []
        },
        "fringes": {
            "source": "split1d",
            "arms": [],
            "nz": null,
            "nx": null,
            "pitch_nm": 0.25,
            "coherence_length_um": 300.0
        },
        "pattern": {
            "input": "gear",
            "gear_size": 64,
            "gear_teeth": 12,
            "pitch_um": 1.0,
            "magnification": 1.0
        }
    })");
    return defaults;
}

namespace {

std::string type_name(const Json& v) {
    if (v.is_number_integer()) return "integer";
    if (v.is_number()) return "number";
    return v.type_name();
}

std::string key_list(const Json& section) {
    std::string out;
    for (const auto& [k, v] : section.items()) out += (out.empty() ? "" : ", ") + k;
    return out;
}

void merge(Json& target, const Json& user, const std::string& path) {
    if (!user.is_object()) fail(ErrorKind::Config, (path.empty() ? "config" : path) + " must be a JSON object");
    for (const auto& [key, value] : user.items()) {
        const std::string where = path.empty() ? key : path + "." + key;
        if (!target.contains(key))
            fail(ErrorKind::Config, "unknown key '" + where + "'; valid keys here: " + key_list(target));
        Json& slot = target[key];
        bool ok = false;
        if (slot.is_object()) {
            merge(slot, value, where);
            continue;
        }
        if (slot.is_null())
            ok = value.is_null() || value.is_number();
        else if (slot.is_boolean())
            ok = value.is_boolean();
        else if (slot.is_number_integer())
            ok = value.is_number_integer();
        else if (slot.is_number())
            ok = value.is_number();
        else if (slot.is_string())
            ok = value.is_string();
        else if (slot.is_array())
            ok = value.is_array();
        if (!ok)
            fail(ErrorKind::Config, "'" + where + "' must be " + (slot.is_null() ? "a number or null" : type_name(slot)) +
                                        ", got " + type_name(value));
        slot = value;
    }
}

void check_arms(const Json& arms) {
    static const Json shape = Json::parse(R"({"nz": 0, "nx": 0, "population": 0.5, "phase_rad": 0.0, "level": "a"})");
    for (std::size_t i = 0; i < arms.size(); ++i) {
        Json slot = shape;
        merge(slot, arms[i], "fringes.arms[" + std::to_string(i) + "]");
        if (!(slot["population"].get<double>() >= 0.0))
            fail(ErrorKind::Config, "fringes.arms[" + std::to_string(i) + "].population must be non-negative");
        level_from_string(slot["level"].get<std::string>());
    }
}

} // namespace

Json resolve_config(const Json& user) {
    Json resolved = config_defaults();
    merge(resolved, user, "");
    const auto plan = resolved["plan"].get<std::string>();
    std::string valid;
    bool known = false;
    for (const auto& p : plan_catalog()) {
        valid += (valid.empty() ? "" : ", ") + p.name;
        known = known || p.name == plan;
    }
    if (plan.empty()) fail(ErrorKind::Config, "config must name a plan; valid kinds: " + valid);
    if (!known) fail(ErrorKind::Config, "unknown plan '" + plan + "'; valid kinds: " + valid);
    for (const auto& d : resolved["ramsey"]["deltas_hz"])
        if (!d.is_number()) fail(ErrorKind::Config, "ramsey.deltas_hz must hold numbers");
    check_arms(resolved["fringes"]["arms"]);
    return resolved;
}

Json read_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Io, "cannot open config " + path);
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        fail(ErrorKind::Config, path + ": " + e.what());
    }
}

std::string config_hash(const Json& resolved) {
    // FNV-1a over the canonical dump; object keys are sorted.
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : resolved.dump()) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str().substr(0, 12);
}

namespace {

constexpr double kTwoPi = 2.0 * constants::pi;

AtomParams atom_from(const Json& c) {
    const auto& a = c["atom"];
    AtomParams atom;
    atom.mass = a["mass_amu"].get<double>() * constants::atomic_mass_unit;
    atom.wavelength_d1 = a["wavelength_d1_nm"].get<double>() * 1e-9;
    atom.wavelength_d2 = a["wavelength_d2_nm"].get<double>() * 1e-9;
    atom.gravity = a["gravity_m_s2"].get<double>();
    atom.validate();
    return atom;
}

EngineOptions engine_from(const Json& c) {
    const auto& e = c["engine"];
    EngineOptions o;
    const auto scheme = e["scheme"].get<std::string>();
    if (scheme == "gauss-legendre4")
        o.integrator.scheme = Scheme::GaussLegendre4;
    else if (scheme == "rk4")
        o.integrator.scheme = Scheme::RungeKutta4;
    else
        fail(ErrorKind::Config, "engine.scheme must be gauss-legendre4 or rk4, got " + scheme);
    o.integrator.dt = e["dt_s"].get<double>();
    o.integrator.tolerance = e["tolerance"].get<double>();
    o.guard = e["guard"].get<int>();
    o.prune_floor = e["prune_floor"].get<double>();
    o.max_states = e["max_states"].get<std::size_t>();
    o.physics.decay_rate = e["decay_rate_per_s"].get<double>();
    o.physics.excited_detuning = kTwoPi * 1e6 * e["excited_detuning_mhz"].get<double>();
    if (o.integrator.dt < 0.0 || !(o.integrator.tolerance > 0.0) || o.guard < 1 || o.prune_floor < 0.0 ||
        o.physics.decay_rate < 0.0)
        fail(ErrorKind::Config, "engine settings must be non-negative (guard >= 1, tolerance > 0)");
    return o;
}

AdiabaticPulseParams adiabatic_from(const Json& c) {
    const auto& p = c["pulses"];
    AdiabaticPulseParams a;
    a.coupling = kTwoPi * 1e6 * p["coupling_mhz"].get<double>();
    a.half_overlap = 1e-9 * p["half_overlap_ns"].get<double>();
    a.chirp = p["chirp"].get<bool>();
    a.shape = envelope_shape_from_string(p["envelope"].get<std::string>());
    a.copropagating_rabi = kTwoPi * 1e6 * p["copropagating_rabi_mhz"].get<double>();
    return a;
}

InterferometerConfig interferometer_from(const Json& c) {
    const auto& i = c["interferometer"];
    InterferometerConfig cfg;
    cfg.atom = atom_from(c);
    cfg.engine = engine_from(c);
    cfg.cloud_size = 1e-3 * i["cloud_size_mm"].get<double>();
    cfg.beam_width = 1e-3 * i["beam_width_mm"].get<double>();
    cfg.gravity = i["gravity"].get<bool>();
    cfg.bypass_population = i["bypass_population"].get<double>();
    if (!(cfg.cloud_size > 0.0) || !(cfg.beam_width > 0.0) || cfg.bypass_population < 0.0)
        fail(ErrorKind::Config, "cloud size and beam width must be positive, bypass_population non-negative");
    return cfg;
}

Plan1DParams plan1d_from(const Json& c, double default_drift) {
    const auto& i = c["interferometer"];
    Plan1DParams p;
    p.n_split = i["n_split"].get<int>();
    p.n_reverse = i["n_reverse"].get<int>();
    p.drift1 = i["drift1_ms"].is_null() ? default_drift : 1e-3 * i["drift1_ms"].get<double>();
    p.pulses = adiabatic_from(c);
    return p;
}

RamseyParams ramsey_from(const Json& c) {
    RamseyParams r;
    r.base = plan1d_from(c, RamseyParams{}.base.drift1);
    r.n_third = c["ramsey"]["n_third"].get<int>();
    r.raman_rabi = kTwoPi * 1e6 * c["ramsey"]["raman_rabi_mhz"].get<double>();
    r.arm_phase = c["ramsey"]["arm_phase_rad"].get<double>();
    return r;
}

Plan2DParams plan2d_from(const Json& c) {
    const auto& i = c["interferometer"];
    Plan2DParams p;
    p.z_split = i["z_split"].get<int>();
    p.z_reverse = i["z_reverse"].get<int>();
    p.x_split = i["x_split"].get<int>();
    p.x_reverse = i["x_reverse"].get<int>();
    p.drift_z = 1e-3 * i["drift_z_ms"].get<double>();
    p.split_x = i["split_x"].get<bool>();
    p.pulses.pulse_time = 1e-6 * c["pulses"]["raman_pulse_time_us"].get<double>();
    p.pulses.chirp = c["pulses"]["chirp"].get<bool>();
    p.pulses.copropagating_rabi = kTwoPi * 1e6 * c["pulses"]["copropagating_rabi_mhz"].get<double>();
    return p;
}

GridSpec grid_from(const Json& c, bool two_dimensional) {
    const auto& f = c["fringes"];
    GridSpec g;
    g.nz = two_dimensional ? 1024 : 4096;
    g.nx = two_dimensional ? 1024 : 1;
    if (!f["nz"].is_null()) g.nz = f["nz"].get<int>();
    if (!f["nx"].is_null()) g.nx = f["nx"].get<int>();
    g.pitch = 1e-9 * f["pitch_nm"].get<double>();
    return g;
}

CoherenceEnvelope envelope_from(const Json& c) {
    return CoherenceEnvelope{1e-6 * c["fringes"]["coherence_length_um"].get<double>()};
}

// Collects artifacts and results of one run.
class Session {
public:
    Session(const Json& config, const std::string& out_dir, const RunOptions& options)
        : config_(config), dir_(out_dir), options_(options) {
        outcome_.stem = config["plan"].get<std::string>() + "-" + config_hash(config);
    }

    std::string path(const std::string& suffix) {
        const auto p = (dir_ / (outcome_.stem + suffix)).string();
        outcome_.artifacts.push_back(p);
        return p;
    }

    void warn(const std::string& w) { outcome_.warnings.push_back(w); }
    void metric(const std::string& k, double v) { outcome_.metrics[k] = v; }
    void absorb(const PlanResult& r) {
        for (const auto& [k, v] : r.metrics) metric(k, v);
        for (const auto& w : r.warnings) warn(w);
        metric("pruned_norm", r.engine.pruned_norm);
        metric("bypassed_norm", r.engine.bypassed_norm);
        metric("largest_basis", static_cast<double>(r.engine.largest_basis));
    }

    // Strict mode stops here, before anything is written.
    void gate() const {
        if (options_.strict && !outcome_.warnings.empty())
            throw StrictWarning("warning promoted to error: " + outcome_.warnings.front());
    }

    const Json& config() const { return config_; }
    const RunOptions& options() const { return options_; }
    RunOutcome& outcome() { return outcome_; }

private:
    const Json& config_;
    fs::path dir_;
    RunOptions options_;
    RunOutcome outcome_;
};

void write_csv_header(std::ofstream& out, const std::string& path, const std::string& header) {
    if (!out) fail(ErrorKind::Io, "cannot open " + path + " for writing");
    out.precision(12);
    out << header << '\n';
}

void run_figure3(Session& s) {
    const auto& c = s.config();
    const AtomParams atom = atom_from(c);
    const EngineOptions engine = engine_from(c);
    const AdiabaticPulseParams p = adiabatic_from(c);
    AdiabaticLadderSpec spec;
    spec.pairs = c["pulses"]["pairs"].get<int>();
    spec.direction = c["pulses"]["direction"].get<int>();
    spec.half_overlap = p.half_overlap;
    spec.coupling = p.coupling;
    spec.chirp = p.chirp;
    spec.shape = p.shape;
    if (spec.direction != 1 && spec.direction != -1) fail(ErrorKind::Config, "pulses.direction must be +1 or -1");
    const double a = adiabaticity_parameter(p.coupling, p.half_overlap);
    if (a >= kAdiabaticityLimit) {
        std::ostringstream os;
        os << "adiabaticity parameter " << a << " is not below " << kAdiabaticityLimit;
        fail(ErrorKind::Adiabaticity, os.str());
    }
    const auto plan = build_adiabatic_sequence(spec, atom);
    const int samples = std::max(1, c["pulses"]["samples_per_pair"].get<int>());

    struct Row {
        double t, mean, spread, excited, norm;
    };
    std::vector<Row> rows;
    std::vector<double> pair_end(spec.pairs), pair_population(spec.pairs, 0.0);
    const double period = 3.0 * spec.half_overlap;
    for (int j = 0; j < spec.pairs; ++j) pair_end[j] = spec.start_time + period * (j + 1);
    static constexpr std::array<Level, 5> all{Level::A, Level::B, Level::C, Level::E1, Level::E2};
    static constexpr std::array<Level, 2> excited{Level::E1, Level::E2};
    const auto observer = [&](const WaveFunction& psi) {
        const double t = psi.time();
        // A basis extension repeats an epoch; drop its first attempt.
        while (!rows.empty() && rows.back().t >= t - 1e-18) rows.pop_back();
        const auto o = observables(psi, all, Axis::Z);
        rows.push_back({t, o.mean.value_or(0.0), o.spread.value_or(0.0), observables(psi, excited, Axis::Z).population,
                        psi.norm_squared()});
        for (int j = 0; j < spec.pairs; ++j)
            if (std::abs(t - pair_end[j]) < 1e-6 * period) {
                const int k = j + 1;
                const RecoilState target{k % 2 == 1 ? Level::B : Level::A, 2 * spec.direction * k, 0};
                pair_population[j] = psi.population(target);
            }
    };
    EngineReport report;
    const auto final = propagate_sequence(WaveFunction::single({Level::A, 0, 0}), plan, atom, engine, observer,
                                          samples, &report);
    const auto fo = observables(final, all, Axis::Z);
    s.metric("final_mean_nz", fo.mean.value_or(0.0));
    s.metric("final_target_population", final.population(plan.predicted.front()));
    s.metric("adiabaticity", a);
    s.metric("pruned_norm", report.pruned_norm);
    s.metric("largest_basis", static_cast<double>(report.largest_basis));
    s.gate();

    const auto main_path = s.path(".csv");
    std::ofstream out(main_path);
    write_csv_header(out, main_path, "time_us,mean_nz,spread_nz,population_excited,norm");
    for (const auto& r : rows)
        out << r.t * 1e6 << ',' << r.mean << ',' << r.spread << ',' << r.excited << ',' << r.norm << '\n';
    const auto pairs_path = s.path("-pairs.csv");
    std::ofstream pairs(pairs_path);
    write_csv_header(pairs, pairs_path, "pair,target_nz,target_population");
    for (int j = 0; j < spec.pairs; ++j)
        pairs << j + 1 << ',' << 2 * spec.direction * (j + 1) << ',' << pair_population[j] << '\n';
}

void write_fringe(Session& s, const FringePattern& pattern) {
    if (pattern.dims() == 1) {
        const auto path = s.path("-fringe.csv");
        write_pattern_csv(pattern, path);
    } else {
        const auto path = s.path("-fringe.pgm");
        write_pattern_pgm(pattern, path);
        s.outcome().artifacts.push_back(path + ".txt");
    }
}

void measure_fringe(Session& s, const FringePattern& pattern) {
    s.metric("contrast", contrast(pattern, envelope_from(s.config())));
    const auto record = [&](Axis axis, const std::string& name) {
        const auto sp = extract_spacing(pattern, axis);
        s.metric("spacing_" + name + "_nm", sp.period * 1e9);
        s.metric("spacing_" + name + "_uncertainty_nm", sp.uncertainty * 1e9);
    };
    record(Axis::Z, "z");
    if (pattern.dims() == 2) record(Axis::X, "x");
}

// The grid should resolve the finest expected period with 16 samples and
// hold at least 10 of them along each axis the arms differ on.
void check_sampling(Session& s, const std::vector<FringeArm>& arms, const GridSpec& grid, const AtomParams& atom) {
    const auto check = [&](Axis axis, int samples) {
        int dn = 0;
        for (const auto& a : arms)
            for (const auto& b : arms) dn = std::max(dn, std::abs(axis == Axis::Z ? a.nz - b.nz : a.nx - b.nx));
        if (dn == 0) return;
        const double period = atom.lattice_wavelength() / dn;
        std::ostringstream os;
        if (period < 16.0 * grid.pitch)
            os << "grid pitch " << grid.pitch * 1e9 << " nm gives fewer than 16 samples per " << period * 1e9
               << " nm period along " << to_string(axis);
        else if (samples * grid.pitch < 10.0 * period)
            os << "grid spans fewer than 10 periods of " << period * 1e9 << " nm along " << to_string(axis);
        if (!os.str().empty()) s.warn(os.str());
    };
    check(Axis::Z, grid.nz);
    if (grid.nx > 1) check(Axis::X, grid.nx);
}

FringePattern recombined_pattern(Session& s, const PlanResult& r, const InterferometerConfig& cfg, bool two_d) {
    const auto arms = fringe_arms(r.final, cfg.cloud_size);
    s.metric("fringe_arms", static_cast<double>(arms.size()));
    const auto grid = grid_from(s.config(), two_d);
    check_sampling(s, arms, grid, cfg.atom);
    return synthesize(arms, grid, cfg.atom, envelope_from(s.config()), s.options().threads);
}

void run_split1d(Session& s) {
    const auto cfg = interferometer_from(s.config());
    const auto r = run_plan_1d_adiabatic(plan1d_from(s.config(), Plan1DParams{}.drift1), cfg);
    s.absorb(r);
    const auto pattern = recombined_pattern(s, r, cfg, false);
    measure_fringe(s, pattern);
    s.gate();
    write_stage_csv(r.log, s.path("-stages.csv"));
    write_fringe(s, pattern);
}

void run_split2d(Session& s) {
    const auto cfg = interferometer_from(s.config());
    const auto params = plan2d_from(s.config());
    const auto r = run_plan_2d(params, cfg);
    s.absorb(r);
    const auto pattern = recombined_pattern(s, r, cfg, params.split_x);
    measure_fringe(s, pattern);
    s.gate();
    write_stage_csv(r.log, s.path("-stages.csv"));
    write_fringe(s, pattern);
}

void run_ramsey(Session& s) {
    const auto& c = s.config();
    const auto cfg = interferometer_from(c);
    const auto params = ramsey_from(c);
    std::vector<double> deltas;
    for (const auto& d : c["ramsey"]["deltas_hz"]) deltas.push_back(kTwoPi * d.get<double>());
    if (deltas.empty()) {
        // The grid needs tau, which the plan parameters fix: split, drift, reversal, equal closure drift.
        const double tau_guess = 2.0 * params.base.drift1;
        deltas = ramsey_grid(tau_guess, c["ramsey"]["periods"].get<double>() + 0.5,
                             c["ramsey"]["points_per_period"].get<int>() + 1);
    }
    const auto scan = ramsey_scan(params, deltas, cfg, s.options().threads);
    s.absorb(scan.central);
    const auto& a = scan.analysis;
    s.metric("tau_s", a.tau);
    s.metric("period_hz", a.period_hz);
    s.metric("central_width_hz", a.central_width_hz);
    s.metric("width_scale_hz", a.width_scale_hz);
    s.metric("fringe_phase_rad", a.phase);
    s.metric("fringe_shift_hz", a.shift_hz);
    s.metric("population_c_at_zero", a.population_at_zero);
    s.gate();
    write_ramsey_csv(scan.points, s.path("-scan.csv"));
    write_stage_csv(scan.central.log, s.path("-stages.csv"));
}

std::vector<FringeArm> explicit_arms(const Json& arms) {
    std::vector<FringeArm> out;
    for (const auto& a : arms) {
        FringeArm f;
        f.amplitude = std::sqrt(a.value("population", 0.5));
        f.nz = a.value("nz", 0);
        f.nx = a.value("nx", 0);
        f.phase = a.value("phase_rad", 0.0);
        f.level = level_from_string(a.value("level", std::string("a")));
        out.push_back(f);
    }
    return out;
}

void run_fringes(Session& s) {
    const auto& c = s.config();
    const auto source = c["fringes"]["source"].get<std::string>();
    const auto cfg = interferometer_from(c);
    FringePattern pattern;
    if (source == "arms") {
        const auto arms = explicit_arms(c["fringes"]["arms"]);
        bool two_d = false;
        for (const auto& a : arms) two_d = two_d || a.nx != arms.front().nx;
        const auto grid = grid_from(c, two_d);
        check_sampling(s, arms, grid, cfg.atom);
        pattern = synthesize(arms, grid, cfg.atom, envelope_from(c), s.options().threads);
    } else if (source == "split1d") {
        const auto r = run_plan_1d_adiabatic(plan1d_from(c, Plan1DParams{}.drift1), cfg);
        s.absorb(r);
        pattern = recombined_pattern(s, r, cfg, false);
    } else if (source == "raman1d" || source == "split2d") {
        auto params = plan2d_from(c);
        params.split_x = source == "split2d";
        const auto r = run_plan_2d(params, cfg);
        s.absorb(r);
        pattern = recombined_pattern(s, r, cfg, params.split_x);
    } else {
        fail(ErrorKind::Config, "fringes.source must be one of arms, split1d, raman1d, split2d; got " + source);
    }
    measure_fringe(s, pattern);
    s.gate();
    write_fringe(s, pattern);
}

void run_pattern(Session& s) {
    const auto& p = s.config()["pattern"];
    const auto input = p["input"].get<std::string>();
    const double pitch = 1e-6 * p["pitch_um"].get<double>();
    const bool csv = input.size() > 4 && input.substr(input.size() - 4) == ".csv";
    const auto target =
        csv ? read_pattern_csv(input, pitch)
            : target_from_image(input == "gear" ? gear_image(p["gear_size"].get<int>(), p["gear_teeth"].get<int>())
                                                : read_pgm(input),
                                pitch);
    const auto result = roundtrip(target, p["magnification"].get<double>());
    if (result.warning) s.warn(*result.warning);
    s.metric("max_abs_error", result.max_error);
    s.metric("rms_error", result.rms_error);
    s.metric("output_pitch_m", result.recovered.pitch);
    s.gate();
    write_pgm(s.path("-target.pgm"), pattern_image(target));
    write_pgm(s.path("-recovered.pgm"), pattern_image(result.recovered));
    write_error_csv(target, result, s.path("-errors.csv"));
}

} // namespace

RunOutcome run_experiment(const Json& resolved, const std::string& out_dir, const RunOptions& options) {
    const auto started = std::chrono::steady_clock::now();
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec || !fs::is_directory(out_dir)) fail(ErrorKind::Io, "cannot create output directory " + out_dir);
    Session s(resolved, out_dir, options);
    const auto plan = resolved.at("plan").get<std::string>();
    if (plan == "figure3")
        run_figure3(s);
    else if (plan == "split1d")
        run_split1d(s);
    else if (plan == "ramsey")
        run_ramsey(s);
    else if (plan == "split2d")
        run_split2d(s);
    else if (plan == "fringes")
        run_fringes(s);
    else if (plan == "pattern")
        run_pattern(s);
    else
        fail(ErrorKind::Config, "unknown plan '" + plan + "'");

    auto& outcome = s.outcome();
    outcome.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    const auto prov_path = (fs::path(out_dir) / (outcome.stem + ".provenance.json")).string();
    Json prov;
    prov["tool"] = "atomladder";
    prov["version"] = ATOMLADDER_VERSION;
    prov["config"] = resolved;
    prov["config_hash"] = config_hash(resolved);
    prov["threads"] = options.threads;
    prov["strict"] = options.strict;
    prov["wall_time_s"] = outcome.wall_time;
    prov["artifacts"] = outcome.artifacts;
    prov["warnings"] = outcome.warnings;
    prov["metrics"] = outcome.metrics;
    std::ofstream out(prov_path);
    if (!out) fail(ErrorKind::Io, "cannot open " + prov_path + " for writing");
    out << prov.dump(2) << '\n';
    if (!out) fail(ErrorKind::Io, "failed writing " + prov_path);
    outcome.artifacts.push_back(prov_path);
    return outcome;
}

} // namespace atomladder
