#include "atomladder/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "atomladder/errors.hpp"

namespace atomladder {

double kinetic_term(const RecoilState& state, const AtomParams& atom) {
    return atom.recoil_frequency() * (double(state.nz) * state.nz + double(state.nx) * state.nx);
}

double level_offset(Level level, const AssembleOptions& options) {
    if (level == Level::C) return options.c_offset;
    if (is_excited(level)) return options.excited_detuning;
    return 0.0;
}

double state_energy(const RecoilState& state, const AtomParams& atom, const AssembleOptions& options) {
    return (options.kinetic ? kinetic_term(state, atom) : 0.0) + level_offset(state.level, options);
}

bool HamiltonianSpec::is_hermitian() const {
    for (double l : loss)
        if (l != 0.0) return false;
    std::map<std::pair<std::size_t, std::size_t>, cplx> entries;
    for (const auto& c : couplings) entries[{c.to, c.from}] += c.value;
    for (const auto& [key, value] : entries) {
        const auto it = entries.find({key.second, key.first});
        if (it == entries.end()) return false;
        if (it->second.real() != value.real() || it->second.imag() != -value.imag()) return false;
    }
    return true;
}

double HamiltonianSpec::max_element() const {
    double m = 0.0;
    for (std::size_t i = 0; i < diagonal.size(); ++i) m = std::max(m, std::abs(cplx(diagonal[i], -loss[i])));
    for (const auto& c : couplings) m = std::max(m, std::abs(c.value));
    return m;
}

void HamiltonianSpec::apply(std::span<const cplx> x, std::span<cplx> y) const {
    for (std::size_t i = 0; i < diagonal.size(); ++i) y[i] = cplx(diagonal[i], -loss[i]) * x[i];
    for (const auto& c : couplings) y[c.to] += c.value * x[c.from];
}

namespace {

cplx drive_factor(const PulseEvent& e, double t) {
    const double amp = 0.5 * e.envelope.value(t);
    return std::polar(amp, e.phase - e.detuning * t);
}

bool addresses(const PulseEvent& e, const RecoilState& lower) {
    if (e.targets.empty()) return true;
    const int n = lower.momentum(e.axis);
    return std::find(e.targets.begin(), e.targets.end(), n) != e.targets.end();
}

// Per-level offsets of the frame co-rotating with the active lasers, found by
// walking the level graph from a (or the first lower level).
std::map<Level, double> frame_offsets(std::span<const PulseEvent> active) {
    std::map<Level, double> offset;
    if (active.empty()) return offset;
    std::vector<std::pair<std::array<Level, 2>, double>> edges;
    for (const auto& e : active) edges.push_back({coupled_levels(e), e.detuning});
    Level root = edges.front().first[0];
    for (const auto& [levels, d] : edges)
        if (levels[0] == Level::A || levels[1] == Level::A) root = Level::A;
    offset[root] = 0.0;
    bool grown = true;
    while (grown) {
        grown = false;
        for (const auto& [levels, d] : edges) {
            const bool has_lo = offset.count(levels[0]) != 0;
            const bool has_up = offset.count(levels[1]) != 0;
            if (has_lo && !has_up) {
                offset[levels[1]] = offset[levels[0]] + d;
                grown = true;
            } else if (has_up && !has_lo) {
                offset[levels[0]] = offset[levels[1]] - d;
                grown = true;
            }
        }
    }
    return offset;
}

} // namespace

HamiltonianSpec assemble(const Basis& basis, std::span<const PulseEvent> active, double t, const AtomParams& atom,
                         const AssembleOptions& options) {
    HamiltonianSpec spec;
    const std::size_t n = basis.size();
    spec.diagonal.resize(n);
    spec.loss.assign(n, 0.0);
    spec.frame_offset.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        spec.diagonal[i] = state_energy(basis[i], atom, options);
        if (is_excited(basis[i].level)) spec.loss[i] = 0.5 * options.decay_rate;
    }
    for (const auto& e : active) {
        const auto levels = coupled_levels(e);
        bool lower_present = false;
        for (const auto& s : basis.states()) lower_present = lower_present || s.level == levels[0];
        bool upper_present = false;
        for (const auto& s : basis.states()) upper_present = upper_present || s.level == levels[1];
        if (!lower_present || !upper_present)
            fail(ErrorKind::Config, "pulse '" + e.label + "' couples a level that is not in the basis");
        const cplx factor = drive_factor(e, t);
        for (std::size_t i = 0; i < n; ++i) {
            const RecoilState& lower = basis[i];
            if (lower.level != levels[0] || !addresses(e, lower)) continue;
            const auto j = basis.index_of(lower.with_level(levels[1]).shifted(e.axis, e.kick()));
            if (!j) continue;
            spec.couplings.push_back({i, *j, factor});
            spec.couplings.push_back({*j, i, std::conj(factor)});
        }
    }
    const auto offsets = frame_offsets(active);
    for (std::size_t i = 0; i < n; ++i) {
        const auto it = offsets.find(basis[i].level);
        if (it != offsets.end()) spec.frame_offset[i] = it->second;
    }
    return spec;
}

HamiltonianModel::HamiltonianModel(const Basis& basis, std::vector<PulseEvent> events, const AtomParams& atom,
                                   const AssembleOptions& options, bool shift_reference)
    : basis_(basis) {
    const std::size_t n = basis_.size();
    diagonal_.resize(n);
    loss_.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        diagonal_[i] = state_energy(basis_[i], atom, options);
        if (is_excited(basis_[i].level)) loss_[i] = 0.5 * options.decay_rate;
        has_loss_ = has_loss_ || loss_[i] != 0.0;
    }
    if (shift_reference && n > 0) {
        const auto [lo, hi] = std::minmax_element(diagonal_.begin(), diagonal_.end());
        reference_ = 0.5 * (*lo + *hi);
        for (double& d : diagonal_) d -= reference_;
    }
    for (auto& e : events) {
        const auto levels = coupled_levels(e);
        Drive drive{std::move(e), {}};
        for (std::size_t i = 0; i < n; ++i) {
            const RecoilState& lower = basis_[i];
            if (lower.level != levels[0] || !addresses(drive.event, lower)) continue;
            const auto j = basis_.index_of(lower.with_level(levels[1]).shifted(drive.event.axis, drive.event.kick()));
            if (j) drive.terms.push_back({i, *j, diagonal_[*j] - diagonal_[i]});
        }
        term_count_ += drive.terms.size();
        if (!drive.terms.empty()) drives_.push_back(std::move(drive));
    }
}

void HamiltonianModel::use_interaction_picture(double origin) {
    if (has_loss_) fail(ErrorKind::Integration, "the interaction picture does not support excited-state loss");
    origin_ = origin;
    for (auto& c : cache_) c.t = std::numeric_limits<double>::quiet_NaN();
}

const std::vector<cplx>& HamiltonianModel::term_phases(double t) const {
    for (const auto& c : cache_)
        if (c.t == t) return c.factors;
    auto& c = cache_[cache_next_];
    cache_next_ = (cache_next_ + 1) % cache_.size();
    c.t = t;
    c.factors.resize(term_count_);
    const double dt = t - *origin_;
    std::size_t k = 0;
    for (const auto& drive : drives_)
        for (const auto& term : drive.terms) c.factors[k++] = std::polar(1.0, term.frequency * dt);
    return c.factors;
}

void HamiltonianModel::restore(std::span<cplx> x, double elapsed) const {
    if (origin_) {
        for (std::size_t i = 0; i < x.size(); ++i) x[i] *= std::polar(1.0, -(diagonal_[i] + reference_) * elapsed);
    } else if (reference_ != 0.0) {
        const cplx phase = std::polar(1.0, -reference_ * elapsed);
        for (auto& v : x) v *= phase;
    }
}

void HamiltonianModel::apply(double t, std::span<const cplx> x, std::span<cplx> y) const {
    const std::size_t n = diagonal_.size();
    if (origin_) {
        std::fill(y.begin(), y.end(), cplx{});
        const auto& phases = term_phases(t);
        std::size_t k = 0;
        for (const auto& drive : drives_) {
            if (!drive.event.envelope.active(t)) {
                k += drive.terms.size();
                continue;
            }
            const cplx f = drive_factor(drive.event, t);
            for (const auto& term : drive.terms) {
                const cplx g = f * phases[k++];
                y[term.upper] += g * x[term.lower];
                y[term.lower] += std::conj(g) * x[term.upper];
            }
        }
        return;
    }
    if (has_loss_) {
        for (std::size_t i = 0; i < n; ++i) y[i] = cplx(diagonal_[i], -loss_[i]) * x[i];
    } else {
        for (std::size_t i = 0; i < n; ++i) y[i] = diagonal_[i] * x[i];
    }
    for (const auto& drive : drives_) {
        if (!drive.event.envelope.active(t)) continue;
        const cplx f = drive_factor(drive.event, t);
        if (f == cplx{}) continue;
        const cplx fc = std::conj(f);
        for (const auto& term : drive.terms) {
            y[term.upper] += f * x[term.lower];
            y[term.lower] += fc * x[term.upper];
        }
    }
}

double HamiltonianModel::max_element_interaction() const {
    // Couplings plus the fastest residual rotation of any coupled pair.
    double m = 0.0;
    std::map<std::pair<std::size_t, std::size_t>, double> per_pair;
    for (const auto& drive : drives_)
        for (const auto& term : drive.terms) {
            per_pair[{term.lower, term.upper}] += 0.5 * drive.event.envelope.peak;
            m = std::max(m, std::abs(term.frequency - drive.event.detuning));
        }
    for (const auto& [key, v] : per_pair) m = std::max(m, v);
    return m;
}

double HamiltonianModel::max_element() const {
    if (origin_) return max_element_interaction();
    double m = 0.0;
    for (std::size_t i = 0; i < diagonal_.size(); ++i) m = std::max(m, std::abs(cplx(diagonal_[i], loss_[i])));
    // The laser phase of a detuned drive turns at its detuning.
    for (const auto& drive : drives_)
        if (!drive.terms.empty()) m = std::max(m, std::abs(drive.event.detuning));
    // Tones addressing the same pair add up.
    std::map<std::pair<std::size_t, std::size_t>, double> per_pair;
    for (const auto& drive : drives_)
        for (const auto& term : drive.terms) per_pair[{term.lower, term.upper}] += 0.5 * drive.event.envelope.peak;
    for (const auto& [key, v] : per_pair) m = std::max(m, v);
    return m;
}

HamiltonianSpec HamiltonianModel::snapshot(double t) const {
    HamiltonianSpec spec;
    spec.diagonal = diagonal_;
    for (double& d : spec.diagonal) d += reference_;
    spec.loss = loss_;
    spec.frame_offset.assign(diagonal_.size(), 0.0);
    std::vector<PulseEvent> active;
    for (const auto& drive : drives_) {
        if (!drive.event.envelope.active(t)) continue;
        active.push_back(drive.event);
        const cplx f = drive_factor(drive.event, t);
        for (const auto& term : drive.terms) {
            spec.couplings.push_back({term.lower, term.upper, f});
            spec.couplings.push_back({term.upper, term.lower, std::conj(f)});
        }
    }
    const auto offsets = frame_offsets(active);
    for (std::size_t i = 0; i < diagonal_.size(); ++i) {
        const auto it = offsets.find(basis_[i].level);
        if (it != offsets.end()) spec.frame_offset[i] = it->second;
    }
    return spec;
}

} // namespace atomladder
