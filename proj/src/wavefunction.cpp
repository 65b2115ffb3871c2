#include "atomladder/wavefunction.hpp"

#include <algorithm>
#include <cmath>

#include "atomladder/errors.hpp"

namespace atomladder {

WaveFunction WaveFunction::single(const RecoilState& s, double time) {
    WaveFunction psi(time);
    psi.set(s, 1.0);
    return psi;
}

WaveFunction WaveFunction::from_vector(const Basis& basis, std::span<const cplx> amplitudes, double time) {
    WaveFunction psi(time);
    for (std::size_t i = 0; i < basis.size(); ++i)
        if (amplitudes[i] != cplx{}) psi.amplitudes_.emplace(basis[i], amplitudes[i]);
    return psi;
}

std::vector<cplx> WaveFunction::to_vector(const Basis& basis) const {
    std::vector<cplx> out(basis.size());
    for (const auto& [state, amp] : amplitudes_) {
        const auto idx = basis.index_of(state);
        if (!idx) fail(ErrorKind::Config, "wavefunction component lies outside the propagation basis");
        out[*idx] = amp;
    }
    return out;
}

cplx WaveFunction::amplitude(const RecoilState& s) const {
    const auto it = amplitudes_.find(s);
    return it == amplitudes_.end() ? cplx{} : it->second;
}

void WaveFunction::set(const RecoilState& s, cplx value) {
    if (value == cplx{})
        amplitudes_.erase(s);
    else
        amplitudes_[s] = value;
}

void WaveFunction::add(const RecoilState& s, cplx value) { amplitudes_[s] += value; }

double WaveFunction::norm_squared() const {
    double sum = 0.0;
    for (const auto& [state, amp] : amplitudes_) sum += std::norm(amp);
    return sum;
}

double WaveFunction::prune(double floor) {
    double removed = 0.0;
    for (auto it = amplitudes_.begin(); it != amplitudes_.end();) {
        const double p = std::norm(it->second);
        if (p < floor) {
            removed += p;
            it = amplitudes_.erase(it);
        } else {
            ++it;
        }
    }
    return removed;
}

std::vector<RecoilState> WaveFunction::occupied(double floor) const {
    std::vector<RecoilState> out;
    for (const auto& [state, amp] : amplitudes_)
        if (std::norm(amp) > floor) out.push_back(state);
    return out;
}

WaveFunction& WaveFunction::operator*=(cplx factor) {
    for (auto& [state, amp] : amplitudes_) amp *= factor;
    return *this;
}

MomentumObservables observables(const WaveFunction& psi, std::span<const Level> filter, Axis axis) {
    double pop = 0.0, first = 0.0, second = 0.0;
    for (const auto& [state, amp] : psi.amplitudes()) {
        if (std::find(filter.begin(), filter.end(), state.level) == filter.end()) continue;
        const double p = std::norm(amp);
        const double n = state.momentum(axis);
        pop += p;
        first += p * n;
        second += p * n * n;
    }
    MomentumObservables out;
    out.population = pop;
    if (pop > 0.0) {
        const double mean = first / pop;
        out.mean = mean;
        out.spread = std::sqrt(std::max(0.0, second / pop - mean * mean));
    }
    return out;
}

WaveFunction dark_state(double g_plus, double g_minus, int n_origin, int direction, double time) {
    if (g_plus == 0.0 && g_minus == 0.0)
        fail(ErrorKind::Degenerate, "dark state undefined when both Rabi frequencies vanish");
    if (direction != 1 && direction != -1) fail(ErrorKind::Config, "dark state direction must be +1 or -1");
    const double norm = std::hypot(g_plus, g_minus);
    WaveFunction psi(time);
    psi.set({Level::A, n_origin, 0}, g_minus / norm);
    psi.set({Level::B, n_origin + 2 * direction, 0}, -g_plus / norm);
    return psi;
}

} // namespace atomladder
