#include "atomladder/engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <array>
#include <map>
#include <set>
#include <string>

#include "atomladder/errors.hpp"

namespace atomladder {

void free_evolve(WaveFunction& psi, double duration, const AtomParams& atom, const AssembleOptions& physics) {
    if (duration < 0.0) fail(ErrorKind::Integration, "negative free-evolution interval");
    if (duration == 0.0) return;
    WaveFunction out(psi.time() + duration);
    for (const auto& [state, amp] : psi.amplitudes()) {
        const double decay = is_excited(state.level) ? 0.5 * physics.decay_rate * duration : 0.0;
        out.set(state, amp * std::polar(std::exp(-decay), -state_energy(state, atom, physics) * duration));
    }
    psi = std::move(out);
}

namespace {

struct Epoch {
    double start;
    double end;
    std::vector<PulseEvent> events;
};

std::vector<Epoch> split_epochs(const SequencePlan& plan) {
    std::vector<PulseEvent> events = plan.events;
    std::stable_sort(events.begin(), events.end(),
                     [](const PulseEvent& a, const PulseEvent& b) { return a.envelope.start < b.envelope.start; });
    std::vector<Epoch> epochs;
    for (auto& e : events) {
        // Windows that merely touch (up to round-off) start a new epoch.
        const double slack = 1e-9 * e.envelope.duration;
        if (!epochs.empty() && e.envelope.start < epochs.back().end - slack) {
            epochs.back().end = std::max(epochs.back().end, e.envelope.end());
            epochs.back().events.push_back(std::move(e));
        } else {
            epochs.push_back({e.envelope.start, e.envelope.end(), {}});
            epochs.back().events.push_back(std::move(e));
        }
    }
    return epochs;
}

bool addressed(const PulseEvent& e, int lower_momentum) {
    return e.targets.empty() || std::find(e.targets.begin(), e.targets.end(), lower_momentum) != e.targets.end();
}

// States connected to the seeds by at most `hops` couplings of the epoch's
// pulses. States first reached on the last hop form the frontier.
struct Reachable {
    Basis basis;
    std::set<RecoilState> frontier;
};

Reachable reachable(std::span<const RecoilState> seeds, const std::vector<PulseEvent>& events, int hops) {
    std::map<RecoilState, int> depth;
    std::vector<RecoilState> layer(seeds.begin(), seeds.end());
    for (const auto& s : layer) depth.emplace(s, 0);
    std::vector<std::array<Level, 2>> levels;
    for (const auto& e : events) levels.push_back(coupled_levels(e));
    for (int h = 1; h <= hops && !layer.empty(); ++h) {
        std::vector<RecoilState> next;
        const auto visit = [&](const RecoilState& s) {
            if (depth.emplace(s, h).second) next.push_back(s);
        };
        for (const auto& s : layer)
            for (std::size_t k = 0; k < events.size(); ++k) {
                const auto& e = events[k];
                const int n = s.momentum(e.axis);
                if (s.level == levels[k][0] && addressed(e, n))
                    visit(s.with_level(levels[k][1]).shifted(e.axis, e.kick()));
                if (s.level == levels[k][1] && addressed(e, n - e.kick()))
                    visit(s.with_level(levels[k][0]).shifted(e.axis, -e.kick()));
            }
        layer = std::move(next);
    }
    Reachable r;
    std::vector<RecoilState> states;
    states.reserve(depth.size());
    for (const auto& [s, d] : depth) {
        states.push_back(s);
        if (d == hops && hops > 0) r.frontier.insert(s);
    }
    r.basis = Basis(std::move(states));
    return r;
}

WaveFunction run_epoch(const WaveFunction& psi, const Epoch& epoch, const AtomParams& atom, const EngineOptions& options,
                       const StateObserver& observer, int samples, EngineReport* report) {
    const auto seeds = psi.occupied(options.prune_floor);
    // Enough hops for every pulse of the epoch to act once in sequence.
    int hops = std::max(options.guard, static_cast<int>(epoch.events.size()) + 1);
    for (;;) {
        const auto reach = reachable(seeds, epoch.events, hops);
        const Basis& basis = reach.basis;
        if (basis.size() > options.max_states)
            fail(ErrorKind::Integration, "basis of " + std::to_string(basis.size()) +
                                             " states exceeds the configured budget of " +
                                             std::to_string(options.max_states));
        if (report) report->largest_basis = std::max(report->largest_basis, basis.size());

        HamiltonianModel model(basis, epoch.events, atom, options.physics);
        // Resonant Raman epochs are limited by the kinetic spread of the
        // basis, not by the couplings; the interaction picture removes it.
        if (options.physics.decay_rate == 0.0 && model.max_element_interaction() < 0.5 * model.max_element())
            model.use_interaction_picture(epoch.start);
        auto v = psi.to_vector(basis);
        const double span = epoch.end - epoch.start;
        Observer obs;
        int every = 1;
        if (observer && samples > 0) {
            const double dt = options.integrator.dt > 0.0 ? options.integrator.dt : default_time_step(model);
            const long steps = std::max(1L, static_cast<long>(std::ceil(span / dt - 1e-9)));
            every = static_cast<int>(std::max(1L, steps / samples));
            obs = [&](double t, std::span<const cplx> x) {
                // Snapshots are reported in the lab frame.
                std::vector<cplx> tmp(x.begin(), x.end());
                model.restore(tmp, t - epoch.start);
                observer(WaveFunction::from_vector(basis, tmp, t));
            };
        }
        evolve(v, model, epoch.start, epoch.end, options.integrator, obs, every);

        double boundary = 0.0;
        for (std::size_t i = 0; i < basis.size(); ++i)
            if (reach.frontier.count(basis[i])) boundary += std::norm(v[i]);
        if (boundary > options.boundary_tolerance) {
            hops *= 2;
            if (report) ++report->extensions;
            continue;
        }
        auto out = WaveFunction::from_vector(basis, v, epoch.end);
        const double removed = out.prune(options.prune_floor);
        if (report) report->pruned_norm += removed;
        return out;
    }
}

} // namespace

WaveFunction propagate_sequence(WaveFunction psi, const SequencePlan& plan, const AtomParams& atom,
                                const EngineOptions& options, const StateObserver& observer, int samples_per_epoch,
                                EngineReport* report) {
    const auto epochs = split_epochs(plan);
    if (!epochs.empty() && psi.time() > epochs.front().start + 1e-15)
        fail(ErrorKind::Config, "wavefunction time lies after the first pulse of the sequence");
    for (const auto& epoch : epochs) {
        free_evolve(psi, std::max(0.0, epoch.start - psi.time()), atom, options.physics);
        psi.set_time(epoch.start);
        psi = run_epoch(psi, epoch, atom, options, observer, samples_per_epoch, report);
        if (report) ++report->epochs;
    }
    const double end = plan.end_time();
    if (end > psi.time()) free_evolve(psi, end - psi.time(), atom, options.physics);
    psi.set_time(std::max(end, psi.time()));
    return psi;
}

} // namespace atomladder
