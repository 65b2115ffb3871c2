#pragma once

#include <cstddef>
#include <functional>

#include "atomladder/propagator.hpp"
#include "atomladder/pulses.hpp"
#include "atomladder/wavefunction.hpp"

namespace atomladder {

struct EngineOptions {
    AssembleOptions physics;
    IntegratorOptions integrator;
    int guard = 3;                     // minimum number of coupling hops explored from occupied states
    double boundary_tolerance = 1e-10; // population allowed on the outermost hop before extending
    double prune_floor = kDefaultPruneFloor;
    std::size_t max_states = 200000;   // basis budget per epoch
};

struct EngineReport {
    double pruned_norm = 0.0;
    int extensions = 0;
    std::size_t largest_basis = 0;
    long epochs = 0;
    double bypassed_norm = 0.0; // population flown past pulses, summed over stages (see InterferometerConfig)
};

using StateObserver = std::function<void(const WaveFunction&)>;

// Exact free evolution (diagonal phases and excited-state loss) for `duration`.
void free_evolve(WaveFunction& psi, double duration, const AtomParams& atom, const AssembleOptions& physics);

// Runs every pulse of the plan. Pulses are grouped into epochs of
// overlapping windows; each epoch is integrated on the states its pulses
// connect to the occupied ones within a number of hops, doubled while the
// outermost hop carries population. The state is returned at plan.end_time().
// The observer, when given, sees `samples_per_epoch` snapshots per epoch.
WaveFunction propagate_sequence(WaveFunction psi, const SequencePlan& plan, const AtomParams& atom,
                                const EngineOptions& options = {}, const StateObserver& observer = {},
                                int samples_per_epoch = 0, EngineReport* report = nullptr);

} // namespace atomladder
