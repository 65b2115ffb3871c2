#pragma once

#include <array>
#include <complex>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "atomladder/basis.hpp"
#include "atomladder/pulses.hpp"

namespace atomladder {

using cplx = std::complex<double>;

// omega_r (n_z^2 + n_x^2), rad/s.
double kinetic_term(const RecoilState& state, const AtomParams& atom);

// Energy offsets (rad/s) added to the diagonal on top of the kinetic term.
struct AssembleOptions {
    double c_offset = 0.0;         // residual a/c clock detuning seen by every pulse (Ramsey Delta)
    double excited_detuning = 0.0; // single-photon detuning of E1/E2
    double decay_rate = 0.0;       // Gamma of the excited levels; adds -i Gamma/2
    bool kinetic = true;           // false zeroes the kinetic term (test aid)
};

// Level energy (without kinetics) used both by the Hamiltonian diagonal and
// by analytic free flight.
double level_offset(Level level, const AssembleOptions& options);
double state_energy(const RecoilState& state, const AtomParams& atom, const AssembleOptions& options);

struct Coupling {
    std::size_t from = 0;
    std::size_t to = 0;
    cplx value; // H[to][from]
};

// Snapshot of H(t) on a basis. Couplings are stored in both directions.
struct HamiltonianSpec {
    std::vector<double> diagonal;     // rad/s
    std::vector<double> loss;         // Gamma/2 per state, enters as -i loss
    std::vector<Coupling> couplings;
    std::vector<double> frame_offset; // per-state offset of the rotating frame of the active pulses

    std::size_t size() const { return diagonal.size(); }
    bool is_hermitian() const;
    double max_element() const;
    double rotated_diagonal(std::size_t i) const { return diagonal[i] - frame_offset[i]; }
    // y = H x
    void apply(std::span<const cplx> x, std::span<cplx> y) const;
};

HamiltonianSpec assemble(const Basis& basis, std::span<const PulseEvent> active, double t, const AtomParams& atom,
                         const AssembleOptions& options = {});

// Time-dependent Hamiltonian on a fixed basis: coupling structure is resolved
// once, only envelope values and laser phases are evaluated per call.
// A constant reference energy is subtracted from the diagonal; evolve() puts
// the corresponding global phase back.
class HamiltonianModel {
public:
    HamiltonianModel(const Basis& basis, std::vector<PulseEvent> events, const AtomParams& atom,
                     const AssembleOptions& options = {}, bool shift_reference = true);

    const Basis& basis() const { return basis_; }
    std::size_t size() const { return diagonal_.size(); }
    double reference_energy() const { return reference_; }

    // Switches to the interaction picture of the diagonal, with the frame
    // fixed at `origin`: the state carries exp(+i D (t - origin)) and only
    // couplings remain. Not available with excited-state loss.
    void use_interaction_picture(double origin);
    bool interaction() const { return origin_.has_value(); }
    double origin() const { return origin_.value_or(0.0); }

    // y = (H(t) - reference) x, or the interaction-picture coupling.
    void apply(double t, std::span<const cplx> x, std::span<cplx> y) const;

    // Upper bound on max |H_ij| over the model's time span, in the current picture.
    double max_element() const;
    // Same bound as it would be in the interaction picture.
    double max_element_interaction() const;

    // Converts a state evolved for `elapsed` seconds from the picture back to
    // the lab frame (restores the reference phase or the diagonal phases).
    void restore(std::span<cplx> x, double elapsed) const;

    HamiltonianSpec snapshot(double t) const;

private:
    struct Term {
        std::size_t lower;
        std::size_t upper;
        double frequency = 0.0; // diagonal(upper) - diagonal(lower)
    };
    struct PhaseCache {
        double t = std::numeric_limits<double>::quiet_NaN();
        std::vector<cplx> factors; // one per term of every drive
    };
    const std::vector<cplx>& term_phases(double t) const;
    struct Drive {
        PulseEvent event;
        std::vector<Term> terms;
    };

    Basis basis_;
    std::vector<double> diagonal_;
    std::vector<double> loss_;
    std::vector<Drive> drives_;
    double reference_ = 0.0;
    bool has_loss_ = false;
    std::optional<double> origin_;
    std::size_t term_count_ = 0;
    // Gauss-Legendre evaluates two stage times per step many times over.
    mutable std::array<PhaseCache, 2> cache_;
    mutable std::size_t cache_next_ = 0;
};

} // namespace atomladder
