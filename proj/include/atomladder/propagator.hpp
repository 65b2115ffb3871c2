#pragma once

#include <functional>
#include <span>
#include <vector>

#include "atomladder/hamiltonian.hpp"
#include "atomladder/wavefunction.hpp"

namespace atomladder {

enum class Scheme {
    GaussLegendre4, // two-stage collocation, norm-preserving; stages solved by fixed-point iteration
    RungeKutta4,    // classical explicit RK4
};

inline constexpr double kStabilityBound = 0.1;   // dt * max|H_ij| must not exceed this
inline constexpr double kDefaultStepFactor = 20; // default dt = 1 / (20 max|H_ij|)

struct IntegratorOptions {
    Scheme scheme = Scheme::GaussLegendre4;
    double dt = 0.0; // 0: default_time_step()
    double tolerance = 1e-13;
    int max_iterations = 80;
};

double default_time_step(const HamiltonianModel& model);

// Throws ErrorKind::Integration (with a suggested dt) if dt violates the stability bound.
void check_time_step(const HamiltonianModel& model, double dt);

class Propagator {
public:
    Propagator(const HamiltonianModel& model, double dt, const IntegratorOptions& options = {});

    // Advances psi from t to t + dt under H - reference.
    void step(std::span<cplx> psi, double t);

    double dt() const { return dt_; }

private:
    void step_gauss(std::span<cplx> psi, double t);
    void step_rk4(std::span<cplx> psi, double t);
    // y = -i (H(t) - ref) x
    void rhs(double t, std::span<const cplx> x, std::span<cplx> y) const;

    const HamiltonianModel& model_;
    double dt_;
    IntegratorOptions options_;
    std::vector<cplx> k1_, k2_, k3_, k4_, y1_, y2_;
    bool warm_ = false; // k1_, k2_ hold the previous step's stage slopes
};

using Observer = std::function<void(double t, std::span<const cplx> psi)>;

// Integrates psi over [t0, t1] with equal steps no longer than the requested
// dt. The reference-energy phase is restored at the end. The observer (if
// any) sees every `observe_every`-th step and the final state.
void evolve(std::vector<cplx>& psi, const HamiltonianModel& model, double t0, double t1,
            const IntegratorOptions& options = {}, const Observer& observer = {}, int observe_every = 1);

// Single step on a sparse wavefunction; the model's basis must contain every
// occupied state.
WaveFunction step(const WaveFunction& psi, const HamiltonianModel& model, double dt,
                  const IntegratorOptions& options = {});

} // namespace atomladder
