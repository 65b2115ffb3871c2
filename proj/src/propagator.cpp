#include "atomladder/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "atomladder/errors.hpp"

namespace atomladder {

namespace {
const double kSqrt3 = std::sqrt(3.0);
const double kC1 = 0.5 - kSqrt3 / 6.0;
const double kC2 = 0.5 + kSqrt3 / 6.0;
const double kA11 = 0.25;
const double kA12 = 0.25 - kSqrt3 / 6.0;
const double kA21 = 0.25 + kSqrt3 / 6.0;
const double kA22 = 0.25;
constexpr cplx kMinusI{0.0, -1.0};
} // namespace

double default_time_step(const HamiltonianModel& model) {
    const double m = model.max_element();
    if (m <= 0.0) return 1.0; // nothing to resolve; callers cap at the interval length
    return 1.0 / (kDefaultStepFactor * m);
}

void check_time_step(const HamiltonianModel& model, double dt) {
    if (!(dt > 0.0)) fail(ErrorKind::Integration, "time step must be positive");
    const double bound = dt * model.max_element();
    if (bound > kStabilityBound) {
        std::ostringstream os;
        os << "time step " << dt << " s violates dt*max|H| <= " << kStabilityBound << " (got " << bound
           << "); suggested dt = " << default_time_step(model) << " s";
        fail(ErrorKind::Integration, os.str());
    }
}

Propagator::Propagator(const HamiltonianModel& model, double dt, const IntegratorOptions& options)
    : model_(model), dt_(dt), options_(options) {
    check_time_step(model, dt);
    const std::size_t n = model.size();
    k1_.resize(n);
    k2_.resize(n);
    k3_.resize(n);
    k4_.resize(n);
    y1_.resize(n);
    y2_.resize(n);
}

void Propagator::rhs(double t, std::span<const cplx> x, std::span<cplx> y) const {
    model_.apply(t, x, y);
    for (auto& v : y) v *= kMinusI;
}

void Propagator::step(std::span<cplx> psi, double t) {
    if (options_.scheme == Scheme::GaussLegendre4)
        step_gauss(psi, t);
    else
        step_rk4(psi, t);
}

void Propagator::step_gauss(std::span<cplx> psi, double t) {
    const std::size_t n = psi.size();
    const double h = dt_;
    const double t1 = t + kC1 * h;
    const double t2 = t + kC2 * h;
    // Slopes of the previous step predict the stages as well as a fresh
    // evaluation at psi does, and cost nothing.
    if (!warm_) {
        rhs(t1, psi, k1_);
        rhs(t2, psi, k2_);
        warm_ = true;
    }
    const double tol2 = options_.tolerance * options_.tolerance / (h * h);
    double previous = std::numeric_limits<double>::infinity();
    for (int it = 0;; ++it) {
        for (std::size_t i = 0; i < n; ++i) {
            y1_[i] = psi[i] + h * (kA11 * k1_[i] + kA12 * k2_[i]);
            y2_[i] = psi[i] + h * (kA21 * k1_[i] + kA22 * k2_[i]);
        }
        rhs(t1, y1_, k3_);
        rhs(t2, y2_, k4_);
        double change2 = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            change2 = std::max({change2, std::norm(k3_[i] - k1_[i]), std::norm(k4_[i] - k2_[i])});
        std::swap(k1_, k3_);
        std::swap(k2_, k4_);
        if (change2 <= tol2) break;
        const double change = h * std::sqrt(change2);
        // Stalled at round-off level.
        if (change >= previous && change < 1e-13) break;
        previous = change;
        if (it + 1 >= options_.max_iterations) {
            if (change < 1e-11) break;
            fail(ErrorKind::Integration, "implicit stage iteration did not converge; reduce dt");
        }
    }
    for (std::size_t i = 0; i < n; ++i) psi[i] += 0.5 * h * (k1_[i] + k2_[i]);
}

void Propagator::step_rk4(std::span<cplx> psi, double t) {
    const std::size_t n = psi.size();
    const double h = dt_;
    rhs(t, psi, k1_);
    for (std::size_t i = 0; i < n; ++i) y1_[i] = psi[i] + 0.5 * h * k1_[i];
    rhs(t + 0.5 * h, y1_, k2_);
    for (std::size_t i = 0; i < n; ++i) y1_[i] = psi[i] + 0.5 * h * k2_[i];
    rhs(t + 0.5 * h, y1_, k3_);
    for (std::size_t i = 0; i < n; ++i) y1_[i] = psi[i] + h * k3_[i];
    rhs(t + h, y1_, k4_);
    for (std::size_t i = 0; i < n; ++i) psi[i] += h / 6.0 * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
}

void evolve(std::vector<cplx>& psi, const HamiltonianModel& model, double t0, double t1,
            const IntegratorOptions& options, const Observer& observer, int observe_every) {
    const double span = t1 - t0;
    if (span < 0.0) fail(ErrorKind::Integration, "cannot evolve backwards in time");
    if (span == 0.0) return;
    const double requested = options.dt > 0.0 ? options.dt : default_time_step(model);
    const auto steps = static_cast<long>(std::ceil(span / requested - 1e-9));
    const double dt = span / static_cast<double>(std::max(1L, steps));
    if (model.interaction() && t0 != model.origin())
        fail(ErrorKind::Integration, "interaction-picture evolution must start at the frame origin");
    Propagator prop(model, dt, options);
    for (long s = 0; s < steps; ++s) {
        const double t = t0 + dt * static_cast<double>(s);
        prop.step(psi, t);
        if (observer && (observe_every <= 1 || (s + 1) % observe_every == 0 || s + 1 == steps))
            observer(t + dt, psi);
    }
    model.restore(psi, span);
}

WaveFunction step(const WaveFunction& psi, const HamiltonianModel& model, double dt, const IntegratorOptions& options) {
    auto v = psi.to_vector(model.basis());
    Propagator prop(model, dt, options);
    if (model.interaction() && psi.time() != model.origin())
        fail(ErrorKind::Integration, "interaction-picture step must start at the frame origin");
    prop.step(v, psi.time());
    model.restore(v, dt);
    return WaveFunction::from_vector(model.basis(), v, psi.time() + dt);
}

} // namespace atomladder
