#pragma once

#include <complex>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "atomladder/basis.hpp"

namespace atomladder {

using cplx = std::complex<double>;

inline constexpr double kDefaultPruneFloor = 1e-14;

// Sparse pure state on the recoil lattice.
class WaveFunction {
public:
    WaveFunction() = default;
    explicit WaveFunction(double time) : time_(time) {}

    static WaveFunction single(const RecoilState& s, double time = 0.0);
    static WaveFunction from_vector(const Basis& basis, std::span<const cplx> amplitudes, double time);

    std::vector<cplx> to_vector(const Basis& basis) const;

    cplx amplitude(const RecoilState& s) const;
    void set(const RecoilState& s, cplx value);
    void add(const RecoilState& s, cplx value);

    double norm_squared() const;
    double population(const RecoilState& s) const { return std::norm(amplitude(s)); }

    // Drops components with |amp|^2 below floor; returns the removed norm.
    double prune(double floor = kDefaultPruneFloor);

    std::vector<RecoilState> occupied(double floor = 0.0) const;

    double time() const { return time_; }
    void set_time(double t) { time_ = t; }

    const std::map<RecoilState, cplx>& amplitudes() const { return amplitudes_; }
    std::size_t size() const { return amplitudes_.size(); }

    WaveFunction& operator*=(cplx factor);

private:
    std::map<RecoilState, cplx> amplitudes_;
    double time_ = 0.0;
};

struct MomentumObservables {
    double population = 0.0;
    std::optional<double> mean;   // undefined when population is zero
    std::optional<double> spread; // standard deviation, in recoils
};

MomentumObservables observables(const WaveFunction& psi, std::span<const Level> filter, Axis axis);

// Normalised g_minus |a, n> - g_plus |b, n + 2 direction> on the z axis.
WaveFunction dark_state(double g_plus, double g_minus, int n_origin, int direction, double time = 0.0);

} // namespace atomladder
