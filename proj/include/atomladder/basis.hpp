#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "atomladder/atom.hpp"

namespace atomladder {

// Internal level plus momentum in integer recoil units along z and x.
struct RecoilState {
    Level level = Level::A;
    int nz = 0;
    int nx = 0;

    int momentum(Axis axis) const { return axis == Axis::Z ? nz : nx; }
    RecoilState shifted(Axis axis, int dn) const {
        RecoilState s = *this;
        (axis == Axis::Z ? s.nz : s.nx) += dn;
        return s;
    }
    RecoilState with_level(Level l) const {
        RecoilState s = *this;
        s.level = l;
        return s;
    }

    auto operator<=>(const RecoilState&) const = default;
};

// Closed integer interval [lo, hi].
struct Window {
    int lo = 0;
    int hi = -1;

    bool empty() const { return hi < lo; }
    std::size_t size() const { return empty() ? 0 : static_cast<std::size_t>(hi - lo + 1); }
    bool contains(int n) const { return n >= lo && n <= hi; }
};

// Ordered set of recoil states: sorted by level tag, then n_z, then n_x.
class Basis {
public:
    Basis() = default;
    explicit Basis(std::vector<RecoilState> states);

    std::size_t size() const { return states_.size(); }
    const RecoilState& operator[](std::size_t i) const { return states_[i]; }
    std::span<const RecoilState> states() const { return states_; }
    std::optional<std::size_t> index_of(const RecoilState& s) const;
    bool contains(const RecoilState& s) const { return index_of(s).has_value(); }

private:
    static std::uint64_t key(const RecoilState& s);

    std::vector<RecoilState> states_;
    std::unordered_map<std::uint64_t, std::size_t> index_;
};

// Rectangular basis: every level crossed with every (n_z, n_x) in the windows.
Basis build_basis(std::span<const Level> levels, Window window_z, Window window_x);

// Union of guard neighbourhoods: for each seed state, every level in
// `levels` at momenta within `guard` of the seed along the driven axes
// (the other axis is held at the seed's value).
Basis neighbourhood_basis(std::span<const RecoilState> seeds, std::span<const Level> levels,
                          int guard, bool drive_z, bool drive_x);

} // namespace atomladder
