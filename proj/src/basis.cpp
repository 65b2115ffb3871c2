#include "atomladder/basis.hpp"

#include <algorithm>
#include <set>

#include "atomladder/errors.hpp"

namespace atomladder {

Basis::Basis(std::vector<RecoilState> states) : states_(std::move(states)) {
    std::sort(states_.begin(), states_.end());
    states_.erase(std::unique(states_.begin(), states_.end()), states_.end());
    index_.reserve(states_.size());
    for (std::size_t i = 0; i < states_.size(); ++i) index_.emplace(key(states_[i]), i);
}

std::uint64_t Basis::key(const RecoilState& s) {
    const auto nz = static_cast<std::uint64_t>(static_cast<std::uint32_t>(s.nz + (1 << 23)) & 0xFFFFFFu);
    const auto nx = static_cast<std::uint64_t>(static_cast<std::uint32_t>(s.nx + (1 << 23)) & 0xFFFFFFu);
    return (static_cast<std::uint64_t>(s.level) << 48) | (nz << 24) | nx;
}

std::optional<std::size_t> Basis::index_of(const RecoilState& s) const {
    const auto it = index_.find(key(s));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

Basis build_basis(std::span<const Level> levels, Window window_z, Window window_x) {
    if (levels.empty()) fail(ErrorKind::Config, "basis needs at least one internal level");
    if (window_z.empty() || window_x.empty()) fail(ErrorKind::Config, "basis momentum window is empty");
    std::vector<RecoilState> states;
    states.reserve(levels.size() * window_z.size() * window_x.size());
    for (Level level : levels)
        for (int nz = window_z.lo; nz <= window_z.hi; ++nz)
            for (int nx = window_x.lo; nx <= window_x.hi; ++nx) states.push_back({level, nz, nx});
    return Basis(std::move(states));
}

Basis neighbourhood_basis(std::span<const RecoilState> seeds, std::span<const Level> levels, int guard,
                          bool drive_z, bool drive_x) {
    if (levels.empty()) fail(ErrorKind::Config, "basis needs at least one internal level");
    if (guard < 0) fail(ErrorKind::Config, "guard band must be non-negative");
    std::set<RecoilState> states;
    const int gz = drive_z ? guard : 0;
    const int gx = drive_x ? guard : 0;
    for (const RecoilState& seed : seeds) {
        states.insert(seed);
        for (Level level : levels)
            for (int dz = -gz; dz <= gz; ++dz)
                for (int dx = -gx; dx <= gx; ++dx) states.insert({level, seed.nz + dz, seed.nx + dx});
    }
    return Basis(std::vector<RecoilState>(states.begin(), states.end()));
}

} // namespace atomladder
