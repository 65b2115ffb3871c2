#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace atomladder {

namespace constants {
inline constexpr double pi = 3.14159265358979323846;
inline constexpr double hbar = 1.054571817e-34;        // J s
inline constexpr double atomic_mass_unit = 1.66053906660e-27; // kg
inline constexpr double standard_gravity = 9.80665;     // m/s^2
} // namespace constants

// Internal levels retained by the model. A, B, C are ground sublevels,
// E1 the D1 intermediate used by the adiabatic Lambda system, E2 an
// effective D2 intermediate.
enum class Level : std::uint8_t { A = 0, B = 1, C = 2, E1 = 3, E2 = 4 };

inline constexpr std::array<Level, 5> kAllLevels{Level::A, Level::B, Level::C, Level::E1, Level::E2};

enum class Manifold : std::uint8_t { Ground, D1Excited, D2Excited };

struct LevelInfo {
    int F;
    int mF;
    Manifold manifold;
    std::string_view name;
};

constexpr LevelInfo level_info(Level level) {
    switch (level) {
    case Level::A: return {1, 1, Manifold::Ground, "a"};
    case Level::B: return {1, -1, Manifold::Ground, "b"};
    case Level::C: return {2, 1, Manifold::Ground, "c"};
    case Level::E1: return {1, 0, Manifold::D1Excited, "e1"};
    case Level::E2: return {2, 1, Manifold::D2Excited, "e2"};
    }
    return {0, 0, Manifold::Ground, "?"};
}

constexpr bool is_excited(Level level) { return level_info(level).manifold != Manifold::Ground; }

std::string_view to_string(Level level);
Level level_from_string(std::string_view name);

enum class Axis : std::uint8_t { Z, X };

std::string_view to_string(Axis axis);
Axis axis_from_string(std::string_view name);

enum class Line : std::uint8_t { D1, D2 };

// Species parameters in SI units. Derived quantities are always computed
// from the stored fields. The recoil lattice uses the D2 wavenumber for every
// photon; the D1/D2 recoil difference is neglected.
struct AtomParams {
    double mass = 86.909180527 * constants::atomic_mass_unit;
    double wavelength_d1 = 794.979e-9;
    double wavelength_d2 = 780.241e-9;
    double nominal_wavelength = 800e-9;
    double gravity = constants::standard_gravity;

    static AtomParams rubidium87() { return {}; }

    void validate() const;

    double wavelength(Line line) const { return line == Line::D1 ? wavelength_d1 : wavelength_d2; }
    double wavenumber(Line line) const { return 2.0 * constants::pi / wavelength(line); }
    double recoil_velocity(Line line) const { return constants::hbar * wavenumber(line) / mass; }
    double recoil_frequency(Line line) const {
        const double k = wavenumber(line);
        return constants::hbar * k * k / (2.0 * mass);
    }

    // Lattice quantities (one recoil unit = hbar * k_D2).
    double lattice_wavelength() const { return wavelength_d2; }
    double wavenumber() const { return wavenumber(Line::D2); }
    double recoil_velocity() const { return recoil_velocity(Line::D2); }
    double recoil_frequency() const { return recoil_frequency(Line::D2); }
};

} // namespace atomladder
