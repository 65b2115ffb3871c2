#include "atomladder/atom.hpp"

#include <cmath>
#include <string>

#include "atomladder/errors.hpp"

namespace atomladder {

std::string_view to_string(Level level) { return level_info(level).name; }

Level level_from_string(std::string_view name) {
    for (Level level : kAllLevels) {
        if (level_info(level).name == name) return level;
    }
    if (name.size() == 1) {
        switch (name[0]) {
        case 'A': return Level::A;
        case 'B': return Level::B;
        case 'C': return Level::C;
        default: break;
        }
    }
    fail(ErrorKind::Config, "unknown internal level '" + std::string(name) + "'");
}

std::string_view to_string(Axis axis) { return axis == Axis::Z ? "z" : "x"; }

Axis axis_from_string(std::string_view name) {
    if (name == "z" || name == "Z") return Axis::Z;
    if (name == "x" || name == "X") return Axis::X;
    fail(ErrorKind::Config, "unknown axis '" + std::string(name) + "' (expected z or x)");
}

void AtomParams::validate() const {
    const auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
    if (!positive(mass)) fail(ErrorKind::Config, "atom mass must be positive");
    if (!positive(wavelength_d1) || !positive(wavelength_d2) || !positive(nominal_wavelength))
        fail(ErrorKind::Config, "wavelengths must be positive");
    if (!positive(gravity)) fail(ErrorKind::Config, "gravity must be positive");
}

} // namespace atomladder
