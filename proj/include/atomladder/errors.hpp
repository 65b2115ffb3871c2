#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace atomladder {

// Every failure the library can raise. The CLI maps each kind to its own
// exit code, see exit_code().
enum class ErrorKind {
    Config,        // bad or inconsistent input parameters
    Degenerate,    // mathematically degenerate input (e.g. both Rabi frequencies zero)
    Integration,   // time step violates the stability bound, basis budget exceeded
    Adiabaticity,  // pulse pair too short / too weak for adiabatic following
    Selectivity,   // spatially selective pulse would hit an unintended arm
    Physics,       // physically meaningless request (interfering distinguishable arms)
    NoFringe,      // no fringe peak above background
    Normalization, // pattern values outside [-1, 1]
    Io,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::Config: return "config";
    case ErrorKind::Degenerate: return "degenerate-input";
    case ErrorKind::Integration: return "integration";
    case ErrorKind::Adiabaticity: return "adiabaticity";
    case ErrorKind::Selectivity: return "selectivity";
    case ErrorKind::Physics: return "physics";
    case ErrorKind::NoFringe: return "no-fringe";
    case ErrorKind::Normalization: return "normalization";
    case ErrorKind::Io: return "io";
    }
    return "unknown";
}

// Process exit codes. 0 is success, 1 is reserved for unexpected exceptions,
// 9 for warnings promoted to errors by --strict.
inline int exit_code(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::Config: return 2;
    case ErrorKind::Degenerate: return 3;
    case ErrorKind::Integration: return 4;
    case ErrorKind::Adiabaticity: return 5;
    case ErrorKind::Selectivity: return 6;
    case ErrorKind::Physics: return 7;
    case ErrorKind::NoFringe: return 8;
    case ErrorKind::Normalization: return 10;
    case ErrorKind::Io: return 11;
    }
    return 1;
}

inline constexpr int kStrictWarningExitCode = 9;

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

} // namespace atomladder
