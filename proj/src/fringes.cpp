#include "atomladder/fringes.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <sstream>
#include <thread>

#include <fftw3.h>

#include "atomladder/errors.hpp"
#include "atomladder/pgm.hpp"

namespace atomladder {

std::vector<FringeArm> fringe_arms(const ArmState& state, double cloud_size) {
    const ArmTrack* seed = nullptr;
    for (const auto& arm : state.arms)
        if (!seed || arm.population() > seed->population()) seed = &arm;
    std::vector<FringeArm> out;
    if (!seed) return out;
    for (const auto& arm : state.arms) {
        const double d = std::hypot(arm.position.x - seed->position.x, arm.position.y - seed->position.y,
                                    arm.position.z - seed->position.z);
        if (d > cloud_size || arm.population() < kSignificantPopulation) continue;
        out.push_back({arm.amplitude, arm.state.nz, arm.state.nx, 0.0, arm.state.level});
    }
    return out;
}

double CoherenceEnvelope::factor(double r) const {
    if (!(length > 0.0)) fail(ErrorKind::Config, "coherence length must be positive");
    return std::exp(-0.5 * (r / length) * (r / length));
}

FringePattern synthesize(const std::vector<FringeArm>& arms, const GridSpec& grid, const AtomParams& atom,
                         const CoherenceEnvelope& envelope, int threads) {
    if (grid.nz < 1 || grid.nx < 1) fail(ErrorKind::Config, "fringe grid needs at least one sample per axis");
    if (!(grid.pitch > 0.0)) fail(ErrorKind::Config, "fringe grid pitch must be positive");
    if (arms.empty()) fail(ErrorKind::Physics, "no arms to interfere");
    for (const auto& a : arms)
        if (a.level != arms.front().level)
            fail(ErrorKind::Physics, "arms in levels " + std::string(to_string(arms.front().level)) + " and " +
                                         std::string(to_string(a.level)) +
                                         " are distinguishable and cannot interfere");
    envelope.factor(0.0);

    FringePattern p;
    p.rows = grid.nx;
    p.cols = grid.nz;
    p.pitch = grid.pitch;
    p.samples.assign(static_cast<std::size_t>(p.rows) * p.cols, 0.0);
    const double k = atom.wavenumber();
    double incoherent = 0.0;
    for (const auto& a : arms) incoherent += std::norm(a.amplitude);
    if (!(incoherent > 0.0)) fail(ErrorKind::Degenerate, "every arm has zero amplitude");
    std::vector<cplx> base(arms.size());
    for (std::size_t j = 0; j < arms.size(); ++j) base[j] = arms[j].amplitude * std::polar(1.0, arms[j].phase);

    const auto fill_rows = [&](int first, int last) {
        std::vector<cplx> row_amp(arms.size());
        for (int r = first; r < last; ++r) {
            const double x = p.x(r);
            for (std::size_t j = 0; j < arms.size(); ++j) row_amp[j] = base[j] * std::polar(1.0, k * arms[j].nx * x);
            for (int c = 0; c < p.cols; ++c) {
                const double z = p.z(c);
                cplx sum{0.0, 0.0};
                for (std::size_t j = 0; j < arms.size(); ++j) sum += row_amp[j] * std::polar(1.0, k * arms[j].nz * z);
                // Coherent part |sum|^2 - incoherent is the cross-term sum.
                const double gamma = envelope.factor(std::hypot(x, z));
                p.samples[static_cast<std::size_t>(r) * p.cols + c] =
                    std::max(0.0, incoherent + gamma * (std::norm(sum) - incoherent));
            }
        }
    };
    const int workers = std::clamp(threads, 1, p.rows);
    if (workers == 1) {
        fill_rows(0, p.rows);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back(fill_rows, p.rows * w / workers, p.rows * (w + 1) / workers);
        for (auto& t : pool) t.join();
    }
    const double peak = *std::max_element(p.samples.begin(), p.samples.end());
    if (peak > 0.0)
        for (auto& v : p.samples) v /= peak;
    return p;
}

Spacing extract_spacing(const FringePattern& pattern, Axis axis) {
    const bool along_z = axis == Axis::Z;
    const int n = along_z ? pattern.cols : pattern.rows;
    const int lines = along_z ? pattern.rows : pattern.cols;
    if (n < 4) fail(ErrorKind::NoFringe, "pattern has too few samples along " + std::string(to_string(axis)));
    const int bins = n / 2 + 1;

    std::vector<double> power(bins, 0.0);
    double* in = fftw_alloc_real(n);
    fftw_complex* out = fftw_alloc_complex(bins);
    fftw_plan plan = fftw_plan_dft_r2c_1d(n, in, out, FFTW_ESTIMATE);
    for (int l = 0; l < lines; ++l) {
        for (int i = 0; i < n; ++i) in[i] = along_z ? pattern.at(l, i) : pattern.at(i, l);
        fftw_execute(plan);
        for (int b = 0; b < bins; ++b) power[b] += out[b][0] * out[b][0] + out[b][1] * out[b][1];
    }
    fftw_destroy_plan(plan);
    fftw_free(in);
    fftw_free(out);

    std::vector<double> ac(power.begin() + 1, power.end());
    const auto peak_it = std::max_element(ac.begin(), ac.end());
    const int bin = static_cast<int>(peak_it - ac.begin()) + 1;
    const double peak = *peak_it;
    std::nth_element(ac.begin(), ac.begin() + ac.size() / 2, ac.end());
    const double background = ac[ac.size() / 2];
    std::ostringstream os;
    if (!(peak > 5.0 * background) || !(peak > 1e-12 * power[0])) {
        os << "no spatial-frequency peak above 5x background along " << to_string(axis);
        fail(ErrorKind::NoFringe, os.str());
    }
    if (bin < 10) {
        os << "dominant peak at bin " << bin << " along " << to_string(axis)
           << ": fewer than 10 periods fit in the pattern";
        fail(ErrorKind::NoFringe, os.str());
    }
    const double length = n * pattern.pitch;
    Spacing s;
    s.bin = bin;
    s.period = length / bin;
    s.uncertainty = length / (static_cast<double>(bin) * bin);
    s.peak_to_background = background > 0.0 ? peak / background : std::numeric_limits<double>::infinity();
    return s;
}

double contrast(const FringePattern& pattern, const CoherenceEnvelope& envelope) {
    if (pattern.samples.empty()) return 0.0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (int r = 0; r < pattern.rows; ++r)
        for (int c = 0; c < pattern.cols; ++c) {
            if (std::hypot(pattern.x(r), pattern.z(c)) > 0.5 * envelope.length) continue;
            lo = std::min(lo, pattern.at(r, c));
            hi = std::max(hi, pattern.at(r, c));
        }
    if (!(hi + lo > 0.0)) return 0.0;
    return (hi - lo) / (hi + lo);
}

namespace {

constexpr double kTwoPi = 2.0 * constants::pi;

// Interior local minima, refined by a parabola through the three samples.
std::vector<double> local_minima(const std::vector<RamseyPoint>& pts) {
    std::vector<double> out;
    for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
        const double a = pts[i - 1].population, b = pts[i].population, c = pts[i + 1].population;
        if (!(b < a && b <= c)) continue;
        const double h = pts[i + 1].delta - pts[i].delta;
        const double curv = a - 2.0 * b + c;
        const double offset = curv > 0.0 ? 0.5 * h * (a - c) / curv : 0.0;
        out.push_back(pts[i].delta + offset);
    }
    return out;
}

} // namespace

RamseyAnalysis analyze_ramsey(const std::vector<RamseyPoint>& points, double tau) {
    if (points.size() < 3) fail(ErrorKind::Config, "a Ramsey scan needs at least three points");
    if (!(tau > 0.0)) fail(ErrorKind::Config, "Ramsey time must be positive");
    auto pts = points;
    std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.delta < b.delta; });

    RamseyAnalysis r;
    r.tau = tau;
    r.width_scale_hz = 1.0 / (kTwoPi * tau);
    const auto minima = local_minima(pts);
    for (double m : minima) r.minima_hz.push_back(m / kTwoPi);
    if (minima.size() < 2) fail(ErrorKind::NoFringe, "fewer than two Ramsey minima in the scan");
    r.period_hz = (minima.back() - minima.front()) / (minima.size() - 1) / kTwoPi;

    const double step = (pts.back().delta - pts.front().delta) / (pts.size() - 1);
    std::optional<double> left, right;
    for (double m : minima) {
        if (std::abs(m) < 0.5 * step) continue; // a minimum at zero is the fringe centre itself
        if (m < 0.0) left = m;
        if (m > 0.0 && !right) right = m;
    }
    if (!left || !right) fail(ErrorKind::NoFringe, "the scan does not bracket delta = 0 with two minima");
    r.central_width_hz = 0.5 * (*right - *left) / kTwoPi;

    // Linear least squares for a + b cos(delta tau) + c sin(delta tau).
    double m[3][4] = {};
    for (const auto& p : pts) {
        const double f[3] = {1.0, std::cos(p.delta * tau), std::sin(p.delta * tau)};
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) m[i][j] += f[i] * f[j];
            m[i][3] += f[i] * p.population;
        }
    }
    for (int i = 0; i < 3; ++i) {
        int pivot = i;
        for (int j = i + 1; j < 3; ++j)
            if (std::abs(m[j][i]) > std::abs(m[pivot][i])) pivot = j;
        std::swap(m[i], m[pivot]);
        if (std::abs(m[i][i]) < 1e-300) fail(ErrorKind::Degenerate, "Ramsey fit is singular");
        for (int j = 0; j < 3; ++j) {
            if (j == i) continue;
            const double f = m[j][i] / m[i][i];
            for (int c = i; c < 4; ++c) m[j][c] -= f * m[i][c];
        }
    }
    const double b = m[1][3] / m[1][1];
    const double c = m[2][3] / m[2][2];
    r.phase = std::atan2(c, -b);
    r.shift_hz = -r.phase / (kTwoPi * tau);

    const auto nearest = std::min_element(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
        return std::abs(a.delta) < std::abs(b.delta);
    });
    r.population_at_zero = nearest->population;
    return r;
}

std::vector<double> ramsey_grid(double tau, double periods, int points_per_period) {
    if (!(tau > 0.0) || !(periods > 0.0) || points_per_period < 1)
        fail(ErrorKind::Config, "Ramsey grid needs positive tau, span and density");
    const int half = static_cast<int>(std::ceil(0.5 * periods * points_per_period));
    const double step = kTwoPi / tau / points_per_period;
    std::vector<double> out;
    for (int i = -half; i <= half; ++i) out.push_back(i * step);
    return out;
}

RamseyScan ramsey_scan(const RamseyParams& params, const std::vector<double>& deltas,
                       const InterferometerConfig& config, int threads) {
    if (deltas.size() < 3) fail(ErrorKind::Config, "a Ramsey scan needs at least three detunings");
    auto grid = deltas;
    std::sort(grid.begin(), grid.end());
    const auto prepared = prepare_ramsey(params, config);
    const double period = kTwoPi / prepared.tau; // rad/s
    const double span = grid.back() - grid.front();
    const double step = span / (grid.size() - 1);
    if (span < 3.0 * period * (1.0 - 1e-9) || step > period / 20.0 * (1.0 + 1e-9)) {
        std::ostringstream os;
        os << "Ramsey grid must span at least 3 fringe periods (" << 3.0 * period / kTwoPi
           << " Hz) with at least 20 points per period; got span " << span / kTwoPi << " Hz, step "
           << step / kTwoPi << " Hz";
        fail(ErrorKind::Config, os.str());
    }

    RamseyScan scan;
    scan.points.resize(grid.size());
    const auto nearest = static_cast<std::size_t>(
        std::min_element(grid.begin(), grid.end(), [](double a, double b) { return std::abs(a) < std::abs(b); }) -
        grid.begin());
    std::vector<std::exception_ptr> errors(grid.size());
    const auto work = [&](std::size_t first, std::size_t stride) {
        for (std::size_t i = first; i < grid.size(); i += stride) {
            try {
                PlanResult* keep = i == nearest ? &scan.central : nullptr;
                scan.points[i] = {grid[i], ramsey_population(prepared, params, grid[i], config, keep)};
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const auto workers = static_cast<std::size_t>(std::clamp<int>(threads, 1, static_cast<int>(grid.size())));
    if (workers == 1) {
        work(0, 1);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w, workers);
        for (auto& t : pool) t.join();
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    scan.analysis = analyze_ramsey(scan.points, prepared.tau);
    return scan;
}

void write_pattern_csv(const FringePattern& pattern, const std::string& path) {
    std::ofstream out(path);
    if (!out) fail(ErrorKind::Io, "cannot open " + path + " for writing");
    out.precision(12);
    if (pattern.dims() == 1) {
        out << "position_nm,value\n";
        for (int c = 0; c < pattern.cols; ++c) out << pattern.z(c) * 1e9 << ',' << pattern.at(0, c) << '\n';
    } else {
        out << "x_nm,z_nm,value\n";
        for (int r = 0; r < pattern.rows; ++r)
            for (int c = 0; c < pattern.cols; ++c)
                out << pattern.x(r) * 1e9 << ',' << pattern.z(c) * 1e9 << ',' << pattern.at(r, c) << '\n';
    }
    if (!out) fail(ErrorKind::Io, "failed writing " + path);
}

void write_pattern_pgm(const FringePattern& pattern, const std::string& path) {
    write_pgm(path, to_grey16(pattern.samples, pattern.cols, pattern.rows, 0.0, 1.0));
    std::ofstream side(path + ".txt");
    if (!side) fail(ErrorKind::Io, "cannot open " + path + ".txt for writing");
    side.precision(12);
    side << "pitch_nm " << pattern.pitch * 1e9 << '\n'
         << "columns " << pattern.cols << " axis z\n"
         << "rows " << pattern.rows << " axis x\n"
         << "origin centre\n"
         << "scale 0..65535 = intensity 0..1 (peak normalized)\n";
    if (!side) fail(ErrorKind::Io, "failed writing " + path + ".txt");
}

void write_ramsey_csv(const std::vector<RamseyPoint>& points, const std::string& path) {
    std::ofstream out(path);
    if (!out) fail(ErrorKind::Io, "cannot open " + path + " for writing");
    out.precision(12);
    out << "delta_hz,value\n";
    for (const auto& p : points) out << p.delta / kTwoPi << ',' << p.population << '\n';
    if (!out) fail(ErrorKind::Io, "failed writing " + path);
}

} // namespace atomladder
