#include "atomladder/patterngen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "atomladder/errors.hpp"

namespace atomladder {

TwoComponentField TwoComponentField::equal_split(int width, int height) {
    if (width <= 0 || height <= 0) fail(ErrorKind::Config, "field dimensions must be positive");
    TwoComponentField field;
    field.width = width;
    field.height = height;
    const std::size_t n = static_cast<std::size_t>(width) * height;
    const cplx half{1.0 / std::sqrt(2.0), 0.0};
    field.psi1.assign(n, half);
    field.psi2.assign(n, half);
    return field;
}

TargetPattern target_from_image(const GreyImage& image, double pitch) {
    if (!(pitch > 0.0)) fail(ErrorKind::Config, "pixel pitch must be positive");
    TargetPattern t;
    t.width = image.width;
    t.height = image.height;
    t.pitch = pitch;
    t.f = unit_values(image);
    for (auto& v : t.f) v = 2.0 * v - 1.0;
    return t;
}

TargetPattern read_pattern_csv(const std::string& path, double pitch) {
    if (!(pitch > 0.0)) fail(ErrorKind::Config, "pixel pitch must be positive");
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Io, "cannot open " + path);
    TargetPattern t;
    t.pitch = pitch;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream row(line);
        std::string cell;
        int count = 0;
        while (std::getline(row, cell, ',')) {
            try {
                t.f.push_back(std::stod(cell));
            } catch (const std::exception&) {
                fail(ErrorKind::Io, path + ": non-numeric cell '" + cell + "'");
            }
            ++count;
        }
        if (t.height == 0) t.width = count;
        if (count != t.width) fail(ErrorKind::Io, path + ": rows have different lengths");
        ++t.height;
    }
    if (t.f.empty()) fail(ErrorKind::Io, path + ": no values");
    return t;
}

PhaseMask encode(const TargetPattern& target, double magnification) {
    if (!(magnification > 0.0)) fail(ErrorKind::Config, "magnification must be positive");
    if (target.f.size() != static_cast<std::size_t>(target.width) * target.height || target.f.empty())
        fail(ErrorKind::Config, "target pattern is not a filled rectangular grid");
    PhaseMask mask;
    mask.width = target.width;
    mask.height = target.height;
    mask.magnification = magnification;
    mask.pitch = target.pitch / magnification;
    mask.g.resize(target.f.size());
    for (std::size_t i = 0; i < target.f.size(); ++i) {
        const double f = target.f[i];
        if (!(f >= -1.0 && f <= 1.0)) {
            std::ostringstream os;
            os << "pattern value " << f << " at pixel (" << i % target.width << ", " << i / target.width
               << ") lies outside [-1, 1]; normalize the pattern first";
            fail(ErrorKind::Normalization, os.str());
        }
        mask.g[i] = std::acos(f);
    }
    return mask;
}

void imprint(TwoComponentField& field, const PhaseMask& mask, double kappa_t) {
    if (field.width != mask.width || field.height != mask.height)
        fail(ErrorKind::Config, "phase mask and field have different shapes");
    for (std::size_t i = 0; i < field.psi2.size(); ++i) field.psi2[i] *= std::polar(1.0, kappa_t * mask.g[i]);
}

Interference interfere(const TwoComponentField& field) {
    Interference out;
    const std::size_t n = field.psi1.size();
    out.intensity.resize(n);
    out.contrast.resize(n);
    double worst = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        out.intensity[i] = 0.5 * std::norm(field.psi1[i] + field.psi2[i]);
        const double p1 = std::norm(field.psi1[i]), p2 = std::norm(field.psi2[i]);
        out.contrast[i] = p1 + p2 > 0.0 ? 2.0 * std::sqrt(p1 * p2) / (p1 + p2) : 0.0;
        worst = std::min(worst, out.contrast[i]);
    }
    if (worst < 1.0 - 1e-12) {
        std::ostringstream os;
        os << "unequal split: per-pixel contrast drops to " << worst;
        out.warning = os.str();
    }
    return out;
}

Roundtrip roundtrip(const TargetPattern& target, double magnification) {
    Roundtrip r;
    r.mask = encode(target, magnification);
    auto field = TwoComponentField::equal_split(target.width, target.height);
    imprint(field, r.mask);
    const auto fringe = interfere(field);
    r.warning = fringe.warning;
    r.recovered = target;
    r.recovered.pitch = r.mask.pitch;
    double sum2 = 0.0;
    for (std::size_t i = 0; i < target.f.size(); ++i) {
        r.recovered.f[i] = 2.0 * fringe.intensity[i] - 1.0;
        const double e = std::abs(r.recovered.f[i] - target.f[i]);
        r.max_error = std::max(r.max_error, e);
        sum2 += e * e;
    }
    r.rms_error = std::sqrt(sum2 / static_cast<double>(target.f.size()));
    return r;
}

GreyImage pattern_image(const TargetPattern& pattern) {
    return to_grey16(pattern.f, pattern.width, pattern.height, -1.0, 1.0);
}

void write_error_csv(const TargetPattern& target, const Roundtrip& result, const std::string& path) {
    std::ofstream out(path);
    if (!out) fail(ErrorKind::Io, "cannot open " + path + " for writing");
    out.precision(17);
    out << "# max_abs_error " << result.max_error << "\n# rms_error " << result.rms_error << "\n# pitch_out_m "
        << result.recovered.pitch << "\n# magnification " << result.mask.magnification << '\n';
    out << "x,y,f,recovered,error\n";
    for (int y = 0; y < target.height; ++y)
        for (int x = 0; x < target.width; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * target.width + x;
            out << x << ',' << y << ',' << target.f[i] << ',' << result.recovered.f[i] << ','
                << result.recovered.f[i] - target.f[i] << '\n';
        }
    if (!out) fail(ErrorKind::Io, "failed writing " + path);
}

GreyImage gear_image(int size, int teeth) {
    if (size < 8 || teeth < 3) fail(ErrorKind::Config, "gear needs size >= 8 and at least 3 teeth");
    GreyImage img;
    img.width = img.height = size;
    img.maxval = 255;
    img.pixels.resize(static_cast<std::size_t>(size) * size);
    const double c = 0.5 * (size - 1);
    const double outer = 0.45 * size, root = 0.36 * size, hub = 0.12 * size;
    constexpr int kSub = 4; // supersampling per axis
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) {
            int inside = 0;
            for (int sy = 0; sy < kSub; ++sy)
                for (int sx = 0; sx < kSub; ++sx) {
                    const double dx = x + (sx + 0.5) / kSub - 0.5 - c;
                    const double dy = y + (sy + 0.5) / kSub - 0.5 - c;
                    const double r = std::hypot(dx, dy);
                    const double a = std::atan2(dy, dx) * teeth / (2.0 * constants::pi);
                    const bool tooth = a - std::floor(a) < 0.5;
                    if (r > hub && r <= (tooth ? outer : root)) ++inside;
                }
            img.pixels[static_cast<std::size_t>(y) * size + x] =
                static_cast<std::uint16_t>(std::lround(255.0 * inside / (kSub * kSub)));
        }
    return img;
}

} // namespace atomladder
