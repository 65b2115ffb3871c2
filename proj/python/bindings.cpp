#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "atomladder/engine.hpp"
#include "atomladder/errors.hpp"
#include "atomladder/experiment.hpp"
#include "atomladder/fringes.hpp"
#include "atomladder/patterngen.hpp"
#include "atomladder/pulses.hpp"

namespace py = pybind11;
namespace al = atomladder;

namespace {

// Dicts cross the boundary as JSON text; the json module does the rest.
al::Json to_json(const py::object& obj) {
    const auto text = py::module_::import("json").attr("dumps")(obj).cast<std::string>();
    return al::Json::parse(text);
}

py::object from_json(const al::Json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

double ladder_population(int pairs, bool chirp, double half_overlap, double coupling, int direction) {
    al::AtomParams atom;
    al::AdiabaticLadderSpec spec;
    spec.pairs = pairs;
    spec.chirp = chirp;
    spec.half_overlap = half_overlap;
    spec.coupling = coupling;
    spec.direction = direction;
    const auto plan = al::build_adiabatic_sequence(spec, atom);
    py::gil_scoped_release release;
    const auto out = al::propagate_sequence(al::WaveFunction::single({al::Level::A, 0, 0}), plan, atom);
    return out.population(plan.predicted.front());
}

py::array_t<double> synthesize(const std::vector<std::tuple<double, int, int, double>>& arms, int nz, int nx,
                               double pitch) {
    std::vector<al::FringeArm> list;
    for (const auto& [pop, anz, anx, phase] : arms) list.push_back({std::sqrt(pop), anz, anx, phase, al::Level::A});
    const auto p = al::synthesize(list, {nz, nx, pitch}, al::AtomParams{});
    py::array_t<double> out({p.rows, p.cols});
    std::copy(p.samples.begin(), p.samples.end(), out.mutable_data());
    return out;
}

al::FringePattern pattern_from(const py::array_t<double, py::array::c_style | py::array::forcecast>& a, double pitch) {
    if (a.ndim() != 1 && a.ndim() != 2) throw al::Error(al::ErrorKind::Config, "pattern must be 1D or 2D");
    al::FringePattern p;
    p.rows = a.ndim() == 2 ? static_cast<int>(a.shape(0)) : 1;
    p.cols = static_cast<int>(a.shape(a.ndim() - 1));
    p.pitch = pitch;
    p.samples.assign(a.data(), a.data() + a.size());
    return p;
}

py::array_t<double> roundtrip(const py::array_t<double, py::array::c_style | py::array::forcecast>& f) {
    if (f.ndim() != 2) throw al::Error(al::ErrorKind::Config, "pattern must be a 2D array");
    al::TargetPattern t;
    t.height = static_cast<int>(f.shape(0));
    t.width = static_cast<int>(f.shape(1));
    t.f.assign(f.data(), f.data() + f.size());
    const auto r = al::roundtrip(t);
    py::array_t<double> out({t.height, t.width});
    std::copy(r.recovered.f.begin(), r.recovered.f.end(), out.mutable_data());
    return out;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "atomladder: large-angle atom interferometer pulse-sequence simulator";

    static py::handle error_type = py::exception<al::Error>(m, "AtomladderError").release();
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const al::Error& e) {
            const auto cls = py::reinterpret_borrow<py::object>(error_type);
            py::object exc = cls(std::string(al::to_string(e.kind())) + ": " + e.what());
            exc.attr("kind") = std::string(al::to_string(e.kind()));
            exc.attr("exit_code") = al::exit_code(e.kind());
            PyErr_SetObject(error_type.ptr(), exc.ptr());
        } catch (const al::StrictWarning& e) {
            PyErr_SetString(PyExc_RuntimeError, e.what());
        }
    });

    m.def("plans", [] {
        py::list out;
        for (const auto& p : al::plan_catalog()) {
            py::dict d;
            d["name"] = p.name;
            d["description"] = p.description;
            d["anchor"] = p.anchor;
            out.append(d);
        }
        return out;
    }, "The plan catalog.");

    m.def("resolve_config", [](const py::object& cfg) { return from_json(al::resolve_config(to_json(cfg))); },
          py::arg("config"), "Validate a config dict and fill in every default.");

    m.def("run", [](const py::object& cfg, const std::string& out_dir, int threads, bool strict) {
        const auto resolved = al::resolve_config(to_json(cfg));
        al::RunOutcome outcome;
        {
            py::gil_scoped_release release;
            outcome = al::run_experiment(resolved, out_dir, {threads, strict});
        }
        py::dict d;
        d["stem"] = outcome.stem;
        d["artifacts"] = outcome.artifacts;
        d["warnings"] = outcome.warnings;
        d["metrics"] = outcome.metrics;
        d["wall_time"] = outcome.wall_time;
        return d;
    }, py::arg("config"), py::arg("out_dir"), py::arg("threads") = 1, py::arg("strict") = false,
          "Run a plan and write its artifacts; returns the manifest.");

    m.def("adiabaticity_parameter", &al::adiabaticity_parameter, py::arg("coupling"), py::arg("half_overlap"));

    m.def("ladder_population", &ladder_population, py::arg("pairs"), py::arg("chirp") = true,
          py::arg("half_overlap") = 50e-9, py::arg("coupling") = 2.0 * al::constants::pi * 100e6,
          py::arg("direction") = 1, "Population of the ladder target after `pairs` counter-intuitive pairs.");

    m.def("synthesize", &synthesize, py::arg("arms"), py::arg("nz") = 4096, py::arg("nx") = 1,
          py::arg("pitch") = 0.25e-9, "Fringe pattern of (population, nz, nx, phase) arms, rows along x.");

    m.def("extract_spacing", [](const py::array_t<double, py::array::c_style | py::array::forcecast>& a, double pitch,
                                const std::string& axis) {
        const auto s = al::extract_spacing(pattern_from(a, pitch), al::axis_from_string(axis));
        return py::make_tuple(s.period, s.uncertainty);
    }, py::arg("pattern"), py::arg("pitch"), py::arg("axis") = "z", "(period, uncertainty) in metres.");

    m.def("contrast", [](const py::array_t<double, py::array::c_style | py::array::forcecast>& a, double pitch) {
        return al::contrast(pattern_from(a, pitch));
    }, py::arg("pattern"), py::arg("pitch"));

    m.def("encode", [](const py::array_t<double, py::array::c_style | py::array::forcecast>& f) {
        al::TargetPattern t;
        t.height = f.ndim() == 2 ? static_cast<int>(f.shape(0)) : 1;
        t.width = static_cast<int>(f.shape(f.ndim() - 1));
        t.f.assign(f.data(), f.data() + f.size());
        const auto mask = al::encode(t);
        py::array_t<double> out(std::vector<py::ssize_t>(f.shape(), f.shape() + f.ndim()));
        std::copy(mask.g.begin(), mask.g.end(), out.mutable_data());
        return out;
    }, py::arg("f"), "g = arccos f; values outside [-1, 1] raise.");

    m.def("roundtrip", &roundtrip, py::arg("f"), "Recovered pattern 2I - 1 of the ideal pipeline.");

    m.attr("__version__") = ATOMLADDER_VERSION;
}
