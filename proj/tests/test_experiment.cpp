#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

#include "atomladder/errors.hpp"
#include "atomladder/experiment.hpp"

using namespace atomladder;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "atomladder-tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

template <class F>
ErrorKind kind_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("no atomladder::Error thrown");
    return ErrorKind::Io;
}

} // namespace

TEST_SUITE("experiment") {

TEST_CASE("plan catalog") {
    const auto& plans = plan_catalog();
    REQUIRE(plans.size() == 6);
    CHECK(plans.front().name == "figure3");
    for (const auto& p : plans) {
        CHECK_FALSE(p.description.empty());
        CHECK_FALSE(p.anchor.empty());
    }
}

TEST_CASE("config resolution fills defaults and rejects strangers") {
    const auto r = resolve_config(Json{{"plan", "figure3"}, {"pulses", {{"pairs", 3}}}});
    CHECK(r["pulses"]["pairs"] == 3);
    CHECK(r["pulses"]["coupling_mhz"] == config_defaults()["pulses"]["coupling_mhz"]);
    CHECK(r["interferometer"]["drift1_ms"].is_null());
    CHECK(resolve_config(Json{{"plan", "split1d"}, {"interferometer", {{"drift1_ms", 4}}}})["interferometer"]
              ["drift1_ms"] == 4);

    CHECK(kind_of([] { resolve_config(Json{{"plan", "figure3"}, {"pulses", {{"pairz", 3}}}}); }) ==
          ErrorKind::Config);
    CHECK(kind_of([] { resolve_config(Json{{"plan", "figure3"}, {"extra", {}}}); }) == ErrorKind::Config);
    CHECK(kind_of([] { resolve_config(Json{{"plan", "nope"}}); }) == ErrorKind::Config);
    CHECK(kind_of([] { resolve_config(Json::object()); }) == ErrorKind::Config);
    CHECK(kind_of([] { resolve_config(Json{{"plan", "figure3"}, {"pulses", {{"pairs", 2.5}}}}); }) ==
          ErrorKind::Config);
    CHECK(kind_of([] { resolve_config(Json{{"plan", "figure3"}, {"pulses", {{"chirp", "yes"}}}}); }) ==
          ErrorKind::Config);
    // Integers are fine where a real number is expected.
    CHECK_NOTHROW(resolve_config(Json{{"plan", "figure3"}, {"pulses", {{"coupling_mhz", 90}}}}));
}

TEST_CASE("config hash is stable and sensitive") {
    const auto a = resolve_config(Json{{"plan", "figure3"}});
    const auto b = resolve_config(Json{{"plan", "figure3"}});
    const auto c = resolve_config(Json{{"plan", "figure3"}, {"pulses", {{"pairs", 29}}}});
    CHECK(config_hash(a) == config_hash(b));
    CHECK(config_hash(a) != config_hash(c));
    CHECK(config_hash(a).size() == 12);
}

TEST_CASE("config files") {
    const auto dir = fresh_dir("configs");
    const auto path = (dir / "c.json").string();
    {
        std::ofstream out(path);
        out << "{\"plan\": \"figure3\",";
    }
    CHECK(kind_of([&] { read_config(path); }) == ErrorKind::Config);
    CHECK(kind_of([&] { read_config((dir / "missing.json").string()); }) == ErrorKind::Io);
}

TEST_CASE("figure3 run writes deterministic artifacts") {
    const auto cfg = resolve_config(Json{{"plan", "figure3"}, {"pulses", {{"pairs", 3}}}});
    const auto d1 = fresh_dir("run1");
    const auto d2 = fresh_dir("run2");
    const auto r1 = run_experiment(cfg, d1.string());
    const auto r2 = run_experiment(cfg, d2.string());
    CHECK(r1.stem == "figure3-" + config_hash(cfg));
    REQUIRE(r1.artifacts.size() == 3);
    for (std::size_t i = 0; i < r1.artifacts.size(); ++i) {
        const auto name = fs::path(r1.artifacts[i]).filename();
        CHECK(name.string().rfind(r1.stem, 0) == 0);
        CHECK(fs::exists(r1.artifacts[i]));
        if (name.extension() != ".json") CHECK(slurp(r1.artifacts[i]) == slurp((d2 / name).string()));
    }
    CHECK(r1.metrics.at("final_mean_nz") == doctest::Approx(6.0).epsilon(1e-2));

    const auto prov = Json::parse(slurp((d1 / (r1.stem + ".provenance.json")).string()));
    CHECK(prov["config_hash"] == config_hash(cfg));
    CHECK(prov["config"] == cfg);
    CHECK(prov.contains("version"));
    CHECK(prov["artifacts"].size() == 2);
}

TEST_CASE("strict mode aborts before anything is written") {
    // 190 recoils on a 0.5 nm grid: fewer than 16 samples per period.
    const auto cfg = resolve_config(
        Json{{"plan", "fringes"},
             {"fringes", {{"source", "arms"}, {"pitch_nm", 0.5}, {"arms", Json::array({{{"nz", 0}}, {{"nz", 190}}})}}}});
    const auto lax = fresh_dir("lax");
    const auto r = run_experiment(cfg, lax.string());
    CHECK_FALSE(r.warnings.empty());

    const auto dir = fresh_dir("strict");
    CHECK_THROWS_AS(run_experiment(cfg, dir.string(), {1, true}), StrictWarning);
    CHECK(fs::is_empty(dir));
}

TEST_CASE("pattern plan round trip") {
    const auto cfg = resolve_config(Json{{"plan", "pattern"}, {"pattern", {{"gear_size", 32}}}});
    const auto dir = fresh_dir("pattern");
    const auto r = run_experiment(cfg, dir.string());
    CHECK(r.metrics.at("max_abs_error") < 1e-12);
    CHECK(r.artifacts.size() == 4);
}

} // TEST_SUITE
