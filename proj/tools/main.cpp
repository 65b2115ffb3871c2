// atomladder command-line driver.
//
//   atomladder run <config.json> --out <dir> [--threads N] [--strict]
//   atomladder list-plans
//
// Exit status: 0 success, 2 config, 3 degenerate input, 4 integration,
// 5 adiabaticity, 6 selectivity, 7 physics, 8 no fringe, 9 warning under
// --strict, 10 normalization, 11 I/O, 1 anything unexpected.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "atomladder/errors.hpp"
#include "atomladder/experiment.hpp"

namespace al = atomladder;

namespace {

int run(const std::string& config_path, const std::string& out_dir, const al::RunOptions& options) {
    const auto resolved = al::resolve_config(al::read_config(config_path));
    const auto outcome = al::run_experiment(resolved, out_dir, options);
    for (const auto& w : outcome.warnings) std::cerr << "warning: " << w << '\n';
    for (const auto& a : outcome.artifacts) std::cout << a << '\n';
    std::cerr << outcome.stem << ": " << outcome.artifacts.size() << " files in " << outcome.wall_time << " s\n";
    return 0;
}

void list_plans() {
    for (const auto& p : al::plan_catalog()) std::cout << p.name << "\t" << p.anchor << "\t" << p.description << '\n';
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Large-angle atom interferometer pulse-sequence simulator"};
    app.require_subcommand(1);
    int threads = 1;
    bool strict = false;
    app.add_option("--threads", threads, "worker threads for pattern synthesis and scans")
        ->check(CLI::Range(1, 1024));
    app.add_flag("--strict", strict, "treat warnings as errors (exit 9)");

    auto* run_cmd = app.add_subcommand("run", "run the plan described by a JSON config");
    std::string config_path, out_dir = ".";
    run_cmd->add_option("config", config_path, "experiment config (JSON)")->required();
    run_cmd->add_option("--out", out_dir, "output directory");
    run_cmd->add_option("--threads", threads, "worker threads for pattern synthesis and scans")
        ->check(CLI::Range(1, 1024));
    run_cmd->add_flag("--strict", strict, "treat warnings as errors (exit 9)");

    auto* list_cmd = app.add_subcommand("list-plans", "print the plan catalog");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : al::exit_code(al::ErrorKind::Config);
    }

    try {
        if (list_cmd->parsed()) {
            list_plans();
            return 0;
        }
        return run(config_path, out_dir, {threads, strict});
    } catch (const al::Error& e) {
        std::cerr << "error (" << al::to_string(e.kind()) << "): " << e.what() << '\n';
        return al::exit_code(e.kind());
    } catch (const al::StrictWarning& e) {
        std::cerr << "error (strict): " << e.what() << '\n';
        return al::kStrictWarningExitCode;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
