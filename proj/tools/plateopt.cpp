// plateopt command line: `run <spec>` executes one spec file, `batch <dir>`
// runs every spec in a directory.
#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "plateopt/runspec.hpp"

namespace {

void print_effective_config(const plateopt::RunSpec& spec) {
    std::cout << "name            = " << spec.name << '\n'
              << "geometry        = " << spec.geometry << '\n'
              << "bc              = " << (spec.bc == plateopt::BCKind::hinged ? "hinged" : "clamped")
              << '\n'
              << "direction       = "
              << (spec.direction == plateopt::Direction::minimize ? "minimize" : "maximize") << '\n'
              << "init            = " << spec.init << '\n'
              << "seed            = " << spec.seed << '\n'
              << "restarts        = " << spec.restarts << '\n'
              << "tol_rho         = " << spec.tol_rho << '\n'
              << "max_outer_iters = " << spec.max_outer_iters << '\n'
              << "eig_tol         = " << spec.eig_tol << '\n'
              << "output_dir      = " << spec.output_dir << '\n';
    for (const auto& [k, v] : spec.geom_params) std::cout << k << " = " << v << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Extremal plate frequency by density rearrangement"};
    app.require_subcommand(1);

    std::string spec_path, batch_dir;
    std::string output_override;
    long long seed = -1;
    int restarts = 0, workers = 1;
    double tol_rho = -1.0;
    bool dry_run = false;

    auto* run_cmd = app.add_subcommand("run", "run a single spec file");
    run_cmd->add_option("spec", spec_path, "spec file")->required();
    run_cmd->add_option("--seed", seed, "override rng seed");
    run_cmd->add_option("--restarts", restarts, "override restart count");
    run_cmd->add_option("--tol-rho", tol_rho, "override the L2 density-change tolerance");
    run_cmd->add_option("--output-dir", output_override, "override output directory");
    run_cmd->add_flag("--dry-run", dry_run, "validate and print the effective config only");

    auto* batch_cmd = app.add_subcommand("batch", "run every *.spec in a directory");
    batch_cmd->add_option("dir", batch_dir, "directory of spec files")->required();
    batch_cmd->add_option("--workers", workers, "parallel runs");
    batch_cmd->add_option("--output-dir", output_override, "output root (default: out)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run_cmd) {
            auto spec = plateopt::parse_spec_file(spec_path);
            if (seed >= 0) spec.seed = static_cast<std::uint64_t>(seed);
            if (restarts > 0) spec.restarts = restarts;
            if (tol_rho >= 0.0) spec.tol_rho = tol_rho;
            if (!output_override.empty()) spec.output_dir = output_override;
            if (dry_run) {
                print_effective_config(spec);
                return 0;
            }
            auto res = plateopt::run_spec(spec);
            std::cout << spec.name << ": lambda = " << res.best.final_pair.lambda << " ("
                      << res.best.termination_reason << ", " << res.best.trace.size()
                      << " iterations)\n";
            return 0;
        }
        std::string out_root = output_override.empty() ? "out" : output_override;
        auto rows = plateopt::run_batch(batch_dir, out_root, workers);
        std::printf("%-28s %-20s %-9s %14s  %s\n", "name", "geometry", "direction", "eigenvalue",
                    "status");
        for (const auto& r : rows) {
            std::printf("%-28s %-20s %-9s %14.6g  %s\n", r.name.c_str(), r.geometry.c_str(),
                        r.direction.c_str(), r.eigenvalue, r.status.c_str());
        }
        for (const auto& r : rows)
            if (r.status != "ok") return 1;
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
