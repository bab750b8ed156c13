// torqopt: config-driven front end for the trajectory optimization library.
//
// Subcommands:
//   solve       solve a boundary value problem, write trajectory + summary
//   tensors     dump metric/cometric/connection data on a grid
//   indicatrix  sample unit balls of a quadratic form field on a grid
//   compare     run shooting and collocation, report cost gap / sup-distance

#include <CLI11.hpp>

#include <iostream>

#include "torqopt/errors.hpp"
#include "torqopt/runconfig.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir = "./out";
    bool verbose = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "path to JSON run configuration")
        ->required();
    cmd->add_option("--out", args.out_dir, "output directory (created if missing)");
    cmd->add_flag("--verbose", args.verbose, "print progress to stderr");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"biased Riemannian spline / geodesic trajectory optimization"};
    app.require_subcommand(1);

    CommonArgs solve_args, tensors_args, indicatrix_args, compare_args;
    CLI::App* solve_cmd = app.add_subcommand("solve", "solve a boundary value problem");
    CLI::App* tensors_cmd = app.add_subcommand("tensors", "dump tensor fields on a grid");
    CLI::App* indicatrix_cmd =
        app.add_subcommand("indicatrix", "emit indicatrix boundary samples on a grid");
    CLI::App* compare_cmd =
        app.add_subcommand("compare", "cross-check shooting against collocation");
    add_common(solve_cmd, solve_args);
    add_common(tensors_cmd, tensors_args);
    add_common(indicatrix_cmd, indicatrix_args);
    add_common(compare_cmd, compare_args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? torqopt::cli::kExitOk : torqopt::cli::kExitInvalid;
    }

    const CommonArgs* args = nullptr;
    int (*runner)(torqopt::cli::RunConfig&, const std::string&, bool, std::ostream&) = nullptr;
    if (solve_cmd->parsed()) {
        args = &solve_args;
        runner = &torqopt::cli::run_solve;
    } else if (tensors_cmd->parsed()) {
        args = &tensors_args;
        runner = &torqopt::cli::run_tensors;
    } else if (indicatrix_cmd->parsed()) {
        args = &indicatrix_args;
        runner = &torqopt::cli::run_indicatrix;
    } else {
        args = &compare_args;
        runner = &torqopt::cli::run_compare;
    }

    try {
        torqopt::cli::RunConfig config = torqopt::cli::load_config(args->config_path);
        return runner(config, args->out_dir, args->verbose, std::cerr);
    } catch (const torqopt::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return torqopt::cli::kExitInvalid;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return torqopt::cli::kExitInvalid;
    }
}
