#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "torqopt/solvers.hpp"
#include "torqopt/systems.hpp"

namespace torqopt::cli {

/// Exit statuses shared by all subcommands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;       // config/validation failure
inline constexpr int kExitNoConvergence = 2; // solver did not converge

enum class Method { Shooting, Collocation, Both };

struct GridSpec {
    Vector min, max;
    std::vector<int> counts;
};

/// Parsed and validated run configuration (a single JSON document).
struct RunConfig {
    SystemDefinition system;

    // problem block (solve/compare)
    std::optional<BoundaryProblem> problem;
    Method method = Method::Shooting;
    int nodes = 200;

    // grid block (tensors/indicatrix)
    std::optional<GridSpec> grid;
    std::string indicatrix_which = "metric";
    int indicatrix_count = 32;

    // output block
    std::string trajectory_file = "trajectory.csv";
    std::string summary_file = "summary.json";
    std::string grid_file = "tensors.csv";
    std::string points_file = "indicatrix.csv";
};

/// Parse a config file. Throws Error with a message naming the offending
/// field on validation failure.
RunConfig load_config(const std::string& path);

int run_solve(RunConfig& config, const std::string& out_dir, bool verbose, std::ostream& err);
int run_tensors(RunConfig& config, const std::string& out_dir, bool verbose, std::ostream& err);
int run_indicatrix(RunConfig& config, const std::string& out_dir, bool verbose, std::ostream& err);
int run_compare(RunConfig& config, const std::string& out_dir, bool verbose, std::ostream& err);

/// Writes t, q, v, a, F, E, alpha, p, H, cost_density per row with 17
/// significant digits. For sampled (non-Hamiltonian) trajectories alpha and
/// p are reconstructed as 2E and -2 yank.
void write_trajectory_csv(const std::string& path, const SystemDefinition& system,
                          const SolverReport& report);

/// Reads a trajectory CSV back into samples. The acceleration column holds
/// the covariant acceleration; the coordinate second derivative is recovered
/// by subtracting the Christoffel quadratic term.
Trajectory read_trajectory_csv(const std::string& path, const SystemDefinition& system);

/// Largest pointwise q-distance between two trajectories sampled on the
/// times of `b` (linear interpolation of `a`).
double trajectory_sup_distance(const Trajectory& a, const Trajectory& b);

}  // namespace torqopt::cli
