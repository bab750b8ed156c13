#pragma once

#include <functional>
#include <optional>
#include <string>

#include "torqopt/hamiltonian.hpp"
#include "torqopt/systems.hpp"

namespace torqopt {

/// Two-point boundary-value problem on a system. Velocities left empty mark
/// a geodesic problem; the invariant is that either both are given or both
/// are free.
struct BoundaryProblem {
    const SystemDefinition* system = nullptr;
    Vector q0, qf;
    std::optional<Vector> v0, vf;
    double horizon = 1.0;
    int steps = 1000;
    double tolerance = 1e-10;
    int max_iterations = 50;

    bool free_velocities() const { return !v0.has_value() && !vf.has_value(); }
    void validate() const;
};

struct SolverReport {
    bool converged = false;
    int iterations = 0;
    double residual_norm = 0.0;
    double cost = 0.0;
    Vector shooting_params;            // (alpha0, p0) or v0 for geodesics
    HamiltonianTrajectory trajectory;  // filled by the shooting solvers
    Trajectory path;                   // always filled
    std::string message;
};

/// One damped Newton step on a square residual map: forward-difference
/// Jacobian, backtracking line search on the residual norm, Levenberg
/// regularization retry on a singular Jacobian. Returns the guess unchanged
/// when its residual is already below `tolerance`.
struct NewtonStepResult {
    Vector next;
    double residual_norm = 0.0;  // at `next`
    bool accepted = false;       // false: no descent direction found
};
NewtonStepResult newton_step(const std::function<Vector(const Vector&)>& residual,
                             const Vector& guess, double fd_step, double tolerance = 0.0);

/// Indirect shooting on the initial costates (alpha0, p0): Newton on the
/// endpoint residual (q(T)-qf, v(T)-vf) of the integrated optimality system.
/// Seeds from the flat-chart Hermite cubic; on stagnation retries with a
/// 5-step homotopy of the cometric from the dual metric to the target.
SolverReport solve_spline_shooting(const BoundaryProblem& problem);

/// Geodesic problems (both velocities free): shooting on v0 with the
/// costates pinned at zero, 8 deterministic direction seeds, shortest
/// pathlength solution returned.
SolverReport solve_geodesic(const BoundaryProblem& problem);

/// Direct-minimization oracle: interior trajectory nodes as decision
/// variables, second-order finite-difference accelerations, trapezoid cost,
/// Barzilai-Borwein gradient descent with backtracking. Boundary conditions
/// are enforced exactly by parameterization.
SolverReport solve_collocation(const BoundaryProblem& problem, int nodes);

/// Dispatch: geodesic when the velocities are free, otherwise shooting.
SolverReport solve(const BoundaryProblem& problem);

/// System with the cometric blended between the dual metric (s = 0) and the
/// original cometric (s = 1). Used by the shooting homotopy and exposed for
/// tests.
SystemDefinition blend_cometric(const SystemDefinition& system, double s);

/// Cubic Hermite interpolant of the boundary data, used for seeding.
struct HermiteCubic {
    Vector q0, v0, c2, c3;
    Vector position(double t) const { return q0 + t * v0 + (t * t) * c2 + (t * t * t) * c3; }
    Vector velocity(double t) const { return v0 + (2.0 * t) * c2 + (3.0 * t * t) * c3; }
    Vector acceleration(double t) const { return 2.0 * c2 + (6.0 * t) * c3; }
    Vector jerk() const { return 6.0 * c3; }
};
HermiteCubic hermite_cubic(const Vector& q0, const Vector& v0, const Vector& qf, const Vector& vf,
                           double horizon);

/// Pathlength of an integrated trajectory under the system metric.
double pathlength(const SystemDefinition& system, const Trajectory& trajectory);

}  // namespace torqopt
