#include <benchmark/benchmark.h>

#include "torqopt/geometry.hpp"
#include "torqopt/hamiltonian.hpp"
#include "torqopt/solvers.hpp"
#include "torqopt/systems.hpp"

using namespace torqopt;

static void BM_GeometryEval(benchmark::State& state) {
    SystemDefinition sys = builtin("sphere_torque");
    Vector q(2);
    q << 0.3, 0.4;
    for (auto _ : state) {
        GeometryCache geo = evaluate_geometry(sys, q);
        benchmark::DoNotOptimize(geo.tau);
    }
}
BENCHMARK(BM_GeometryEval);

static void BM_HamiltonianRhs(benchmark::State& state) {
    SystemDefinition sys = builtin("sphere_torque");
    ExtendedState x = ExtendedState::zero(2);
    x.q << 0.3, 0.4;
    x.v << 0.5, -0.2;
    x.alpha << 1.0, 2.0;
    x.p << -1.0, 0.5;
    for (auto _ : state) {
        ExtendedState dx = rhs(sys, x);
        benchmark::DoNotOptimize(dx.p);
    }
}
BENCHMARK(BM_HamiltonianRhs);

static void BM_Integrate(benchmark::State& state) {
    SystemDefinition sys = builtin("twolink_serial");
    ExtendedState x = ExtendedState::zero(2);
    x.q << 0.2, 0.5;
    x.v << 0.3, -0.1;
    x.alpha << 0.5, 0.5;
    for (auto _ : state) {
        HamiltonianTrajectory traj = integrate(sys, x, 1.0, static_cast<int>(state.range(0)));
        benchmark::DoNotOptimize(traj.states.back());
    }
}
BENCHMARK(BM_Integrate)->Arg(200)->Arg(1000);

static void BM_FlatShooting(benchmark::State& state) {
    SystemDefinition sys = builtin("flat_quadratic");
    BoundaryProblem prob;
    prob.system = &sys;
    prob.q0 = Vector::Zero(2);
    prob.qf = (Vector(2) << 1.0, 1.0).finished();
    prob.v0 = Vector::Zero(2);
    prob.vf = Vector::Zero(2);
    prob.steps = 200;
    for (auto _ : state) {
        SolverReport rep = solve_spline_shooting(prob);
        benchmark::DoNotOptimize(rep.cost);
    }
}
BENCHMARK(BM_FlatShooting);

BENCHMARK_MAIN();
