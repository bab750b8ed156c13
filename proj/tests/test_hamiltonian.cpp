#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "torqopt/dynamics.hpp"
#include "torqopt/errors.hpp"
#include "torqopt/hamiltonian.hpp"
#include "torqopt/systems.hpp"

using namespace torqopt;

namespace {

Vector vec2(double a, double b) {
    Vector v(2);
    v << a, b;
    return v;
}

SystemDefinition flat1d() { return system_from_expressions(1, {"x"}, {{"1"}}, {{"1"}}); }

ExtendedState state1d(double q, double v, double alpha, double p) {
    ExtendedState x = ExtendedState::zero(1);
    x.q[0] = q;
    x.v[0] = v;
    x.alpha[0] = alpha;
    x.p[0] = p;
    return x;
}

ExtendedState random_state(const SystemDefinition& sys, std::mt19937& rng, double scale) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    // The two-link charts degenerate when the arm straightens out, so those
    // draws stay near a bent-elbow configuration and move gently.
    const bool twolink = sys.name.find("twolink") != std::string::npos;
    ExtendedState x = ExtendedState::zero(sys.dim);
    for (int k = 0; k < sys.dim; ++k) {
        x.q[k] = (twolink ? 0.3 : 0.6) * u(rng);
        x.v[k] = (twolink ? 0.4 : 1.0) * u(rng);
        x.alpha[k] = (twolink ? 0.5 : 1.0) * scale * u(rng);
        x.p[k] = (twolink ? 0.5 : 1.0) * scale * u(rng);
    }
    if (twolink) x.q[sys.dim - 1] += 1.2;
    return x;
}

}  // namespace

TEST_CASE("flat one-dimensional right-hand side") {
    SystemDefinition sys = flat1d();
    ExtendedState dx = rhs(sys, state1d(0.0, 1.0, 2.0, 3.0));
    CHECK(dx.q[0] == doctest::Approx(1.0));
    CHECK(dx.v[0] == doctest::Approx(1.0));
    CHECK(dx.alpha[0] == doctest::Approx(-3.0));
    CHECK(dx.p[0] == doctest::Approx(0.0));
}

TEST_CASE("sphere equator with zero costates is pure kinematics") {
    SystemDefinition sys = builtin("sphere_dual");
    ExtendedState x = ExtendedState::zero(2);
    x.q = vec2(0.0, 0.0);
    x.v = vec2(1.0, 0.0);
    ExtendedState dx = rhs(sys, x);
    CHECK((dx.q - vec2(1.0, 0.0)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(dx.v.cwiseAbs().maxCoeff() < 1e-12);
    CHECK(dx.alpha.cwiseAbs().maxCoeff() < 1e-12);
    CHECK(dx.p.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("compatibility term feeds the p equation on the flat quadratic system") {
    SystemDefinition sys = builtin("flat_quadratic");
    ExtendedState x = ExtendedState::zero(2);
    x.q = vec2(0.0, 1.0);
    x.alpha = vec2(1.0, 0.0);
    ExtendedState dx = rhs(sys, x);
    CHECK(dx.v[0] == doctest::Approx(1.0 / 22.0).epsilon(1e-10));
    CHECK(dx.v[1] == doctest::Approx(0.0));
    CHECK(dx.p[0] == doctest::Approx(0.0));
    CHECK(dx.p[1] == doctest::Approx(5.0 / 121.0).epsilon(1e-6));
    CHECK(dx.alpha[0] == doctest::Approx(0.0));
}

TEST_CASE("hamiltonian value") {
    SystemDefinition sys = flat1d();
    CHECK(hamiltonian_value(sys, state1d(0.3, 0.0, 0.0, 17.0)) == doctest::Approx(0.0));
    CHECK(hamiltonian_value(sys, state1d(0.0, 1.0, 2.0, 3.0)) == doctest::Approx(4.0));
    CHECK(hamiltonian_value(sys, state1d(0.0, 0.0, 12.0, 24.0)) == doctest::Approx(36.0));
    CHECK(hamiltonian_value(sys, state1d(1.0, 0.0, -12.0, 24.0)) == doctest::Approx(36.0));
}

TEST_CASE("integrating the flat Hermite initial costates hits the boundary") {
    SystemDefinition sys = flat1d();
    HamiltonianTrajectory traj = integrate(sys, state1d(0.0, 0.0, 12.0, 24.0), 1.0, 1000);
    REQUIRE(traj.states.size() == 1001);
    CHECK(std::abs(traj.states.back().q[0] - 1.0) < 1e-10);
    CHECK(std::abs(traj.states.back().v[0]) < 1e-10);
    // interior check against 3t^2 - 2t^3
    const ExtendedState& mid = traj.states[500];
    CHECK(mid.q[0] == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(traj.cost() == doctest::Approx(12.0).epsilon(1e-5));
}

TEST_CASE("zero costates stay zero and cost nothing") {
    for (const std::string& name : {"sphere_torque", "torus_torque", "twolink_parallel"}) {
        SystemDefinition sys = builtin(name);
        ExtendedState x = ExtendedState::zero(2);
        x.q = vec2(0.1, 1.2);
        x.v = vec2(0.3, -0.2);
        HamiltonianTrajectory traj = integrate(sys, x, 1.0, 500);
        for (const ForceData& f : traj.forces) CHECK(f.a.cwiseAbs().maxCoeff() < 1e-12);
        CHECK(traj.cost() < 1e-12);
    }
}

TEST_CASE("hamiltonian is conserved along the flow") {
    std::mt19937 rng(21);
    for (const std::string& name : builtin_names()) {
        SystemDefinition sys = builtin(name);
        // Short horizon: random flows on bounded charts drift toward the
        // chart boundary if integrated for too long.
        const double horizon = name.find("twolink") != std::string::npos ? 0.4 : 1.0;
        for (int rep = 0; rep < 3; ++rep) {
            HamiltonianTrajectory traj =
                integrate(sys, random_state(sys, rng, 2.0), horizon, 1000);
            CHECK(traj.hamiltonian_drift() < 1e-6);
        }
    }
}

TEST_CASE("integrated dual-cometric flows satisfy the spline equation") {
    std::mt19937 rng(22);
    SystemDefinition sys = builtin("sphere_dual");
    for (int rep = 0; rep < 3; ++rep) {
        HamiltonianTrajectory traj = integrate(sys, random_state(sys, rng, 1.0), 1.0, 2000);
        Trajectory path = traj.as_trajectory();
        CHECK(residual_rms(riemannian_spline_residual(sys, path)) < 1e-5);
    }
}

TEST_CASE("costate alpha doubles the effort along integrated flows") {
    std::mt19937 rng(23);
    SystemDefinition sys = builtin("flat_quadratic");
    HamiltonianTrajectory traj = integrate(sys, random_state(sys, rng, 2.0), 1.0, 1000);
    Trajectory path = traj.as_trajectory();
    for (std::size_t i = 0; i < path.size(); i += 100) {
        ForceData f = force_and_effort(sys, path[i]);
        CHECK((traj.states[i].alpha - 2.0 * f.E).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("fourth-order convergence on a curved system") {
    // endpoint error against a fine reference halves by ~16 per step doubling
    SystemDefinition sys = builtin("sphere_torque");
    ExtendedState x0 = ExtendedState::zero(2);
    x0.q = vec2(0.1, 0.2);
    x0.v = vec2(0.8, -0.4);
    x0.alpha = vec2(1.5, 0.7);
    x0.p = vec2(-0.3, 0.9);
    Vector ref = integrate(sys, x0, 1.0, 16000).states.back().pack();
    double e1 = (integrate(sys, x0, 1.0, 250).states.back().pack() - ref).norm();
    double e2 = (integrate(sys, x0, 1.0, 500).states.back().pack() - ref).norm();
    double e3 = (integrate(sys, x0, 1.0, 1000).states.back().pack() - ref).norm();
    CHECK(e1 / e2 > 8.0);
    CHECK(e2 / e3 > 8.0);
}

TEST_CASE("divergence is reported with the last valid time") {
    SystemDefinition sys = builtin("sphere_dual");
    ExtendedState x = ExtendedState::zero(2);
    x.q = vec2(0.0, 1.4);
    x.v = vec2(0.0, 40.0);  // runs off the chart quickly
    try {
        integrate(sys, x, 1.0, 200);
        FAIL("expected DivergenceError");
    } catch (const DivergenceError& e) {
        CHECK(e.last_valid_time >= 0.0);
        CHECK(e.last_valid_time < 1.0);
    }
}
