#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "torqopt/errors.hpp"
#include "torqopt/systems.hpp"

using namespace torqopt;

namespace {

Vector vec2(double a, double b) {
    Vector v(2);
    v << a, b;
    return v;
}

Matrix mat2(double a, double b, double c, double d) {
    Matrix m(2, 2);
    m << a, b, c, d;
    return m;
}

}  // namespace

TEST_CASE("builtin catalog") {
    CHECK(builtin_names().size() == 6);
    for (const std::string& name : builtin_names()) {
        SystemDefinition sys = builtin(name);
        CHECK(sys.dim == 2);
        CHECK(sys.metric.has_analytic_partials());
        CHECK(sys.cometric.has_analytic_partials());
    }
    CHECK_THROWS_AS(builtin("klein_bottle"), Error);
}

TEST_CASE("sphere with torque cometric is flat at the equator") {
    SystemDefinition sys = builtin("sphere_torque");
    Vector q = vec2(0.3, 0.0);
    CHECK((sys.mass(q) - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((sys.induced(q) - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("sphere chart rejects points at the poles") {
    SystemDefinition sys = builtin("sphere_torque");
    CHECK_THROWS_AS(sys.mass(vec2(0.0, M_PI / 2)), Error);
    CHECK_THROWS_AS(sys.mass(vec2(0.0, -1.6)), Error);
}

TEST_CASE("serial two-link mass matrix at the straight-up elbow-down configuration") {
    // joint angles (pi/2, -pi/2): distal link horizontal, jacobian [[-L1, 0], [L2, L2]]
    SystemDefinition sys = builtin("twolink_serial");
    Vector q = vec2(M_PI / 2, -M_PI / 2);
    Matrix M = sys.mass(q);
    CHECK((M - mat2(2, 1, 1, 1)).cwiseAbs().maxCoeff() < 1e-12);
    Matrix Minv = M.inverse();
    CHECK((Minv - mat2(1, -1, -1, 2)).cwiseAbs().maxCoeff() < 1e-12);

    // general L1, L2, m
    SystemDefinition scaled = builtin("twolink_serial", {{"L1", 1.5}, {"L2", 0.8}, {"m", 2.0}});
    Matrix Ms = scaled.mass(q);
    const double L = 1.5, ell = 0.8, m = 2.0;
    CHECK((Ms - m * mat2(L * L + ell * ell, ell * ell, ell * ell, ell * ell))
              .cwiseAbs()
              .maxCoeff() < 1e-12);
    Matrix Msinv = Ms.inverse();
    CHECK(Msinv(0, 0) == doctest::Approx(1.0 / (m * L * L)).epsilon(1e-12));
    CHECK(Msinv(0, 1) == doctest::Approx(-1.0 / (m * L * L)).epsilon(1e-12));
    CHECK(Msinv(1, 1) == doctest::Approx((L * L + ell * ell) / (ell * ell) / (m * L * L))
                             .epsilon(1e-12));
}

TEST_CASE("torus mass and induced metric on the outer circle") {
    SystemDefinition sys = builtin("torus_torque", {{"ell", 2.0}});
    Vector q = vec2(0.7, 0.0);
    CHECK((sys.mass(q) - mat2(9, 0, 0, 1)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((sys.induced(q) - mat2(81, 0, 0, 1)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK_THROWS_AS(builtin("torus_torque", {{"ell", 0.5}}), Error);
}

TEST_CASE("two-link parameter validation") {
    CHECK_THROWS_AS(builtin("twolink_serial", {{"L1", 0.0}}), Error);
    CHECK_THROWS_AS(builtin("twolink_parallel", {{"m", -1.0}}), Error);
}

TEST_CASE("builtin analytic partials match finite differences") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(-1.2, 1.2);
    for (const std::string& name : builtin_names()) {
        SystemDefinition sys = builtin(name);
        for (const TensorField* field : {&sys.metric, &sys.cometric}) {
            TensorField plain(sys.dim, [field](const Vector& q) { return field->value(q); });
            for (int rep = 0; rep < 100; ++rep) {
                Vector q(2);
                q << u(rng), u(rng);
                auto exact = field->partials(q);
                auto fd = plain.partials(q);
                for (int k = 0; k < sys.dim; ++k) {
                    double scale = 1.0 + exact[k].cwiseAbs().maxCoeff();
                    CHECK((exact[k] - fd[k]).cwiseAbs().maxCoeff() / scale < 1e-6);
                }
            }
        }
    }
}

TEST_CASE("serial and parallel two-link charts are pullback-related") {
    // parallel coordinates (b1, b2) = (a1, a1 + a2): velocity map J = [[1,0],[1,1]]
    SystemDefinition serial = builtin("twolink_serial");
    SystemDefinition parallel = builtin("twolink_parallel");
    Matrix J = mat2(1, 0, 1, 1);

    Vector a = vec2(0.4, 0.9);
    Vector b = vec2(0.4, 1.3);

    Matrix pulled_metric = pullback_cometric(parallel.mass(b), J);  // same J^T T J rule
    CHECK((pulled_metric - serial.mass(a)).cwiseAbs().maxCoeff() < 1e-10);

    // squaring the metric does not commute with the chart change
    Matrix pulled_induced = pullback_cometric(parallel.induced(b), J);
    CHECK((pulled_induced - serial.induced(a)).cwiseAbs().maxCoeff() > 1e-3);
}

TEST_CASE("sphere torque system satisfies N = M squared") {
    SystemDefinition sys = builtin("sphere_torque");
    std::mt19937 rng(6);
    std::uniform_real_distribution<double> u(-1.4, 1.4);
    for (int rep = 0; rep < 20; ++rep) {
        Vector q = vec2(u(rng), u(rng));
        Matrix M = sys.mass(q);
        CHECK((sys.induced(q) - M * M).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("expression system reproduces the flat quadratic builtin") {
    SystemDefinition ref = builtin("flat_quadratic");
    SystemDefinition expr = system_from_expressions(
        2, {"x", "y"}, {{"1", "0"}, {"", "1"}}, {{"1 + 10*y^2", "0"}, {"", "1"}});
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int rep = 0; rep < 20; ++rep) {
        Vector q = vec2(u(rng), u(rng));
        CHECK((expr.mass(q) - ref.mass(q)).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((expr.cometric_matrix(q) - ref.cometric_matrix(q)).cwiseAbs().maxCoeff() < 1e-12);
        GeometryCache a = evaluate_geometry(expr, q);
        GeometryCache b = evaluate_geometry(ref, q);
        for (int k = 0; k < 2; ++k)
            CHECK((a.gamma.gamma[k] - b.gamma.gamma[k]).cwiseAbs().maxCoeff() < 1e-12);
        for (int i = 0; i < 2; ++i)
            CHECK((a.tau.tau[i] - b.tau.tau[i]).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("expression sphere with dual cometric has vanishing compatibility tensor") {
    SystemDefinition sys = system_from_expressions(
        2, {"lam", "phi"}, {{"cos(phi)^2", "0"}, {"", "1"}},
        {{"1 / cos(phi)^2", "0"}, {"", "1"}});
    Vector q = vec2(0.3, 0.6);
    GeometryCache geo = evaluate_geometry(sys, q);
    for (int i = 0; i < 2; ++i) CHECK(geo.tau.tau[i].cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("one-dimensional expression system") {
    SystemDefinition sys = system_from_expressions(1, {"x"}, {{"1"}}, {{"1"}});
    Vector q(1);
    q << 0.5;
    CHECK(sys.mass(q)(0, 0) == doctest::Approx(1.0));
    CHECK(sys.hstar(q)(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("expression system validation") {
    // SPD probe failure: cometric goes negative inside the probe box
    CHECK_THROWS_AS(system_from_expressions(2, {"x", "y"}, {{"1", "0"}, {"", "1"}},
                                            {{"y", "0"}, {"", "1"}}),
                    Error);
    // wrong grid shape
    CHECK_THROWS_AS(system_from_expressions(2, {"x", "y"}, {{"1", "0"}}, {{"1", "0"}, {"", "1"}}),
                    Error);
}
