#pragma once

#include <vector>

#include "torqopt/dynamics.hpp"
#include "torqopt/systems.hpp"

namespace torqopt {

/// State of the first-order optimality system: configuration q, velocity v
/// and the two costate covectors alpha and p (chart components).
struct ExtendedState {
    Vector q, v, alpha, p;

    static ExtendedState zero(int dim);
    Vector pack() const;
    static ExtendedState unpack(const Vector& x, int dim);
    bool finite() const;
};

ExtendedState operator+(const ExtendedState& a, const ExtendedState& b);
ExtendedState operator*(double s, const ExtendedState& a);

/// Integrated flow on a uniform grid over [0, T].
struct HamiltonianTrajectory {
    std::vector<double> times;
    std::vector<ExtendedState> states;
    std::vector<CurveSample> samples;    // qdd = (1/2) h* alpha - Gamma(v, v)
    std::vector<ForceData> forces;       // a = (1/2) h* alpha at each node
    std::vector<double> hamiltonian;     // H at each node

    /// max |H(t) - H(0)| / (1 + |H(0)|)
    double hamiltonian_drift() const;

    /// Chart samples with exact qdd = (1/2) h* alpha - Gamma(v, v).
    Trajectory as_trajectory() const;

    /// Trapezoid of the cost density.
    double cost() const;
};

/// Right-hand side of the optimality system:
///   qdot^i     = v^i
///   vdot^i     = (1/2)(h*)^{ji} alpha_j - Gamma^i_jk v^j v^k
///   alphadot_i = Gamma^j_ki v^k alpha_j - p_i
///   pdot_i     = Gamma^j_ki v^k p_j - (1/4) tau_i^{jk} alpha_j alpha_k
///                + R^l_{ijk} v^j v^k alpha_l
ExtendedState rhs(const SystemDefinition& system, const ExtendedState& state);

/// H = (1/4) h*(alpha, alpha) + <p, v>. Conserved along exact flow.
double hamiltonian_value(const SystemDefinition& system, const ExtendedState& state);

/// Classical fixed-step RK4 over [0, horizon] with `steps` steps (n+1
/// nodes). Throws DivergenceError when the state leaves the finite range,
/// carrying the last valid time.
HamiltonianTrajectory integrate(const SystemDefinition& system, const ExtendedState& initial,
                                double horizon, int steps);

}  // namespace torqopt
