#pragma once

#include <vector>

#include "torqopt/systems.hpp"

namespace torqopt {

/// One sample of a configuration-space curve.
struct CurveSample {
    double t = 0.0;
    Vector q;    // chart point
    Vector v;    // coordinate velocity qdot
    Vector qdd;  // coordinate second derivative
};

using Trajectory = std::vector<CurveSample>;

/// Pointwise force quantities: covariant acceleration a, force F = M a,
/// effort E = N a and the cost density c = F^T Ntilde F = a^T N a.
struct ForceData {
    Vector a, F, E;
    double cost_density = 0.0;
};

/// a^k = qdd^k + Gamma^k_ij v^i v^j.
Vector covariant_acceleration(const SystemDefinition& system, const CurveSample& sample);
Vector covariant_acceleration(const GeometryCache& geo, const CurveSample& sample);

ForceData force_and_effort(const SystemDefinition& system, const CurveSample& sample);
ForceData force_and_effort(const GeometryCache& geo, const CurveSample& sample);

/// Composite trapezoid of the cost density over the sample times. Needs at
/// least two samples.
double trajectory_cost(const SystemDefinition& system, const Trajectory& trajectory);

/// Per-sample residual of the Riemannian cubic spline equation
/// s + R(a, qdot) qdot = 0, with covariant jerk and snap obtained from
/// finite differences in time. Meaningful as a check when Ntilde = M^{-1}.
std::vector<Vector> riemannian_spline_residual(const SystemDefinition& system,
                                               const Trajectory& trajectory);

/// Per-sample residual of the biased-spline fourth-order equation
///   D*D*(E) + (1/2) tau(E, E) + h(a, R(., qdot) qdot) = 0,
/// where E = N a and D* is the dual covariant derivative along the curve.
/// Valid for arbitrary cometrics.
std::vector<Vector> biased_ode_residual(const SystemDefinition& system,
                                        const Trajectory& trajectory);

/// Root-mean-square of the stacked residual entries.
double residual_rms(const std::vector<Vector>& residuals);

/// Fourth-order finite-difference time derivative of a uniformly sampled
/// vector series (one-sided stencils at the ends). Exposed for reuse by the
/// residual oracles and tests.
std::vector<Vector> time_derivative(const std::vector<Vector>& values, double dt);

}  // namespace torqopt
