#pragma once

#include <map>
#include <string>
#include <vector>

#include "torqopt/geometry.hpp"
#include "torqopt/tensor_field.hpp"

namespace torqopt {

/// A mechanical system (Q, g, gtilde): a chart of dimension d, the kinetic
/// metric field M and the actuation cometric field Ntilde. Immutable after
/// construction and safe to share across threads.
struct SystemDefinition {
    std::string name;
    int dim = 0;
    TensorField metric;    // M
    TensorField cometric;  // Ntilde
    std::map<std::string, double> params;
    std::vector<std::string> coordinates;
    std::vector<bool> periodic;

    Matrix mass(const Vector& q) const { return metric.value(q); }
    Matrix cometric_matrix(const Vector& q) const { return cometric.value(q); }

    /// Induced metric N = M Ntilde M.
    Matrix induced(const Vector& q) const;

    /// h* = N^{-1}.
    Matrix hstar(const Vector& q) const;

    /// d_k h* = -h* (d_k N) h*, with d_k N assembled from the metric and
    /// cometric partials.
    std::vector<Matrix> hstar_partials(const Vector& q) const;

    /// h* as a TensorField (value + first partials), e.g. for
    /// compatibility_tensor().
    TensorField hstar_field() const;
};

/// Everything the equations of motion need at one chart point.
struct GeometryCache {
    Matrix mass, mass_inv, cometric, induced, hstar;
    ChristoffelData gamma;
    CurvatureData riemann;
    CompatibilityData tau;  // tau of h* under the dual connection of g
};

/// Evaluate the full pointwise tensor package. Curvature and tau are skipped
/// when `with_curvature` is false (they are only needed by the costate
/// equations).
GeometryCache evaluate_geometry(const SystemDefinition& system, const Vector& q,
                                bool with_curvature = true);

/// Catalog of the built-in example systems:
///   flat_quadratic  d=2, M = I, Ntilde = diag(1+10y^2, 1)
///   sphere_dual     d=2, M = diag(cos^2 phi, 1), Ntilde = M^{-1}
///   sphere_torque   d=2, M = diag(cos^2 phi, 1), Ntilde = I
///   torus_torque    d=2, M = diag((ell+cos phi)^2, 1), Ntilde = I  (ell > 1)
///   twolink_serial  d=2, planar two-link arm, joint-angle coordinates,
///                   point mass m at the distal end, Ntilde = I
///   twolink_parallel  same arm in absolute link orientations, Ntilde = I
/// Parameters: ell (torus), L1, L2, m (two-link); unset entries take
/// defaults ell=2, L1=L2=1, m=1.
SystemDefinition builtin(const std::string& name,
                         const std::map<std::string, double>& params = {});

/// Names accepted by builtin().
std::vector<std::string> builtin_names();

/// System with metric and cometric given as d x d grids of expression
/// strings in the declared coordinates. An empty string in slot (i,j)
/// mirrors slot (j,i). Both tensors are probed for symmetry and positive
/// definiteness on a coarse grid; the failing point is reported.
SystemDefinition system_from_expressions(int dim, const std::vector<std::string>& coordinates,
                                         const std::vector<std::vector<std::string>>& metric_entries,
                                         const std::vector<std::vector<std::string>>& cometric_entries,
                                         const std::map<std::string, double>& params = {});

}  // namespace torqopt
