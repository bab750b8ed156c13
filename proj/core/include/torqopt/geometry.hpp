#pragma once

#include <vector>

#include "torqopt/tensor_field.hpp"

namespace torqopt {

/// Christoffel symbols of the Levi-Civita connection at a point.
/// gamma[k](i,j) = Gamma^k_ij, symmetric in (i,j).
struct ChristoffelData {
    std::vector<Matrix> gamma;
    double operator()(int k, int i, int j) const { return gamma[k](i, j); }
    int dim() const { return static_cast<int>(gamma.size()); }
};

/// Riemann curvature coefficients R^l_ijk defined by
/// <alpha, R(X,Y)Z> = R^l_ijk X^i Y^j Z^k alpha_l.
struct CurvatureData {
    int d = 0;
    std::vector<double> coeffs;  // flat [l][i][j][k]
    double operator()(int l, int i, int j, int k) const {
        return coeffs[((l * d + i) * d + j) * d + k];
    }
    double& at(int l, int i, int j, int k) { return coeffs[((l * d + i) * d + j) * d + k]; }
};

/// Coefficients tau_i^jk of the dual-connection derivative of a cometric,
/// symmetric in the upper (j,k) pair. tau[i](j,k).
struct CompatibilityData {
    std::vector<Matrix> tau;
    double operator()(int i, int j, int k) const { return tau[i](j, k); }
    int dim() const { return static_cast<int>(tau.size()); }
};

/// Christoffel symbols of `metric` at q, solved from
/// g_ij Gamma^i_kl = (d_l g_jk + d_k g_jl - d_j g_kl) / 2.
ChristoffelData christoffel(const TensorField& metric, const Vector& q);

/// Riemann curvature R^l_ijk = d_i Gamma^l_jk - d_j Gamma^l_ik
///                           + Gamma^n_jk Gamma^l_in - Gamma^n_ik Gamma^l_jn.
/// Partials of Gamma come from second metric partials when analytic,
/// otherwise from finite differences of christoffel().
CurvatureData curvature(const TensorField& metric, const Vector& q);

/// Induced ("anti-dual") metric N = M Ntilde M at q.
Matrix induced_metric(const TensorField& metric, const TensorField& cometric, const Vector& q);

/// Inverse of an SPD induced-metric matrix. Throws SingularMatrixError on a
/// degenerate input.
Matrix dual_cometric(const Matrix& induced);

/// tau_i^jk = d_i (h*)^jk + Gamma^j_il (h*)^lk + Gamma^k_il (h*)^jl,
/// with Gamma taken from `metric`. Vanishes identically when the cometric is
/// the dual of the metric.
CompatibilityData compatibility_tensor(const TensorField& cometric, const TensorField& metric,
                                       const Vector& q);
CompatibilityData compatibility_tensor(const std::vector<Matrix>& cometric_partials,
                                       const ChristoffelData& gamma, const Matrix& cometric_value);

/// Mass matrix sum_i w_i J_i^T J_i from embedding Jacobians; weights default
/// to 1.
Matrix mass_matrix_from_jacobians(const std::vector<Matrix>& jacobians,
                                  const std::vector<double>& weights = {});

/// Constant diagonal torque-cost cometric diag(k_1,...,k_n). All weights must
/// be positive.
TensorField torque_cometric(const std::vector<double>& weights);

/// Pullback of a cometric tensor under a change-of-chart Jacobian:
/// N' = J^T N J. The Jacobian must be invertible.
Matrix pullback_cometric(const Matrix& cometric, const Matrix& jacobian);

/// `count` points u on the unit ball boundary u^T A u = 1 of a 2x2 SPD
/// matrix, uniformly spaced in angle starting from the +x axis.
std::vector<Vector> indicatrix_samples(const Matrix& matrix, int count);

}  // namespace torqopt
