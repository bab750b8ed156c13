#include "torqopt/geometry.hpp"

#include <cmath>

#include "torqopt/errors.hpp"

namespace torqopt {

namespace {

Matrix spd_inverse(const Matrix& m, const char* what) {
    Eigen::LLT<Matrix> llt(m);
    if (llt.info() != Eigen::Success) throw SingularMatrixError(what);
    return llt.solve(Matrix::Identity(m.rows(), m.cols()));
}

// B_j,kl = (d_l g_jk + d_k g_jl - d_j g_kl) / 2
double lowered_christoffel(const std::vector<Matrix>& dg, int j, int k, int l) {
    return 0.5 * (dg[l](j, k) + dg[k](j, l) - dg[j](k, l));
}

ChristoffelData christoffel_from(const Matrix& minv, const std::vector<Matrix>& dg) {
    const int d = static_cast<int>(minv.rows());
    ChristoffelData out;
    out.gamma.assign(d, Matrix::Zero(d, d));
    for (int m = 0; m < d; ++m)
        for (int k = 0; k < d; ++k)
            for (int l = k; l < d; ++l) {
                double s = 0.0;
                for (int j = 0; j < d; ++j) s += minv(m, j) * lowered_christoffel(dg, j, k, l);
                out.gamma[m](k, l) = s;
                out.gamma[m](l, k) = s;
            }
    return out;
}

}  // namespace

ChristoffelData christoffel(const TensorField& metric, const Vector& q) {
    const Matrix m = metric.value(q);
    const Matrix minv = spd_inverse(m, "metric is not invertible at the queried point");
    return christoffel_from(minv, metric.partials(q));
}

CurvatureData curvature(const TensorField& metric, const Vector& q) {
    const int d = metric.dim();
    // dgamma[i][m](k,l) = d_i Gamma^m_kl
    std::vector<std::vector<Matrix>> dgamma(d, std::vector<Matrix>(d, Matrix::Zero(d, d)));
    if (metric.has_analytic_second_partials()) {
        const Matrix m = metric.value(q);
        const Matrix minv = spd_inverse(m, "metric is not invertible at the queried point");
        const auto dg = metric.partials(q);
        const auto ddg = metric.second_partials(q);
        for (int i = 0; i < d; ++i) {
            const Matrix dminv = -minv * dg[i] * minv;
            for (int mm = 0; mm < d; ++mm)
                for (int k = 0; k < d; ++k)
                    for (int l = 0; l < d; ++l) {
                        double s = 0.0;
                        for (int j = 0; j < d; ++j) {
                            const double db = 0.5 * (ddg[i][l](j, k) + ddg[i][k](j, l) -
                                                     ddg[i][j](k, l));
                            s += dminv(mm, j) * lowered_christoffel(dg, j, k, l) +
                                 minv(mm, j) * db;
                        }
                        dgamma[i][mm](k, l) = s;
                    }
        }
    } else {
        Vector qp = q;
        for (int i = 0; i < d; ++i) {
            const double h = TensorField::fd_step(q[i]);
            qp[i] = q[i] + h;
            ChristoffelData plus = christoffel(metric, qp);
            qp[i] = q[i] - h;
            ChristoffelData minus = christoffel(metric, qp);
            qp[i] = q[i];
            for (int mm = 0; mm < d; ++mm)
                dgamma[i][mm] = (plus.gamma[mm] - minus.gamma[mm]) / (2.0 * h);
        }
    }
    const ChristoffelData g = christoffel(metric, q);
    CurvatureData out;
    out.d = d;
    out.coeffs.assign(static_cast<std::size_t>(d) * d * d * d, 0.0);
    for (int l = 0; l < d; ++l)
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                for (int k = 0; k < d; ++k) {
                    double s = dgamma[i][l](j, k) - dgamma[j][l](i, k);
                    for (int n = 0; n < d; ++n)
                        s += g(n, j, k) * g(l, i, n) - g(n, i, k) * g(l, j, n);
                    out.at(l, i, j, k) = s;
                }
    return out;
}

Matrix induced_metric(const TensorField& metric, const TensorField& cometric, const Vector& q) {
    const Matrix m = metric.value(q);
    return m * cometric.value(q) * m;
}

Matrix dual_cometric(const Matrix& induced) {
    return spd_inverse(induced, "induced metric is degenerate");
}

CompatibilityData compatibility_tensor(const std::vector<Matrix>& cometric_partials,
                                       const ChristoffelData& gamma, const Matrix& cometric_value) {
    const int d = gamma.dim();
    CompatibilityData out;
    out.tau.assign(d, Matrix::Zero(d, d));
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k) {
                double s = cometric_partials[i](j, k);
                for (int l = 0; l < d; ++l)
                    s += gamma(j, i, l) * cometric_value(l, k) +
                         gamma(k, i, l) * cometric_value(j, l);
                out.tau[i](j, k) = s;
            }
    return out;
}

CompatibilityData compatibility_tensor(const TensorField& cometric, const TensorField& metric,
                                       const Vector& q) {
    return compatibility_tensor(cometric.partials(q), christoffel(metric, q), cometric.value(q));
}

Matrix mass_matrix_from_jacobians(const std::vector<Matrix>& jacobians,
                                  const std::vector<double>& weights) {
    if (jacobians.empty()) throw Error("mass_matrix_from_jacobians: no Jacobians given");
    if (!weights.empty() && weights.size() != jacobians.size())
        throw Error("mass_matrix_from_jacobians: weight count does not match Jacobian count");
    const auto d = jacobians.front().cols();
    Matrix m = Matrix::Zero(d, d);
    for (std::size_t i = 0; i < jacobians.size(); ++i) {
        if (jacobians[i].cols() != d)
            throw Error("mass_matrix_from_jacobians: inconsistent column counts");
        const double w = weights.empty() ? 1.0 : weights[i];
        m += w * jacobians[i].transpose() * jacobians[i];
    }
    return m;
}

TensorField torque_cometric(const std::vector<double>& weights) {
    const int n = static_cast<int>(weights.size());
    Matrix m = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        if (!(weights[i] > 0.0)) throw Error("torque_cometric: weights must be positive");
        m(i, i) = weights[i];
    }
    return TensorField::constant(m);
}

Matrix pullback_cometric(const Matrix& cometric, const Matrix& jacobian) {
    Eigen::FullPivLU<Matrix> lu(jacobian);
    if (!lu.isInvertible()) throw SingularMatrixError("pullback_cometric: singular Jacobian");
    return jacobian.transpose() * cometric * jacobian;
}

std::vector<Vector> indicatrix_samples(const Matrix& matrix, int count) {
    if (matrix.rows() != 2 || matrix.cols() != 2)
        throw Error("indicatrix_samples: only 2x2 matrices are supported");
    Eigen::LLT<Matrix> llt(matrix);
    if (llt.info() != Eigen::Success)
        throw SingularMatrixError("indicatrix_samples: matrix is not positive definite");
    std::vector<Vector> out;
    out.reserve(count);
    for (int k = 0; k < count; ++k) {
        const double theta = 2.0 * M_PI * k / count;
        Vector u(2);
        u << std::cos(theta), std::sin(theta);
        out.push_back(u / std::sqrt(u.dot(matrix * u)));
    }
    return out;
}

}  // namespace torqopt
