#include "torqopt/tensor_field.hpp"

#include <cmath>

#include "torqopt/errors.hpp"

namespace torqopt {

namespace {

constexpr double kSymmetryTol = 1e-12;

void check_matrix(const Matrix& m, int dim, bool require_spd) {
    if (m.rows() != dim || m.cols() != dim)
        throw EvaluationError("tensor evaluator returned wrong dimensions");
    if (!m.allFinite()) throw EvaluationError("tensor evaluator returned nonfinite entries");
    const double scale = 1.0 + m.cwiseAbs().maxCoeff();
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol * scale)
        throw EvaluationError("tensor evaluator returned an asymmetric matrix");
    if (require_spd) {
        Eigen::LLT<Matrix> llt(m);
        if (llt.info() != Eigen::Success)
            throw SingularMatrixError("tensor value is not positive definite");
    }
}

}  // namespace

TensorField::TensorField(int dim, Evaluator value, PartialEvaluator partials,
                         SecondPartialEvaluator second_partials, bool require_spd)
    : dim_(dim),
      value_(std::move(value)),
      partials_(std::move(partials)),
      second_partials_(std::move(second_partials)),
      require_spd_(require_spd) {}

TensorField TensorField::constant(const Matrix& m, bool require_spd) {
    const int d = static_cast<int>(m.rows());
    Matrix copy = m;
    return TensorField(
        d, [copy](const Vector&) { return copy; },
        [d](const Vector&) { return std::vector<Matrix>(d, Matrix::Zero(d, d)); },
        [d](const Vector&) {
            return std::vector<std::vector<Matrix>>(d,
                                                    std::vector<Matrix>(d, Matrix::Zero(d, d)));
        },
        require_spd);
}

double TensorField::fd_step(double qk) {
    return std::max(1e-5 * std::abs(qk), 1e-7);
}

Matrix TensorField::value(const Vector& q) const {
    Matrix m = value_(q);
    check_matrix(m, dim_, require_spd_);
    return m;
}

std::vector<Matrix> TensorField::partials(const Vector& q) const {
    if (partials_) return partials_(q);
    std::vector<Matrix> out(dim_);
    Vector qp = q;
    for (int k = 0; k < dim_; ++k) {
        const double h = fd_step(q[k]);
        qp[k] = q[k] + h;
        Matrix plus = value_(qp);
        qp[k] = q[k] - h;
        Matrix minus = value_(qp);
        qp[k] = q[k];
        out[k] = (plus - minus) / (2.0 * h);
    }
    return out;
}

std::vector<std::vector<Matrix>> TensorField::second_partials(const Vector& q) const {
    if (second_partials_) return second_partials_(q);
    std::vector<std::vector<Matrix>> out(dim_, std::vector<Matrix>(dim_));
    Vector qp = q;
    for (int k = 0; k < dim_; ++k) {
        const double h = fd_step(q[k]);
        qp[k] = q[k] + h;
        std::vector<Matrix> plus = partials(qp);
        qp[k] = q[k] - h;
        std::vector<Matrix> minus = partials(qp);
        qp[k] = q[k];
        for (int l = 0; l < dim_; ++l) out[k][l] = (plus[l] - minus[l]) / (2.0 * h);
    }
    return out;
}

}  // namespace torqopt
