#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace torqopt {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// A symmetric d x d matrix field on a chart domain, with optional analytic
/// first and second partial derivatives. When partials are not supplied they
/// are approximated by central finite differences of the evaluator
/// (relative step 1e-5, absolute floor 1e-7).
class TensorField {
public:
    using Evaluator = std::function<Matrix(const Vector& q)>;
    // partials[k](i,j) = d T_ij / d q^k
    using PartialEvaluator = std::function<std::vector<Matrix>(const Vector& q)>;
    // second[k][l](i,j) = d^2 T_ij / (d q^k d q^l)
    using SecondPartialEvaluator =
        std::function<std::vector<std::vector<Matrix>>(const Vector& q)>;

    TensorField() = default;
    TensorField(int dim, Evaluator value, PartialEvaluator partials = nullptr,
                SecondPartialEvaluator second_partials = nullptr,
                bool require_spd = true);

    /// Constant field with exact zero partials.
    static TensorField constant(const Matrix& m, bool require_spd = true);

    int dim() const { return dim_; }
    bool requires_spd() const { return require_spd_; }
    bool has_analytic_partials() const { return static_cast<bool>(partials_); }
    bool has_analytic_second_partials() const { return static_cast<bool>(second_partials_); }

    /// Evaluate the field. Throws EvaluationError on an asymmetric or
    /// nonfinite result and SingularMatrixError if SPD is required but the
    /// Cholesky factorization fails.
    Matrix value(const Vector& q) const;

    /// First partials, analytic when available, else finite differences of
    /// value().
    std::vector<Matrix> partials(const Vector& q) const;

    /// Second partials, analytic when available, else finite differences of
    /// partials().
    std::vector<std::vector<Matrix>> second_partials(const Vector& q) const;

    /// Finite-difference step used for coordinate q_k at point q.
    static double fd_step(double qk);

private:
    int dim_ = 0;
    Evaluator value_;
    PartialEvaluator partials_;
    SecondPartialEvaluator second_partials_;
    bool require_spd_ = true;
};

}  // namespace torqopt
