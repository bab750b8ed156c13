#pragma once

#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace torqopt {

/// Parsed arithmetic expression over numbers, identifiers, + - * / ^,
/// unary minus and the functions sin, cos, tan, exp, sqrt.
///
/// Grammar:
///   expr   := term (('+'|'-') term)*
///   term   := factor (('*'|'/') factor)*
///   factor := '-' factor | power
///   power  := atom ('^' factor)?
///   atom   := number | ident | ident '(' expr ')' | '(' expr ')'
class Expression {
public:
    /// Throws ParseError with the byte offset of the offending character.
    static Expression parse(const std::string& text);

    /// Plain evaluation. Unknown identifiers and math domain violations
    /// throw DomainError.
    double eval(const std::map<std::string, double>& bindings) const;

    struct Partials {
        double value;
        Eigen::VectorXd gradient;
        Eigen::MatrixXd hessian;
    };

    /// Value, gradient and Hessian with respect to `vars` at `point`, exact
    /// to roundoff via second-order forward-mode (hyper-dual) evaluation.
    /// Remaining identifiers are bound from `params`.
    Partials eval_with_partials(const std::vector<std::string>& vars, const Eigen::VectorXd& point,
                                const std::map<std::string, double>& params = {}) const;

    /// Identifiers appearing in the expression (functions excluded).
    const std::vector<std::string>& identifiers() const { return names_; }

    const std::string& text() const { return text_; }

private:
    enum class Kind { Number, Variable, Negate, Binary, Call };
    struct Node {
        Kind kind;
        double number = 0.0;
        int name = -1;   // Variable: index into names_; Call: function id
        char op = 0;     // Binary: one of + - * / ^
        int lhs = -1, rhs = -1;
    };

    template <typename T>
    T eval_node(int idx, const std::vector<T>& values) const;

    std::vector<Node> nodes_;
    int root_ = -1;
    std::vector<std::string> names_;
    std::string text_;

    friend class Parser;
};

}  // namespace torqopt
