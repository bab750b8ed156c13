#include "torqopt/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

#include "torqopt/errors.hpp"

namespace torqopt {

namespace {

// Second-order forward-mode scalar: value, derivatives along two seed
// directions and the mixed second derivative.
struct HyperDual {
    double f = 0.0, d1 = 0.0, d2 = 0.0, d12 = 0.0;

    HyperDual() = default;
    HyperDual(double v) : f(v) {}
    HyperDual(double v, double a, double b, double ab) : f(v), d1(a), d2(b), d12(ab) {}
};

HyperDual operator+(const HyperDual& a, const HyperDual& b) {
    return {a.f + b.f, a.d1 + b.d1, a.d2 + b.d2, a.d12 + b.d12};
}
HyperDual operator-(const HyperDual& a, const HyperDual& b) {
    return {a.f - b.f, a.d1 - b.d1, a.d2 - b.d2, a.d12 - b.d12};
}
HyperDual operator-(const HyperDual& a) { return {-a.f, -a.d1, -a.d2, -a.d12}; }
HyperDual operator*(const HyperDual& a, const HyperDual& b) {
    return {a.f * b.f, a.d1 * b.f + a.f * b.d1, a.d2 * b.f + a.f * b.d2,
            a.d12 * b.f + a.d1 * b.d2 + a.d2 * b.d1 + a.f * b.d12};
}

// Chain rule lift of a scalar function with derivatives g' and g''.
HyperDual lift(const HyperDual& u, double g, double gp, double gpp) {
    return {g, gp * u.d1, gp * u.d2, gpp * u.d1 * u.d2 + gp * u.d12};
}

HyperDual operator/(const HyperDual& a, const HyperDual& b) {
    if (b.f == 0.0) throw DomainError("division by zero in '" + std::to_string(b.f) + "'");
    const double inv = 1.0 / b.f;
    return a * lift(b, inv, -inv * inv, 2.0 * inv * inv * inv);
}

bool is_plain(const HyperDual& a) { return a.d1 == 0.0 && a.d2 == 0.0 && a.d12 == 0.0; }

HyperDual hd_pow(const HyperDual& a, const HyperDual& b) {
    // Constant near-integer exponents keep negative bases legal.
    if (is_plain(b)) {
        const double r = std::round(b.f);
        if (std::abs(b.f - r) < 1e-12 && std::abs(r) < 64) {
            int n = static_cast<int>(r);
            if (n == 0) return HyperDual(1.0);
            bool neg = n < 0;
            n = std::abs(n);
            HyperDual acc(1.0);
            for (int i = 0; i < n; ++i) acc = acc * a;
            if (neg) return HyperDual(1.0) / acc;
            return acc;
        }
    }
    if (a.f <= 0.0) throw DomainError("power with nonpositive base and non-integer exponent");
    const double lg = std::log(a.f);
    const HyperDual lna = lift(a, lg, 1.0 / a.f, -1.0 / (a.f * a.f));
    const HyperDual e = b * lna;
    const double ex = std::exp(e.f);
    return lift(e, ex, ex, ex);
}

enum Fn { kSin, kCos, kTan, kExp, kSqrt };

const char* kFnNames[] = {"sin", "cos", "tan", "exp", "sqrt"};

int function_id(const std::string& name) {
    for (int i = 0; i < 5; ++i)
        if (name == kFnNames[i]) return i;
    return -1;
}

double call(int fn, double u) {
    switch (fn) {
        case kSin: return std::sin(u);
        case kCos: return std::cos(u);
        case kTan: {
            const double v = std::tan(u);
            if (!std::isfinite(v)) throw DomainError("tan evaluated at a pole");
            return v;
        }
        case kExp: return std::exp(u);
        default:
            if (u < 0.0) throw DomainError("sqrt of a negative value");
            return std::sqrt(u);
    }
}

HyperDual call(int fn, const HyperDual& u) {
    switch (fn) {
        case kSin: return lift(u, std::sin(u.f), std::cos(u.f), -std::sin(u.f));
        case kCos: return lift(u, std::cos(u.f), -std::sin(u.f), -std::cos(u.f));
        case kTan: {
            const double t = call(kTan, u.f);
            const double sec2 = 1.0 + t * t;
            return lift(u, t, sec2, 2.0 * t * sec2);
        }
        case kExp: {
            const double e = std::exp(u.f);
            return lift(u, e, e, e);
        }
        default: {
            const double s = call(kSqrt, u.f);
            if (s == 0.0 && !is_plain(u)) throw DomainError("sqrt derivative at zero");
            return lift(u, s, 0.5 / s, -0.25 / (s * s * s));
        }
    }
}

}  // namespace

class Parser {
public:
    Parser(const std::string& text, Expression& out) : text_(text), out_(out) {}

    void run() {
        skip_ws();
        if (pos_ >= text_.size()) throw ParseError("empty expression", 0);
        out_.root_ = expr();
        skip_ws();
        if (pos_ < text_.size()) throw ParseError("unexpected trailing input", pos_);
    }

private:
    int expr() {
        int lhs = term();
        for (;;) {
            skip_ws();
            if (peek() == '+' || peek() == '-') {
                const char op = take();
                lhs = binary(op, lhs, term());
            } else {
                return lhs;
            }
        }
    }

    int term() {
        int lhs = factor();
        for (;;) {
            skip_ws();
            if (peek() == '*' || peek() == '/') {
                const char op = take();
                lhs = binary(op, lhs, factor());
            } else {
                return lhs;
            }
        }
    }

    int factor() {
        skip_ws();
        if (peek() == '-') {
            take();
            Expression::Node n;
            n.kind = Expression::Kind::Negate;
            n.lhs = factor();
            return add(n);
        }
        return power();
    }

    int power() {
        int base = atom();
        skip_ws();
        if (peek() == '^') {
            take();
            return binary('^', base, factor());  // right associative
        }
        return base;
    }

    int atom() {
        skip_ws();
        const std::size_t start = pos_;
        const char c = peek();
        if (c == '(') {
            take();
            int inner = expr();
            expect(')');
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* begin = text_.c_str() + pos_;
            char* end = nullptr;
            const double v = std::strtod(begin, &end);
            if (end == begin) throw ParseError("malformed number", start);
            pos_ += end - begin;
            Expression::Node n;
            n.kind = Expression::Kind::Number;
            n.number = v;
            return add(n);
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::string name;
            while (pos_ < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
                name += text_[pos_++];
            skip_ws();
            if (peek() == '(') {
                const int fn = function_id(name);
                if (fn < 0) throw ParseError("unknown function '" + name + "'", start);
                take();
                Expression::Node n;
                n.kind = Expression::Kind::Call;
                n.name = fn;
                n.lhs = expr();
                expect(')');
                return add(n);
            }
            Expression::Node n;
            n.kind = Expression::Kind::Variable;
            n.name = intern(name);
            return add(n);
        }
        throw ParseError(std::string("unexpected character '") + c + "'", start);
    }

    int binary(char op, int lhs, int rhs) {
        Expression::Node n;
        n.kind = Expression::Kind::Binary;
        n.op = op;
        n.lhs = lhs;
        n.rhs = rhs;
        return add(n);
    }

    int add(const Expression::Node& n) {
        out_.nodes_.push_back(n);
        return static_cast<int>(out_.nodes_.size()) - 1;
    }

    int intern(const std::string& name) {
        for (std::size_t i = 0; i < out_.names_.size(); ++i)
            if (out_.names_[i] == name) return static_cast<int>(i);
        out_.names_.push_back(name);
        return static_cast<int>(out_.names_.size()) - 1;
    }

    void expect(char c) {
        skip_ws();
        if (peek() != c)
            throw ParseError(std::string("expected '") + c + "'", pos_);
        take();
    }

    char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }
    char take() { return text_[pos_++]; }
    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    const std::string& text_;
    Expression& out_;
    std::size_t pos_ = 0;
};

Expression Expression::parse(const std::string& text) {
    Expression e;
    e.text_ = text;
    Parser(text, e).run();
    return e;
}

template <typename T>
T Expression::eval_node(int idx, const std::vector<T>& values) const {
    const Node& n = nodes_[idx];
    switch (n.kind) {
        case Kind::Number: return T(n.number);
        case Kind::Variable: return values[n.name];
        case Kind::Negate: return -eval_node(n.lhs, values);
        case Kind::Call: return call(n.name, eval_node(n.lhs, values));
        case Kind::Binary: {
            const T a = eval_node(n.lhs, values);
            const T b = eval_node(n.rhs, values);
            switch (n.op) {
                case '+': return a + b;
                case '-': return a - b;
                case '*': return a * b;
                case '/':
                    if constexpr (std::is_same_v<T, double>) {
                        if (b == 0.0) throw DomainError("division by zero");
                    }
                    return a / b;
                default:
                    if constexpr (std::is_same_v<T, double>) {
                        const double v = std::pow(a, b);
                        if (!std::isfinite(v)) throw DomainError("power out of domain");
                        return v;
                    } else {
                        return hd_pow(a, b);
                    }
            }
        }
    }
    throw Error("corrupt expression tree");
}

double Expression::eval(const std::map<std::string, double>& bindings) const {
    std::vector<double> values(names_.size());
    for (std::size_t i = 0; i < names_.size(); ++i) {
        auto it = bindings.find(names_[i]);
        if (it == bindings.end()) throw DomainError("unbound identifier '" + names_[i] + "'");
        values[i] = it->second;
    }
    return eval_node(root_, values);
}

Expression::Partials Expression::eval_with_partials(const std::vector<std::string>& vars,
                                                    const Eigen::VectorXd& point,
                                                    const std::map<std::string, double>& params)
    const {
    const int d = static_cast<int>(vars.size());
    std::vector<int> var_slot(names_.size(), -1);  // identifier -> var index
    std::vector<HyperDual> base(names_.size());
    for (std::size_t i = 0; i < names_.size(); ++i) {
        bool found = false;
        for (int v = 0; v < d; ++v)
            if (names_[i] == vars[v]) {
                var_slot[i] = v;
                base[i] = HyperDual(point[v]);
                found = true;
                break;
            }
        if (!found) {
            auto it = params.find(names_[i]);
            if (it == params.end())
                throw DomainError("unbound identifier '" + names_[i] + "'");
            base[i] = HyperDual(it->second);
        }
    }

    Partials out;
    out.gradient = Eigen::VectorXd::Zero(d);
    out.hessian = Eigen::MatrixXd::Zero(d, d);
    out.value = 0.0;
    for (int a = 0; a < d; ++a)
        for (int b = a; b < d; ++b) {
            std::vector<HyperDual> values = base;
            for (std::size_t i = 0; i < names_.size(); ++i) {
                if (var_slot[i] == a) values[i].d1 = 1.0;
                if (var_slot[i] == b) values[i].d2 = 1.0;
            }
            const HyperDual r = eval_node(root_, values);
            if (a == 0 && b == 0) out.value = r.f;
            if (b == a) out.gradient[a] = r.d1;
            out.hessian(a, b) = r.d12;
            out.hessian(b, a) = r.d12;
        }
    if (d == 0) {
        std::vector<HyperDual> values = base;
        out.value = eval_node(root_, values).f;
    }
    return out;
}

template double Expression::eval_node<double>(int, const std::vector<double>&) const;

}  // namespace torqopt
