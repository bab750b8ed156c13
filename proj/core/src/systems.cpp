#include "torqopt/systems.hpp"

#include <cmath>
#include <functional>

#include "torqopt/errors.hpp"
#include "torqopt/expression.hpp"

namespace torqopt {

namespace {

using DomainCheck = std::function<void(const Vector&)>;

// d x d grid of parsed expressions evaluated as a TensorField with exact
// hyper-dual partials.
TensorField field_from_expressions(int d, const std::vector<std::string>& coords,
                                   std::vector<std::vector<Expression>> entries,
                                   std::map<std::string, double> params,
                                   DomainCheck domain = nullptr) {
    auto value = [=](const Vector& q) {
        if (domain) domain(q);
        std::map<std::string, double> bindings = params;
        for (int i = 0; i < d; ++i) bindings[coords[i]] = q[i];
        Matrix m(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) m(i, j) = entries[i][j].eval(bindings);
        return m;
    };
    auto both = [=](const Vector& q) {
        if (domain) domain(q);
        std::vector<Matrix> first(d, Matrix(d, d));
        std::vector<std::vector<Matrix>> second(d, std::vector<Matrix>(d, Matrix(d, d)));
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                const auto p = entries[i][j].eval_with_partials(coords, q, params);
                for (int k = 0; k < d; ++k) {
                    first[k](i, j) = p.gradient[k];
                    for (int l = 0; l < d; ++l) second[k][l](i, j) = p.hessian(k, l);
                }
            }
        return std::make_pair(first, second);
    };
    auto partials = [both](const Vector& q) { return both(q).first; };
    auto second_partials = [both](const Vector& q) { return both(q).second; };
    return TensorField(d, value, partials, second_partials);
}

TensorField field_from_texts(int d, const std::vector<std::string>& coords,
                             const std::vector<std::vector<std::string>>& texts,
                             const std::map<std::string, double>& params,
                             DomainCheck domain = nullptr) {
    if (static_cast<int>(texts.size()) != d)
        throw Error("tensor entry grid must have " + std::to_string(d) + " rows");
    std::vector<std::vector<Expression>> entries(d);
    for (int i = 0; i < d; ++i) {
        if (static_cast<int>(texts[i].size()) != d)
            throw Error("tensor entry grid must have " + std::to_string(d) + " columns");
        for (int j = 0; j < d; ++j) {
            const std::string& text = texts[i][j].empty() ? texts[j][i] : texts[i][j];
            if (text.empty())
                throw Error("tensor entry (" + std::to_string(i) + "," + std::to_string(j) +
                            ") is missing");
            entries[i].push_back(Expression::parse(text));
        }
    }
    return field_from_expressions(d, coords, std::move(entries), params, std::move(domain));
}

constexpr double kSphereMargin = 1e-3;

void sphere_domain(const Vector& q) {
    if (std::abs(q[1]) >= M_PI / 2 - kSphereMargin)
        throw EvaluationError("sphere chart: latitude too close to a pole");
}

double param_or(const std::map<std::string, double>& params, const std::string& key, double dflt) {
    auto it = params.find(key);
    return it == params.end() ? dflt : it->second;
}

}  // namespace

Matrix SystemDefinition::induced(const Vector& q) const {
    const Matrix m = metric.value(q);
    return m * cometric.value(q) * m;
}

Matrix SystemDefinition::hstar(const Vector& q) const { return dual_cometric(induced(q)); }

std::vector<Matrix> SystemDefinition::hstar_partials(const Vector& q) const {
    const Matrix m = metric.value(q);
    const Matrix nt = cometric.value(q);
    const Matrix hs = dual_cometric(m * nt * m);
    const auto dm = metric.partials(q);
    const auto dnt = cometric.partials(q);
    std::vector<Matrix> out(dim);
    for (int k = 0; k < dim; ++k) {
        const Matrix dn = dm[k] * nt * m + m * dnt[k] * m + m * nt * dm[k];
        out[k] = -hs * dn * hs;
    }
    return out;
}

TensorField SystemDefinition::hstar_field() const {
    SystemDefinition copy = *this;
    return TensorField(
        dim, [copy](const Vector& q) { return copy.hstar(q); },
        [copy](const Vector& q) { return copy.hstar_partials(q); });
}

GeometryCache evaluate_geometry(const SystemDefinition& system, const Vector& q,
                                bool with_curvature) {
    GeometryCache out;
    out.mass = system.metric.value(q);
    Eigen::LLT<Matrix> llt(out.mass);
    if (llt.info() != Eigen::Success)
        throw SingularMatrixError("metric is not positive definite at the queried point");
    out.mass_inv = llt.solve(Matrix::Identity(system.dim, system.dim));
    out.cometric = system.cometric.value(q);
    out.induced = out.mass * out.cometric * out.mass;
    out.hstar = dual_cometric(out.induced);
    out.gamma = christoffel(system.metric, q);
    if (with_curvature) {
        out.riemann = curvature(system.metric, q);
        out.tau = compatibility_tensor(system.hstar_partials(q), out.gamma, out.hstar);
    }
    return out;
}

SystemDefinition builtin(const std::string& name, const std::map<std::string, double>& params) {
    SystemDefinition s;
    s.name = name;
    s.dim = 2;
    s.params = params;
    if (name == "flat_quadratic") {
        s.coordinates = {"x", "y"};
        s.periodic = {false, false};
        s.metric = TensorField::constant(Matrix::Identity(2, 2));
        s.cometric = field_from_texts(2, s.coordinates, {{"1+10*y^2", "0"}, {"0", "1"}}, {});
    } else if (name == "sphere_dual" || name == "sphere_torque") {
        s.coordinates = {"lambda", "phi"};
        s.periodic = {true, false};
        s.metric =
            field_from_texts(2, s.coordinates, {{"cos(phi)^2", "0"}, {"0", "1"}}, {}, sphere_domain);
        if (name == "sphere_dual")
            s.cometric = field_from_texts(2, s.coordinates, {{"1/cos(phi)^2", "0"}, {"0", "1"}}, {},
                                          sphere_domain);
        else
            s.cometric = TensorField::constant(Matrix::Identity(2, 2));
    } else if (name == "torus_torque") {
        const double ell = param_or(params, "ell", 2.0);
        if (!(ell > 1.0)) throw Error("torus_torque: parameter ell must exceed 1");
        s.params["ell"] = ell;
        s.coordinates = {"theta", "phi"};
        s.periodic = {true, true};
        s.metric = field_from_texts(2, s.coordinates, {{"(ell+cos(phi))^2", "0"}, {"0", "1"}},
                                    {{"ell", ell}});
        s.cometric = TensorField::constant(Matrix::Identity(2, 2));
    } else if (name == "twolink_serial" || name == "twolink_parallel") {
        const double L1 = param_or(params, "L1", 1.0);
        const double L2 = param_or(params, "L2", 1.0);
        const double m = param_or(params, "m", 1.0);
        if (!(L1 > 0) || !(L2 > 0) || !(m > 0))
            throw Error(name + ": parameters L1, L2, m must be positive");
        s.params = {{"L1", L1}, {"L2", L2}, {"m", m}};
        const std::map<std::string, double> p = s.params;
        if (name == "twolink_serial") {
            // Joint angles (a1, a2); link orientations theta1 = a1,
            // theta2 = a1 + a2; point mass m at the distal end.
            s.coordinates = {"a1", "a2"};
            s.metric = field_from_texts(
                2, s.coordinates,
                {{"m*(L1^2 + L2^2 + 2*L1*L2*cos(a2))", "m*(L2^2 + L1*L2*cos(a2))"},
                 {"", "m*L2^2"}},
                p);
        } else {
            // Absolute link orientations (b1, b2).
            s.coordinates = {"b1", "b2"};
            s.metric = field_from_texts(
                2, s.coordinates,
                {{"m*L1^2", "m*L1*L2*cos(b1-b2)"}, {"", "m*L2^2"}}, p);
        }
        s.periodic = {true, true};
        s.cometric = TensorField::constant(Matrix::Identity(2, 2));
    } else {
        throw Error("unknown builtin system '" + name + "'");
    }
    return s;
}

std::vector<std::string> builtin_names() {
    return {"flat_quadratic", "sphere_dual",    "sphere_torque",
            "torus_torque",   "twolink_serial", "twolink_parallel"};
}

SystemDefinition system_from_expressions(int dim, const std::vector<std::string>& coordinates,
                                         const std::vector<std::vector<std::string>>& metric_entries,
                                         const std::vector<std::vector<std::string>>& cometric_entries,
                                         const std::map<std::string, double>& params) {
    if (static_cast<int>(coordinates.size()) != dim)
        throw Error("system_from_expressions: coordinate count does not match dimension");
    SystemDefinition s;
    s.name = "expression";
    s.dim = dim;
    s.params = params;
    s.coordinates = coordinates;
    s.periodic.assign(dim, false);
    s.metric = field_from_texts(dim, coordinates, metric_entries, params);
    s.cometric = field_from_texts(dim, coordinates, cometric_entries, params);

    // SPD / symmetry probe on a coarse grid around the origin.
    std::vector<double> ticks = {-0.9, 0.0, 0.9};
    std::vector<Vector> probes;
    const int total = static_cast<int>(std::pow(ticks.size(), dim));
    for (int n = 0; n < total; ++n) {
        Vector q(dim);
        int rest = n;
        for (int k = 0; k < dim; ++k) {
            q[k] = ticks[rest % ticks.size()];
            rest /= static_cast<int>(ticks.size());
        }
        probes.push_back(q);
    }
    for (const Vector& q : probes) {
        try {
            s.metric.value(q);
            s.cometric.value(q);
        } catch (const DomainError&) {
            continue;  // probe point outside the expressions' domain
        } catch (const Error& e) {
            std::string point = "(";
            for (int k = 0; k < dim; ++k) point += (k ? "," : "") + std::to_string(q[k]);
            point += ")";
            throw Error(std::string(e.what()) + " at probe point " + point);
        }
    }
    return s;
}

}  // namespace torqopt
