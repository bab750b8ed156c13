#include "torqopt/hamiltonian.hpp"

#include <cmath>

#include "torqopt/errors.hpp"

namespace torqopt {

ExtendedState ExtendedState::zero(int dim) {
    ExtendedState s;
    s.q = Vector::Zero(dim);
    s.v = Vector::Zero(dim);
    s.alpha = Vector::Zero(dim);
    s.p = Vector::Zero(dim);
    return s;
}

Vector ExtendedState::pack() const {
    const int d = static_cast<int>(q.size());
    Vector x(4 * d);
    x << q, v, alpha, p;
    return x;
}

ExtendedState ExtendedState::unpack(const Vector& x, int dim) {
    ExtendedState s;
    s.q = x.segment(0, dim);
    s.v = x.segment(dim, dim);
    s.alpha = x.segment(2 * dim, dim);
    s.p = x.segment(3 * dim, dim);
    return s;
}

bool ExtendedState::finite() const {
    return q.allFinite() && v.allFinite() && alpha.allFinite() && p.allFinite();
}

ExtendedState operator+(const ExtendedState& a, const ExtendedState& b) {
    return {a.q + b.q, a.v + b.v, a.alpha + b.alpha, a.p + b.p};
}

ExtendedState operator*(double s, const ExtendedState& a) {
    return {s * a.q, s * a.v, s * a.alpha, s * a.p};
}

ExtendedState rhs(const SystemDefinition& system, const ExtendedState& state) {
    const int d = system.dim;
    const GeometryCache geo = evaluate_geometry(system, state.q);
    ExtendedState out = ExtendedState::zero(d);
    out.q = state.v;
    out.v = 0.5 * geo.hstar.transpose() * state.alpha;
    for (int i = 0; i < d; ++i) out.v[i] -= state.v.dot(geo.gamma.gamma[i] * state.v);
    for (int i = 0; i < d; ++i) {
        double da = -state.p[i];
        double dp = 0.0;
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k) {
                da += geo.gamma(j, k, i) * state.v[k] * state.alpha[j];
                dp += geo.gamma(j, k, i) * state.v[k] * state.p[j];
                dp -= 0.25 * geo.tau(i, j, k) * state.alpha[j] * state.alpha[k];
                for (int l = 0; l < d; ++l)
                    dp += geo.riemann(l, i, j, k) * state.v[j] * state.v[k] * state.alpha[l];
            }
        out.alpha[i] = da;
        out.p[i] = dp;
    }
    return out;
}

double hamiltonian_value(const SystemDefinition& system, const ExtendedState& state) {
    const Matrix hstar = system.hstar(state.q);
    return 0.25 * state.alpha.dot(hstar * state.alpha) + state.p.dot(state.v);
}

double HamiltonianTrajectory::hamiltonian_drift() const {
    const double h0 = hamiltonian.front();
    double drift = 0.0;
    for (double h : hamiltonian) drift = std::max(drift, std::abs(h - h0));
    return drift / (1.0 + std::abs(h0));
}

Trajectory HamiltonianTrajectory::as_trajectory() const { return samples; }

double HamiltonianTrajectory::cost() const {
    const std::size_t m = times.size() - 1;
    auto fd = [&](std::size_t i) { return forces[i].cost_density; };
    if (m < 2) return m == 1 ? 0.5 * (fd(0) + fd(1)) * (times[1] - times[0]) : 0.0;
    // Composite Simpson on the uniform grid; a 3/8 block absorbs an odd
    // interval count.
    const double h = (times.back() - times.front()) / static_cast<double>(m);
    double cost = 0.0;
    std::size_t start = 0;
    if (m % 2 == 1) {
        cost += 3.0 * h / 8.0 * (fd(0) + 3.0 * fd(1) + 3.0 * fd(2) + fd(3));
        start = 3;
    }
    for (std::size_t i = start; i + 2 <= m; i += 2)
        cost += h / 3.0 * (fd(i) + 4.0 * fd(i + 1) + fd(i + 2));
    return cost;
}

HamiltonianTrajectory integrate(const SystemDefinition& system, const ExtendedState& initial,
                                double horizon, int steps) {
    if (steps < 2) throw Error("integrate: need at least two steps");
    const double h = horizon / steps;
    HamiltonianTrajectory out;
    out.times.reserve(steps + 1);
    out.states.reserve(steps + 1);
    out.forces.reserve(steps + 1);
    out.hamiltonian.reserve(steps + 1);

    auto record = [&](double t, const ExtendedState& s) {
        const GeometryCache geo = evaluate_geometry(system, s.q, false);
        CurveSample sample;
        sample.t = t;
        sample.q = s.q;
        sample.v = s.v;
        const Vector a = 0.5 * geo.hstar.transpose() * s.alpha;
        Vector qdd = a;
        for (int i = 0; i < system.dim; ++i) qdd[i] -= s.v.dot(geo.gamma.gamma[i] * s.v);
        sample.qdd = qdd;
        out.times.push_back(t);
        out.states.push_back(s);
        out.samples.push_back(sample);
        out.forces.push_back(force_and_effort(geo, sample));
        out.hamiltonian.push_back(0.25 * s.alpha.dot(geo.hstar * s.alpha) + s.p.dot(s.v));
    };

    ExtendedState state = initial;
    record(0.0, state);
    for (int n = 0; n < steps; ++n) {
        const double t = n * h;
        ExtendedState k1, k2, k3, k4;
        try {
            k1 = rhs(system, state);
            k2 = rhs(system, state + 0.5 * h * k1);
            k3 = rhs(system, state + 0.5 * h * k2);
            k4 = rhs(system, state + h * k3);
        } catch (const Error&) {
            throw DivergenceError("integration left the chart domain", t);
        }
        state = state + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!state.finite()) throw DivergenceError("integration diverged", t);
        record((n + 1) * h, state);
    }
    return out;
}

}  // namespace torqopt
