#include "torqopt/dynamics.hpp"

#include <cmath>

#include "torqopt/errors.hpp"

namespace torqopt {

namespace {

Vector gamma_contract(const ChristoffelData& gamma, const Vector& u, const Vector& w) {
    const int d = gamma.dim();
    Vector out(d);
    for (int k = 0; k < d; ++k) out[k] = u.dot(gamma.gamma[k] * w);
    return out;
}

// (D*_v omega)_k = omegadot_k - Gamma^j_ik v^i omega_j
Vector dual_derivative(const ChristoffelData& gamma, const Vector& v, const Vector& omega,
                       const Vector& omegadot) {
    const int d = gamma.dim();
    Vector out(d);
    for (int k = 0; k < d; ++k) {
        double s = omegadot[k];
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) s -= gamma(j, i, k) * v[i] * omega[j];
        out[k] = s;
    }
    return out;
}

double uniform_dt(const Trajectory& trajectory) {
    const double dt = trajectory[1].t - trajectory[0].t;
    for (std::size_t i = 1; i < trajectory.size(); ++i) {
        const double step = trajectory[i].t - trajectory[i - 1].t;
        if (step <= 0.0) throw Error("trajectory samples must strictly increase in time");
        if (std::abs(step - dt) > 1e-9 * (1.0 + std::abs(dt)))
            throw Error("residual oracles require a uniform time grid");
    }
    return dt;
}

}  // namespace

Vector covariant_acceleration(const GeometryCache& geo, const CurveSample& sample) {
    return sample.qdd + gamma_contract(geo.gamma, sample.v, sample.v);
}

Vector covariant_acceleration(const SystemDefinition& system, const CurveSample& sample) {
    return covariant_acceleration(evaluate_geometry(system, sample.q, false), sample);
}

ForceData force_and_effort(const GeometryCache& geo, const CurveSample& sample) {
    ForceData out;
    out.a = covariant_acceleration(geo, sample);
    out.F = geo.mass * out.a;
    out.E = geo.induced * out.a;
    out.cost_density = out.a.dot(geo.induced * out.a);
    return out;
}

ForceData force_and_effort(const SystemDefinition& system, const CurveSample& sample) {
    return force_and_effort(evaluate_geometry(system, sample.q, false), sample);
}

double trajectory_cost(const SystemDefinition& system, const Trajectory& trajectory) {
    if (trajectory.size() < 2) throw Error("trajectory_cost needs at least two samples");
    std::vector<double> density(trajectory.size());
    for (std::size_t i = 0; i < trajectory.size(); ++i)
        density[i] = force_and_effort(system, trajectory[i]).cost_density;
    // Composite Simpson on uniform grids (with a 3/8 block absorbing an odd
    // interval count); trapezoid otherwise.
    const std::size_t m = trajectory.size() - 1;
    const double h = (trajectory.back().t - trajectory.front().t) / static_cast<double>(m);
    bool uniform = m >= 2;
    for (std::size_t i = 1; uniform && i <= m; ++i)
        uniform = std::abs(trajectory[i].t - trajectory[i - 1].t - h) <= 1e-9 * (1.0 + h);
    if (!uniform) {
        double cost = 0.0;
        for (std::size_t i = 1; i <= m; ++i)
            cost += 0.5 * (density[i] + density[i - 1]) * (trajectory[i].t - trajectory[i - 1].t);
        return cost;
    }
    double cost = 0.0;
    std::size_t start = 0;
    if (m % 2 == 1) {
        cost += 3.0 * h / 8.0 * (density[0] + 3.0 * density[1] + 3.0 * density[2] + density[3]);
        start = 3;
    }
    for (std::size_t i = start; i + 2 <= m; i += 2)
        cost += h / 3.0 * (density[i] + 4.0 * density[i + 1] + density[i + 2]);
    return cost;
}

std::vector<Vector> time_derivative(const std::vector<Vector>& values, double dt) {
    const std::size_t n = values.size();
    if (n < 5) throw Error("time_derivative needs at least five samples");
    std::vector<Vector> out(n);
    const double inv = 1.0 / (12.0 * dt);
    out[0] = (-25.0 * values[0] + 48.0 * values[1] - 36.0 * values[2] + 16.0 * values[3] -
              3.0 * values[4]) *
             inv;
    out[1] = (-3.0 * values[0] - 10.0 * values[1] + 18.0 * values[2] - 6.0 * values[3] +
              values[4]) *
             inv;
    for (std::size_t i = 2; i + 2 < n; ++i)
        out[i] = (-values[i + 2] + 8.0 * values[i + 1] - 8.0 * values[i - 1] + values[i - 2]) * inv;
    out[n - 2] = (3.0 * values[n - 1] + 10.0 * values[n - 2] - 18.0 * values[n - 3] +
                  6.0 * values[n - 4] - values[n - 5]) *
                 inv;
    out[n - 1] = (25.0 * values[n - 1] - 48.0 * values[n - 2] + 36.0 * values[n - 3] -
                  16.0 * values[n - 4] + 3.0 * values[n - 5]) *
                 inv;
    return out;
}

std::vector<Vector> riemannian_spline_residual(const SystemDefinition& system,
                                               const Trajectory& trajectory) {
    const std::size_t n = trajectory.size();
    if (n < 5) throw Error("riemannian_spline_residual needs at least five samples");
    const double dt = uniform_dt(trajectory);
    const int d = system.dim;

    std::vector<GeometryCache> geo;
    geo.reserve(n);
    std::vector<Vector> accel(n);
    for (std::size_t i = 0; i < n; ++i) {
        geo.push_back(evaluate_geometry(system, trajectory[i].q));
        accel[i] = covariant_acceleration(geo[i], trajectory[i]);
    }
    const auto adot = time_derivative(accel, dt);
    std::vector<Vector> jerk(n);
    for (std::size_t i = 0; i < n; ++i)
        jerk[i] = adot[i] + gamma_contract(geo[i].gamma, trajectory[i].v, accel[i]);
    const auto jdot = time_derivative(jerk, dt);
    std::vector<Vector> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        Vector snap = jdot[i] + gamma_contract(geo[i].gamma, trajectory[i].v, jerk[i]);
        Vector curv = Vector::Zero(d);
        const Vector& v = trajectory[i].v;
        for (int l = 0; l < d; ++l)
            for (int m = 0; m < d; ++m)
                for (int j = 0; j < d; ++j)
                    for (int k = 0; k < d; ++k)
                        curv[l] += geo[i].riemann(l, m, j, k) * accel[i][m] * v[j] * v[k];
        out[i] = snap + curv;
    }
    return out;
}

std::vector<Vector> biased_ode_residual(const SystemDefinition& system,
                                        const Trajectory& trajectory) {
    const std::size_t n = trajectory.size();
    if (n < 5) throw Error("biased_ode_residual needs at least five samples");
    const double dt = uniform_dt(trajectory);
    const int d = system.dim;

    std::vector<GeometryCache> geo;
    geo.reserve(n);
    std::vector<Vector> accel(n), effort(n);
    for (std::size_t i = 0; i < n; ++i) {
        geo.push_back(evaluate_geometry(system, trajectory[i].q));
        accel[i] = covariant_acceleration(geo[i], trajectory[i]);
        effort[i] = geo[i].induced * accel[i];
    }
    const auto edot = time_derivative(effort, dt);
    std::vector<Vector> yank(n);
    for (std::size_t i = 0; i < n; ++i)
        yank[i] = dual_derivative(geo[i].gamma, trajectory[i].v, effort[i], edot[i]);
    const auto ydot = time_derivative(yank, dt);
    std::vector<Vector> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Vector tug = dual_derivative(geo[i].gamma, trajectory[i].v, yank[i], ydot[i]);
        const Vector& v = trajectory[i].v;
        Vector res = tug;
        for (int ii = 0; ii < d; ++ii) {
            double s = 0.0;
            for (int j = 0; j < d; ++j)
                for (int k = 0; k < d; ++k) s += geo[i].tau(ii, j, k) * effort[i][j] * effort[i][k];
            res[ii] -= 0.5 * s;
            double hcurv = 0.0;
            for (int m = 0; m < d; ++m)
                for (int l = 0; l < d; ++l)
                    for (int j = 0; j < d; ++j)
                        for (int k = 0; k < d; ++k)
                            hcurv += accel[i][m] * geo[i].induced(m, l) *
                                     geo[i].riemann(l, ii, j, k) * v[j] * v[k];
            res[ii] += hcurv;
        }
        out[i] = res;
    }
    return out;
}

double residual_rms(const std::vector<Vector>& residuals) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const Vector& r : residuals) {
        sum += r.squaredNorm();
        count += r.size();
    }
    return count == 0 ? 0.0 : std::sqrt(sum / static_cast<double>(count));
}

}  // namespace torqopt
