#include "torqopt/runconfig.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "torqopt/dynamics.hpp"
#include "torqopt/errors.hpp"

namespace torqopt::cli {

namespace {

using nlohmann::json;

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

Vector parse_vector(const json& j, const std::string& field, int expected_dim) {
    if (!j.is_array())
        throw Error("field '" + field + "' must be an array of numbers");
    Vector v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) v[i] = j[i].get<double>();
    if (expected_dim >= 0 && v.size() != expected_dim)
        throw Error("field '" + field + "' has " + std::to_string(v.size()) +
                    " components but the system dimension is " + std::to_string(expected_dim));
    return v;
}

std::map<std::string, double> parse_params(const json& j) {
    std::map<std::string, double> out;
    for (auto it = j.begin(); it != j.end(); ++it) out[it.key()] = it.value().get<double>();
    return out;
}

SystemDefinition parse_system(const json& j) {
    if (j.contains("builtin")) {
        std::map<std::string, double> params;
        if (j.contains("params")) params = parse_params(j["params"]);
        return builtin(j["builtin"].get<std::string>(), params);
    }
    if (j.contains("expression")) {
        const json& e = j["expression"];
        const int dim = e.at("dim").get<int>();
        std::vector<std::string> coords = e.at("coordinates").get<std::vector<std::string>>();
        auto grid = [&](const char* key) {
            return e.at(key).get<std::vector<std::vector<std::string>>>();
        };
        std::map<std::string, double> params;
        if (e.contains("params")) params = parse_params(e["params"]);
        return system_from_expressions(dim, coords, grid("metric"), grid("cometric"), params);
    }
    throw Error("field 'system' must contain either 'builtin' or 'expression'");
}

bool is_free_marker(const json& j) { return j.is_string() && j.get<std::string>() == "FREE"; }

std::string method_name(Method m) {
    switch (m) {
        case Method::Shooting: return "shooting";
        case Method::Collocation: return "collocation";
        default: return "both";
    }
}

json summary_json(const SolverReport& report, const std::string& method, double wall_ms) {
    json out;
    out["converged"] = report.converged;
    out["method"] = method;
    out["iterations"] = report.iterations;
    out["residual_norm"] = report.residual_norm;
    out["cost"] = report.cost;
    std::vector<double> params(report.shooting_params.data(),
                               report.shooting_params.data() + report.shooting_params.size());
    out["shooting_parameters"] = params;
    out["wall_time_ms"] = wall_ms;
    if (!report.message.empty()) out["message"] = report.message;
    return out;
}

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_)
            .count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

std::string join_path(const std::string& dir, const std::string& file) {
    return (std::filesystem::path(dir) / file).string();
}

void write_text(const std::string& path, const std::string& text) {
    std::filesystem::create_directories(std::filesystem::path(path).parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open output file '" + path + "'");
    out << text;
}

// alpha = 2 E and p = -2 yank reconstructed from the sampled path; exact
// Hamiltonian states take precedence when present.
struct CostateColumns {
    std::vector<Vector> alpha, p;
    std::vector<double> hamiltonian;
};

CostateColumns costates_for(const SystemDefinition& system, const SolverReport& report) {
    CostateColumns out;
    const std::size_t n = report.path.size();
    if (!report.trajectory.states.empty() && report.trajectory.states.size() == n) {
        for (std::size_t i = 0; i < n; ++i) {
            out.alpha.push_back(report.trajectory.states[i].alpha);
            out.p.push_back(report.trajectory.states[i].p);
        }
        out.hamiltonian = report.trajectory.hamiltonian;
        return out;
    }
    std::vector<GeometryCache> geo;
    std::vector<Vector> effort(n);
    for (std::size_t i = 0; i < n; ++i) {
        geo.push_back(evaluate_geometry(system, report.path[i].q, false));
        effort[i] = geo[i].induced * covariant_acceleration(geo[i], report.path[i]);
        out.alpha.push_back(2.0 * effort[i]);
    }
    const double dt = report.path[1].t - report.path[0].t;
    const auto edot = time_derivative(effort, dt);
    const int d = system.dim;
    for (std::size_t i = 0; i < n; ++i) {
        Vector yank(d);
        for (int k = 0; k < d; ++k) {
            double s = edot[i][k];
            for (int ii = 0; ii < d; ++ii)
                for (int j = 0; j < d; ++j)
                    s -= geo[i].gamma(j, ii, k) * report.path[i].v[ii] * effort[i][j];
            yank[k] = s;
        }
        out.p.push_back(-2.0 * yank);
        out.hamiltonian.push_back(0.25 * out.alpha[i].dot(geo[i].hstar * out.alpha[i]) +
                                  out.p[i].dot(report.path[i].v));
    }
    return out;
}

}  // namespace

void write_trajectory_csv(const std::string& path, const SystemDefinition& system,
                          const SolverReport& report) {
    const int d = system.dim;
    std::ostringstream csv;
    csv << "t";
    auto columns = [&](const char* base) {
        for (int k = 1; k <= d; ++k) csv << "," << base << k;
    };
    columns("q");
    columns("v");
    columns("a");
    columns("F");
    columns("E");
    columns("alpha");
    columns("p");
    csv << ",H,cost_density\n";

    const CostateColumns costates = costates_for(system, report);
    for (std::size_t i = 0; i < report.path.size(); ++i) {
        const CurveSample& s = report.path[i];
        const ForceData f = force_and_effort(system, s);
        csv << fmt17(s.t);
        auto emit = [&](const Vector& v) {
            for (int k = 0; k < d; ++k) csv << "," << fmt17(v[k]);
        };
        emit(s.q);
        emit(s.v);
        emit(f.a);
        emit(f.F);
        emit(f.E);
        emit(costates.alpha[i]);
        emit(costates.p[i]);
        csv << "," << fmt17(costates.hamiltonian[i]) << "," << fmt17(f.cost_density) << "\n";
    }
    write_text(path, csv.str());
}

Trajectory read_trajectory_csv(const std::string& path, const SystemDefinition& system) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open trajectory file '" + path + "'");
    const int dim = system.dim;
    std::string line;
    std::getline(in, line);  // header
    Trajectory out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> row;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        CurveSample s;
        s.t = row.at(0);
        s.q = Vector(dim);
        s.v = Vector(dim);
        Vector a(dim);
        for (int k = 0; k < dim; ++k) {
            s.q[k] = row.at(1 + k);
            s.v[k] = row.at(1 + dim + k);
            a[k] = row.at(1 + 2 * dim + k);  // covariant acceleration column
        }
        // qdd = a - Gamma(v, v)
        const GeometryCache geo = evaluate_geometry(system, s.q, false);
        s.qdd = a;
        for (int k = 0; k < dim; ++k) s.qdd[k] -= s.v.dot(geo.gamma.gamma[k] * s.v);
        out.push_back(s);
    }
    return out;
}

double trajectory_sup_distance(const Trajectory& a, const Trajectory& b) {
    double sup = 0.0;
    for (const CurveSample& s : b) {
        // Locate s.t in a (uniform-ish grid assumed) and interpolate q.
        std::size_t lo = 0;
        while (lo + 2 < a.size() && a[lo + 1].t <= s.t) ++lo;
        const double t0 = a[lo].t, t1 = a[lo + 1].t;
        const double w = (t1 > t0) ? std::clamp((s.t - t0) / (t1 - t0), 0.0, 1.0) : 0.0;
        const Vector q = (1.0 - w) * a[lo].q + w * a[lo + 1].q;
        sup = std::max(sup, (q - s.q).lpNorm<Eigen::Infinity>());
    }
    return sup;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config file '" + path + "'");
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw Error(std::string("config is not valid JSON: ") + e.what());
    }

    RunConfig config;
    if (!doc.contains("system")) throw Error("config is missing the 'system' block");
    config.system = parse_system(doc["system"]);
    const int d = config.system.dim;

    if (doc.contains("problem")) {
        const json& p = doc["problem"];
        BoundaryProblem bp;
        bp.q0 = parse_vector(p.at("q0"), "q0", d);
        bp.qf = parse_vector(p.at("qf"), "qf", d);
        const bool v0_free = p.contains("v0") && is_free_marker(p["v0"]);
        const bool vf_free = p.contains("vf") && is_free_marker(p["vf"]);
        if (v0_free != vf_free)
            throw Error("fields 'v0' and 'vf' must be both FREE or both specified");
        if (!v0_free) {
            bp.v0 = parse_vector(p.at("v0"), "v0", d);
            bp.vf = parse_vector(p.at("vf"), "vf", d);
        }
        if (p.contains("T")) bp.horizon = p["T"].get<double>();
        if (!(bp.horizon > 0.0)) throw Error("field 'T' must be positive");
        config.problem = bp;
    }

    if (doc.contains("solver")) {
        const json& s = doc["solver"];
        if (s.contains("method")) {
            const std::string m = s["method"].get<std::string>();
            if (m == "shooting") config.method = Method::Shooting;
            else if (m == "collocation") config.method = Method::Collocation;
            else if (m == "both") config.method = Method::Both;
            else throw Error("field 'method' must be shooting, collocation or both");
        }
        if (config.problem) {
            if (s.contains("steps")) config.problem->steps = s["steps"].get<int>();
            if (s.contains("tolerance")) config.problem->tolerance = s["tolerance"].get<double>();
            if (s.contains("max_iterations"))
                config.problem->max_iterations = s["max_iterations"].get<int>();
        }
        if (s.contains("nodes")) config.nodes = s["nodes"].get<int>();
    }
    if (config.problem) config.problem->system = &config.system;

    if (doc.contains("grid")) {
        const json& g = doc["grid"];
        GridSpec spec;
        spec.min = parse_vector(g.at("min"), "grid.min", d);
        spec.max = parse_vector(g.at("max"), "grid.max", d);
        spec.counts = g.at("counts").get<std::vector<int>>();
        if (static_cast<int>(spec.counts.size()) != d)
            throw Error("field 'grid.counts' must have one entry per dimension");
        for (int c : spec.counts)
            if (c < 1) throw Error("field 'grid.counts' entries must be at least 1");
        config.grid = spec;
    }

    if (doc.contains("indicatrix")) {
        const json& ind = doc["indicatrix"];
        if (ind.contains("which")) config.indicatrix_which = ind["which"].get<std::string>();
        if (config.indicatrix_which != "metric" && config.indicatrix_which != "cometric" &&
            config.indicatrix_which != "induced")
            throw Error("field 'indicatrix.which' must be metric, cometric or induced");
        if (ind.contains("count")) config.indicatrix_count = ind["count"].get<int>();
    }

    if (doc.contains("output")) {
        const json& o = doc["output"];
        if (o.contains("trajectory")) config.trajectory_file = o["trajectory"].get<std::string>();
        if (o.contains("summary")) config.summary_file = o["summary"].get<std::string>();
        if (o.contains("grid")) config.grid_file = o["grid"].get<std::string>();
        if (o.contains("points")) config.points_file = o["points"].get<std::string>();
    }
    return config;
}

namespace {

std::vector<Vector> grid_points(const GridSpec& grid) {
    const int d = static_cast<int>(grid.counts.size());
    int total = 1;
    for (int c : grid.counts) total *= c;
    std::vector<Vector> out;
    out.reserve(total);
    for (int n = 0; n < total; ++n) {
        Vector q(d);
        int rest = n;
        for (int k = d - 1; k >= 0; --k) {
            const int c = grid.counts[k];
            const int idx = rest % c;
            rest /= c;
            q[k] = (c == 1) ? grid.min[k]
                            : grid.min[k] + (grid.max[k] - grid.min[k]) * idx / (c - 1);
        }
        out.push_back(q);
    }
    return out;
}

}  // namespace

int run_solve(RunConfig& config, const std::string& out_dir, bool verbose, std::ostream& err) {
    if (!config.problem) {
        err << "solve requires a 'problem' block\n";
        return kExitInvalid;
    }
    Stopwatch watch;
    const BoundaryProblem& problem = *config.problem;
    SolverReport primary;
    json summary;
    bool all_converged = true;
    try {
        if (config.method == Method::Collocation) {
            primary = solve_collocation(problem, config.nodes);
            summary = summary_json(primary, "collocation", watch.ms());
        } else {
            primary = solve(problem);
            summary = summary_json(primary, method_name(config.method), watch.ms());
            if (config.method == Method::Both) {
                Stopwatch cwatch;
                const SolverReport coll = solve_collocation(problem, config.nodes);
                summary["collocation"] = summary_json(coll, "collocation", cwatch.ms());
                summary["wall_time_ms"] = watch.ms();
                all_converged = coll.converged;
            }
        }
    } catch (const Error& e) {
        err << "solver error: " << e.what() << "\n";
        return kExitInvalid;
    }
    all_converged = all_converged && primary.converged;

    write_trajectory_csv(join_path(out_dir, config.trajectory_file), config.system, primary);
    write_text(join_path(out_dir, config.summary_file), summary.dump(2) + "\n");
    if (verbose)
        err << "cost " << primary.cost << ", residual " << primary.residual_norm << ", "
            << primary.iterations << " iterations\n";
    return all_converged ? kExitOk : kExitNoConvergence;
}

int run_tensors(RunConfig& config, const std::string& out_dir, bool verbose, std::ostream& err) {
    if (!config.grid) {
        err << "tensors requires a 'grid' block\n";
        return kExitInvalid;
    }
    const SystemDefinition& system = config.system;
    const int d = system.dim;
    std::ostringstream csv;
    for (int k = 1; k <= d; ++k) csv << (k == 1 ? "" : ",") << "q" << k;
    auto matrix_header = [&](const char* base) {
        for (int i = 1; i <= d; ++i)
            for (int j = 1; j <= d; ++j) csv << "," << base << "_" << i << "_" << j;
    };
    matrix_header("M");
    matrix_header("Ntilde");
    matrix_header("N");
    matrix_header("hstar");
    for (int k = 1; k <= d; ++k)
        for (int i = 1; i <= d; ++i)
            for (int j = 1; j <= d; ++j) csv << ",Gamma_" << k << "_" << i << "_" << j;
    csv << ",tau_maxabs";
    if (d == 2) csv << ",sectional_curvature";
    csv << "\n";

    try {
        for (const Vector& q : grid_points(*config.grid)) {
            const GeometryCache geo = evaluate_geometry(system, q);
            for (int k = 0; k < d; ++k) csv << (k == 0 ? "" : ",") << fmt17(q[k]);
            auto emit_matrix = [&](const Matrix& m) {
                for (int i = 0; i < d; ++i)
                    for (int j = 0; j < d; ++j) csv << "," << fmt17(m(i, j));
            };
            emit_matrix(geo.mass);
            emit_matrix(geo.cometric);
            emit_matrix(geo.induced);
            emit_matrix(geo.hstar);
            for (int k = 0; k < d; ++k)
                for (int i = 0; i < d; ++i)
                    for (int j = 0; j < d; ++j) csv << "," << fmt17(geo.gamma(k, i, j));
            double tau_max = 0.0;
            for (int i = 0; i < d; ++i)
                tau_max = std::max(tau_max, geo.tau.tau[i].cwiseAbs().maxCoeff());
            csv << "," << fmt17(tau_max);
            if (d == 2) {
                double lowered = 0.0;
                for (int l = 0; l < d; ++l) lowered += geo.mass(0, l) * geo.riemann(l, 0, 1, 1);
                const double det = geo.mass.determinant();
                csv << "," << fmt17(lowered / det);
            }
            csv << "\n";
        }
    } catch (const Error& e) {
        err << "grid point outside the chart domain: " << e.what() << "\n";
        return kExitInvalid;
    }
    write_text(join_path(out_dir, config.grid_file), csv.str());
    if (verbose) err << "tensor grid written\n";
    return kExitOk;
}

int run_indicatrix(RunConfig& config, const std::string& out_dir, bool verbose,
                   std::ostream& err) {
    if (!config.grid) {
        err << "indicatrix requires a 'grid' block\n";
        return kExitInvalid;
    }
    const SystemDefinition& system = config.system;
    if (system.dim != 2) {
        err << "indicatrix output requires a 2-D system\n";
        return kExitInvalid;
    }
    std::ostringstream csv;
    csv << "q1,q2,u1,u2\n";
    try {
        for (const Vector& q : grid_points(*config.grid)) {
            Matrix form;
            if (config.indicatrix_which == "metric") form = system.mass(q);
            else if (config.indicatrix_which == "cometric") form = system.cometric_matrix(q);
            else form = system.induced(q);
            for (const Vector& u : indicatrix_samples(form, config.indicatrix_count))
                csv << fmt17(q[0]) << "," << fmt17(q[1]) << "," << fmt17(u[0]) << ","
                    << fmt17(u[1]) << "\n";
        }
    } catch (const Error& e) {
        err << "grid point outside the chart domain: " << e.what() << "\n";
        return kExitInvalid;
    }
    write_text(join_path(out_dir, config.points_file), csv.str());
    if (verbose) err << "indicatrix points written\n";
    return kExitOk;
}

int run_compare(RunConfig& config, const std::string& out_dir, bool verbose, std::ostream& err) {
    if (!config.problem) {
        err << "compare requires a 'problem' block\n";
        return kExitInvalid;
    }
    Stopwatch watch;
    SolverReport shoot, coll;
    try {
        shoot = solve(*config.problem);
        coll = solve_collocation(*config.problem, config.nodes);
    } catch (const Error& e) {
        err << "solver error: " << e.what() << "\n";
        return kExitInvalid;
    }
    const double gap = std::abs(shoot.cost - coll.cost) / (1.0 + std::abs(shoot.cost));
    const double sup = trajectory_sup_distance(shoot.path, coll.path);

    json summary = summary_json(shoot, "shooting", watch.ms());
    summary["collocation"] = summary_json(coll, "collocation", 0.0);
    summary["collocation"].erase("wall_time_ms");
    summary["cost_gap"] = gap;
    summary["trajectory_sup_distance"] = sup;
    write_text(join_path(out_dir, config.summary_file), summary.dump(2) + "\n");
    write_trajectory_csv(join_path(out_dir, "shooting_" + config.trajectory_file), config.system,
                         shoot);
    write_trajectory_csv(join_path(out_dir, "collocation_" + config.trajectory_file),
                         config.system, coll);
    if (verbose)
        err << "cost gap " << gap << ", sup-distance " << sup << "\n";
    return (shoot.converged && coll.converged) ? kExitOk : kExitNoConvergence;
}

}  // namespace torqopt::cli
