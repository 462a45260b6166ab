#pragma once

#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hilfer/certificates.hpp"
#include "hilfer/expression.hpp"
#include "hilfer/solver.hpp"

namespace hilfer::io {

using json = nlohmann::ordered_json;

struct GronwallSpec {
    double alpha = 1.0;
    PsiFunction psi = PsiFunction::identity();
    Grid grid;
    int terms = 30;
    std::vector<double> u, v, g;
};

/// Parsed problem file: the ProblemSpec plus grid/solver settings and the
/// optional certificate constants and Gronwall section.
struct ProblemFile {
    std::string schema_version;
    ProblemSpec spec;
    Grid grid;
    double tol = 1e-8;
    int max_iter = 200;
    bool has_constants = false;
    ConditionConstants constants;
    std::optional<GronwallSpec> gronwall;
};

namespace detail {

inline void collect_names(const expr::Node& n, std::vector<std::string>& vars,
                          std::vector<std::pair<std::string, std::string>>& refs) {
    if (n.kind == expr::Node::Kind::Var) vars.push_back(n.name);
    if (n.kind == expr::Node::Kind::PointRef) refs.emplace_back(n.name, n.point);
    for (const auto& k : n.kids) collect_names(k, vars, refs);
}

inline void validate_scalar_expr(const expr::Expression& e, int dim, bool allow_t, bool allow_s,
                                 const std::vector<std::string>& point_names) {
    std::vector<std::string> vars;
    std::vector<std::pair<std::string, std::string>> refs;
    collect_names(e.root, vars, refs);
    for (const auto& v : vars) {
        if (v == "t" && allow_t) continue;
        if (v == "s" && allow_s) continue;
        const int idx = expr::detail::component_index(v);
        if (idx >= 0 && idx < dim && point_names.empty()) continue;
        throw DomainError("expression '" + e.source + "': variable '" + v + "' not available in this context");
    }
    for (const auto& [base, pt] : refs) {
        if (point_names.empty())
            throw DomainError("expression '" + e.source + "': point references not allowed here");
        const int idx = expr::detail::component_index(base);
        if (idx < 0 || idx >= dim)
            throw DomainError("expression '" + e.source + "': bad point reference base '" + base + "'");
        bool known = false;
        for (const auto& p : point_names) known = known || p == pt;
        if (!known) throw DomainError("expression '" + e.source + "': unknown point '" + pt + "'");
    }
}

inline std::vector<expr::Expression> parse_component_exprs(const json& j, const std::string& field, int dim) {
    std::vector<expr::Expression> out;
    if (j.is_string()) {
        out.push_back(expr::parse_expression(j.get<std::string>()));
    } else if (j.is_array()) {
        for (const auto& item : j) out.push_back(expr::parse_expression(item.get<std::string>()));
    } else {
        throw DomainError(field + " must be an expression string or an array of them");
    }
    if (static_cast<int>(out.size()) != dim)
        throw DomainError(field + ": got " + std::to_string(out.size()) + " components for state dimension " +
                          std::to_string(dim));
    return out;
}

} // namespace detail

/// Build a ProblemFile from its JSON form, compiling the expression fields.
inline ProblemFile problem_from_json(const json& j) {
    ProblemFile pf;
    if (!j.contains("schema_version")) throw DomainError("problem file: missing schema_version");
    pf.schema_version = j.at("schema_version").get<std::string>();
    if (pf.schema_version != "1") throw DomainError("problem file: unrecognized schema_version " + pf.schema_version);

    ProblemSpec& p = pf.spec;
    p.mu = j.at("orders").at("mu").get<double>();
    p.nu = j.at("orders").at("nu").get<double>();
    p.t0 = j.at("interval").at("t0").get<double>();
    p.a = j.at("interval").at("a").get<double>();

    const auto& gen = j.at("generator");
    const int d = static_cast<int>(gen.size());
    linalg::Matrix A(d);
    for (int i = 0; i < d; ++i) {
        if (static_cast<int>(gen[i].size()) != d) throw DomainError("problem file: generator must be square");
        for (int k = 0; k < d; ++k) A(i, k) = gen[i][k].get<double>();
    }
    p.A = Generator(std::move(A));

    p.u0 = j.at("u0").get<std::vector<double>>();
    if (static_cast<int>(p.u0.size()) != d) throw DomainError("problem file: u0 dimension mismatch");

    if (j.contains("psi") && !j.at("psi").is_null()) {
        const std::string kind = j.at("psi").at("kind").get<std::string>();
        if (kind == "identity")
            p.psi = PsiFunction::identity();
        else if (kind == "power")
            p.psi = PsiFunction::power(j.at("psi").at("parameter").get<double>());
        else if (kind == "exponential")
            p.psi = PsiFunction::exponential(j.at("psi").at("parameter").get<double>());
        else
            throw DomainError("problem file: psi.kind must be identity, power, or exponential");
    }

    std::vector<std::string> point_names;
    if (j.contains("nonlocal") && !j.at("nonlocal").is_null()) {
        p.nonlocal_points = j.at("nonlocal").at("points").get<std::vector<double>>();
        for (std::size_t i = 0; i < p.nonlocal_points.size(); ++i)
            point_names.push_back("t" + std::to_string(i + 1));
    }

    if (j.contains("f_expr") && !j.at("f_expr").is_null()) {
        auto exprs = std::make_shared<std::vector<expr::Expression>>(
            detail::parse_component_exprs(j.at("f_expr"), "f_expr", d));
        for (const auto& e : *exprs) detail::validate_scalar_expr(e, d, true, false, {});
        p.f = [exprs, d](double t, std::span<const double> u) {
            expr::EvalContext ctx;
            ctx.has_t = true;
            ctx.t = t;
            ctx.has_u = true;
            ctx.u = u;
            std::vector<double> out(d);
            for (int k = 0; k < d; ++k) out[k] = expr::evaluate((*exprs)[k], ctx);
            return out;
        };
    }

    if (j.contains("kernel_expr") && !j.at("kernel_expr").is_null()) {
        auto exprs = std::make_shared<std::vector<expr::Expression>>(
            detail::parse_component_exprs(j.at("kernel_expr"), "kernel_expr", d));
        for (const auto& e : *exprs) detail::validate_scalar_expr(e, d, true, true, {});
        p.kernel = [exprs, d](double t, double s, std::span<const double> u) {
            expr::EvalContext ctx;
            ctx.has_t = true;
            ctx.t = t;
            ctx.has_s = true;
            ctx.s = s;
            ctx.has_u = true;
            ctx.u = u;
            std::vector<double> out(d);
            for (int k = 0; k < d; ++k) out[k] = expr::evaluate((*exprs)[k], ctx);
            return out;
        };
    }

    if (!point_names.empty()) {
        auto exprs = std::make_shared<std::vector<expr::Expression>>(
            detail::parse_component_exprs(j.at("nonlocal").at("g_expr"), "nonlocal.g_expr", d));
        for (const auto& e : *exprs) detail::validate_scalar_expr(e, d, false, false, point_names);
        auto names = std::make_shared<std::vector<std::string>>(point_names);
        p.g = [exprs, names, d](const std::vector<std::vector<double>>& pts) {
            std::map<std::string, std::vector<double>> values;
            for (std::size_t i = 0; i < names->size(); ++i) values[(*names)[i]] = pts[i];
            expr::EvalContext ctx;
            ctx.points = &values;
            std::vector<double> out(d);
            for (int k = 0; k < d; ++k) out[k] = expr::evaluate((*exprs)[k], ctx);
            return out;
        };
    }

    const int n = j.contains("grid") ? j.at("grid").at("n").get<int>() : 256;
    pf.grid = Grid(p.t0, p.a, n);
    if (j.contains("solver") && !j.at("solver").is_null()) {
        const auto& s = j.at("solver");
        if (s.contains("tol")) pf.tol = s.at("tol").get<double>();
        if (s.contains("max_iter")) pf.max_iter = s.at("max_iter").get<int>();
    }

    if (j.contains("constants") && !j.at("constants").is_null()) {
        const auto& c = j.at("constants");
        pf.has_constants = true;
        ConditionConstants& cc = pf.constants;
        cc.M = c.value("M", 1.0);
        cc.L = c.value("L", 0.0);
        cc.K0 = c.value("K0", 0.0);
        cc.K1 = c.value("K1", 0.0);
        cc.H = c.value("H", 0.0);
        cc.Q0 = c.value("Q0", 0.0);
        cc.G1_tilde = c.value("G1_tilde", 0.0);
        cc.r = c.value("r", 1.0);
        cc.a = p.a;
        cc.mu = p.mu;
        cc.t0 = p.t0;
        cc.psi = p.psi;
        cc.u0_norm = linalg::nrm2(p.u0);
    }

    if (j.contains("gronwall") && !j.at("gronwall").is_null()) {
        const auto& gj = j.at("gronwall");
        GronwallSpec gs;
        gs.alpha = gj.at("alpha").get<double>();
        gs.terms = gj.value("terms", 30);
        double gt0 = gj.at("grid").at("t0").get<double>();
        double ga = gj.at("grid").at("a").get<double>();
        int gn = gj.at("grid").at("n").get<int>();
        gs.grid = Grid(gt0, ga, gn);
        if (gj.contains("psi") && !gj.at("psi").is_null()) {
            const std::string kind = gj.at("psi").at("kind").get<std::string>();
            if (kind == "identity")
                gs.psi = PsiFunction::identity();
            else if (kind == "power")
                gs.psi = PsiFunction::power(gj.at("psi").at("parameter").get<double>());
            else if (kind == "exponential")
                gs.psi = PsiFunction::exponential(gj.at("psi").at("parameter").get<double>());
            else
                throw DomainError("gronwall.psi.kind must be identity, power, or exponential");
        }
        auto sample = [&](const std::string& field) {
            const expr::Expression e = expr::parse_expression(gj.at(field).get<std::string>());
            detail::validate_scalar_expr(e, 1, true, false, {});
            std::vector<double> out(gs.grid.size());
            for (int i = 0; i < gs.grid.size(); ++i) {
                expr::EvalContext ctx;
                ctx.has_t = true;
                ctx.t = gs.grid.node(i);
                out[i] = expr::evaluate(e, ctx);
            }
            return out;
        };
        gs.u = sample("u_expr");
        gs.v = sample("v_expr");
        gs.g = sample("g_expr");
        pf.gronwall = std::move(gs);
    }

    return pf;
}

inline ProblemFile load_problem(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open problem file: " + path);
    json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DomainError("problem file " + path + ": " + e.what());
    }
    try {
        return problem_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw DomainError("problem file " + path + ": " + e.what());
    }
}

namespace detail {

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.15g", v);
    return buf;
}

} // namespace detail

/// CSV columns: t, w1..wd (weighted), u1..ud (unweighted, blank at t=0 when gamma<1).
inline void write_trajectory_csv(std::ostream& os, const Trajectory& u) {
    os << "t";
    for (int k = 1; k <= u.dim; ++k) os << ",w" << k;
    for (int k = 1; k <= u.dim; ++k) os << ",u" << k;
    os << "\n";
    for (int i = 0; i < u.grid.size(); ++i) {
        const double t = u.grid.node(i);
        os << detail::fmt(t);
        const auto w = u.at(i);
        for (int k = 0; k < u.dim; ++k) os << "," << detail::fmt(w[k]);
        const bool singular = u.gamma < 1.0 && t <= 0.0;
        if (singular) {
            for (int k = 0; k < u.dim; ++k) os << ",";
        } else {
            const double f = (u.gamma == 1.0) ? 1.0 : std::pow(t, u.gamma - 1.0);
            for (int k = 0; k < u.dim; ++k) os << "," << detail::fmt(w[k] * f);
        }
        os << "\n";
    }
}

/// Read back a trajectory CSV written by write_trajectory_csv.
inline Trajectory read_trajectory_csv(std::istream& is, const Grid& grid, double gamma_index, int dim) {
    std::string line;
    if (!std::getline(is, line)) throw DomainError("trajectory csv: empty file");
    Trajectory u(grid, gamma_index, dim);
    for (int i = 0; i < grid.size(); ++i) {
        if (!std::getline(is, line)) throw GridMismatchError("trajectory csv: fewer rows than grid nodes");
        std::stringstream ss(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (static_cast<int>(cells.size()) < 1 + dim)
            throw DomainError("trajectory csv: row " + std::to_string(i) + " too short");
        const double t = std::stod(cells[0]);
        if (std::fabs(t - grid.node(i)) > 1e-9 * std::max(1.0, std::fabs(grid.node(i))))
            throw GridMismatchError("trajectory csv: node " + std::to_string(i) + " does not match the grid");
        auto w = u.at(i);
        for (int k = 0; k < dim; ++k) w[k] = std::stod(cells[1 + k]);
    }
    return u;
}

inline json trajectory_json(const Trajectory& u) {
    json out;
    out["gamma"] = u.gamma;
    out["dim"] = u.dim;
    json t = json::array(), w = json::array();
    for (int i = 0; i < u.grid.size(); ++i) {
        t.push_back(u.grid.node(i));
        json row = json::array();
        for (int k = 0; k < u.dim; ++k) row.push_back(u.at(i)[k]);
        w.push_back(std::move(row));
    }
    out["t"] = std::move(t);
    out["weighted"] = std::move(w);
    return out;
}

inline const std::vector<std::string>& interpretation_notes() {
    static const std::vector<std::string> notes = {
        "kernel_exponent=mu: the solution kernel is realized as K_mu(t) = t^{mu-1} P_mu(t) (exponent mu-1, not gamma-1)",
        "operator_bound=weighted: M is taken over t^{1-gamma} S_{mu,nu}(t)",
        "Q0_aliases_G0: the strong-solution Lipschitz constant G0 is the same datum as Q0",
    };
    return notes;
}

inline json solve_report_json(const SolveReport& rep) {
    json out;
    out["iterations"] = rep.iterations;
    out["residuals"] = rep.residuals;
    out["converged"] = rep.converged;
    out["measured_ratio"] = rep.measured_ratio;
    out["final"] = trajectory_json(rep.final);
    out["notes"] = interpretation_notes();
    return out;
}

inline json certificate_json(const CertificateReport& rep) {
    json out;
    out["q"] = rep.q;
    out["ball_lhs"] = rep.ball_lhs;
    out["ball_ok"] = rep.ball_ok;
    out["contraction_ok"] = rep.contraction_ok;
    out["conditions_II_q"] = rep.conditions_II_q;
    out["notes"] = rep.notes;
    return out;
}

} // namespace hilfer::io
