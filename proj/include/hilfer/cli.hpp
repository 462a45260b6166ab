#pragma once

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hilfer/certificates.hpp"
#include "hilfer/problem_io.hpp"
#include "hilfer/solver.hpp"
#include "hilfer/special_functions.hpp"

namespace hilfer::cli {

// Exit codes: 0 success, 1 usage/input error, 2 numerical failure,
// 3 certificate failure (q >= 1 is reported, not crashed).
inline constexpr int exit_ok = 0;
inline constexpr int exit_usage = 1;
inline constexpr int exit_numerical = 2;
inline constexpr int exit_certificate = 3;

namespace detail {

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void usage(std::ostream& err) {
    err << "usage:\n"
           "  hilfer solve <file> [--out <csv>] [--report <json>]\n"
           "  hilfer certify <file> [--samples <n>] [--sharper-gamma]\n"
           "  hilfer residual <file> --solution <csv> [--out <csv>]\n"
           "  hilfer gronwall <file> [--out <csv>]\n"
           "  hilfer specfun <gamma|ml|wright|moment> <args...>\n"
           "  hilfer converge <file> --grids <n1,n2,...>\n";
}

inline std::uint64_t sampling_seed() {
    if (const char* env = std::getenv("FRAC_SEED")) {
        return std::strtoull(env, nullptr, 10);
    }
    return 0x5eed5eedULL;
}

struct Options {
    std::vector<std::string> positional;
    std::map<std::string, std::string> flags;
    bool sharper_gamma = false;
};

inline Options parse_options(const std::vector<std::string>& args, std::size_t start) {
    Options o;
    for (std::size_t i = start; i < args.size(); ++i) {
        const std::string& a = args[i];
        if (a == "--sharper-gamma") {
            o.sharper_gamma = true;
        } else if (a.rfind("--", 0) == 0) {
            if (i + 1 >= args.size()) throw DomainError("flag " + a + " needs a value");
            o.flags[a.substr(2)] = args[++i];
        } else {
            o.positional.push_back(a);
        }
    }
    return o;
}

inline const char* verdict_name(GronwallVerdict v) {
    switch (v) {
        case GronwallVerdict::Pass: return "pass";
        case GronwallVerdict::Fail: return "fail";
        case GronwallVerdict::NotApplicable: return "not_applicable";
    }
    return "fail";
}

inline int run_specfun(const Options& o, std::ostream& out) {
    const auto& p = o.positional;
    if (p.empty()) throw DomainError("specfun: missing function name");
    auto num = [&](std::size_t i) {
        if (i >= p.size()) throw DomainError("specfun: missing argument");
        return std::stod(p[i]);
    };
    double value;
    if (p[0] == "gamma") {
        value = gamma(num(1));
    } else if (p[0] == "ml") {
        value = mittag_leffler(num(1), num(2), num(3));
    } else if (p[0] == "wright") {
        value = mainardi_wright(num(1), num(2));
    } else if (p[0] == "moment") {
        value = wright_moment(num(1), num(2));
    } else {
        throw DomainError("specfun: unknown function '" + p[0] + "' (gamma|ml|wright|moment)");
    }
    out << fmt17(value) << "\n";
    return exit_ok;
}

inline int run_solve(const Options& o, std::ostream& out, std::ostream& err) {
    if (o.positional.empty()) throw DomainError("solve: missing problem file");
    const io::ProblemFile pf = io::load_problem(o.positional[0]);
    const SolveReport rep = mild_solve(pf.spec, pf.grid, pf.tol, pf.max_iter);

    if (auto it = o.flags.find("out"); it != o.flags.end()) {
        std::ofstream f(it->second);
        if (!f) throw DomainError("cannot open output file " + it->second);
        io::write_trajectory_csv(f, rep.final);
    } else {
        io::write_trajectory_csv(out, rep.final);
    }
    if (auto it = o.flags.find("report"); it != o.flags.end()) {
        std::ofstream f(it->second);
        if (!f) throw DomainError("cannot open report file " + it->second);
        f << io::solve_report_json(rep).dump(2) << "\n";
    }
    if (!rep.converged) {
        err << "solve: Picard iteration did not reach tol within max_iter\n";
        return exit_numerical;
    }
    return exit_ok;
}

inline int run_certify(const Options& o, std::ostream& out, std::ostream& err) {
    if (o.positional.empty()) throw DomainError("certify: missing problem file");
    const io::ProblemFile pf = io::load_problem(o.positional[0]);
    ConditionConstants c;
    if (pf.has_constants) {
        c = pf.constants;
    } else {
        int samples = 10000;
        if (auto it = o.flags.find("samples"); it != o.flags.end()) samples = std::stoi(it->second);
        c = estimate_constants(pf.spec, samples, 1.0, sampling_seed());
    }
    if (o.sharper_gamma) c.denom = GammaDenominator::Sharper;
    const CertificateReport rep = make_certificate(c);
    out << io::certificate_json(rep).dump(2) << "\n";
    if (!rep.contraction_ok) {
        err << "certify: contraction constant q = " << rep.q << " >= 1\n";
        return exit_certificate;
    }
    return exit_ok;
}

inline int run_residual(const Options& o, std::ostream& out) {
    if (o.positional.empty()) throw DomainError("residual: missing problem file");
    const auto sol = o.flags.find("solution");
    if (sol == o.flags.end()) throw DomainError("residual: --solution <csv> is required");
    const io::ProblemFile pf = io::load_problem(o.positional[0]);
    std::ifstream f(sol->second);
    if (!f) throw DomainError("cannot open solution file " + sol->second);
    const Trajectory u =
        io::read_trajectory_csv(f, pf.grid, pf.spec.gamma_index(), pf.spec.dim());

    const Trajectory r = strong_residual(pf.spec, u);
    const double sup = residual_sup(r);
    const double icc = initial_condition_check(pf.spec, u);

    if (auto it = o.flags.find("out"); it != o.flags.end()) {
        std::ofstream rf(it->second);
        if (!rf) throw DomainError("cannot open output file " + it->second);
        rf << "t";
        for (int k = 1; k <= r.dim; ++k) rf << ",r" << k;
        rf << "\n";
        for (int i = 0; i < r.grid.size(); ++i) {
            rf << io::detail::fmt(r.grid.node(i));
            for (int k = 0; k < r.dim; ++k) rf << "," << io::detail::fmt(r.at(i)[k]);
            rf << "\n";
        }
    }

    io::json rep;
    rep["residual_sup"] = sup;
    rep["initial_condition_check"] = icc;
    rep["notes"] = io::interpretation_notes();
    out << rep.dump(2) << "\n";
    return exit_ok;
}

inline int run_gronwall(const Options& o, std::ostream& out) {
    if (o.positional.empty()) throw DomainError("gronwall: missing file");
    const io::ProblemFile pf = io::load_problem(o.positional[0]);
    if (!pf.gronwall) throw DomainError("gronwall: file has no gronwall section");
    const io::GronwallSpec& gs = *pf.gronwall;

    const GronwallCheck check = verify_gronwall(gs.u, gs.v, gs.g, gs.alpha, gs.psi, gs.grid);
    const GronwallBound gb = gronwall_bound(gs.v, gs.g, gs.alpha, gs.psi, gs.grid, gs.terms);

    bool v_nondecreasing = true;
    for (int i = 1; i < gs.grid.size(); ++i)
        if (gs.v[i] < gs.v[i - 1] - 1e-12) v_nondecreasing = false;
    std::vector<double> cb;
    if (v_nondecreasing) cb = corollary_bound(gs.v, gs.g, gs.alpha, gs.psi, gs.grid);

    if (auto it = o.flags.find("out"); it != o.flags.end()) {
        std::ofstream f(it->second);
        if (!f) throw DomainError("cannot open output file " + it->second);
        f << "t,u,v,bound" << (cb.empty() ? "" : ",corollary") << "\n";
        for (int i = 0; i < gs.grid.size(); ++i) {
            f << io::detail::fmt(gs.grid.node(i)) << "," << io::detail::fmt(gs.u[i]) << ","
              << io::detail::fmt(gs.v[i]) << "," << io::detail::fmt(gb.values[i]);
            if (!cb.empty()) f << "," << io::detail::fmt(cb[i]);
            f << "\n";
        }
    }

    io::json rep;
    rep["hypothesis"] = detail::verdict_name(check.hypothesis);
    rep["bound"] = detail::verdict_name(check.bound);
    rep["corollary"] = detail::verdict_name(check.corollary);
    rep["tail_estimate"] = gb.tail;
    out << rep.dump(2) << "\n";
    return exit_ok;
}

inline int run_converge(const Options& o, std::ostream& out) {
    if (o.positional.empty()) throw DomainError("converge: missing problem file");
    const auto git = o.flags.find("grids");
    if (git == o.flags.end()) throw DomainError("converge: --grids <n1,n2,...> is required");
    std::vector<int> ns;
    std::stringstream ss(git->second);
    std::string cell;
    while (std::getline(ss, cell, ',')) ns.push_back(std::stoi(cell));
    if (ns.size() < 2) throw DomainError("converge: need at least two grid sizes");
    for (std::size_t i = 1; i < ns.size(); ++i) {
        if (ns[i] != 2 * ns[i - 1]) throw DomainError("converge: grid sizes must double");
    }

    const io::ProblemFile pf = io::load_problem(o.positional[0]);
    std::vector<Trajectory> sols;
    for (int n : ns) {
        const Grid g(pf.spec.t0, pf.spec.a, n);
        SolveReport rep = mild_solve(pf.spec, g, pf.tol, pf.max_iter);
        if (!rep.converged) throw ConvergenceError("converge: solve at n=" + std::to_string(n) + " did not converge");
        sols.push_back(std::move(rep.final));
    }

    std::vector<double> diffs;
    for (std::size_t l = 0; l + 1 < sols.size(); ++l) {
        const Trajectory& coarse = sols[l];
        const Trajectory& fine = sols[l + 1];
        double best = 0.0;
        for (int i = 0; i <= coarse.grid.n; ++i) {
            double s = 0.0;
            for (int k = 0; k < coarse.dim; ++k) {
                const double e = coarse.at(i)[k] - fine.at(2 * i)[k];
                s += e * e;
            }
            best = std::max(best, std::sqrt(s));
        }
        diffs.push_back(best);
    }
    bool monotone = true;
    for (std::size_t i = 1; i < diffs.size(); ++i) monotone = monotone && diffs[i] < diffs[i - 1];

    io::json rep;
    rep["grids"] = ns;
    rep["differences"] = diffs;
    rep["monotone"] = monotone;
    out << rep.dump(2) << "\n";
    return exit_ok;
}

} // namespace detail

/// Dispatch a CLI invocation (argv without the program name).
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    if (args.empty()) {
        detail::usage(err);
        return exit_usage;
    }
    const std::string& cmd = args[0];
    try {
        const detail::Options o = detail::parse_options(args, 1);
        if (cmd == "specfun") return detail::run_specfun(o, out);
        if (cmd == "solve") return detail::run_solve(o, out, err);
        if (cmd == "certify") return detail::run_certify(o, out, err);
        if (cmd == "residual") return detail::run_residual(o, out);
        if (cmd == "gronwall") return detail::run_gronwall(o, out);
        if (cmd == "converge") return detail::run_converge(o, out);
        detail::usage(err);
        return exit_usage;
    } catch (const ParseError& e) {
        err << "parse error at offset " << e.offset() << ": " << e.what() << " (expected:";
        for (const auto& s : e.expected()) err << " " << s;
        err << ")\n";
        return exit_usage;
    } catch (const ConvergenceError& e) {
        err << "numerical failure: " << e.what() << "\n";
        return exit_numerical;
    } catch (const NonFiniteError& e) {
        err << "numerical failure: " << e.what() << "\n";
        return exit_numerical;
    } catch (const OverflowError& e) {
        err << "numerical failure: " << e.what() << "\n";
        return exit_numerical;
    } catch (const PoleError& e) {
        err << "numerical failure: " << e.what() << "\n";
        return exit_numerical;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_usage;
    }
}

} // namespace hilfer::cli
