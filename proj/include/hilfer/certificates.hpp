#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "hilfer/errors.hpp"
#include "hilfer/frac_ops.hpp"
#include "hilfer/operators.hpp"
#include "hilfer/solver.hpp"
#include "hilfer/special_functions.hpp"

namespace hilfer {

/// Denominator convention for the kernel term of the contraction constant:
/// Gamma(mu)^2 (the default) or the sharper standard estimate
/// Gamma(mu) Gamma(mu+1).
enum class GammaDenominator { Squared, Sharper };

/// Evaluated hypothesis constants for the well-posedness conditions.
struct ConditionConstants {
    double M = 1.0;        // operator bound max_t ||t^{1-gamma} S_{mu,nu}(t)||
    double L = 0.0;        // Lipschitz constant of f
    double K0 = 0.0;       // kernel Lipschitz constant
    double K1 = 0.0;       // sup of weighted ||K(t,s,0)||
    double H = 0.0;        // sup of weighted ||f(s,0)||
    double Q0 = 0.0;       // Lipschitz constant of g (aliases the G0 of the strong conditions)
    double G1_tilde = 0.0; // sup of weighted ||g|| over the ball
    double r = 1.0;        // ball radius
    double a = 1.0;        // horizon
    double mu = 0.5;
    double t0 = 0.0;
    double u0_norm = 0.0;
    PsiFunction psi = PsiFunction::identity();
    GammaDenominator denom = GammaDenominator::Squared;
    bool estimated = false; // true when produced by sampling (lower estimates, not proofs)

    void validate() const {
        if (M < 0 || L < 0 || K0 < 0 || K1 < 0 || H < 0 || Q0 < 0 || G1_tilde < 0 || u0_norm < 0)
            throw DomainError("ConditionConstants: constants must be nonnegative");
        if (!(r > 0.0)) throw DomainError("ConditionConstants: r must be > 0");
        if (!(a > 0.0)) throw DomainError("ConditionConstants: a must be > 0");
        if (!(mu > 0.0 && mu <= 1.0)) throw DomainError("ConditionConstants: mu must be in (0,1]");
    }

    double gamma_mu_denominator() const {
        const double g = gamma(mu);
        return denom == GammaDenominator::Squared ? g * g : g * gamma(mu + 1.0);
    }

    double psi_span_pow() const { return std::pow(psi.eval(t0 + a) - psi.eval(t0), mu); }
};

/// Contraction and ball verdicts plus interpretation flags.
struct CertificateReport {
    double q = 0.0;
    double ball_lhs = 0.0;
    bool ball_ok = false;
    bool contraction_ok = false;
    double conditions_II_q = 0.0;
    std::vector<std::string> notes;
};

/// q = M Q0 + M L a + (M K0 a / Gamma(mu)^2) (psi(t0+a) - psi(t0))^mu.
inline double contraction_constant(const ConditionConstants& c) {
    c.validate();
    return c.M * c.Q0 + c.M * c.L * c.a + (c.M * c.K0 * c.a / c.gamma_mu_denominator()) * c.psi_span_pow();
}

/// Ball-invariance left side and verdict lhs <= r.
inline std::pair<double, bool> ball_invariance(const ConditionConstants& c) {
    c.validate();
    const double lhs = c.M * (c.u0_norm + c.G1_tilde + (c.L * c.r + c.H) * c.a +
                              ((c.K0 * c.r + c.K1) / c.gamma_mu_denominator()) * c.psi_span_pow() * c.a);
    return {lhs, lhs <= c.r};
}

/// Factored strong-solution constant M (Q0 + L a + (K0 a / Gamma(mu)^2) psi^mu);
/// algebraically identical to contraction_constant.
inline double conditions_II_constant(const ConditionConstants& c) {
    c.validate();
    return c.M * (c.Q0 + c.L * c.a + (c.K0 * c.a / c.gamma_mu_denominator()) * c.psi_span_pow());
}

inline CertificateReport make_certificate(const ConditionConstants& c) {
    CertificateReport rep;
    rep.q = contraction_constant(c);
    const auto [lhs, ok] = ball_invariance(c);
    rep.ball_lhs = lhs;
    rep.ball_ok = ok;
    rep.contraction_ok = rep.q < 1.0;
    rep.conditions_II_q = conditions_II_constant(c);
    rep.notes = {
        "kernel_exponent=mu: the solution kernel is realized as K_mu(t) = t^{mu-1} P_mu(t) (exponent mu-1, not gamma-1)",
        "operator_bound=weighted: M is taken over t^{1-gamma} S_{mu,nu}(t)",
        "Q0_aliases_G0: the strong-solution Lipschitz constant G0 is the same datum as Q0",
        c.denom == GammaDenominator::Squared ? "gamma_denominator=squared: Gamma(mu)^2"
                                             : "gamma_denominator=sharper: Gamma(mu)Gamma(mu+1)",
    };
    if (c.estimated)
        rep.notes.push_back("constants_estimated: sampling-based lower estimates, not proofs");
    return rep;
}

namespace detail {

/// Deterministic uniform doubles in [0,1) from mt19937_64 (implementation-
/// independent mapping).
class UniformSource {
public:
    explicit UniformSource(std::uint64_t seed) : eng_(seed) {}
    double next() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
    double range(double lo, double hi) { return lo + (hi - lo) * next(); }

    /// Uniform point in the Euclidean ball of radius r (rejection from the cube).
    std::vector<double> ball(int dim, double r) {
        std::vector<double> x(dim);
        while (true) {
            double s = 0.0;
            for (int k = 0; k < dim; ++k) {
                x[k] = range(-1.0, 1.0);
                s += x[k] * x[k];
            }
            if (s <= 1.0) {
                for (double& v : x) v *= r;
                return x;
            }
        }
    }

private:
    std::mt19937_64 eng_;
};

} // namespace detail

/// Finite-sample estimates of the hypothesis constants: Lipschitz constants
/// from difference quotients over random ball pairs, sup constants from grid
/// maxima, M from the weighted operator table. Lower estimates, not proofs.
inline ConditionConstants estimate_constants(const ProblemSpec& p, int samples, double r = 1.0,
                                             std::uint64_t seed = 0x5eed5eedULL) {
    if (samples < 2) throw DomainError("estimate_constants: need at least 2 samples");
    p.validate();
    detail::UniformSource rng(seed);
    const int d = p.dim();
    const double gam = p.gamma_index();
    const double tend = p.t0 + p.a;
    const Grid grid(p.t0, p.a, 256);

    ConditionConstants c;
    c.r = r;
    c.a = p.a;
    c.mu = p.mu;
    c.t0 = p.t0;
    c.psi = p.psi;
    c.u0_norm = linalg::nrm2(p.u0);
    c.estimated = true;

    auto weight = [&](double t) { return gam == 1.0 ? 1.0 : std::pow(t - p.t0, 1.0 - gam); };

    if (p.f) {
        double best = 0.0;
        for (int s = 0; s < samples; ++s) {
            const double t = rng.range(p.t0, tend);
            const std::vector<double> u1 = rng.ball(d, r), u2 = rng.ball(d, r);
            std::vector<double> du(d);
            for (int k = 0; k < d; ++k) du[k] = u1[k] - u2[k];
            const double den = linalg::nrm2(du);
            if (den < 1e-12) continue;
            const std::vector<double> f1 = p.f(t, u1), f2 = p.f(t, u2);
            std::vector<double> df(d);
            for (int k = 0; k < d; ++k) df[k] = f1[k] - f2[k];
            best = std::max(best, linalg::nrm2(df) / den);
        }
        c.L = best;
        double h = 0.0;
        const std::vector<double> zero(d, 0.0);
        for (int i = 0; i <= grid.n; ++i) {
            const double t = grid.node(i);
            if (gam < 1.0 && i == 0) continue;
            h = std::max(h, weight(t) * linalg::nrm2(p.f(t, zero)));
        }
        c.H = h;
    }

    if (p.kernel) {
        double best = 0.0;
        for (int s = 0; s < samples; ++s) {
            const double t = rng.range(p.t0, tend);
            const double tau = rng.range(p.t0, t);
            const std::vector<double> u1 = rng.ball(d, r), u2 = rng.ball(d, r);
            std::vector<double> du(d);
            for (int k = 0; k < d; ++k) du[k] = u1[k] - u2[k];
            const double den = linalg::nrm2(du);
            if (den < 1e-12) continue;
            const std::vector<double> k1 = p.kernel(t, tau, u1), k2 = p.kernel(t, tau, u2);
            std::vector<double> dk(d);
            for (int k = 0; k < d; ++k) dk[k] = k1[k] - k2[k];
            best = std::max(best, linalg::nrm2(dk) / den);
        }
        c.K0 = best;
        double k1max = 0.0;
        const std::vector<double> zero(d, 0.0);
        for (int i = 1; i <= grid.n; ++i) {
            for (int j = 0; j <= i; j += 8) {
                const double t = grid.node(i), s = grid.node(j);
                k1max = std::max(k1max, weight(t) * linalg::nrm2(p.kernel(t, s, zero)));
            }
        }
        c.K1 = k1max;
    }

    if (p.g) {
        const int np = static_cast<int>(p.nonlocal_points.size());
        double best = 0.0, gsup = 0.0;
        for (int s = 0; s < samples; ++s) {
            std::vector<std::vector<double>> u1(np), u2(np);
            double den = 0.0;
            for (int j = 0; j < np; ++j) {
                u1[j] = rng.ball(d, r);
                u2[j] = rng.ball(d, r);
                std::vector<double> du(d);
                for (int k = 0; k < d; ++k) du[k] = u1[j][k] - u2[j][k];
                den = std::max(den, weight(p.nonlocal_points[j]) * linalg::nrm2(du));
            }
            if (den < 1e-12) continue;
            const std::vector<double> g1 = p.g(u1), g2 = p.g(u2);
            std::vector<double> dg(d);
            for (int k = 0; k < d; ++k) dg[k] = g1[k] - g2[k];
            best = std::max(best, linalg::nrm2(dg) / den);
            gsup = std::max(gsup, linalg::nrm2(g1));
        }
        c.Q0 = best;
        c.G1_tilde = std::pow(tend, 1.0 - gam) * gsup;
    }

    c.M = (p.mu < 1.0) ? operator_bound_M(p.A, p.mu, p.nu, grid)
                       : [&] {
                             double best = 0.0;
                             for (int i = 0; i <= grid.n; ++i) {
                                 linalg::Matrix m = p.A.A;
                                 m *= -(grid.node(i) - p.t0);
                                 best = std::max(best, linalg::spectral_norm(linalg::expm(m)));
                             }
                             return best;
                         }();
    return c;
}

/// Truncated Gronwall series bound with its tail estimate.
struct GronwallBound {
    std::vector<double> values;
    double tail = 0.0; // max over nodes of the first omitted term
};

/// Right side of the Gronwall conclusion:
/// v(t) + int_a^t sum_{k=1}^{terms} (g(t)Gamma(alpha))^k / Gamma(alpha k)
///                 psi'(tau)(psi(t)-psi(tau))^{k alpha - 1} v(tau) dtau.
inline GronwallBound gronwall_bound(const std::vector<double>& v, const std::vector<double>& g, double alpha,
                                    const PsiFunction& psi, const Grid& grid, int terms = 30) {
    if (static_cast<int>(v.size()) != grid.size() || static_cast<int>(g.size()) != grid.size())
        throw GridMismatchError("gronwall_bound: values not sampled on the grid");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("gronwall_bound: alpha must be in (0,1]");
    if (terms < 1) throw DomainError("gronwall_bound: terms must be >= 1");
    for (int i = 0; i < grid.size(); ++i) {
        if (v[i] < 0.0 || g[i] < 0.0) throw DomainError("gronwall_bound: v and g must be nonnegative");
        if (i > 0 && g[i] < g[i - 1] - 1e-12) throw DomainError("gronwall_bound: g must be nondecreasing");
    }

    const double ga = gamma(alpha);
    GronwallBound out;
    out.values = v;
    for (int k = 1; k <= terms + 1; ++k) {
        const double rgk = rgamma(alpha * k);
        std::vector<double> layer(grid.size(), 0.0);
        for (int i = 1; i <= grid.n; ++i) {
            const std::vector<double> c = detail::product_weights_psi(alpha * k, 1.0, psi, grid.t0, grid.h(), i);
            double s = 0.0;
            for (int j = 0; j < static_cast<int>(c.size()); ++j) s += c[j] * v[j];
            layer[i] = std::pow(g[i] * ga, static_cast<double>(k)) * rgk * s;
        }
        if (k <= terms) {
            for (int i = 0; i < grid.size(); ++i) out.values[i] += layer[i];
        } else {
            for (int i = 0; i < grid.size(); ++i) out.tail = std::max(out.tail, layer[i]);
        }
    }
    return out;
}

/// Mittag-Leffler envelope v(t) E_alpha(g(t) Gamma(alpha) (psi(t)-psi(t0))^alpha).
inline std::vector<double> corollary_bound(const std::vector<double>& v, const std::vector<double>& g,
                                           double alpha, const PsiFunction& psi, const Grid& grid) {
    if (static_cast<int>(v.size()) != grid.size() || static_cast<int>(g.size()) != grid.size())
        throw GridMismatchError("corollary_bound: values not sampled on the grid");
    for (int i = 1; i < grid.size(); ++i) {
        if (v[i] < v[i - 1] - 1e-12) throw DomainError("corollary_bound: v must be nondecreasing");
    }
    std::vector<double> out(grid.size());
    const double ga = gamma(alpha);
    for (int i = 0; i < grid.size(); ++i) {
        const double arg = g[i] * ga * std::pow(psi.eval(grid.node(i)) - psi.eval(grid.t0), alpha);
        out[i] = v[i] * mittag_leffler(alpha, 1.0, arg);
    }
    return out;
}

enum class GronwallVerdict { Pass, Fail, NotApplicable };

struct GronwallCheck {
    GronwallVerdict hypothesis = GronwallVerdict::Fail;
    GronwallVerdict bound = GronwallVerdict::NotApplicable;
    GronwallVerdict corollary = GronwallVerdict::NotApplicable;
};

/// Checks the Gronwall hypothesis u <= v + g * I^alpha-type integral of u by
/// quadrature; when it holds, asserts the two conclusions node-wise.
inline GronwallCheck verify_gronwall(const std::vector<double>& u, const std::vector<double>& v,
                                     const std::vector<double>& g, double alpha, const PsiFunction& psi,
                                     const Grid& grid, double rel_slack = 1e-6) {
    if (static_cast<int>(u.size()) != grid.size())
        throw GridMismatchError("verify_gronwall: values not sampled on the grid");
    GronwallCheck out;

    bool hyp = true;
    for (int i = 0; i <= grid.n && hyp; ++i) {
        const std::vector<double> c = detail::product_weights_psi(alpha, 1.0, psi, grid.t0, grid.h(), i);
        double integral = 0.0;
        for (int j = 0; j < static_cast<int>(c.size()); ++j) integral += c[j] * u[j];
        const double rhs = v[i] + g[i] * integral;
        const double tol = 1e-9 + rel_slack * std::max(std::fabs(u[i]), std::fabs(rhs));
        if (u[i] > rhs + tol) hyp = false;
    }
    out.hypothesis = hyp ? GronwallVerdict::Pass : GronwallVerdict::Fail;
    if (!hyp) return out;

    const GronwallBound gb = gronwall_bound(v, g, alpha, psi, grid);
    bool bok = true;
    for (int i = 0; i <= grid.n; ++i) {
        const double tol = 1e-9 + gb.tail + rel_slack * std::max(std::fabs(u[i]), std::fabs(gb.values[i]));
        if (u[i] > gb.values[i] + tol) bok = false;
    }
    out.bound = bok ? GronwallVerdict::Pass : GronwallVerdict::Fail;

    bool v_nondecreasing = true;
    for (int i = 1; i < grid.size(); ++i)
        if (v[i] < v[i - 1] - 1e-12) v_nondecreasing = false;
    if (!v_nondecreasing) {
        out.corollary = GronwallVerdict::NotApplicable;
        return out;
    }
    const std::vector<double> cb = corollary_bound(v, g, alpha, psi, grid);
    bool cok = true;
    for (int i = 0; i <= grid.n; ++i) {
        const double tol = 1e-9 + rel_slack * std::max(std::fabs(u[i]), std::fabs(cb[i]));
        if (u[i] > cb[i] + tol) cok = false;
    }
    out.corollary = cok ? GronwallVerdict::Pass : GronwallVerdict::Fail;
    return out;
}

} // namespace hilfer
