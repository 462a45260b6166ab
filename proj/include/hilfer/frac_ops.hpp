#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "hilfer/errors.hpp"
#include "hilfer/linalg.hpp"
#include "hilfer/special_functions.hpp"

namespace hilfer {

/// The kernel generator psi: increasing with psi'(t) > 0 on the working interval.
struct PsiFunction {
    enum class Kind { Identity, Power, Exponential };

    Kind kind = Kind::Identity;
    double param = 1.0;

    static PsiFunction identity() { return {Kind::Identity, 1.0}; }
    static PsiFunction power(double p) {
        if (!(p > 0.0)) throw DomainError("PsiFunction::power: exponent must be > 0");
        return {Kind::Power, p};
    }
    static PsiFunction exponential(double c) {
        if (!(c > 0.0)) throw DomainError("PsiFunction::exponential: rate must be > 0");
        return {Kind::Exponential, c};
    }

    bool is_identity() const { return kind == Kind::Identity; }

    double eval(double t) const {
        switch (kind) {
            case Kind::Identity: return t;
            case Kind::Power: return std::pow(t, param);
            case Kind::Exponential: return std::exp(param * t);
        }
        return t;
    }

    double deriv(double t) const {
        switch (kind) {
            case Kind::Identity: return 1.0;
            case Kind::Power: return param * std::pow(t, param - 1.0);
            case Kind::Exponential: return param * std::exp(param * t);
        }
        return 1.0;
    }
};

/// Uniform grid t0 = tau_0 < ... < tau_n = t0 + a.
struct Grid {
    double t0 = 0.0;
    double a = 1.0;
    int n = 8;

    Grid() = default;
    Grid(double t0_, double a_, int n_) : t0(t0_), a(a_), n(n_) {
        if (!(a > 0.0)) throw DomainError("Grid: horizon a must be > 0");
        if (n < 8) throw DomainError("Grid: need at least 8 subintervals");
        if (!(t0 >= 0.0)) throw DomainError("Grid: t0 must be >= 0");
    }

    double h() const { return a / n; }
    double node(int i) const { return t0 + (a * i) / n; }
    int size() const { return n + 1; }

    bool operator==(const Grid& o) const { return t0 == o.t0 && a == o.a && n == o.n; }
};

/// Grid-sampled state path stored in weighted form w(t) = t^{1-gamma} u(t).
///
/// The weight absorbs the t^{gamma-1} singularity at t0 = 0; for gamma = 1 the
/// stored values are the states themselves.
struct Trajectory {
    Grid grid;
    double gamma = 1.0;
    int dim = 1;
    std::vector<double> weighted; // (n+1) x dim, row-major

    Trajectory() = default;
    Trajectory(Grid g, double gamma_, int dim_)
        : grid(g), gamma(gamma_), dim(dim_), weighted(static_cast<std::size_t>(g.size()) * dim_, 0.0) {
        if (!(gamma > 0.0 && gamma <= 1.0)) throw DomainError("Trajectory: gamma must be in (0,1]");
        if (dim < 1) throw DomainError("Trajectory: dim must be >= 1");
    }

    std::span<double> at(int i) {
        return {weighted.data() + static_cast<std::size_t>(i) * dim, static_cast<std::size_t>(dim)};
    }
    std::span<const double> at(int i) const {
        return {weighted.data() + static_cast<std::size_t>(i) * dim, static_cast<std::size_t>(dim)};
    }

    /// Unweighted state at node i; requires t > 0 when gamma < 1.
    std::vector<double> value(int i) const {
        const double t = grid.node(i);
        std::vector<double> u(at(i).begin(), at(i).end());
        if (gamma == 1.0) return u;
        if (t <= 0.0) throw DomainError("Trajectory::value: unweighted value undefined at t=0 for gamma<1");
        const double f = std::pow(t, gamma - 1.0);
        for (double& v : u) v *= f;
        return u;
    }

    /// Linear interpolation of the weighted path at time t.
    std::vector<double> weighted_at_time(double t) const {
        const double h = grid.h();
        double pos = (t - grid.t0) / h;
        pos = std::clamp(pos, 0.0, static_cast<double>(grid.n));
        const int j = std::min(static_cast<int>(pos), grid.n - 1);
        const double frac = pos - j;
        std::vector<double> out(dim);
        for (int k = 0; k < dim; ++k) out[k] = (1.0 - frac) * at(j)[k] + frac * at(j + 1)[k];
        return out;
    }

    /// Unweighted state at time t (t > 0 when gamma < 1), interpolating weighted values.
    std::vector<double> value_at_time(double t) const {
        std::vector<double> u = weighted_at_time(t);
        if (gamma < 1.0) {
            if (!(t > 0.0)) throw DomainError("Trajectory::value_at_time: t must be > 0 for gamma<1");
            const double f = std::pow(t, gamma - 1.0);
            for (double& v : u) v *= f;
        }
        return u;
    }

    void ensure_finite() const {
        for (double v : weighted) {
            if (!std::isfinite(v)) throw NonFiniteError("trajectory contains non-finite values");
        }
    }
};

/// Weighted sup norm ||u||_{C_{1-gamma}} = max_i ||w(tau_i)||_2.
inline double weighted_norm(const Trajectory& u) {
    double best = 0.0;
    for (int i = 0; i < u.grid.size(); ++i) best = std::max(best, linalg::nrm2(u.at(i)));
    return best;
}

namespace detail {

/// Incomplete-beta continued fraction in double precision (Lentz).
inline double ibeta_cf_d(double a, double b, double x) {
    const double tiny = 1e-300, eps = 1e-15;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 300; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < eps) return h;
    }
    throw ConvergenceError("incomplete beta: continued fraction did not converge");
}

/// Row of unregularized incomplete-beta pieces at fixed (p, q):
/// exact segments integral_{lo}^{hi} (T-s)^{q-1} s^{p-1} ds on [0, T].
/// Pieces near s = T are kept in complemented form so adjacent segments never
/// cancel against 1.
class BetaRow {
public:
    BetaRow(double p, double q) : p_(p), q_(q) {
        beta_ = gamma(p) * gamma(q) * rgamma(p + q);
        split_ = (p_ + 1.0) / (p_ + q_ + 2.0);
    }

    struct Piece {
        double value;
        bool upper;
    };

    /// Piece at x = s/T: lower integral B*I_x or upper complement B*(1-I_x).
    Piece piece(double x) const {
        if (x <= 0.0) return {0.0, false};
        if (x >= 1.0) return {0.0, true};
        const double front = std::exp(p_ * std::log(x) + q_ * std::log1p(-x));
        if (x < split_) return {front * ibeta_cf_d(p_, q_, x) / p_, false};
        return {front * ibeta_cf_d(q_, p_, 1.0 - x) / q_, true};
    }

    double segment_from_pieces(const Piece& lo, const Piece& hi) const {
        if (!lo.upper && !hi.upper) return hi.value - lo.value;
        if (lo.upper && hi.upper) return lo.value - hi.value;
        return (beta_ - hi.value) - lo.value; // lo lower, hi upper
    }

    /// integral_{lo}^{hi} (T-s)^{q-1} s^{p-1} ds, scaled to the raw moment.
    double segment(double T, double slo, double shi) const {
        if (shi <= slo) return 0.0;
        const Piece a = piece(slo / T), b = piece(shi / T);
        return std::pow(T, p_ + q_ - 1.0) * segment_from_pieces(a, b);
    }

    double p() const { return p_; }
    double q() const { return q_; }

private:
    double p_, q_, beta_, split_;
};

/// Closed-form segments of (X-x)^{q-1} dx: zeroth and ramp moments on [xlo, xhi].
inline void plain_kernel_moments(double q, double X, double xlo, double xhi, double& m0, double& m1) {
    const double ulo = X - xhi;
    const double uhi = X - xlo;
    const double puq_lo = std::pow(std::max(ulo, 0.0), q), puq_hi = std::pow(uhi, q);
    m0 = (puq_hi - puq_lo) / q;
    const double i1 = uhi * (puq_hi - puq_lo) / q -
                      (std::pow(uhi, q + 1.0) - std::pow(std::max(ulo, 0.0), q + 1.0)) / (q + 1.0);
    m1 = i1 / (xhi - xlo);
}

/// Coefficients c_j with  sum_j c_j W_j  ~=  integral_0^{ih} (ih - s)^{q-1} s^{p-1} W(s) ds
/// on the uniform grid s_j = j h. W is interpolated linearly; on the first
/// `head` subintervals it is instead fitted quadratically in xi = s^{head_mu},
/// exact for the solution class's leading powers {1, s^mu, s^{2mu}}.
/// With head > 0 the coefficients may touch nodes up to max(i, 2).
inline std::vector<double> product_weights_identity(double q, double p, double h, int i, double head_mu,
                                                    int head) {
    std::vector<double> c(static_cast<std::size_t>(std::max(i, head > 0 ? 2 : 0)) + 1, 0.0);
    if (i == 0) return c;
    const double T = h * i;
    head = std::min(head, i);

    if (head > 0) {
        const BetaRow rows[3] = {BetaRow(p, q), BetaRow(p + head_mu, q), BetaRow(p + 2.0 * head_mu, q)};
        for (int j = 0; j < head; ++j) {
            const double lo = j * h, hi = (j + 1) * h;
            const double M[3] = {rows[0].segment(T, lo, hi), rows[1].segment(T, lo, hi),
                                 rows[2].segment(T, lo, hi)};
            const int sa = (j == 0) ? 0 : j - 1;
            const int idx[3] = {sa, sa + 1, sa + 2};
            const double xi[3] = {std::pow(sa * h, head_mu), std::pow((sa + 1) * h, head_mu),
                                  std::pow((sa + 2) * h, head_mu)};
            for (int r = 0; r < 3; ++r) {
                const double x1 = xi[(r + 1) % 3], x2 = xi[(r + 2) % 3];
                const double den = (xi[r] - x1) * (xi[r] - x2);
                c[idx[r]] += (M[2] - (x1 + x2) * M[1] + x1 * x2 * M[0]) / den;
            }
        }
    }

    if (head < i) {
        const BetaRow row_p(p, q), row_p1(p + 1.0, q);
        BetaRow::Piece lo_p = row_p.piece(head * h / T);
        BetaRow::Piece lo_p1 = row_p1.piece(head * h / T);
        const double scale_p = std::pow(T, p + q - 1.0);
        const double scale_p1 = std::pow(T, p + q);
        for (int j = head; j < i; ++j) {
            const double lo = j * h;
            const double xhi = (j + 1 == i) ? 1.0 : (j + 1) * h / T;
            const BetaRow::Piece hi_p = row_p.piece(xhi);
            const BetaRow::Piece hi_p1 = row_p1.piece(xhi);
            const double m0 = scale_p * row_p.segment_from_pieces(lo_p, hi_p);
            const double ms = scale_p1 * row_p1.segment_from_pieces(lo_p1, hi_p1);
            const double m1 = (ms - lo * m0) / h;
            c[j] += m0 - m1;
            c[j + 1] += m1;
            lo_p = hi_p;
            lo_p1 = hi_p1;
        }
    }
    return c;
}

/// Same contract for a general psi kernel psi'(s)(psi(T)-psi(s))^{q-1} with
/// trajectory weight s^{p-1}, nodes s_j = t0 + j h. Interpolation is linear in
/// x = psi(s); for p < 1 the weight is folded into the interpolated part away
/// from 0, and the first subinterval uses exact s^{p-1} moments against a
/// linearized kernel.
inline std::vector<double> product_weights_psi(double q, double p, const PsiFunction& psi, double t0, double h,
                                               int i) {
    std::vector<double> c(static_cast<std::size_t>(i) + 1, 0.0);
    if (i == 0) return c;
    const double T = t0 + h * i;
    const double X = psi.eval(T);

    int jstart = 0;
    if (p < 1.0 && t0 == 0.0 && psi.kind == PsiFunction::Kind::Power) {
        // In x = tau^param the full integrand is the beta weight
        // (X - x)^{q-1} x^{e-1}: every interval has exact moments.
        const double e = (p - 1.0 + psi.param) / psi.param;
        if (!(e > 0.0)) throw DomainError("psi_frac_integral: kernel weight not integrable at t=0");
        const BetaRow m_full(e, q), m_x(e + 1.0, q);
        for (int j = 0; j < i; ++j) {
            const double xlo = psi.eval(t0 + j * h), xhi = psi.eval(t0 + (j + 1) * h);
            const double m0 = m_full.segment(X, xlo, xhi);
            const double ramp = (m_x.segment(X, xlo, xhi) - xlo * m0) / (xhi - xlo);
            c[j] += m0 - ramp;
            c[j + 1] += ramp;
        }
        return c;
    }
    if (p < 1.0 && t0 == 0.0) {
        // Exponential kind: substitute x = psi(tau) - psi(0) and integrate the
        // leading-order doubly singular weight (x ~ param * tau near 0) exactly
        // on the first interval; the weight is folded into the interpolant on
        // the interior ones.
        const double scale = std::pow(psi.param, 1.0 - p);
        const double shift = psi.eval(0.0);
        const double span = X - shift;
        const double x1 = psi.eval(h) - shift;
        const BetaRow m_full(p, q), m_ramp(p + 1.0, q);
        const double full = scale * m_full.segment(span, 0.0, x1);
        const double ramp = scale * m_ramp.segment(span, 0.0, x1) / x1; // against x/x1
        c[0] += full - ramp;
        c[1] += ramp;
        jstart = 1;
        if (i == 1) return c;
    }
    for (int j = jstart; j < i; ++j) {
        const double slo = t0 + j * h, shi = t0 + (j + 1) * h;
        const double xlo = psi.eval(slo), xhi = psi.eval(shi);
        double m0, m1;
        plain_kernel_moments(q, X, xlo, xhi, m0, m1);
        const double glo = (p == 1.0) ? 1.0 : std::pow(slo, p - 1.0);
        const double ghi = (p == 1.0) ? 1.0 : std::pow(shi, p - 1.0);
        c[j] += glo * (m0 - m1);
        c[j + 1] += ghi * m1;
    }
    return c;
}

inline int head_intervals(int n) {
    return std::max(8, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n)))));
}

} // namespace detail

/// psi-fractional integral of a weighted trajectory:
/// I^{mu;psi} u (tau_i) with u(s) = s^{gamma-1} w(s), w interpolated linearly.
inline std::vector<double> psi_frac_integral(double mu, const PsiFunction& psi, const Trajectory& f,
                                             int t_index) {
    if (!(mu > 0.0 && mu <= 1.0)) throw DomainError("psi_frac_integral: mu must be in (0,1]");
    if (t_index < 0 || t_index > f.grid.n) throw GridMismatchError("psi_frac_integral: t_index outside grid");
    const double h = f.grid.h();
    std::vector<double> coeff;
    if (f.gamma == 1.0) {
        coeff = detail::product_weights_psi(mu, 1.0, psi, f.grid.t0, h, t_index);
    } else if (psi.is_identity() && f.grid.t0 == 0.0) {
        coeff = detail::product_weights_identity(mu, f.gamma, h, t_index, 0.5, 0);
    } else {
        coeff = detail::product_weights_psi(mu, f.gamma, psi, f.grid.t0, h, t_index);
    }
    std::vector<double> out(f.dim, 0.0);
    for (int j = 0; j < static_cast<int>(coeff.size()); ++j) {
        if (coeff[j] == 0.0) continue;
        const auto w = f.at(std::min(j, f.grid.n));
        for (int k = 0; k < f.dim; ++k) out[k] += coeff[j] * w[k];
    }
    const double rg = rgamma(mu);
    for (double& v : out) v *= rg;
    return out;
}

/// psi-fractional integral of a plain (unweighted) grid function.
inline double psi_frac_integral(double mu, const PsiFunction& psi, std::span<const double> values,
                                const Grid& grid, int t_index) {
    if (!(mu > 0.0 && mu <= 1.0)) throw DomainError("psi_frac_integral: mu must be in (0,1]");
    if (static_cast<int>(values.size()) != grid.size())
        throw GridMismatchError("psi_frac_integral: values not sampled on the grid");
    if (t_index < 0 || t_index > grid.n) throw GridMismatchError("psi_frac_integral: t_index outside grid");
    const std::vector<double> coeff = detail::product_weights_psi(mu, 1.0, psi, grid.t0, grid.h(), t_index);
    double acc = 0.0;
    for (int j = 0; j < static_cast<int>(coeff.size()); ++j) acc += coeff[j] * values[j];
    return acc * rgamma(mu);
}

namespace detail {

/// Derivative at x of the quadratic through (x0,y0), (x1,y1), (x2,y2).
inline double quad3_deriv(double x0, double y0, double x1, double y1, double x2, double y2, double x) {
    const double d0 = (2.0 * x - x1 - x2) / ((x0 - x1) * (x0 - x2));
    const double d1 = (2.0 * x - x0 - x2) / ((x1 - x0) * (x1 - x2));
    const double d2 = (2.0 * x - x0 - x1) / ((x2 - x0) * (x2 - x1));
    return y0 * d0 + y1 * d1 + y2 * d2;
}

} // namespace detail

/// Hilfer derivative D^{mu,nu} f on the whole grid (plain values per node),
/// evaluated as I^{nu(1-mu)} d/dt I^{(1-nu)(1-mu)} f.
///
/// Valid on interior nodes; the end nodes use one-sided stencils. The
/// difference stencil works in xi = t^mu and the integrals use the cusp-aware
/// product rule, so the scheme is exact on spans of {1, t^mu, t^{2mu}}.
inline std::vector<std::vector<double>> hilfer_derivative_path(double mu, double nu, const Trajectory& f) {
    if (!(mu > 0.0 && mu < 1.0)) throw DomainError("hilfer_derivative: mu must be in (0,1)");
    if (!(nu >= 0.0 && nu <= 1.0)) throw DomainError("hilfer_derivative: nu must be in [0,1]");
    if (f.gamma < 1.0 && f.grid.t0 != 0.0)
        throw DomainError("hilfer_derivative: weighted trajectories require t0 = 0");

    const int n = f.grid.n, d = f.dim;
    const double h = f.grid.h();
    const double rho_in = (1.0 - nu) * (1.0 - mu);
    const double rho_out = nu * (1.0 - mu);
    const int head = detail::head_intervals(n);
    const double e0 = f.gamma + rho_in - 1.0;

    // inner integral v = I^{rho_in} f on every node
    std::vector<std::vector<double>> v(n + 1, std::vector<double>(d, 0.0));
    bool v0_valid = true;
    if (rho_in == 0.0) {
        for (int i = 0; i <= n; ++i) {
            if (i == 0 && f.gamma < 1.0) {
                v0_valid = false;
                continue;
            }
            v[i] = f.value(i);
        }
    } else {
        const double rg = rgamma(rho_in);
        for (int i = 1; i <= n; ++i) {
            const std::vector<double> c = detail::product_weights_identity(rho_in, f.gamma, h, i, mu, head);
            for (int j = 0; j < static_cast<int>(c.size()); ++j) {
                if (c[j] == 0.0) continue;
                const auto w = f.at(std::min(j, n));
                for (int k = 0; k < d; ++k) v[i][k] += c[j] * w[k];
            }
            for (double& x : v[i]) x *= rg;
        }
        if (e0 > 1e-12) {
            // v(0+) = 0
        } else if (e0 > -1e-12) {
            const double g0 = gamma(f.gamma);
            for (int k = 0; k < d; ++k) v[0][k] = g0 * f.at(0)[k];
        } else {
            v0_valid = false;
        }
    }

    // derivative of v via 3-point stencils in xi = t^mu
    auto xi = [&](int i) { return std::pow(f.grid.node(i) - f.grid.t0, mu); };
    std::vector<std::vector<double>> dv(n + 1, std::vector<double>(d, 0.0));
    std::vector<double> dv0_limit(d, 0.0);
    for (int i = 0; i <= n; ++i) {
        int a;
        if (i == 0)
            a = v0_valid ? 0 : 1;
        else if (i == n)
            a = n - 2;
        else if (i == 1 && !v0_valid)
            a = 1;
        else
            a = i - 1;
        const double xa = xi(a), xb = xi(a + 1), xc = xi(a + 2);
        const double ti = f.grid.node(i) - f.grid.t0;
        const double chain = (i == 0) ? 0.0 : mu * std::pow(ti, mu - 1.0);
        for (int k = 0; k < d; ++k) {
            const double dq = detail::quad3_deriv(xa, v[a][k], xb, v[a + 1][k], xc, v[a + 2][k], xi(i));
            dv[i][k] = dq * chain;
            if (i == 0) dv0_limit[k] = dq;
        }
    }

    if (rho_out == 0.0) return dv;

    // outer integral of dv, represented with weight exponent p_out
    double p_out;
    if (e0 > 1e-12)
        p_out = std::min(e0, 1.0);
    else if (e0 > -1e-12)
        p_out = mu;
    else
        throw DomainError("hilfer_derivative: inner integral too singular for the outer order");

    std::vector<std::vector<double>> wdv(n + 1, std::vector<double>(d, 0.0));
    for (int i = 1; i <= n; ++i) {
        const double fct = std::pow(f.grid.node(i) - f.grid.t0, 1.0 - p_out);
        for (int k = 0; k < d; ++k) wdv[i][k] = fct * dv[i][k];
    }
    if (std::fabs(e0) <= 1e-12) {
        for (int k = 0; k < d; ++k) wdv[0][k] = mu * dv0_limit[k]; // lim s^{1-mu} dv(s)
    } else {
        wdv[0] = wdv[1];
    }

    std::vector<std::vector<double>> out(n + 1, std::vector<double>(d, 0.0));
    const double rg = rgamma(rho_out);
    for (int i = 1; i <= n; ++i) {
        const std::vector<double> c = detail::product_weights_identity(rho_out, p_out, h, i, mu, head);
        for (int j = 0; j < static_cast<int>(c.size()); ++j) {
            if (c[j] == 0.0) continue;
            const auto& w = wdv[std::min(j, n)];
            for (int k = 0; k < d; ++k) out[i][k] += c[j] * w[k];
        }
        for (double& x : out[i]) x *= rg;
    }
    return out;
}

/// Hilfer derivative at a single interior node.
inline std::vector<double> hilfer_derivative(double mu, double nu, const Trajectory& f, int t_index) {
    if (t_index < 1 || t_index > f.grid.n)
        throw GridMismatchError("hilfer_derivative: t_index outside grid interior");
    return hilfer_derivative_path(mu, nu, f)[t_index];
}

} // namespace hilfer
