#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <tuple>
#include <vector>

#include "hilfer/errors.hpp"
#include "hilfer/frac_ops.hpp"
#include "hilfer/linalg.hpp"
#include "hilfer/special_functions.hpp"

namespace hilfer {

/// Square real matrix A; the semigroup is generated by -A, i.e. S(t) = e^{-tA}.
struct Generator {
    linalg::Matrix A;
    int dim = 0;

    Generator() = default;
    explicit Generator(linalg::Matrix m) : A(std::move(m)), dim(A.dim()) {
        if (dim < 1) throw DomainError("Generator: dimension must be >= 1");
        if (!A.finite()) throw DomainError("Generator: entries must be finite");
    }

    static Generator scalar(double lambda) {
        linalg::Matrix m(1);
        m(0, 0) = lambda;
        return Generator(m);
    }
};

/// Truncation and resolution of the theta-integral behind P_mu.
struct SubordinationControl {
    double theta_max = 50.0;
    int theta_nodes = 600;

    void validate() const {
        if (!(theta_max > 0.0)) throw DomainError("SubordinationControl: theta_max must be > 0");
        if (theta_nodes < 8) throw DomainError("SubordinationControl: need at least 8 theta nodes");
    }
};

namespace detail {

/// Composite 8-point Gauss-Legendre rule on [0, theta_max].
struct ThetaRule {
    std::vector<double> theta;
    std::vector<double> weight; // plain quadrature weights
};

inline ThetaRule make_theta_rule(const SubordinationControl& ctl) {
    ctl.validate();
    const int panels = std::max(1, ctl.theta_nodes / 8);
    const double w = ctl.theta_max / panels;
    ThetaRule r;
    r.theta.reserve(static_cast<std::size_t>(panels) * 8);
    r.weight.reserve(static_cast<std::size_t>(panels) * 8);
    for (int p = 0; p < panels; ++p) {
        const double mid = (p + 0.5) * w, half = 0.5 * w;
        for (int k = 0; k < 4; ++k) {
            r.theta.push_back(mid - half * gl8_x[k]);
            r.weight.push_back(half * gl8_w[k]);
            r.theta.push_back(mid + half * gl8_x[k]);
            r.weight.push_back(half * gl8_w[k]);
        }
    }
    return r;
}

/// Quadrature weights for P_mu: w_i * mu * theta_i * M_mu(theta_i).
struct SubordinationWeights {
    std::vector<double> theta;
    std::vector<double> mw;
    double total = 0.0; // sum of weights = P_mu(0) scalar factor ~ 1/Gamma(mu)
};

/// Weight tables are cached behind a lock, keyed by (mu, control); cached and
/// fresh evaluations are the same arithmetic, so results are bit-identical.
inline std::shared_ptr<const SubordinationWeights> make_subordination_weights(double mu,
                                                                              const SubordinationControl& ctl) {
    if (!(mu > 0.0 && mu < 1.0)) throw DomainError("p_operator: mu must be in (0,1)");
    ctl.validate();
    using Key = std::tuple<double, double, int>;
    static std::mutex lock;
    static std::map<Key, std::shared_ptr<const SubordinationWeights>> cache;
    const Key key{mu, ctl.theta_max, ctl.theta_nodes};
    {
        std::lock_guard<std::mutex> guard(lock);
        if (auto it = cache.find(key); it != cache.end()) return it->second;
    }
    const ThetaRule rule = make_theta_rule(ctl);
    auto sw = std::make_shared<SubordinationWeights>();
    sw->theta = rule.theta;
    sw->mw.resize(rule.theta.size());
    for (std::size_t i = 0; i < rule.theta.size(); ++i) {
        sw->mw[i] = rule.weight[i] * mu * rule.theta[i] * mainardi_quad(mu, rule.theta[i]);
        sw->total += sw->mw[i];
    }
    std::lock_guard<std::mutex> guard(lock);
    return cache.emplace(key, std::move(sw)).first->second;
}

} // namespace detail

/// Apply the C0-semigroup: e^{-tA} x.
inline std::vector<double> semigroup_apply(const Generator& g, double t, std::span<const double> x) {
    if (!(t >= 0.0)) throw DomainError("semigroup_apply: t must be >= 0");
    if (static_cast<int>(x.size()) != g.dim) throw GridMismatchError("semigroup_apply: state dimension mismatch");
    linalg::Matrix m = g.A;
    m *= -t;
    const linalg::Matrix e = linalg::expm(m);
    if (!e.finite()) throw OverflowError("semigroup_apply: exponential overflow");
    std::vector<double> y = e.apply(x);
    for (double v : y) {
        if (!std::isfinite(v)) throw OverflowError("semigroup_apply: result not representable");
    }
    return y;
}

/// Subordination operator P_mu(t) x = integral_0^inf mu theta M_mu(theta) e^{-t^mu theta A} x dtheta.
inline std::vector<double> p_operator(const Generator& g, double mu, double t, std::span<const double> x,
                                      const SubordinationControl& ctl = {}) {
    if (!(t > 0.0)) throw DomainError("p_operator: t must be > 0");
    const auto sw = detail::make_subordination_weights(mu, ctl);
    const double tm = std::pow(t, mu);
    std::vector<double> acc(x.size(), 0.0);
    if (g.dim == 1) {
        double s = 0.0;
        for (std::size_t i = 0; i < sw->theta.size(); ++i)
            s += sw->mw[i] * std::exp(-tm * sw->theta[i] * g.A(0, 0));
        acc[0] = s * x[0];
        return acc;
    }
    for (std::size_t i = 0; i < sw->theta.size(); ++i) {
        const std::vector<double> y = semigroup_apply(g, tm * sw->theta[i], x);
        for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += sw->mw[i] * y[k];
    }
    return acc;
}

/// K_mu(t) x = t^{mu-1} P_mu(t) x; singular factor at t = 0.
inline std::vector<double> k_operator(const Generator& g, double mu, double t, std::span<const double> x,
                                      const SubordinationControl& ctl = {}) {
    if (!(t > 0.0)) throw DomainError("k_operator: singular at t = 0");
    std::vector<double> y = p_operator(g, mu, t, x, ctl);
    const double f = std::pow(t, mu - 1.0);
    for (double& v : y) v *= f;
    return y;
}

namespace detail {

/// P_mu(s_k) matrices on the uniform offsets s_k = k h, k = 0..n. P[0] is the
/// theta-integral limit (= I * sum of weights ~ I/Gamma(mu)). At mu = 1 the
/// family degenerates to the semigroup itself.
inline std::vector<linalg::Matrix> build_p_table(const Generator& g, double mu, double h, int n,
                                                 const SubordinationControl& ctl = {}) {
    if (mu == 1.0) {
        std::vector<linalg::Matrix> table(n + 1, linalg::Matrix(g.dim));
        table[0] = linalg::Matrix::identity(g.dim);
        for (int k = 1; k <= n; ++k) {
            linalg::Matrix m = g.A;
            m *= -(k * h);
            table[k] = linalg::expm(m);
            if (!table[k].finite()) throw OverflowError("p table: exponential overflow");
        }
        return table;
    }
    const auto sw = make_subordination_weights(mu, ctl);
    const int d = g.dim;
    std::vector<linalg::Matrix> table(n + 1, linalg::Matrix(d));
    for (int i = 0; i < d; ++i) table[0](i, i) = sw->total;
    if (d == 1) {
        const double a = g.A(0, 0);
        for (int k = 1; k <= n; ++k) {
            const double tm = std::pow(k * h, mu);
            double s = 0.0;
            for (std::size_t i = 0; i < sw->theta.size(); ++i)
                s += sw->mw[i] * std::exp(-tm * sw->theta[i] * a);
            if (!std::isfinite(s)) throw OverflowError("p table: exponential overflow");
            table[k](0, 0) = s;
        }
        return table;
    }
    for (int k = 1; k <= n; ++k) {
        const double tm = std::pow(k * h, mu);
        linalg::Matrix acc(d);
        for (std::size_t i = 0; i < sw->theta.size(); ++i) {
            linalg::Matrix m = g.A;
            m *= -tm * sw->theta[i];
            linalg::Matrix e = linalg::expm(m);
            e *= sw->mw[i];
            acc += e;
        }
        if (!acc.finite()) throw OverflowError("p table: exponential overflow");
        table[k] = std::move(acc);
    }
    return table;
}

/// Weighted operator tables  Sw[i] = t_i^{1-gamma} S_{mu,nu}(t_i)  on offsets
/// t_i = i h;  Sw[0] is the weighted limit I/Gamma(gamma).
inline std::vector<linalg::Matrix> build_weighted_s_table(const Generator& g, double mu, double nu, double h,
                                                          int n, const SubordinationControl& ctl = {}) {
    if (!(nu >= 0.0 && nu <= 1.0)) throw DomainError("s_operator: nu must be in [0,1]");
    const double rho = nu * (1.0 - mu);
    const double gam = mu + nu * (1.0 - mu);
    const int d = g.dim;
    std::vector<linalg::Matrix> p = build_p_table(g, mu, h, n, ctl);
    if (rho == 0.0) return p; // gamma = mu: t^{1-gamma} K_mu(t) = P_mu(t)
    std::vector<linalg::Matrix> s(n + 1, linalg::Matrix(d));
    const double rg = rgamma(gam);
    for (int i = 0; i < d; ++i) s[0](i, i) = rg;
    const double rgr = rgamma(rho);
    const int head = head_intervals(n);
    for (int i = 1; i <= n; ++i) {
        const std::vector<double> c = product_weights_identity(rho, mu, h, i, mu, head);
        linalg::Matrix acc(d);
        for (int j = 0; j < static_cast<int>(c.size()); ++j) {
            if (c[j] == 0.0) continue;
            linalg::Matrix term = p[std::min(j, n)];
            term *= c[j];
            acc += term;
        }
        acc *= rgr * std::pow(i * h, 1.0 - gam);
        s[i] = std::move(acc);
    }
    return s;
}

} // namespace detail

/// Weighted solution operator value t^{1-gamma} S_{mu,nu}(t) x, with the
/// weighted limit x/Gamma(gamma) at t = 0. quad_n controls the internal
/// product-quadrature resolution.
inline std::vector<double> s_operator_weighted(const Generator& g, double mu, double nu, double t,
                                               std::span<const double> x, int quad_n = 256,
                                               const SubordinationControl& ctl = {}) {
    if (!(mu > 0.0 && mu < 1.0)) throw DomainError("s_operator: mu must be in (0,1)");
    if (!(nu >= 0.0 && nu <= 1.0)) throw DomainError("s_operator: nu must be in [0,1]");
    if (!(t >= 0.0)) throw DomainError("s_operator: t must be >= 0");
    const double gam = mu + nu * (1.0 - mu);
    std::vector<double> out(x.size(), 0.0);
    if (t == 0.0) {
        const double rg = rgamma(gam);
        for (std::size_t k = 0; k < x.size(); ++k) out[k] = rg * x[k];
        return out;
    }
    const std::vector<linalg::Matrix> s = detail::build_weighted_s_table(g, mu, nu, t / quad_n, quad_n, ctl);
    return s[quad_n].apply(x);
}

/// Solution operator S_{mu,nu}(t) x. At t = 0 this is defined by its weighted
/// limit (equal to x exactly in the Caputo case gamma = 1).
inline std::vector<double> s_operator(const Generator& g, double mu, double nu, double t,
                                      std::span<const double> x, int quad_n = 256,
                                      const SubordinationControl& ctl = {}) {
    std::vector<double> out = s_operator_weighted(g, mu, nu, t, x, quad_n, ctl);
    if (t > 0.0) {
        const double gam = mu + nu * (1.0 - mu);
        const double f = std::pow(t, gam - 1.0);
        for (double& v : out) v *= f;
    }
    return out;
}

/// Conditions bound M = max over grid nodes of || t^{1-gamma} S_{mu,nu}(t) ||
/// (induced 2-norm of the weighted operator).
inline double operator_bound_M(const Generator& g, double mu, double nu, const Grid& grid,
                               const SubordinationControl& ctl = {}) {
    const std::vector<linalg::Matrix> s = detail::build_weighted_s_table(g, mu, nu, grid.h(), grid.n, ctl);
    double best = 0.0;
    for (const auto& m : s) best = std::max(best, linalg::spectral_norm(m));
    return best;
}

} // namespace hilfer
