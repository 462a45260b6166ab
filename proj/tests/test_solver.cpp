#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "hilfer/solver.hpp"
#include "oracles.hpp"

using namespace hilfer;

namespace {

ProblemSpec scalar_linear(double mu, double nu, double lambda, double u0 = 1.0, double a = 1.0) {
    ProblemSpec p;
    p.mu = mu;
    p.nu = nu;
    p.t0 = 0.0;
    p.a = a;
    p.A = Generator::scalar(lambda);
    p.u0 = {u0};
    return p;
}

// f = 0.3 sin(u), K = 0.3 u, g = 0.1 u(t1): the instance certified with the
// conservative constants {M=1, L=1, K0=1, Q0=0.1, a=0.5}.
ProblemSpec contractive_instance() {
    ProblemSpec p;
    p.mu = 0.5;
    p.nu = 1.0;
    p.t0 = 0.0;
    p.a = 0.5;
    p.A = Generator::scalar(0.0);
    p.u0 = {0.2};
    p.f = [](double, std::span<const double> u) { return std::vector<double>{0.3 * std::sin(u[0])}; };
    p.kernel = [](double, double, std::span<const double> u) { return std::vector<double>{0.3 * u[0]}; };
    p.nonlocal_points = {0.125};
    p.g = [](const std::vector<std::vector<double>>& pts) { return std::vector<double>{0.1 * pts[0][0]}; };
    return p;
}

ProblemSpec nonlinear_instance() {
    ProblemSpec p;
    p.mu = 0.5;
    p.nu = 1.0;
    p.t0 = 0.0;
    p.a = 0.5;
    p.A = Generator::scalar(1.0);
    p.u0 = {0.5};
    p.f = [](double, std::span<const double> u) { return std::vector<double>{0.3 * std::sin(u[0])}; };
    p.kernel = [](double, double, std::span<const double> u) { return std::vector<double>{0.2 * u[0]}; };
    p.nonlocal_points = {0.125};
    p.g = [](const std::vector<std::vector<double>>& pts) { return std::vector<double>{0.1 * pts[0][0]}; };
    return p;
}

} // namespace

TEST_CASE("problem validation") {
    ProblemSpec p = scalar_linear(0.5, 0.5, 1.0);
    p.t0 = 0.25; // gamma < 1 requires t0 = 0
    CHECK_THROWS_AS(p.validate(), DomainError);
    p = scalar_linear(1.5, 0.5, 1.0);
    CHECK_THROWS_AS(p.validate(), DomainError);
    p = scalar_linear(0.5, 1.0, 1.0);
    p.nonlocal_points = {0.5, 0.25};
    CHECK_THROWS_AS(p.validate(), DomainError);
}

TEST_CASE("apply_F on a homogeneous problem ignores the input trajectory") {
    const ProblemSpec p = scalar_linear(0.5, 1.0, 1.0);
    const Grid g(0.0, 1.0, 64);
    Trajectory u1(g, 1.0, 1), u2(g, 1.0, 1);
    for (int i = 0; i <= g.n; ++i) {
        u1.at(i)[0] = 5.0;
        u2.at(i)[0] = -3.0 + 0.1 * i;
    }
    const Trajectory f1 = apply_F(p, u1);
    const Trajectory f2 = apply_F(p, u2);
    for (int i = 0; i <= g.n; ++i) {
        CAPTURE(i);
        CHECK(f1.at(i)[0] == f2.at(i)[0]);
    }
    CHECK(f1.at(0)[0] == Catch::Approx(1.0).epsilon(1e-13)); // S(0) u0 in the Caputo case
}

TEST_CASE("apply_F homogeneous value matches the scalar solution operator") {
    const ProblemSpec p = scalar_linear(0.5, 1.0, 1.0);
    const Grid g(0.0, 1.0, 512);
    Trajectory u(g, 1.0, 1);
    const Trajectory out = apply_F(p, u);
    CHECK(out.at(g.n)[0] == Catch::Approx(oracles::ml_series(0.5, 1.0, -1.0)).margin(1e-3));
}

TEST_CASE("constant nonlocal term shifts the homogeneous data") {
    ProblemSpec p = scalar_linear(0.5, 1.0, 1.0);
    p.nonlocal_points = {0.5};
    p.g = [](const std::vector<std::vector<double>>&) { return std::vector<double>{0.3}; };
    const Grid g(0.0, 1.0, 64);
    Trajectory u(g, 1.0, 1);
    const Trajectory with_g = apply_F(p, u);

    ProblemSpec q = scalar_linear(0.5, 1.0, 1.0, 1.0 - 0.3);
    const Trajectory plain = apply_F(q, u);
    for (int i = 0; i <= g.n; ++i) {
        CAPTURE(i);
        CHECK(with_g.at(i)[0] == Catch::Approx(plain.at(i)[0]).margin(1e-14));
    }
}

TEST_CASE("homogeneous Picard converges in exactly two iterations") {
    const ProblemSpec p = scalar_linear(0.5, 1.0, 1.0);
    const SolveReport rep = mild_solve(p, Grid(0.0, 1.0, 64));
    CHECK(rep.converged);
    CHECK(rep.iterations == 2);
    REQUIRE(rep.residuals.size() == 2);
    CHECK(rep.residuals[0] > 0.0);
    CHECK(rep.residuals[1] == 0.0);
    CHECK(rep.measured_ratio == 0.0);
}

TEST_CASE("certified contractive instance: geometric convergence") {
    const SolveReport rep = mild_solve(contractive_instance(), Grid(0.0, 0.5, 256));
    CHECK(rep.converged);
    CHECK(rep.iterations >= 5);
    CHECK(rep.measured_ratio <= 0.79); // q = 0.7125 + discretization slack
}

TEST_CASE("uniqueness: distinct initial iterates land on the same fixed point") {
    const ProblemSpec p = nonlinear_instance();
    const Grid g(0.0, 0.5, 256);
    const double tol = 1e-8;

    Trajectory zero(g, 1.0, 1);
    Trajectory boundary(g, 1.0, 1);
    for (int i = 0; i <= g.n; ++i) boundary.at(i)[0] = 1.0; // r-ball boundary, r = 1

    const SolveReport a = mild_solve(p, g, tol, 200, zero);
    const SolveReport b = mild_solve(p, g, tol, 200, boundary);
    REQUIRE(a.converged);
    REQUIRE(b.converged);
    Trajectory diff(g, 1.0, 1);
    for (std::size_t i = 0; i < diff.weighted.size(); ++i)
        diff.weighted[i] = a.final.weighted[i] - b.final.weighted[i];
    CHECK(weighted_norm(diff) <= 10.0 * tol);
}

TEST_CASE("fixed-point property after convergence") {
    const ProblemSpec p = nonlinear_instance();
    const Grid g(0.0, 0.5, 128);
    const double tol = 1e-8;
    const SolveReport rep = mild_solve(p, g, tol);
    REQUIRE(rep.converged);
    const Trajectory once_more = apply_F(p, rep.final);
    Trajectory diff(g, 1.0, 1);
    for (std::size_t i = 0; i < diff.weighted.size(); ++i)
        diff.weighted[i] = once_more.weighted[i] - rep.final.weighted[i];
    CHECK(weighted_norm(diff) < 2.0 * tol);
}

TEST_CASE("limit consistency with the scalar closed forms") {
    // Caputo limit
    {
        const SolveReport rep = mild_solve(scalar_linear(0.5, 1.0, 1.0), Grid(0.0, 1.0, 512));
        REQUIRE(rep.converged);
        double worst = 0.0;
        for (int i = 0; i <= 512; ++i) {
            const double expected = oracles::ml_series(0.5, 1.0, -std::sqrt(i / 512.0));
            worst = std::max(worst, std::fabs(rep.final.at(i)[0] - expected));
        }
        CHECK(worst < 1e-3);
    }
    // Riemann-Liouville limit (weighted path)
    {
        const SolveReport rep = mild_solve(scalar_linear(0.5, 0.0, 1.0), Grid(0.0, 1.0, 512));
        REQUIRE(rep.converged);
        double worst = 0.0;
        for (int i = 0; i <= 512; ++i) {
            const double expected = oracles::ml_series(0.5, 0.5, -std::sqrt(i / 512.0));
            worst = std::max(worst, std::fabs(rep.final.at(i)[0] - expected));
        }
        CHECK(worst < 1e-3);
    }
}

TEST_CASE("constant forcing with the zero generator: closed-form fixed point") {
    // D^mu u = c + (1/Gamma(mu)) int (t-s)^{mu-1} c ds, u(0) = 0
    // => u(t) = c [ t^mu/Gamma(1+mu) + t^{2mu}/Gamma(1+2mu) ]
    const double c = 0.7, mu = 0.5;
    ProblemSpec p;
    p.mu = mu;
    p.nu = 1.0;
    p.a = 1.0;
    p.A = Generator::scalar(0.0);
    p.u0 = {0.0};
    p.f = [c](double, std::span<const double>) { return std::vector<double>{c}; };
    p.kernel = [c](double, double, std::span<const double>) { return std::vector<double>{c}; };
    auto solve_error = [&](int n) {
        const Grid g(0.0, 1.0, n);
        const SolveReport rep = mild_solve(p, g);
        REQUIRE(rep.converged);
        double worst = 0.0;
        for (int i = 0; i <= g.n; ++i) {
            const double t = g.node(i);
            const double expected =
                c * (std::pow(t, mu) * rgamma(1.0 + mu) + std::pow(t, 2.0 * mu) * rgamma(1.0 + 2.0 * mu));
            worst = std::max(worst, std::fabs(rep.final.at(i)[0] - expected));
        }
        return worst;
    };
    const double e256 = solve_error(256), e512 = solve_error(512);
    CHECK(e512 < 5e-4);
    CHECK(e256 / e512 >= 1.8); // near-origin error of the linear product rule is O(h^{2mu}) = O(h)
}

TEST_CASE("constant forcing with a decaying generator: Mittag-Leffler oracle") {
    // u(t) = E_mu(-t^mu) u0 + c t^mu E_{mu,mu+1}(-t^mu)
    const double c = 0.3, mu = 0.5;
    ProblemSpec p = scalar_linear(mu, 1.0, 1.0);
    p.f = [c](double, std::span<const double>) { return std::vector<double>{c}; };
    const Grid g(0.0, 1.0, 512);
    const SolveReport rep = mild_solve(p, g);
    REQUIRE(rep.converged);
    double worst = 0.0;
    for (int i = 0; i <= g.n; ++i) {
        const double tm = std::pow(g.node(i), mu);
        const double expected =
            oracles::ml_series(mu, 1.0, -tm) + c * tm * oracles::ml_series(mu, mu + 1.0, -tm);
        worst = std::max(worst, std::fabs(rep.final.at(i)[0] - expected));
    }
    CHECK(worst < 1e-3);
}

TEST_CASE("grid refinement: weighted differences decrease monotonically") {
    const ProblemSpec p = nonlinear_instance();
    std::vector<Trajectory> sols;
    for (int n : {128, 256, 512}) {
        SolveReport rep = mild_solve(p, Grid(0.0, 0.5, n));
        REQUIRE(rep.converged);
        sols.push_back(std::move(rep.final));
    }
    auto supdiff = [](const Trajectory& coarse, const Trajectory& fine) {
        double best = 0.0;
        for (int i = 0; i <= coarse.grid.n; ++i)
            best = std::max(best, std::fabs(coarse.at(i)[0] - fine.at(2 * i)[0]));
        return best;
    };
    const double d1 = supdiff(sols[0], sols[1]);
    const double d2 = supdiff(sols[1], sols[2]);
    CHECK(d2 < d1);
}

TEST_CASE("diverging iteration reports NonFiniteError") {
    ProblemSpec p = scalar_linear(0.5, 1.0, 0.0, 1.0, 1.0);
    p.f = [](double, std::span<const double> u) { return std::vector<double>{1e3 * u[0] * u[0]}; };
    CHECK_THROWS_AS(mild_solve(p, Grid(0.0, 1.0, 32)), NonFiniteError);
}

TEST_CASE("initial iterate grid mismatch is rejected") {
    const ProblemSpec p = scalar_linear(0.5, 1.0, 1.0);
    Trajectory wrong(Grid(0.0, 1.0, 32), 1.0, 1);
    CHECK_THROWS_AS(mild_solve(p, Grid(0.0, 1.0, 64), 1e-8, 10, wrong), GridMismatchError);
}

TEST_CASE("strong residual of the zero solution vanishes") {
    ProblemSpec p = scalar_linear(0.5, 0.5, 1.0, 0.0);
    const Grid g(0.0, 1.0, 64);
    Trajectory zero(g, p.gamma_index(), 1);
    const Trajectory r = strong_residual(p, zero);
    CHECK(residual_sup(r) < 1e-14);
}

TEST_CASE("strong residual of the injected exact Caputo solution is small") {
    const ProblemSpec p = scalar_linear(0.5, 1.0, 1.0);
    const Grid g(0.0, 1.0, 512);
    Trajectory exact(g, 1.0, 1);
    for (int i = 0; i <= g.n; ++i) exact.at(i)[0] = oracles::ml_series(0.5, 1.0, -std::sqrt(g.node(i)));
    const Trajectory r = strong_residual(p, exact);
    CHECK(residual_sup(r) <= 0.05);
}

TEST_CASE("initial condition check: Caputo and Riemann-Liouville") {
    {
        const ProblemSpec p = scalar_linear(0.5, 1.0, 1.0);
        const SolveReport rep = mild_solve(p, Grid(0.0, 1.0, 512));
        CHECK(initial_condition_check(p, rep.final) <= 0.01);
    }
    {
        const ProblemSpec p = scalar_linear(0.5, 0.0, 1.0);
        const SolveReport rep = mild_solve(p, Grid(0.0, 1.0, 512));
        CHECK(initial_condition_check(p, rep.final) <= 0.02);
    }
}

TEST_CASE("coupled two-component problem solves and satisfies the fixed point") {
    ProblemSpec p;
    p.mu = 0.5;
    p.nu = 1.0;
    p.a = 0.5;
    linalg::Matrix A(2);
    A(0, 0) = 0.5;
    A(0, 1) = -0.2;
    A(1, 0) = 0.1;
    A(1, 1) = 0.8;
    p.A = Generator(std::move(A));
    p.u0 = {0.4, -0.3};
    p.f = [](double, std::span<const double> u) {
        return std::vector<double>{0.1 * std::tanh(u[1]), 0.1 * std::sin(u[0])};
    };
    const Grid g(0.0, 0.5, 128);
    const SolveReport rep = mild_solve(p, g);
    REQUIRE(rep.converged);
    const Trajectory again = apply_F(p, rep.final);
    Trajectory diff(g, 1.0, 2);
    for (std::size_t i = 0; i < diff.weighted.size(); ++i)
        diff.weighted[i] = again.weighted[i] - rep.final.weighted[i];
    CHECK(weighted_norm(diff) < 2e-8);
    const Trajectory r = strong_residual(p, rep.final);
    CHECK(residual_sup(r) < 0.05);
}

TEST_CASE("shifted interval t0 > 0 in the Caputo case") {
    ProblemSpec p;
    p.mu = 0.5;
    p.nu = 1.0;
    p.t0 = 1.0;
    p.a = 1.0;
    p.A = Generator::scalar(1.0);
    p.u0 = {1.0};
    const Grid g(1.0, 1.0, 256);
    const SolveReport rep = mild_solve(p, g);
    REQUIRE(rep.converged);
    for (int i : {0, 64, 192, 256}) {
        const double expected = oracles::ml_series(0.5, 1.0, -std::sqrt(g.node(i) - 1.0));
        CAPTURE(i);
        CHECK(rep.final.at(i)[0] == Catch::Approx(expected).margin(1e-3));
    }
    CHECK(initial_condition_check(p, rep.final) <= 0.01);
}

TEST_CASE("mu = 1 degenerates to the classical evolution problem") {
    const ProblemSpec p = scalar_linear(1.0, 1.0, 1.0);
    const SolveReport rep = mild_solve(p, Grid(0.0, 1.0, 128));
    REQUIRE(rep.converged);
    for (int i : {0, 64, 128}) {
        CAPTURE(i);
        CHECK(rep.final.at(i)[0] == Catch::Approx(std::exp(-i / 128.0)).margin(1e-9));
    }
}

TEST_CASE("initial condition check: pure nonlocal balance") {
    // g == u0 and u == 0: the condition reads 0 + u0 = u0
    ProblemSpec p = scalar_linear(0.5, 1.0, 1.0, 0.7);
    p.nonlocal_points = {0.5};
    p.g = [](const std::vector<std::vector<double>>&) { return std::vector<double>{0.7}; };
    const Grid g(0.0, 1.0, 64);
    Trajectory zero(g, 1.0, 1);
    CHECK(initial_condition_check(p, zero) < 1e-12);
}
