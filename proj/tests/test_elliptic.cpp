#include "doctest.h"

#include "shapelab/elliptic.hpp"
#include "shapelab/errors.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace shapelab;
using std::numbers::pi;

namespace {

DomainRep disk(int n, double R = 1.0, double half = 1.25, Vec c = {0, 0, 0}) {
    Grid g = Grid::cube(2, -half, half, n);
    return DomainRep::from_function(g, [=](const Vec& x) { return R - norm(x - c); });
}

ScalarField constant(const Grid& g, double v) { return ScalarField(g, v); }

} // namespace

TEST_CASE("disk with unit source matches the radial formula") {
    // radial oracle u = (R^2 - r^2) / (2 d) gives u(0) = 1/4 for R = 1, d = 2
    DomainRep d = disk(320); // h = 1/128
    DirichletProblem p{&d, constant(d.grid, 1.0)};
    SolveStats st;
    ScalarField u = solve_dirichlet(p, &st);
    CHECK(st.residual <= 1e-10);
    CHECK(std::fabs(u.interpolate({0, 0, 0}) - 0.25) <= 2e-3);
    double err = 0;
    for (std::size_t i = 0; i < u.values.size(); ++i) {
        Vec x = d.grid.node(i);
        double r2 = dot(x, x);
        if (r2 < 1.0) err = std::max(err, std::fabs(u[i] - (1.0 - r2) / 4));
        else CHECK(u[i] == 0.0);
    }
    CHECK(err <= 2e-4);
}

TEST_CASE("zero data gives the zero solution") {
    DomainRep d = disk(64);
    ScalarField u = solve_dirichlet({&d, constant(d.grid, 0.0)});
    CHECK(u.max_abs() == 0.0);
}

TEST_CASE("slab problem is reproduced exactly") {
    // Omega = {0 < x1 < 1}; box faces carry the 1D solution x1(1-x1) as Dirichlet data
    Grid g = Grid::make(2, {-0.25, 0.0, 0}, 1.0 / 64, {96, 64, 0});
    DomainRep d = DomainRep::from_function(g, [](const Vec& x) { return std::min(x[0], 1.0 - x[0]); });
    ScalarField exact = ScalarField::sample(g, [](const Vec& x) { return x[0] * (1 - x[0]); });
    DirichletProblem p{&d, constant(g, 2.0), exact};
    p.tol = 1e-12;
    ScalarField u = solve_dirichlet(p);
    double err = 0, mx = 0;
    for (std::size_t i = 0; i < u.values.size(); ++i) {
        if (d.phi[i] > 0) err = std::max(err, std::fabs(u[i] - exact[i]));
        mx = std::max(mx, u[i]);
    }
    CHECK(err <= 1e-9);
    CHECK(mx == doctest::Approx(0.25).epsilon(1e-9));
}

TEST_CASE("empty domain is reported") {
    Grid g = Grid::cube(2, -1, 1, 32);
    DomainRep d = DomainRep::from_function(g, [](const Vec&) { return -1.0; });
    try {
        solve_dirichlet({&d, constant(g, 1.0)});
        FAIL("expected EmptyDomain");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::EmptyDomain);
    }
}

TEST_CASE("iteration cap raises NoConvergence") {
    DomainRep d = disk(128);
    DirichletProblem p{&d, constant(d.grid, 1.0)};
    p.max_iter = 3;
    try {
        solve_dirichlet(p);
        FAIL("expected NoConvergence");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NoConvergence);
    }
}

TEST_CASE("div-form solves") {
    DomainRep d = disk(160);
    const Grid& g = d.grid;
    SUBCASE("zero flux and source") {
        DivFormProblem p;
        p.dom = &d;
        p.flux = VectorField(g);
        p.source = constant(g, 0.0);
        CHECK(solve_divform(p).max_abs() == 0.0);
    }
    SUBCASE("constant flux is divergence free") {
        DivFormProblem p;
        p.dom = &d;
        p.flux = VectorField(g);
        for (auto& v : p.flux.values) v = {1.0, 0.0, 0.0};
        CHECK(solve_divform(p).max_abs() <= 1e-10);
    }
    SUBCASE("gradient flux of a compactly supported bump") {
        auto psi = [](const Vec& x) {
            double s = dot(x, x) / 0.36;
            return s < 1 ? std::exp(1.0 / (s - 1.0)) : 0.0;
        };
        auto run = [&](int n) {
            DomainRep dn = disk(n);
            DivFormProblem p;
            p.dom = &dn;
            p.tol = 1e-12;
            p.flux = gradient(ScalarField::sample(dn.grid, psi));
            ScalarField w = solve_divform(p);
            double err = 0;
            for (std::size_t i = 0; i < w.values.size(); ++i)
                err = std::max(err, std::fabs(w[i] + psi(dn.grid.node(i))));
            return err;
        };
        double e1 = run(80), e2 = run(160);
        CHECK(e2 <= 5e-3);
        CHECK(e1 / e2 >= 3.0); // second order
    }
}

TEST_CASE("residual check") {
    DomainRep d = disk(96);
    DirichletProblem p{&d, constant(d.grid, 1.0)};
    ScalarField u = solve_dirichlet(p);
    CHECK(residual_check(u, p) <= p.tol);
    CHECK(residual_check(ScalarField(d.grid, 0.0), p) == doctest::Approx(1.0));
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(-1, 1);
    ScalarField noisy = u;
    double h = d.grid.h;
    for (std::size_t i = 0; i < noisy.values.size(); ++i)
        if (d.phi[i] > 0) noisy[i] += h * h * U(rng);
    CHECK(residual_check(noisy, p) >= 0.1);
}

TEST_CASE("discrete maximum principle and domain monotonicity") {
    DomainRep small = disk(128, 0.6, 1.25, {0.1, 0, 0});
    DomainRep big = disk(128, 0.9);
    ScalarField f = ScalarField::sample(small.grid, [](const Vec& x) { return 1.0 + x[0] * x[0]; });
    ScalarField us = solve_dirichlet({&small, f});
    ScalarField ub = solve_dirichlet({&big, f});
    double minv = 0, viol = 0;
    for (std::size_t i = 0; i < us.values.size(); ++i) {
        minv = std::min({minv, us[i], ub[i]});
        viol = std::max(viol, us[i] - ub[i]);
    }
    CHECK(minv >= 0.0);
    CHECK(viol <= 1e-12);
}

TEST_CASE("state and adjoint are interchangeable") {
    DomainRep d = disk(128, 0.8, 1.0, {0.05, -0.1, 0});
    const Grid& g = d.grid;
    ScalarField f = ScalarField::sample(g, [](const Vec& x) { return 1.0 + 0.5 * x[0]; });
    ScalarField gg = ScalarField::sample(g, [](const Vec& x) { return std::exp(-x[1] * x[1]); });
    ScalarField u = solve_dirichlet({&d, f});
    ScalarField v = solve_dirichlet({&d, gg});
    double a = 0, b = 0;
    for (std::size_t i = 0; i < u.values.size(); ++i) {
        a += gg[i] * u[i];
        b += f[i] * v[i];
    }
    CHECK(std::fabs(a - b) <= 10 * 1e-10 * std::fabs(a));
}

TEST_CASE("manufactured solution converges at second order inside") {
    auto exact = [](const Vec& x) { return std::sin(pi * x[0]) * std::sin(pi * x[1]); };
    auto run = [&](int n) {
        Grid g = Grid::cube(2, -1.25, 1.25, n);
        DomainRep d = DomainRep::from_function(g, [](const Vec& x) { return 1.0 - norm(x); });
        ScalarField f = ScalarField::sample(g, [&](const Vec& x) { return 2 * pi * pi * exact(x); });
        ScalarField bd = ScalarField::sample(g, exact);
        DirichletProblem p{&d, f, bd};
        ScalarField u = solve_dirichlet(p);
        double e = 0;
        for (std::size_t i = 0; i < u.values.size(); ++i)
            if (d.phi[i] > 0) e = std::max(e, std::fabs(u[i] - exact(g.node(i))));
        return e;
    };
    double e1 = run(80), e2 = run(160);
    CHECK(e1 / e2 >= 3.0);
}

TEST_CASE("boundary slope at interface crossings") {
    DomainRep d = disk(320);
    ScalarField u = solve_dirichlet({&d, constant(d.grid, 1.0)});
    auto cr = interface_crossings(d);
    REQUIRE(!cr.empty());
    double err = 0, area = 0;
    for (const auto& c : cr) {
        err = std::max(err, std::fabs(crossing_gradient_norm(u, d, c) - 0.5));
        area += c.weight;
        CHECK(dot(c.normal, c.x) > 0.9 * norm(c.x));
    }
    CHECK(err <= 2e-2);
    CHECK(area == doctest::Approx(2 * pi).epsilon(2e-3));
}

TEST_CASE("tensor operator reduces to the Laplacian and stays symmetric") {
    DomainRep d = disk(64);
    CutStencil st(d);
    CutOperator L(st);
    CutOperator LI(st, [](const Vec&) { return identity(2); });
    auto A = [](const Vec& x) {
        Mat m = identity(2);
        m[0][1] = m[1][0] = 0.3 * std::sin(x[0] + 2 * x[1]);
        m[0][0] += 0.2 * x[1] * x[1];
        return m;
    };
    CutOperator LA(st, A);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(-1, 1);
    ScalarField a(d.grid), b(d.grid);
    for (std::size_t k = 0; k < st.unknowns(); ++k) {
        a[st.node_of(k)] = U(rng);
        b[st.node_of(k)] = U(rng);
    }
    CHECK(L.form(a, b) == doctest::Approx(LI.form(a, b)).epsilon(1e-13));
    CHECK(LA.form(a, b) == doctest::Approx(LA.form(b, a)).epsilon(1e-12));
    CHECK(LA.form(a, a) > 0.0);
}
