// Acceptance runner: `acceptance <id>` runs one criterion, no argument runs all of them. Each
// criterion prints one line "criterion <id>: PASS|FAIL (<seconds> s) <details>".

#include "shapelab/blowup.hpp"
#include "shapelab/cone.hpp"
#include "shapelab/elliptic.hpp"
#include "shapelab/errors.hpp"
#include "shapelab/optimizer.hpp"
#include "shapelab/shape_calculus.hpp"
#include "shapelab/vector_field.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace shapelab;
using std::numbers::pi;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) pass = false;
        detail << (ok ? "" : "[miss] ") << what << "; ";
    }
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

constexpr double kTol = 1e-10;

// The radial configuration f = g = 1, Q = 1/4 in d = 2 has its critical ball at r0 = 1.
struct Critical {
    Grid grid;
    DomainRep dom;
    ProblemData data;
    EnergyReport states;
};

Critical critical_ball(int dim, int cells, double box) {
    double Q = dim == 2 ? 0.25 : 1.0 / 9.0;
    Grid g = Grid::cube(dim, -box, box, cells);
    Critical c{g, DomainRep::from_function(g, [](const Vec& x) { return 1.0 - norm(x); }),
               ProblemData::constants(1, 1, Q), {}};
    c.states = energy_F_report(c.dom, c.data, kTol);
    return c;
}

// ---------------------------------------------------------------- 1 PDE convergence

void pde_errors(int dim, int cells, double& interior, double& band) {
    auto exact = [dim](const Vec& x) {
        double v = std::sin(pi * x[0]) * std::sin(pi * x[1]);
        return dim == 3 ? v * std::sin(pi * x[2]) : v;
    };
    Grid g = Grid::cube(dim, -1.25, 1.25, cells);
    DomainRep d = DomainRep::from_function(g, [](const Vec& x) { return 1.0 - norm(x); });
    ScalarField f = ScalarField::sample(g, [&](const Vec& x) { return dim * pi * pi * exact(x); });
    DirichletProblem p{&d, f, ScalarField::sample(g, exact)};
    ScalarField u = solve_dirichlet(p);
    interior = band = 0.0;
    for (std::size_t i = 0; i < u.values.size(); ++i) {
        double dist = d.phi[i];
        if (dist <= 0.0) continue;
        double e = std::fabs(u[i] - exact(g.node(i)));
        if (dist <= 2.0 * g.h) band = std::max(band, e);
        else interior = std::max(interior, e);
    }
}

void criterion1(Outcome& o) {
    std::vector<double> in, bd;
    for (int n : {160, 320, 640}) { // h = 1/64, 1/128, 1/256 on [-1.25, 1.25]^2
        double a, b;
        pde_errors(2, n, a, b);
        in.push_back(a);
        bd.push_back(b);
    }
    for (int k = 0; k < 2; ++k) {
        o.require(in[k] / in[k + 1] >= 1.9, "interior ratio " + fmt(in[k] / in[k + 1]) + " >= 1.9");
        o.require(bd[k] / bd[k + 1] >= 1.0, "band ratio " + fmt(bd[k] / bd[k + 1]) + " >= 1.0");
    }
    o.detail << "interior errors " << fmt(in[0]) << ", " << fmt(in[1]) << ", " << fmt(in[2]) << "; ";
}

// ---------------------------------------------------------------- 2 radial optimum

void criterion2(Outcome& o) {
    const int n = 576; // h = 1/128 on [-2.25, 2.25]^2, D = B_2
    Grid g = Grid::cube(2, -2.25, 2.25, n);
    OptimizeConfig c;
    c.data = ProblemData::constants(1, 1, 0.25);
    c.design = ScalarField::sample(g, [](const Vec& x) { return 2.0 - norm(x); });
    c.coarse_levels = 2;
    // the default start {dist(x, dD) > 0.2 diam D} is the ball of radius 1.2
    OptimizeResult r = optimize(c);
    double radius = std::sqrt(r.trace.steps.back().volume / pi);
    double oracle = radial_minimizer(2, 1, 1, 0.25, 2.0);
    double r0 = radial_critical_radius(2, 1, 1, 0.25);
    o.require(std::fabs(radius - 1.0) <= 2 * g.h, "final radius " + fmt(radius) + " within 2h of 1.0");
    o.require(std::fabs(oracle - 1.0) <= 1e-4, "1D oracle minimiser " + fmt(oracle) + " within 1e-4 of 1.0");
    o.detail << "critical radius " << fmt(r0) << " with F'' = " << fmt(-pi) << " (a maximum); steps "
             << r.trace.steps.size() << "; ";
}

// ---------------------------------------------------------------- 3 bernoulli equivalence

void criterion3(Outcome& o) {
    const int n = 288; // h = 1/64
    Grid g = Grid::cube(2, -2.25, 2.25, n);
    OptimizeConfig c;
    c.data = ProblemData::constants(2, 1, 0.25); // f = 2 lambda^2 g with lambda = 1
    c.design = ScalarField::sample(g, [](const Vec& x) { return 2.0 - norm(x); });
    c.init = DomainRep::from_function(g, [](const Vec& x) { return 0.9 - norm(x - Vec{0.1, 0.05, 0}); });
    c.coarse_levels = 1;
    OptimizeResult general = optimize(c);
    c.mode = OptMode::Bernoulli;
    c.lambda = 1.0;
    OptimizeResult bern = optimize(c);
    double sym = 0.0, cell = g.cell_volume();
    for (std::size_t i = 0; i < g.node_count(); ++i)
        if ((general.domain.phi[i] > 0) != (bern.domain.phi[i] > 0)) sym += cell;
    double vol = general.trace.steps.back().volume;
    o.require(vol > 0.0, "general optimum nonempty");
    o.require(sym <= 0.05 * vol, "symmetric difference " + fmt(sym) + " <= 5% of " + fmt(vol));
}

// ---------------------------------------------------------------- 4 Taylor ladder

void criterion4(Outcome& o) {
    Critical c = critical_ball(2, 384, 1.5); // h = 1/128
    std::vector<VectorFieldSpec> fields;
    for (int k = 0; k < 5; ++k) {
        double a = 0.3 + 2 * pi * k / 5;
        Vec x{std::cos(a), std::sin(a), 0};
        if (k % 2) fields.push_back(VectorFieldSpec::radial(2, x, 0.45, {0, 0, 0}));
        else fields.push_back(VectorFieldSpec::axis(2, x, 0.5, {std::cos(a + 0.7), std::sin(a + 0.7), 0}));
    }
    VariationOptions opt;
    opt.tol = kTol;
    auto reps = second_variations(c.dom, c.data, fields, opt);
    double bound = 10 * (c.grid.h + kTol);
    double min_exp = 1e9, max_dF = 0.0, min_d2F = 1e9;
    for (const auto& r : reps) {
        min_exp = std::min(min_exp, r.min_exponent());
        max_dF = std::max(max_dF, std::fabs(r.deltaF));
        min_d2F = std::min(min_d2F, r.delta2F);
    }
    o.require(min_exp >= 2.5, "min remainder exponent " + fmt(min_exp) + " >= 2.5");
    o.require(max_dF <= bound, "max |dF| " + fmt(max_dF) + " <= " + fmt(bound));
    o.require(min_d2F >= -bound, "min d2F " + fmt(min_d2F) + " >= " + fmt(-bound));
}

// ---------------------------------------------------------------- 5 Weiss

void criterion5(Outcome& o) {
    Grid g = Grid::cube(2, -2, 2, 512); // h = 1/128
    Vec nu{std::cos(0.4), std::sin(0.4), 0};
    ScalarField hp = ScalarField::sample(g, [&](const Vec& x) { return std::max(dot(x, nu), 0.0); });
    std::vector<double> radii;
    for (int k = 0; k < 6; ++k) radii.push_back(std::ldexp(1.0, -k));
    WeissTrace t = weiss_trace(hp, {0, 0, 0}, 1.0, radii);
    double wmin = *std::min_element(t.W.begin(), t.W.end()), wmax = *std::max_element(t.W.begin(), t.W.end());
    double dmax = *std::max_element(t.D.begin(), t.D.end());
    o.require(wmax - wmin <= 1e-3, "half-plane W spread " + fmt(wmax - wmin) + " <= 1e-3");
    o.require(std::fabs(t.W[0] - pi / 2) <= 1e-3, "W(1) " + fmt(t.W[0]) + " = pi/2 to 1e-3");
    o.require(dmax <= 1e-3, "half-plane D " + fmt(dmax) + " <= 1e-3");

    Critical c = critical_ball(2, 384, 1.5); // h = 1/128
    BandRatio band = boundary_ratio(c.dom, c.states.u, c.states.v);
    auto pts = sample_boundary_points(c.dom, 8, 0.5);
    double worst = 0.0;
    for (const Vec& x : pts) {
        WeissTrace w = weiss_trace(c.states.u, x, band.lambda * c.data.Q(x), dyadic_ladder(0.5, c.grid.h));
        worst = std::max(worst, w.monotonicity_defect());
    }
    double bound = 10 * (c.grid.h + kTol);
    o.require(!pts.empty(), std::to_string(pts.size()) + " boundary points");
    o.require(worst <= bound, "optimum monotonicity defect " + fmt(worst) + " <= " + fmt(bound));
}

// ---------------------------------------------------------------- 6 classification

void criterion6(Outcome& o) {
    Critical c = critical_ball(2, 384, 1.5); // h = 1/128
    auto pts = sample_boundary_points(c.dom, 16, 1.25 * 0.25);
    auto rep = classify_boundary(c.dom, c.data, c.states.u, c.states.v, pts, dyadic_ladder(0.25, c.grid.h));
    int regular = 0;
    double worst = 0.0;
    for (const auto& p : rep.points) {
        regular += p.verdict == Verdict::Regular;
        worst = std::max(worst, std::fabs(p.alpha * p.beta - 0.25) / 0.25);
    }
    o.require(regular == int(rep.points.size()) && !rep.points.empty(),
              std::to_string(regular) + "/" + std::to_string(rep.points.size()) + " regular");
    o.require(worst <= 0.1, "max |ab - Q|/Q " + fmt(worst) + " <= 0.1");

    Grid g = Grid::cube(2, -2, 2, 256);
    Vec nu{std::cos(0.9), std::sin(0.9), 0};
    ScalarField two = ScalarField::sample(g, [&](const Vec& x) { return std::fabs(dot(x, nu)); });
    DomainRep line = DomainRep::from_function(g, [&](const Vec& x) { return dot(x, nu); });
    auto sing = classify_boundary(line, ProblemData::constants(1, 1, 1), two, two, {{0, 0, 0}},
                                  dyadic_ladder(0.5, g.h));
    o.require(sing.points[0].verdict == Verdict::Singular,
              std::string("two-plane verdict ") + verdict_name(sing.points[0].verdict));
}

// ---------------------------------------------------------------- 7 diagnostics

void criterion7(Outcome& o) {
    double slope[2];
    int k = 0;
    for (int n : {384, 768}) { // h = 1/128, 1/256
        Critical c = critical_ball(2, n, 1.5);
        DiagnosticsReport r = diagnostics(c.dom, c.states.u);
        std::string tag = " (h=1/" + std::to_string(n / 3) + ")";
        o.require(r.nondegeneracy_min >= 0.5 * (1.0 / 2), "nondegeneracy " + fmt(r.nondegeneracy_min) + " >= 0.25" + tag);
        o.require(r.density_min >= 0.1 && r.density_max <= 0.9,
                  "density [" + fmt(r.density_min) + ", " + fmt(r.density_max) + "]" + tag);
        o.require(std::isfinite(r.levelset_slope) && r.levelset_slope > 0, "slope " + fmt(r.levelset_slope) + tag);
        slope[k++] = r.levelset_slope;
    }
    double rel = std::fabs(slope[1] - slope[0]) / slope[0];
    o.require(rel <= 0.2, "slope change " + fmt(rel) + " <= 20%");
}

// ---------------------------------------------------------------- 8 minimality probes

void criterion8(Outcome& o) {
    Critical c = critical_ball(2, 384, 1.5); // h = 1/128
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> ang(0, 2 * pi), rad(0.1, 0.4), off(-0.1, 0.1);
    double worst = 1e9;
    for (int k = 0; k < 10; ++k) {
        double a = ang(rng), s = 1.0 + off(rng);
        BallRegion B{{s * std::cos(a), s * std::sin(a), 0}, rad(rng)};
        worst = std::min(worst, minimality_probe(c.dom, c.data, c.states.u, B, ProbeDirection::Outward, kTol));
        worst = std::min(worst, minimality_probe(c.dom, c.data, c.states.u, B, ProbeDirection::Inward, kTol));
    }
    double bound = -(c.grid.h + kTol);
    o.require(worst >= bound, "worst margin " + fmt(worst) + " >= " + fmt(bound));
}

// ---------------------------------------------------------------- 9 cone lab

void criterion9(Outcome& o) {
    double err = 0.0;
    bool all = true;
    for (int d = 2; d <= 8; ++d) {
        auto c = solve_cap(d, pi / 2);
        if (!c) {
            all = false;
            continue;
        }
        for (std::size_t k = 0; k < c->theta.size(); ++k)
            err = std::max(err, std::fabs(c->phi[k] - std::cos(c->theta[k])));
        RayleighReport r = cjk_form(*c);
        o.require(r.min_value >= 0.0, "d=" + std::to_string(d) + " cjk min " + fmt(r.min_value) + " >= 0");
    }
    o.require(all, "solve_cap found the half-space cap for d = 2..8");
    o.require(err <= 1e-10, "cos theta error " + fmt(err) + " <= 1e-10");
    for (int d : {2, 3}) {
        int cells = d == 2 ? 128 : 48;
        double h = 4.0 / cells;
        ConeTestFn f;
        f.center = {1.0, 0.0, 0.0};
        f.rho = 0.6;
        Delta2Check x = cross_check_delta2G(*solve_cap(d, pi / 2), f, cells, 2.0);
        o.require(x.boundary_form >= 0.5 * x.delta2G - h && x.delta2G >= 0.0,
                  "d=" + std::to_string(d) + " boundary form " + fmt(x.boundary_form) + " >= d2G/2 " +
                      fmt(0.5 * x.delta2G) + " - h");
    }
}

// ---------------------------------------------------------------- d = 3 smoke runs at 64^3

void smoke3d_pde(Outcome& o) {
    double a32, b32, a64, b64;
    pde_errors(3, 32, a32, b32);
    pde_errors(3, 64, a64, b64);
    o.require(a32 / a64 >= 1.9 / 2, "interior ratio " + fmt(a32 / a64) + " >= 0.95");
    o.require(b32 / b64 >= 1.0 / 2, "band ratio " + fmt(b32 / b64) + " >= 0.5");
}

void smoke3d_weiss(Outcome& o) {
    Grid g = Grid::cube(3, -1.5, 1.5, 64);
    Vec nu{0.0, 0.6, 0.8};
    ScalarField hp = ScalarField::sample(g, [&](const Vec& x) { return std::max(dot(x, nu), 0.0); });
    WeissTrace t = weiss_trace(hp, {0, 0, 0}, 1.0, {1.0, 0.5, 0.25});
    double wmin = *std::min_element(t.W.begin(), t.W.end()), wmax = *std::max_element(t.W.begin(), t.W.end());
    o.require(wmax - wmin <= 2e-3, "half-space W spread " + fmt(wmax - wmin) + " <= 2e-3");
    o.require(std::fabs(t.W[0] - 2 * pi / 3) <= 2e-3, "W(1) " + fmt(t.W[0]) + " = 2pi/3 to 2e-3");
    o.require(*std::max_element(t.D.begin(), t.D.end()) <= 2e-3, "half-space D <= 2e-3");
}

void smoke3d_optimum(Outcome& o) {
    Critical c = critical_ball(3, 64, 1.5);
    double h = c.grid.h, bound = 20 * (h + kTol);
    VariationOptions opt;
    opt.ladder = {0.04, 0.02};
    opt.regrid_check = false;
    auto r = second_variation(c.dom, c.data, VectorFieldSpec::axis(3, {1, 0, 0}, 0.4, {1, 0, 0}), c.states, opt);
    o.require(std::fabs(r.deltaF) <= bound, "|dF| " + fmt(std::fabs(r.deltaF)) + " <= " + fmt(bound));
    o.require(r.delta2F >= -bound, "d2F " + fmt(r.delta2F) + " >= " + fmt(-bound));
    DiagnosticsReport d = diagnostics(c.dom, c.states.u);
    o.require(d.nondegeneracy_min >= 0.25 * (1.0 / 3), "nondegeneracy " + fmt(d.nondegeneracy_min) + " >= 1/12");
    o.require(d.density_min >= 0.05 && d.density_max <= 0.95,
              "density [" + fmt(d.density_min) + ", " + fmt(d.density_max) + "]");
    std::mt19937_64 rng(3);
    std::normal_distribution<double> N(0, 1);
    std::uniform_real_distribution<double> rad(0.2, 0.4);
    double worst = 1e9;
    for (int k = 0; k < 10; ++k) {
        Vec x{N(rng), N(rng), N(rng)};
        x = (1.0 / norm(x)) * x;
        BallRegion B{x, rad(rng)};
        worst = std::min(worst, minimality_probe(c.dom, c.data, c.states.u, B, ProbeDirection::Outward, kTol));
        worst = std::min(worst, minimality_probe(c.dom, c.data, c.states.u, B, ProbeDirection::Inward, kTol));
    }
    o.require(worst >= -2 * (h + kTol), "worst probe margin " + fmt(worst) + " >= " + fmt(-2 * (h + kTol)));
}

void smoke3d_classify(Outcome& o) {
    Critical c = critical_ball(3, 64, 1.5);
    auto ladder = dyadic_ladder(0.4, c.grid.h);
    auto pts = sample_boundary_points(c.dom, 8, 1.25 * ladder.front());
    auto rep = classify_boundary(c.dom, c.data, c.states.u, c.states.v, pts, ladder);
    int regular = 0;
    double worst = 0.0, fit = 0.0, Q = c.data.Q({0, 0, 0});
    for (const auto& p : rep.points) {
        regular += p.verdict == Verdict::Regular;
        worst = std::max(worst, std::fabs(p.alpha * p.beta - Q) / Q);
        fit = std::max(fit, p.fit_error);
    }
    o.detail << "ladder floor " << fmt(ladder.back()) << "; max fit_error " << fmt(fit) << "; ";
    o.require(regular == int(rep.points.size()) && !rep.points.empty(),
              std::to_string(regular) + "/" + std::to_string(rep.points.size()) + " regular at tau = 0.1");
    o.require(worst <= 0.2, "max |ab - Q|/Q " + fmt(worst) + " <= 0.2");
}

struct Criterion {
    std::function<void(Outcome&)> run;
    double limit_s;
};

const std::map<std::string, Criterion>& criteria() {
    static const std::map<std::string, Criterion> m = {
        {"1", {criterion1, 30}},   {"2", {criterion2, 120}},  {"3", {criterion3, 240}},
        {"4", {criterion4, 180}},  {"5", {criterion5, 60}},   {"6", {criterion6, 120}},
        {"7", {criterion7, 180}},  {"8", {criterion8, 120}},  {"9", {criterion9, 120}},
        {"3d-pde", {smoke3d_pde, 120}}, {"3d-weiss", {smoke3d_weiss, 120}},
        {"3d-optimum", {smoke3d_optimum, 240}}, {"3d-classify", {smoke3d_classify, 240}},
    };
    return m;
}

bool run_one(const std::string& id, const Criterion& c) {
    Outcome o;
    auto t0 = std::chrono::steady_clock::now();
    try {
        c.run(o);
    } catch (const std::exception& e) {
        o.pass = false;
        o.detail << "exception: " << e.what() << "; ";
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool in_time = secs <= c.limit_s;
    if (!in_time) o.detail << "[miss] time " << fmt(secs) << " s > " << fmt(c.limit_s) << " s; ";
    bool pass = o.pass && in_time;
    std::printf("criterion %s: %s (%.1f s) %s\n", id.c_str(), pass ? "PASS" : "FAIL", secs, o.detail.str().c_str());
    std::fflush(stdout);
    return pass;
}

} // namespace

int main(int argc, char** argv) {
    bool ok = true;
    if (argc > 1) {
        for (int i = 1; i < argc; ++i) {
            auto it = criteria().find(argv[i]);
            if (it == criteria().end()) {
                std::printf("unknown criterion %s\n", argv[i]);
                return 2;
            }
            ok = run_one(it->first, it->second) && ok;
        }
    } else {
        for (const auto& [id, c] : criteria()) ok = run_one(id, c) && ok;
    }
    return ok ? 0 : 1;
}
