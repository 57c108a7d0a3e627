#include "shapelab/optimizer.hpp"
#include "shapelab/errors.hpp"
#include "shapelab/levelset.hpp"
#include "shapelab/shape_calculus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>

namespace shapelab {

namespace {

constexpr double kPi = 3.14159265358979323846;

double sphere_area(int d) { return 2.0 * std::pow(kPi, 0.5 * d) / std::tgamma(0.5 * d); }

double unit_ball_volume(int d) { return sphere_area(d) / d; }

int solver_cap(const Grid& g) { return 50 * g.max_cells(); }

std::vector<double> sample_on(const CutStencil& st, const AnalyticScalar& w, double scale = 1.0) {
    std::vector<double> b(st.unknowns());
    for (std::size_t k = 0; k < b.size(); ++k) b[k] = scale * w(st.grid().node(st.node_of(k)));
    return b;
}

std::vector<double> warm(const CutStencil& st, const ScalarField& prev) {
    if (prev.empty() || !same_grid(prev.grid, st.grid())) return {};
    return st.from_field(prev);
}

double dot_nodes(const std::vector<double>& a, const ScalarField& u, const CutStencil& st) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * u[st.node_of(k)];
    return s * st.grid().cell_volume();
}

// Edge form h^{d-2} sum c (du)(dv) over the closure of Omega for two solutions sharing unknowns.
double edge_form(const CutStencil& su, const CutStencil& sv, const ScalarField& u, const ScalarField& v) {
    const Grid& g = su.grid();
    const ScalarField& phi = su.domain().phi;
    const int S = su.slots();
    double s = 0.0;
    for (std::size_t k = 0; k < su.unknowns(); ++k) {
        std::size_t p = su.node_of(k);
        for (int slot = 0; slot < S; ++slot) {
            const auto& Lu = su.leg(k, slot);
            const auto& Lv = sv.leg(k, slot);
            if (Lu.nb >= 0) {
                if (slot % 2 == 0) continue; // interior edges once
                std::size_t q = su.node_of(std::size_t(Lu.nb));
                s += (u[p] - u[q]) * (v[p] - v[q]);
            } else {
                s += (u[p] - Lu.gval) * (v[p] - Lv.gval) / Lu.theta;
            }
        }
    }
    // edges between two fixed nodes of the closure
    for (std::size_t p = 0; p < g.node_count(); ++p) {
        if (!(phi[p] > 0.0) || su.id_of(p) >= 0) continue;
        auto c = g.node_ijk(p);
        for (int a = 0; a < g.dim; ++a) {
            if (c[a] == g.n[a]) continue;
            std::size_t q = p + g.stride(a);
            if (!(phi[q] > 0.0) || su.id_of(q) >= 0) continue;
            s += (su.fixed_value(p) - su.fixed_value(q)) * (sv.fixed_value(p) - sv.fixed_value(q));
        }
    }
    return s * std::pow(g.h, g.dim - 2);
}

ScalarField face_data(const Grid& g, const std::function<double(const Vec&)>& fn) {
    ScalarField b(g, 0.0);
    for (std::size_t p = 0; p < g.node_count(); ++p) {
        auto c = g.node_ijk(p);
        for (int a = 0; a < g.dim; ++a)
            if (c[a] == 0 || c[a] == g.n[a]) {
                b[p] = fn(g.node(p));
                break;
            }
    }
    return b;
}

double design_value(const OptimizeConfig& cfg, const ScalarField& boxd, const Vec& x) {
    return cfg.design.empty() ? boxd.interpolate(x) : cfg.design.interpolate(x);
}

// Equal to 1 on [0, 1/2], smooth decay to 0 at 1.
double cutoff(double s) {
    if (s <= 0.5) return 1.0;
    if (s >= 1.0) return 0.0;
    auto e = [](double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; };
    double t = 2.0 * (1.0 - s);
    return e(t) / (e(t) + e(1.0 - t));
}

template <class Fn> void for_nodes_in_ball(const Grid& g, const BallRegion& b, Fn fn) {
    std::array<int, 3> lo{0, 0, 0}, hi{0, 0, 0};
    for (int a = 0; a < g.dim; ++a) {
        lo[a] = std::max(0, int(std::floor((b.center[a] - b.radius - g.origin[a]) / g.h)));
        hi[a] = std::min(g.n[a], int(std::ceil((b.center[a] + b.radius - g.origin[a]) / g.h)));
    }
    for (int k = lo[2]; k <= hi[2]; ++k)
        for (int j = lo[1]; j <= hi[1]; ++j)
            for (int i = lo[0]; i <= hi[0]; ++i) {
                std::size_t p = g.node_index(i, j, k);
                if (norm(g.node(p) - b.center) <= b.radius) fn(p);
            }
}

} // namespace

const char* mode_name(OptMode m) {
    switch (m) {
    case OptMode::General: return "general";
    case OptMode::Bernoulli: return "bernoulli";
    case OptMode::Heat: return "heat";
    }
    return "general";
}

OptMode parse_mode(const std::string& s) {
    if (s == "general") return OptMode::General;
    if (s == "bernoulli") return OptMode::Bernoulli;
    if (s == "heat") return OptMode::Heat;
    throw Error(ErrorCode::Validation, "unknown optimizer mode '" + s + "'");
}

void OptimizeConfig::validate() const {
    if (!(lambda > 0.0)) throw Error(ErrorCode::Validation, "lambda must be positive");
    if (!(Lambda > 0.0)) throw Error(ErrorCode::Validation, "Lambda must be positive");
    if (!(step > 0.0 && step <= 1.0)) throw Error(ErrorCode::Validation, "step must lie in (0, 1]");
    if (max_steps < 0) throw Error(ErrorCode::Validation, "max_steps must be non-negative");
    if (reinit_every < 1) throw Error(ErrorCode::Validation, "reinit_every must be at least 1");
    if (!(stop_tol > 0.0) || !(tol > 0.0)) throw Error(ErrorCode::Validation, "tolerances must be positive");
    if (max_halvings < 0) throw Error(ErrorCode::Validation, "max_halvings must be non-negative");
    if (coarse_levels < 0) throw Error(ErrorCode::Validation, "coarse_levels must be non-negative");
    if (init.phi.empty() && design.empty()) throw Error(ErrorCode::Validation, "no grid: give init or design");
    if (!init.phi.empty() && !design.empty() && !same_grid(init.grid, design.grid))
        throw Error(ErrorCode::Validation, "init and design live on different grids");
    const Grid& g = init.phi.empty() ? design.grid : init.grid;
    if (mode != OptMode::Heat) data.validate(g);
}

double mode_energy(const OptimizeConfig& cfg, const DomainRep& dom, ScalarField& u, ScalarField& v) {
    const Grid& g = dom.grid;
    if (dom.empty()) throw Error(ErrorCode::EmptyDomain, "empty domain");
    if (cfg.mode == OptMode::Heat) {
        ScalarField bu = face_data(g, cfg.heat_boundary.value);
        ScalarField bv = face_data(g, [](const Vec&) { return 1.0; });
        CutStencil su(dom, &bu), sv(dom, &bv);
        if (su.unknowns() == 0) {
            u = su.to_field({});
            v = sv.to_field({});
        } else {
            CutOperator Lu(su), Lv(sv);
            u = su.to_field(pcg(Lu, Lu.dirichlet_rhs(), warm(su, u), cfg.tol, solver_cap(g)));
            v = sv.to_field(pcg(Lv, Lv.dirichlet_rhs(), warm(sv, v), cfg.tol, solver_cap(g)));
        }
        return edge_form(su, sv, u, v) + cfg.Lambda * simplex_volume(dom);
    }
    double qint = domain_quadrature(dom, cfg.data.Q.value);
    CutStencil st(dom);
    if (st.unknowns() == 0) {
        u = ScalarField(g, 0.0);
        v = ScalarField(g, 0.0);
        return qint;
    }
    CutOperator L(st);
    auto fb = sample_on(st, cfg.data.f);
    u = st.to_field(pcg(L, fb, warm(st, u), cfg.tol, solver_cap(g)));
    if (cfg.mode == OptMode::Bernoulli) {
        double c = 1.0 / (2.0 * cfg.lambda * cfg.lambda);
        v = u;
        for (auto& x : v.values) x *= c;
        return -c * dot_nodes(fb, u, st) + qint;
    }
    auto gb = sample_on(st, cfg.data.g);
    v = st.to_field(pcg(L, gb, warm(st, v), cfg.tol, solver_cap(g)));
    return -dot_nodes(gb, u, st) + qint;
}

std::vector<SpeedSample> boundary_speed(const OptimizeConfig& cfg, const DomainRep& dom, const ScalarField& u,
                                        const ScalarField& v) {
    const Grid& g = dom.grid;
    ScalarField boxd = box_distance(g);
    std::vector<SpeedSample> out;
    for (const auto& c : interface_crossings(dom)) {
        if (std::fabs(c.normal[c.axis]) < 0.5) continue;
        SpeedSample s;
        s.x = c.x;
        s.inner = c.inner;
        s.outer = c.outer;
        double gu = crossing_gradient_norm(u, dom, c), gv = crossing_gradient_norm(v, dom, c);
        double Q = cfg.mode == OptMode::Heat ? cfg.Lambda : cfg.data.Q(c.x);
        s.pressure = gu * gv;
        s.speed = s.pressure - Q;
        if (cfg.mode == OptMode::Heat) s.free = boxd.interpolate(c.x) > 3.0 * g.h;
        else s.free = design_value(cfg, boxd, c.x) > 2.0 * g.h;
        out.push_back(s);
    }
    return out;
}

namespace {

// Injection onto the grid with every other node; requires even cell counts.
ScalarField inject(const ScalarField& f, const Grid& coarse) {
    ScalarField out(coarse);
    for (std::size_t p = 0; p < coarse.node_count(); ++p) {
        auto c = coarse.node_ijk(p);
        out[p] = f[f.grid.node_index(2 * c[0], 2 * c[1], 2 * c[2])];
    }
    return out;
}

} // namespace

OptimizeResult optimize(const OptimizeConfig& cfg) {
    cfg.validate();
    const Grid g = cfg.init.phi.empty() ? cfg.design.grid : cfg.init.grid;
    std::vector<OptStep> coarse_steps;
    DomainRep start = cfg.init;
    if (cfg.coarse_levels > 0) {
        for (int a = 0; a < g.dim; ++a)
            if (g.n[a] % 2 != 0 || g.n[a] < 16)
                throw Error(ErrorCode::Validation, "coarse_levels needs even cell counts of at least 16");
        Grid cg = Grid::make(g.dim, g.origin, 2.0 * g.h, {g.n[0] / 2, g.n[1] / 2, g.dim == 3 ? g.n[2] / 2 : 0});
        OptimizeConfig cc = cfg;
        cc.coarse_levels = cfg.coarse_levels - 1;
        if (!cfg.init.phi.empty()) cc.init = DomainRep::from_phi(inject(cfg.init.phi, cg));
        if (!cfg.design.empty()) cc.design = inject(cfg.design, cg);
        OptimizeResult cr = optimize(cc);
        for (auto s : cr.trace.steps) {
            ++s.level;
            coarse_steps.push_back(s);
        }
        start = DomainRep::from_phi(ScalarField::sample(g, [&](const Vec& x) { return cr.domain.phi.interpolate(x); }));
    }
    const double h = g.h;
    ScalarField boxd = box_distance(g);
    ScalarField phiD = cfg.design.empty() ? boxd : cfg.design;
    const bool heat = cfg.mode == OptMode::Heat;

    auto clamp = [&](ScalarField& phi) {
        if (heat) return;
        for (std::size_t p = 0; p < phi.values.size(); ++p) phi[p] = std::min(phi[p], phiD[p]);
    };

    ScalarField phi;
    if (!start.phi.empty()) {
        phi = start.phi;
    } else {
        double diam = 0.0;
        for (int a = 0; a < g.dim; ++a) {
            double lo = std::numeric_limits<double>::max(), hi = -lo;
            for (std::size_t p = 0; p < g.node_count(); ++p)
                if (phiD[p] > 0.0) {
                    lo = std::min(lo, g.node(p)[a]);
                    hi = std::max(hi, g.node(p)[a]);
                }
            if (hi > lo) diam = std::max(diam, hi - lo);
        }
        phi = ScalarField(g);
        for (std::size_t p = 0; p < g.node_count(); ++p)
            phi[p] = heat ? 0.2 * diam - boxd[p] : phiD[p] - 0.2 * diam;
    }
    clamp(phi);

    OptimizeResult res;
    res.trace.steps = coarse_steps;
    DomainRep dom = DomainRep::from_phi(phi);
    if (dom.empty()) throw Error(ErrorCode::EmptyDomain, "initial domain is empty");
    double E = mode_energy(cfg, dom, res.u, res.v);
    res.trace.steps.push_back({0, E, volume(dom), 0.0, 0.0, 0});

    const std::size_t N = g.node_count();
    for (int it = 1; it <= cfg.max_steps; ++it) {
        auto samples = boundary_speed(cfg, dom, res.u, res.v);
        double vfree = 0.0, pmax = 0.0;
        bool any_free = false;
        std::vector<double> V(N, 0.0), cnt(N, 0.0);
        std::vector<char> seed(N, 0);
        for (std::size_t k = 0; k < samples.size(); ++k) {
            double s = samples[k].speed;
            pmax = std::max(pmax, samples[k].pressure);
            if (samples[k].free) {
                any_free = true;
                vfree = std::max(vfree, std::fabs(s));
            } else if (heat) {
                s = 0.0;
            }
            for (std::size_t p : {samples[k].inner, samples[k].outer}) {
                V[p] += s;
                cnt[p] += 1.0;
                seed[p] = 1;
            }
        }
        res.trace.steps.back().max_speed = vfree;
        if (!any_free || vfree < cfg.stop_tol) {
            res.trace.converged = true;
            break;
        }
        for (std::size_t p = 0; p < N; ++p)
            if (seed[p]) V[p] /= cnt[p];
        extend_speed(phi, V, seed, 10);
        if (heat)
            for (std::size_t p = 0; p < N; ++p)
                if (boxd[p] <= 3.0 * h) V[p] = 0.0;
        double vmax = 0.0;
        for (double x : V) vmax = std::max(vmax, std::fabs(x));
        if (vmax == 0.0) {
            res.trace.converged = true;
            break;
        }
        double dt = cfg.step * h / std::max(vmax, pmax);
        bool accepted = false;
        int halv = 0;
        double best = std::numeric_limits<double>::max();
        for (; halv <= cfg.max_halvings; ++halv, dt *= 0.5) {
            ScalarField trial = advance(phi, V, dt);
            clamp(trial);
            DomainRep tdom = DomainRep::from_phi(trial);
            if (tdom.empty()) throw Error(ErrorCode::StepCollapse, "domain vanished during a step");
            ScalarField tu = res.u, tv = res.v;
            double En = mode_energy(cfg, tdom, tu, tv);
            best = std::min(best, En);
            if (En <= E + 10.0 * (h * h + cfg.tol)) {
                phi = std::move(trial);
                dom = std::move(tdom);
                res.u = std::move(tu);
                res.v = std::move(tv);
                E = En;
                accepted = true;
                break;
            }
        }
        if (!accepted)
            throw Error(ErrorCode::NoDescent, "no energy decrease at step " + std::to_string(it) + ": E = " +
                                                  std::to_string(E) + ", best trial " + std::to_string(best));
        if (it % cfg.reinit_every == 0) {
            phi = reinitialize(phi);
            clamp(phi);
            dom = DomainRep::from_phi(phi);
            if (dom.empty()) throw Error(ErrorCode::StepCollapse, "domain vanished on reinitialisation");
            E = mode_energy(cfg, dom, res.u, res.v);
        }
        res.trace.steps.push_back({it, E, volume(dom), 0.0, dt, halv});
    }
    res.domain = dom;
    return res;
}

void OptTrace::write_csv(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw Error(ErrorCode::Validation, "cannot write " + path);
    os << std::setprecision(17) << "level,step,energy,volume,max_speed,dt,halvings\n";
    for (const auto& s : steps)
        os << s.level << ',' << s.step << ',' << s.energy << ',' << s.volume << ',' << s.max_speed << ',' << s.dt
           << ',' << s.halvings << '\n';
    os << "converged,," << (converged ? 1 : 0) << ",,,,\n";
}

double radial_energy(int dim, double f, double g, double Q, double r) {
    double s = sphere_area(dim);
    return -s * f * g * std::pow(r, dim + 2) / (dim * dim * (dim + 2.0)) + Q * s * std::pow(r, dim) / dim;
}

double radial_minimizer(int dim, double f, double g, double Q, double rmax, int samples) {
    if (samples < 2 || !(rmax > 0.0)) throw Error(ErrorCode::Validation, "radial_minimizer needs rmax > 0");
    double best = 0.0, bestE = radial_energy(dim, f, g, Q, 0.0);
    for (int k = 1; k < samples; ++k) {
        double r = rmax * k / (samples - 1);
        double e = radial_energy(dim, f, g, Q, r);
        if (e < bestE) {
            bestE = e;
            best = r;
        }
    }
    return best;
}

double radial_critical_radius(int dim, double f, double g, double Q) {
    if (!(f * g > 0.0) || !(Q > 0.0)) throw Error(ErrorCode::Validation, "need f g > 0 and Q > 0");
    return dim * std::sqrt(Q / (f * g));
}

// ---------------------------------------------------------------- diagnostics

DiagnosticsReport diagnostics(const DomainRep& dom, const ProblemData& data, double r_max, std::size_t max_points,
                              double tol) {
    if (dom.empty()) return diagnostics(dom, ScalarField(dom.grid, 0.0), r_max, max_points);
    DirichletProblem p;
    p.dom = &dom;
    p.rhs = data.f.sample(dom.grid);
    p.tol = tol;
    return diagnostics(dom, solve_dirichlet(p), r_max, max_points);
}

DiagnosticsReport diagnostics(const DomainRep& dom, const ScalarField& u, double r_max, std::size_t max_points) {
    DiagnosticsReport r;
    const Grid& g = dom.grid;
    if (dom.empty()) {
        r.empty = true;
        r.flags.push_back("empty-domain");
        return r;
    }
    double req = std::pow(volume(dom) / unit_ball_volume(g.dim), 1.0 / g.dim);
    if (!(r_max > 0.0)) r_max = req / 4.0;
    for (double rad = 4.0 * g.h; rad <= r_max * (1.0 + 1e-12); rad *= 2.0) r.radii.push_back(rad);
    if (r.radii.empty()) {
        r.radii.push_back(4.0 * g.h);
        r.flags.push_back("radius-below-grid");
    }
    const double rbig = r.radii.back();

    // Lipschitz bound over edges touching the closure
    for (std::size_t p = 0; p < g.node_count(); ++p) {
        auto c = g.node_ijk(p);
        for (int a = 0; a < g.dim; ++a) {
            if (c[a] == g.n[a]) continue;
            std::size_t q = p + g.stride(a);
            if (dom.phi[p] > 0.0 || dom.phi[q] > 0.0) r.lipschitz = std::max(r.lipschitz, std::fabs(u[p] - u[q]) / g.h);
        }
    }

    std::vector<Vec> chosen = sample_boundary_points(dom, max_points, rbig);
    if (chosen.empty()) {
        r.flags.push_back("no-boundary-points");
        return r;
    }
    r.points = chosen.size();

    const double big = std::numeric_limits<double>::max();
    r.nondegeneracy_min = big;
    r.density_min = big;
    r.density_max = 0.0;
    r.exterior_density_min = big;
    std::vector<double> slopes;
    const double ts[] = {0.1, 0.2, 0.3, 0.4, 0.5};
    for (const Vec& x0 : chosen)
        for (double rad : r.radii) {
            BallRegion B{x0, rad};
            double sup = 0.0;
            for_nodes_in_ball(g, B, [&](std::size_t p) { sup = std::max(sup, u[p]); });
            for (const Vec& e : sphere_rule(g.dim).points) sup = std::max(sup, u.interpolate(x0 + rad * e));
            r.nondegeneracy_min = std::min(r.nondegeneracy_min, sup / rad);
            double full = ball_measure(g, B, nullptr);
            double in = ball_measure(g, B, &dom) / full;
            r.density_min = std::min(r.density_min, in);
            r.density_max = std::max(r.density_max, in);
            r.exterior_density_min = std::min(r.exterior_density_min, 1.0 - in);
            double num = 0.0, den = 0.0;
            for (double t : ts) {
                double m = ball_quadrature(
                               g, B,
                               [&](const Vec& x) {
                                   double w = u.interpolate(x);
                                   return (w > 0.0 && w < rad * t) ? 1.0 : 0.0;
                               },
                               &dom) /
                           full;
                num += m * t;
                den += t * t;
            }
            slopes.push_back(num / den);
        }
    std::sort(slopes.begin(), slopes.end());
    r.levelset_slope = slopes[slopes.size() / 2];
    r.levelset_slope_min = slopes.front();
    r.levelset_slope_max = slopes.back();
    if (!(r.nondegeneracy_min > 0.0)) r.flags.push_back("degenerate");
    if (r.density_min <= 0.0 || r.density_max >= 1.0) r.flags.push_back("density-out-of-range");
    if (!std::isfinite(r.levelset_slope)) r.flags.push_back("slope-nonfinite");
    return r;
}

void DiagnosticsReport::write_csv(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw Error(ErrorCode::Validation, "cannot write " + path);
    os << std::setprecision(17) << "key,value\n";
    os << "empty," << (empty ? 1 : 0) << '\n';
    os << "points," << points << '\n';
    for (std::size_t k = 0; k < radii.size(); ++k) os << "radius_" << k << ',' << radii[k] << '\n';
    os << "lipschitz," << lipschitz << '\n';
    os << "nondegeneracy_min," << nondegeneracy_min << '\n';
    os << "density_min," << density_min << '\n';
    os << "density_max," << density_max << '\n';
    os << "exterior_density_min," << exterior_density_min << '\n';
    os << "levelset_slope," << levelset_slope << '\n';
    os << "levelset_slope_min," << levelset_slope_min << '\n';
    os << "levelset_slope_max," << levelset_slope_max << '\n';
    for (const auto& f : flags) os << "flag," << f << '\n';
}

// ---------------------------------------------------------------- minimality probes

double minimality_probe(const DomainRep& dom, const ProblemData& data, const ScalarField& u, const BallRegion& ball,
                        ProbeDirection dir, double tol) {
    const Grid& g = dom.grid;
    check_ball_inside(g, ball);
    double Eu = energy_Ef(u, data.f, ball);
    double in = ball_measure(g, ball, &dom);
    if (dir == ProbeDirection::Outward) {
        DomainRep bdom = DomainRep::from_function(
            g, [&](const Vec& x) { return ball.radius - norm(x - ball.center); });
        DirichletProblem p;
        p.dom = &bdom;
        p.rhs = data.f.sample(g);
        p.boundary_data = u;
        p.tol = tol;
        ScalarField rep = u;
        ScalarField w = solve_dirichlet(p);
        for (std::size_t k = 0; k < g.node_count(); ++k)
            if (bdom.phi[k] > 0.0) rep[k] = w[k];
        double outside = ball_measure(g, ball, nullptr) - in;
        return energy_Ef(rep, data.f, ball) + 0.5 * data.C2 * data.CQ * outside - Eu;
    }
    ScalarField psi = signed_extension(u);
    double best = std::numeric_limits<double>::max();
    for (double t : {0.05, 0.1, 0.2, 0.3}) {
        ScalarField level(g), trunc(g);
        for (std::size_t k = 0; k < g.node_count(); ++k) {
            double s = norm(g.node(k) - ball.center) / ball.radius;
            level[k] = psi[k] - ball.radius * t * cutoff(s);
            trunc[k] = std::max(level[k], 0.0);
        }
        DomainRep omega = DomainRep::from_phi(level);
        double removed = in - ball_measure(g, ball, &omega);
        double m = energy_Ef(trunc, data.f, ball) - Eu - 0.5 * data.C1 * data.cQ * removed;
        best = std::min(best, m);
    }
    return best;
}

double minimality_probe(const DomainRep& dom, const ProblemData& data, const BallRegion& ball, ProbeDirection dir,
                        double tol) {
    if (dom.empty()) throw Error(ErrorCode::EmptyDomain, "empty domain");
    DirichletProblem p;
    p.dom = &dom;
    p.rhs = data.f.sample(dom.grid);
    p.tol = tol;
    return minimality_probe(dom, data, solve_dirichlet(p), ball, dir, tol);
}

} // namespace shapelab
