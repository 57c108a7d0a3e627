#include "shapelab/shape_calculus.hpp"

#include "shapelab/errors.hpp"
#include "shapelab/parallel.hpp"

#include <cmath>
#include <fstream>
#include <limits>

namespace shapelab {

namespace {

double cell_measure(const Grid& g) { return g.cell_volume(); }

std::vector<double> sample_unknowns(const CutStencil& st, const std::function<double(const Vec&)>& fn) {
    std::vector<double> b(st.unknowns());
    for (std::size_t k = 0; k < b.size(); ++k) b[k] = fn(st.grid().node(st.node_of(k)));
    return b;
}

// h^d sum over unknowns of w * u
double node_sum(const CutStencil& st, const std::vector<double>& w, const ScalarField& u) {
    double s = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) s += w[k] * u[st.node_of(k)];
    return s * cell_measure(st.grid());
}

double norm2(const std::vector<double>& x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

int iteration_cap(const Grid& g) { return 50 * g.max_cells(); }

Mat pulled_back_coefficient(const FlowMap& fm, const Vec& x, double t) {
    const int dim = fm.spec->dim;
    if (norm(x - fm.spec->center) >= fm.spec->rho) return identity(dim);
    Vec y;
    Mat M;
    fm.map_with_jacobian(x, t, y, M);
    Mat Mi = inverse(M, dim);
    return det(M, dim) * (Mi * transpose(Mi));
}

double pulled_back_density(const FlowMap& fm, const AnalyticScalar& w, const Vec& x, double t) {
    if (norm(x - fm.spec->center) >= fm.spec->rho) return w(x);
    Vec y;
    Mat M;
    fm.map_with_jacobian(x, t, y, M);
    return w(y) * det(M, fm.spec->dim);
}

TensorFn variation_tensor(const VectorFieldSpec& spec, int order) {
    return [&spec, order](const Vec& x) { return delta_A(spec, x, order); };
}

} // namespace

// ---------------------------------------------------------------- energies

double energy_Ef(const ScalarField& u, const AnalyticScalar& f, const DomainRep& region) {
    return domain_quadrature(region, [&](const Vec& x) {
        Vec gu = u.interpolate_gradient(x);
        return 0.5 * dot(gu, gu) - f(x) * u.interpolate(x);
    });
}

double energy_Ef(const ScalarField& u, const AnalyticScalar& f, const BallRegion& region) {
    return ball_quadrature(u.grid, region, [&](const Vec& x) {
        Vec gu = u.interpolate_gradient(x);
        return 0.5 * dot(gu, gu) - f(x) * u.interpolate(x);
    });
}

EnergyReport energy_F_report(const DomainRep& dom, const ProblemData& data, double tol) {
    EnergyReport r;
    const Grid& g = dom.grid;
    r.u = ScalarField(g, 0.0);
    r.v = ScalarField(g, 0.0);
    if (dom.empty()) return r;
    double qint = domain_quadrature(dom, data.Q.value);
    r.volume = volume(dom);
    CutStencil st(dom);
    if (st.unknowns() == 0) {
        r.F = r.F_symmetric = qint;
        return r;
    }
    CutOperator L(st);
    auto fb = sample_unknowns(st, data.f.value);
    auto gb = sample_unknowns(st, data.g.value);
    int cap = iteration_cap(g);
    r.u = st.to_field(pcg(L, fb, {}, tol, cap));
    r.v = st.to_field(pcg(L, gb, {}, tol, cap));
    double gu = node_sum(st, gb, r.u), fv = node_sum(st, fb, r.v);
    r.F = -gu + qint;
    r.F_symmetric = L.form(r.u, r.v) - gu - fv + qint;
    // a(u, v) - <f, v> = h^d v^T (L u - f) is bounded by the residual of the state solve
    double bound = 10.0 * tol * cell_measure(g) * norm2(st.from_field(r.v)) * norm2(fb);
    if (std::fabs(r.F - r.F_symmetric) > bound + 1e-14 * std::fabs(r.F))
        throw Error(ErrorCode::NoConvergence, "energy forms disagree beyond the solver tolerance");
    return r;
}

ScalarField signed_extension(const ScalarField& u) {
    const Grid& g = u.grid;
    ScalarField psi = u;
    auto pos = [&](int i, int j, int k, double& val) {
        if (i < 0 || j < 0 || k < 0 || i > g.n[0] || j > g.cells_along(1) || (g.dim == 3 && k > g.n[2]) ||
            (g.dim == 2 && k != 0))
            return false;
        val = u.at(i, j, k);
        return val > 0.0;
    };
    for (std::size_t p = 0; p < g.node_count(); ++p) {
        if (u[p] > 0.0) continue;
        auto c = g.node_ijk(p);
        double sum = 0.0, diag = 0.0;
        int cnt = 0;
        bool near = false;
        for (int a = 0; a < g.dim; ++a)
            for (int s = -1; s <= 1; s += 2) {
                std::array<int, 3> q = c, q2 = c;
                q[a] += s;
                q2[a] += 2 * s;
                double v1, v2;
                if (!pos(q[0], q[1], q[2], v1)) continue;
                near = true;
                if (pos(q2[0], q2[1], q2[2], v2)) {
                    sum += 2.0 * v1 - v2;
                    ++cnt;
                } else {
                    diag = std::max(diag, v1);
                }
            }
        if (!near) {
            // corner-only contact with the positive set: extrapolate along the diagonal, or mirror
            int kmin = g.dim == 3 ? -1 : 0, kmax = g.dim == 3 ? 1 : 0;
            for (int dk = kmin; dk <= kmax; ++dk)
                for (int dj = -1; dj <= 1; ++dj)
                    for (int di = -1; di <= 1; ++di) {
                        double v, v2;
                        if (!pos(c[0] + di, c[1] + dj, c[2] + dk, v)) continue;
                        diag = std::max(diag, v);
                        if (pos(c[0] + 2 * di, c[1] + 2 * dj, c[2] + 2 * dk, v2)) {
                            sum += 2.0 * v - v2;
                            ++cnt;
                        }
                    }
        }
        // zero is allowed: it marks a node lying on the free boundary itself
        if (cnt > 0) psi[p] = std::min(sum / cnt, 0.0);
        else psi[p] = diag > 0.0 ? -diag : -g.h;
    }
    return psi;
}

double energy_G(const ScalarField& u, double lam, const BallRegion& region) {
    ScalarField psi = signed_extension(u);
    DomainRep dom = DomainRep::from_phi(psi);
    return ball_quadrature(u.grid, region,
                           [&](const Vec& x) {
                               Vec gr = psi.interpolate_gradient(x);
                               return dot(gr, gr) + lam;
                           },
                           &dom);
}

double energy_G(const ScalarField& u, double lam, const DomainRep& region) {
    ScalarField psi = signed_extension(u);
    DomainRep dom = DomainRep::from_phi(psi);
    return domain_quadrature(dom, [&](const Vec& x) {
        if (!(region.phi.interpolate(x) > 0.0)) return 0.0;
        Vec gr = psi.interpolate_gradient(x);
        return dot(gr, gr) + lam;
    });
}

// ---------------------------------------------------------------- linearized states

ScalarField linearized_state(const ScalarField& u, const DomainRep& dom, const AnalyticScalar& w,
                             const VectorFieldSpec& spec, int order, const ScalarField* du, double tol) {
    if (order != 1 && order != 2) throw Error(ErrorCode::Validation, "variation order must be 1 or 2");
    if (spec.is_zero()) return ScalarField(dom.grid, 0.0);
    spec.validate(dom.grid);
    DivFormProblem p;
    p.dom = &dom;
    p.tol = tol;
    p.source = ScalarField::sample(dom.grid, [&](const Vec& x) { return delta_f(w, spec, x, order); });
    if (order == 1) {
        p.tensor_fluxes.push_back({variation_tensor(spec, 1), u});
        return solve_divform(p);
    }
    ScalarField first;
    if (!du) {
        first = linearized_state(u, dom, w, spec, 1, nullptr, tol);
        du = &first;
    }
    p.tensor_fluxes.push_back({variation_tensor(spec, 1), *du});
    p.tensor_fluxes.push_back({variation_tensor(spec, 2), u});
    return solve_divform(p);
}

// ---------------------------------------------------------------- first variation

FirstVariation first_variation(const DomainRep& dom, const ProblemData& data, const VectorFieldSpec& spec,
                               const ScalarField& u, const ScalarField& v) {
    FirstVariation fv;
    if (spec.is_zero() || dom.empty()) return fv;
    spec.validate(dom.grid);
    CutStencil st(dom);
    CutOperator L1(st, variation_tensor(spec, 1));
    auto df = sample_unknowns(st, [&](const Vec& x) { return delta_f(data.f, spec, x, 1); });
    auto dg = sample_unknowns(st, [&](const Vec& x) { return delta_f(data.g, spec, x, 1); });
    double dq = domain_quadrature(dom, [&](const Vec& x) { return delta_f(data.Q, spec, x, 1); });
    fv.volume_form = L1.form(u, v) - node_sum(st, dg, u) - node_sum(st, df, v) + dq;
    for (const auto& c : interface_crossings(dom)) {
        Vec xi = spec.eval(c.x).xi;
        double nx = dot(c.normal, xi);
        if (nx == 0.0) continue;
        double gu = crossing_gradient_norm(u, dom, c), gv = crossing_gradient_norm(v, dom, c);
        fv.surface_form += c.weight * nx * (data.Q(c.x) - gu * gv);
    }
    return fv;
}

FirstVariation first_variation(const DomainRep& dom, const ProblemData& data, const VectorFieldSpec& spec,
                               double tol) {
    if (spec.is_zero() || dom.empty()) return {};
    EnergyReport s = energy_F_report(dom, data, tol);
    return first_variation(dom, data, spec, s.u, s.v);
}

// ---------------------------------------------------------------- second variation

double pulled_back_energy(const DomainRep& dom, const ProblemData& data, const VectorFieldSpec& spec, double t,
                          const VariationOptions& opt, ScalarField* u_out) {
    const Grid& g = dom.grid;
    if (dom.empty()) {
        if (u_out) *u_out = ScalarField(g, 0.0);
        return 0.0;
    }
    FlowMap fm{&spec, opt.flow_substeps};
    double qint = domain_quadrature(dom, [&](const Vec& x) { return pulled_back_density(fm, data.Q, x, t); });
    CutStencil st(dom);
    if (st.unknowns() == 0) {
        if (u_out) *u_out = ScalarField(g, 0.0);
        return qint;
    }
    CutOperator L(st, [&](const Vec& x) { return pulled_back_coefficient(fm, x, t); });
    auto fb = sample_unknowns(st, [&](const Vec& x) { return pulled_back_density(fm, data.f, x, t); });
    auto gb = sample_unknowns(st, [&](const Vec& x) { return pulled_back_density(fm, data.g, x, t); });
    ScalarField u = st.to_field(pcg(L, fb, {}, opt.tol, iteration_cap(g)));
    double F = -node_sum(st, gb, u) + qint;
    if (u_out) *u_out = std::move(u);
    return F;
}

DomainRep advect_domain(const DomainRep& dom, const VectorFieldSpec& spec, double t, int substeps) {
    FlowMap fm{&spec, substeps};
    ScalarField phi = dom.phi;
    const Grid& g = dom.grid;
    for (std::size_t i = 0; i < g.node_count(); ++i) {
        Vec x = g.node(i);
        if (norm(x - spec.center) >= spec.rho) continue;
        phi[i] = dom.phi.interpolate(fm.map(x, -t));
    }
    return DomainRep::from_phi(std::move(phi));
}

VariationReport second_variation(const DomainRep& dom, const ProblemData& data, const VectorFieldSpec& spec,
                                 const EnergyReport& states, const VariationOptions& opt) {
    for (std::size_t i = 1; i < opt.ladder.size(); ++i)
        if (!(opt.ladder[i] < opt.ladder[i - 1]) || !(opt.ladder[i] > 0.0))
            throw Error(ErrorCode::Validation, "Taylor ladder must be positive and strictly decreasing");
    VariationReport r;
    const Grid& g = dom.grid;
    r.field = spec.describe();
    r.F0 = states.F;
    r.u = states.u;
    r.v = states.v;
    r.deltaU = ScalarField(g, 0.0);
    r.deltaV = ScalarField(g, 0.0);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (spec.is_zero() || dom.empty()) {
        for (double t : opt.ladder) r.rows.push_back({t, r.F0, 0.0, opt.regrid_check ? r.F0 : nan});
        return r;
    }
    spec.validate(g);
    r.deltaU = linearized_state(r.u, dom, data.f, spec, 1, nullptr, opt.tol);
    r.deltaV = linearized_state(r.v, dom, data.g, spec, 1, nullptr, opt.tol);
    FirstVariation fv = first_variation(dom, data, spec, r.u, r.v);
    r.deltaF = fv.volume_form;
    r.deltaF_surface = fv.surface_form;

    CutStencil st(dom);
    CutOperator L0(st);
    CutOperator L2(st, variation_tensor(spec, 2));
    auto d2f = sample_unknowns(st, [&](const Vec& x) { return delta_f(data.f, spec, x, 2); });
    auto d2g = sample_unknowns(st, [&](const Vec& x) { return delta_f(data.g, spec, x, 2); });
    double d2q = domain_quadrature(
        dom, [&](const Vec& x) { return delta_f(data.Q, spec, x, 2, opt.printed_q_form); });
    r.delta2F = L2.form(r.u, r.v) - L0.form(r.deltaU, r.deltaV) - node_sum(st, d2f, r.v) - node_sum(st, d2g, r.u) + d2q;

    for (double t : opt.ladder) {
        TaylorRow row;
        row.t = t;
        row.F_t = pulled_back_energy(dom, data, spec, t, opt);
        row.remainder = std::fabs(row.F_t - r.F0 - t * r.deltaF - t * t * r.delta2F);
        row.F_regrid = opt.regrid_check ? energy_F(advect_domain(dom, spec, t, opt.flow_substeps), data, opt.tol) : nan;
        r.rows.push_back(row);
    }
    return r;
}

VariationReport second_variation(const DomainRep& dom, const ProblemData& data, const VectorFieldSpec& spec,
                                 const VariationOptions& opt) {
    return second_variation(dom, data, spec, energy_F_report(dom, data, opt.tol), opt);
}

std::vector<VariationReport> second_variations(const DomainRep& dom, const ProblemData& data,
                                               const std::vector<VectorFieldSpec>& specs,
                                               const VariationOptions& opt) {
    EnergyReport states = energy_F_report(dom, data, opt.tol);
    std::vector<VariationReport> out(specs.size());
    parallel_for(specs.size(), [&](std::size_t i) { out[i] = second_variation(dom, data, specs[i], states, opt); });
    return out;
}

std::vector<std::pair<double, double>> VariationReport::taylor_remainders() const {
    std::vector<std::pair<double, double>> out;
    for (const auto& r : rows) out.emplace_back(r.t, r.remainder);
    return out;
}

std::vector<double> VariationReport::exponents() const {
    std::vector<double> e;
    for (std::size_t i = 1; i < rows.size(); ++i)
        e.push_back(std::log2(rows[i - 1].remainder / rows[i].remainder) / std::log2(rows[i - 1].t / rows[i].t));
    return e;
}

double VariationReport::min_exponent() const {
    double m = std::numeric_limits<double>::infinity();
    for (double e : exponents()) m = std::min(m, e);
    return m;
}

void VariationReport::write_csv(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw Error(ErrorCode::Validation, "cannot write " + path);
    os.precision(17);
    os << "row,t,F_t,remainder,F_regrid,F0,deltaF,delta2F,deltaF_surface\n";
    for (const auto& r : rows) os << "ladder," << r.t << ',' << r.F_t << ',' << r.remainder << ',' << r.F_regrid << ",,,,\n";
    os << "summary,,,,," << F0 << ',' << deltaF << ',' << delta2F << ',' << deltaF_surface << '\n';
}

// ---------------------------------------------------------------- one-phase variations

double harmonic_residual(const ScalarField& u) {
    const Grid& g = u.grid;
    double worst = 0.0, umax = u.max_abs();
    if (umax == 0.0) return 0.0;
    for (std::size_t p = 0; p < g.node_count(); ++p) {
        if (!(u[p] > 0.0)) continue;
        auto c = g.node_ijk(p);
        bool ok = true;
        double lap = 0.0;
        for (int a = 0; a < g.dim && ok; ++a) {
            if (c[a] < 2 || c[a] > g.n[a] - 2) {
                ok = false;
                break;
            }
            std::size_t s = g.stride(a);
            ok = u[p + s] > 0.0 && u[p - s] > 0.0 && u[p + 2 * s] > 0.0 && u[p - 2 * s] > 0.0;
            lap += u[p + s] + u[p - s] - 2.0 * u[p];
        }
        if (ok) worst = std::max(worst, std::fabs(lap));
    }
    return worst / umax;
}

OnePhaseVariation one_phase_variations(const ScalarField& u, double lam, const VectorFieldSpec& spec, double tol) {
    const Grid& g = u.grid;
    OnePhaseVariation r;
    r.du = ScalarField(g, 0.0);
    for (double x : u.values)
        if (x < 0.0) throw Error(ErrorCode::Validation, "one-phase variations need u >= 0");
    if (harmonic_residual(u) > 100.0 * tol) throw Error(ErrorCode::NotHarmonic, "u is not harmonic on {u > 0}");
    if (spec.is_zero()) return r;
    spec.validate(g);
    ScalarField psi = signed_extension(u);
    DomainRep dom = DomainRep::from_phi(psi);
    if (dom.empty()) return r;
    CutStencil st(dom);
    if (st.unknowns() == 0) return r;
    CutOperator L0(st), L1(st, variation_tensor(spec, 1)), L2(st, variation_tensor(spec, 2));
    DivFormProblem p;
    p.dom = &dom;
    p.tol = 1e-10;
    p.tensor_fluxes.push_back({variation_tensor(spec, 1), psi});
    r.du = solve_divform(p);
    double m1 = domain_quadrature(dom, [&](const Vec& x) { return spec.eval(x).div(); });
    double m2 = domain_quadrature(dom, [&](const Vec& x) {
        Jet j = spec.eval(x);
        double dv = j.div();
        return dv * dv + dot(j.xi, j.grad_div());
    });
    r.dG = L1.form(psi, psi) + lam * m1;
    r.d2G = 2.0 * L2.form(psi, psi) - 2.0 * L0.form(r.du, r.du) + lam * m2;
    return r;
}

} // namespace shapelab
