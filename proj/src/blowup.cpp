#include "shapelab/blowup.hpp"
#include "shapelab/errors.hpp"
#include "shapelab/levelset.hpp"
#include "shapelab/parallel.hpp"
#include "shapelab/shape_calculus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>

namespace shapelab {

namespace {

void check_scale(const Grid& g, double r) {
    if (!(r >= 4.0 * g.h * (1.0 - 1e-12)))
        throw Error(ErrorCode::ScaleBelowGrid, "radius " + std::to_string(r) + " is below 4h");
}

struct Signed {
    ScalarField psi;
    DomainRep dom;
    explicit Signed(const ScalarField& u) : psi(signed_extension(u)), dom(DomainRep::from_phi(psi)) {}
};

void weiss_at(const Signed& s, const Vec& x0, double lam, double r, double& W, double& D) {
    const Grid& g = s.psi.grid;
    BallRegion B{x0, r};
    double bulk = ball_quadrature(
        g, B,
        [&](const Vec& x) {
            Vec gr = s.psi.interpolate_gradient(x);
            return dot(gr, gr) + lam;
        },
        &s.dom);
    bulk /= std::pow(r, g.dim);
    const SphereRule& rule = sphere_rule(g.dim);
    double surf = 0.0, d = 0.0;
    for (std::size_t k = 0; k < rule.points.size(); ++k) {
        const Vec& e = rule.points[k];
        Vec x = x0 + r * e;
        double val = s.psi.interpolate(x);
        if (!(val > 0.0)) continue;
        surf += rule.weights[k] * (val / r) * (val / r);
        double w = dot(e, s.psi.interpolate_gradient(x)) - val / r;
        d += rule.weights[k] * w * w;
    }
    W = bulk - surf;
    D = d;
}

std::vector<Vec> direction_grid(int dim) {
    std::vector<Vec> dirs;
    if (dim == 2) {
        for (int k = 0; k < 256; ++k) {
            double t = 2.0 * std::numbers::pi * k / 256;
            dirs.push_back({std::cos(t), std::sin(t), 0.0});
        }
        return dirs;
    }
    const int n = 1026;
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < n; ++k) {
        double z = 1.0 - 2.0 * (k + 0.5) / n;
        double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
        dirs.push_back({rho * std::cos(golden * k), rho * std::sin(golden * k), z});
    }
    return dirs;
}

struct FitData {
    std::vector<Vec> x;
    std::vector<double> u, v;
    double umax = 0.0, vmax = 0.0;
};

struct Fit {
    double alpha = 0.0, beta = 0.0, error = std::numeric_limits<double>::max();
};

Fit fit_direction(const FitData& fd, const Vec& nu) {
    double su = 0.0, sv = 0.0, ss = 0.0;
    for (std::size_t i = 0; i < fd.x.size(); ++i) {
        double s = std::max(dot(fd.x[i], nu), 0.0);
        su += fd.u[i] * s;
        sv += fd.v[i] * s;
        ss += s * s;
    }
    Fit f;
    if (ss <= 0.0) return f;
    f.alpha = std::max(su / ss, 0.0);
    f.beta = std::max(sv / ss, 0.0);
    double eu = 0.0, ev = 0.0;
    for (std::size_t i = 0; i < fd.x.size(); ++i) {
        double s = std::max(dot(fd.x[i], nu), 0.0);
        eu = std::max(eu, std::fabs(fd.u[i] - f.alpha * s));
        ev = std::max(ev, std::fabs(fd.v[i] - f.beta * s));
    }
    eu = fd.umax > 0.0 ? eu / fd.umax : 1.0;
    ev = fd.vmax > 0.0 ? ev / fd.vmax : 1.0;
    f.error = std::max(eu, ev);
    return f;
}

std::array<Vec, 2> tangents(const Vec& nu, int dim) {
    if (dim == 2) return {Vec{-nu[1], nu[0], 0.0}, Vec{0, 0, 0}};
    Vec a = std::fabs(nu[0]) < 0.9 ? Vec{1, 0, 0} : Vec{0, 1, 0};
    Vec t1 = a - dot(a, nu) * nu;
    t1 = (1.0 / norm(t1)) * t1;
    Vec t2{nu[1] * t1[2] - nu[2] * t1[1], nu[2] * t1[0] - nu[0] * t1[2], nu[0] * t1[1] - nu[1] * t1[0]};
    return {t1, t2};
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

ScalarField positive_part(ScalarField f) {
    for (auto& x : f.values) x = std::max(x, 0.0);
    return f;
}

} // namespace

ScalarField rescale(const ScalarField& u, const Vec& x0, double r, double R_target, int cells) {
    const Grid& g = u.grid;
    if (!(R_target > 0.0)) throw Error(ErrorCode::Validation, "R_target must be positive");
    check_scale(g, r);
    check_ball_inside(g, BallRegion{x0, r * R_target});
    Grid ref = Grid::cube(g.dim, -R_target, R_target, cells);
    return ScalarField::sample(ref, [&](const Vec& x) { return u.interpolate(x0 + r * x) / r; });
}

std::vector<double> dyadic_ladder(double r_max, double h, double min_factor) {
    std::vector<double> out;
    for (double r = r_max; r >= min_factor * h * (1.0 - 1e-12); r *= 0.5) out.push_back(r);
    return out;
}

double WeissTrace::monotonicity_defect() const {
    double m = 0.0;
    for (std::size_t k = 1; k < W.size(); ++k) m = std::max(m, W[k] - W[k - 1]);
    return m;
}

void WeissTrace::write_csv(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw Error(ErrorCode::Validation, "cannot write " + path);
    os << std::setprecision(17) << "radius,W,D\n";
    for (std::size_t k = 0; k < radii.size(); ++k) os << radii[k] << ',' << W[k] << ',' << D[k] << '\n';
    os << "monotonicity_defect," << monotonicity_defect() << ",\n";
}

WeissTrace weiss_trace(const ScalarField& u, const Vec& x0, double lam, const std::vector<double>& radii) {
    const Grid& g = u.grid;
    if (radii.empty()) throw Error(ErrorCode::Validation, "empty radius list");
    for (std::size_t k = 0; k < radii.size(); ++k) {
        if (k > 0 && !(radii[k] < radii[k - 1])) throw Error(ErrorCode::Validation, "radii must strictly decrease");
        check_scale(g, radii[k]);
        check_ball_inside(g, BallRegion{x0, radii[k]});
    }
    Signed s(u);
    WeissTrace t;
    t.center = x0;
    t.lam = lam;
    t.radii = radii;
    t.W.resize(radii.size());
    t.D.resize(radii.size());
    for (std::size_t k = 0; k < radii.size(); ++k) weiss_at(s, x0, lam, radii[k], t.W[k], t.D[k]);
    return t;
}

const char* verdict_name(Verdict v) {
    switch (v) {
    case Verdict::Regular: return "regular";
    case Verdict::Singular: return "singular";
    case Verdict::Inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

BoundaryPointReport halfplane_fit(const ScalarField& u_r, const ScalarField& v_r, double Qx0, double tau) {
    if (!same_grid(u_r.grid, v_r.grid)) throw Error(ErrorCode::Validation, "u and v live on different grids");
    const Grid& g = u_r.grid;
    FitData fd;
    for (std::size_t p = 0; p < g.node_count(); ++p) {
        Vec x = g.node(p);
        if (norm(x) > 1.0) continue;
        fd.x.push_back(x);
        fd.u.push_back(u_r[p]);
        fd.v.push_back(v_r[p]);
        fd.umax = std::max(fd.umax, std::fabs(u_r[p]));
        fd.vmax = std::max(fd.vmax, std::fabs(v_r[p]));
    }
    if (fd.x.empty()) throw Error(ErrorCode::Validation, "reference grid does not cover the unit ball");
    auto dirs = direction_grid(g.dim);
    Vec best = dirs[0];
    Fit bf;
    for (const Vec& nu : dirs) {
        Fit f = fit_direction(fd, nu);
        if (f.error < bf.error) {
            bf = f;
            best = nu;
        }
    }
    double step = g.dim == 2 ? 2.0 * std::numbers::pi / 256 : std::sqrt(4.0 * std::numbers::pi / 1026);
    for (int it = 0; it < 400 && step > 1e-8; ++it) {
        auto T = tangents(best, g.dim);
        bool improved = false;
        for (int k = 0; k < g.dim - 1 && !improved; ++k)
            for (double sgn : {1.0, -1.0}) {
                Vec cand = best + (sgn * step) * T[k];
                cand = (1.0 / norm(cand)) * cand;
                Fit f = fit_direction(fd, cand);
                if (f.error < bf.error) {
                    bf = f;
                    best = cand;
                    improved = true;
                    break;
                }
            }
        if (!improved) step *= 0.5;
    }
    BoundaryPointReport r;
    r.best_nu = best;
    r.alpha = bf.alpha;
    r.beta = bf.beta;
    r.fit_error = bf.error;
    if (r.fit_error <= tau && std::fabs(r.alpha * r.beta - Qx0) <= tau * Qx0) r.verdict = Verdict::Regular;
    else if (r.fit_error >= 3.0 * tau) r.verdict = Verdict::Singular;
    else r.verdict = Verdict::Inconclusive;
    return r;
}

BandRatio boundary_ratio(const DomainRep& dom, const ScalarField& u, const ScalarField& v) {
    const Grid& g = dom.grid;
    ScalarField dist = reinitialize(dom.phi);
    std::vector<double> ratios;
    for (std::size_t p = 0; p < g.node_count(); ++p)
        if (dist[p] > g.h && dist[p] < 4.0 * g.h && u[p] > 0.0 && v[p] > 0.0) ratios.push_back(u[p] / v[p]);
    BandRatio b;
    b.samples = ratios.size();
    if (ratios.empty()) return b;
    b.lambda = median(ratios);
    b.min = *std::min_element(ratios.begin(), ratios.end());
    b.max = *std::max_element(ratios.begin(), ratios.end());
    return b;
}

ClassifyReport classify_boundary(const DomainRep& dom, const ProblemData& data, const ScalarField& u,
                                 const ScalarField& v, const std::vector<Vec>& points,
                                 const std::vector<double>& ladder, double tau) {
    const Grid& g = dom.grid;
    if (ladder.empty()) throw Error(ErrorCode::Validation, "empty radius ladder");
    if (dom.empty()) throw Error(ErrorCode::EmptyDomain, "empty domain");
    ScalarField dist = reinitialize(dom.phi);
    for (const Vec& x : points)
        if (std::fabs(dist.interpolate(x)) > g.h * (1.0 + 1e-9))
            throw Error(ErrorCode::Validation, "classification point is not on the boundary");

    ClassifyReport rep;
    BandRatio band = boundary_ratio(dom, u, v);
    rep.lambda = band.lambda;
    rep.ratio_min = band.min;
    rep.ratio_max = band.max;
    rep.ratio_spread = band.samples ? band.max / band.min : 0.0;

    Signed su(u);
    ScalarField psi_v = signed_extension(v);
    const int cells = g.dim == 2 ? 80 : 40;
    std::vector<std::vector<LadderRow>> rows(points.size());
    rep.points.resize(points.size());
    parallel_for(points.size(), [&](std::size_t i) {
        const Vec& x0 = points[i];
        double lam = rep.lambda * data.Q(x0);
        std::vector<BoundaryPointReport> fits;
        for (double r : ladder) {
            check_scale(g, r);
            check_ball_inside(g, BallRegion{x0, 1.25 * r});
            LadderRow row;
            row.point = i;
            row.radius = r;
            weiss_at(su, x0, lam, r, row.W, row.D);
            ScalarField ur = positive_part(rescale(su.psi, x0, r, 1.25, cells));
            ScalarField vr = positive_part(rescale(psi_v, x0, r, 1.25, cells));
            BoundaryPointReport f = halfplane_fit(ur, vr, data.Q(x0), tau);
            f.center = x0;
            f.radius = r;
            f.weiss_D = row.D;
            row.alpha = f.alpha;
            row.beta = f.beta;
            row.fit_error = f.fit_error;
            row.nu = f.best_nu;
            rows[i].push_back(row);
            fits.push_back(f);
        }
        std::size_t sel = 0;
        for (std::size_t k = 1; k < fits.size(); ++k)
            if (fits[k].weiss_D < fits[sel].weiss_D) sel = k;
        BoundaryPointReport out = fits[sel];
        out.smallest_radius = ladder.back();
        if (out.verdict != Verdict::Regular)
            out.verdict = fits.back().fit_error >= 3.0 * tau ? Verdict::Singular : Verdict::Inconclusive;
        rep.points[i] = out;
    });
    for (auto& r : rows) rep.rows.insert(rep.rows.end(), r.begin(), r.end());
    return rep;
}

ClassifyReport classify_boundary(const DomainRep& dom, const ProblemData& data, const std::vector<Vec>& points,
                                 const std::vector<double>& ladder, double tau, double tol) {
    EnergyReport st = energy_F_report(dom, data, tol);
    return classify_boundary(dom, data, st.u, st.v, points, ladder, tau);
}

void ClassifyReport::write_csv(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw Error(ErrorCode::Validation, "cannot write " + path);
    os << std::setprecision(17) << "point,radius,W,D,alpha,beta,fit_error,nu_x,nu_y,nu_z,verdict\n";
    for (const auto& r : rows)
        os << r.point << ',' << r.radius << ',' << r.W << ',' << r.D << ',' << r.alpha << ',' << r.beta << ','
           << r.fit_error << ',' << r.nu[0] << ',' << r.nu[1] << ',' << r.nu[2] << ",\n";
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& p = points[i];
        os << i << ',' << p.radius << ",," << p.weiss_D << ',' << p.alpha << ',' << p.beta << ',' << p.fit_error
           << ',' << p.best_nu[0] << ',' << p.best_nu[1] << ',' << p.best_nu[2] << ',' << verdict_name(p.verdict)
           << '\n';
    }
    os << "lambda," << lambda << ",ratio_spread," << ratio_spread << ",,,,,,,\n";
}

} // namespace shapelab
