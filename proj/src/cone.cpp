#include "shapelab/cone.hpp"
#include "shapelab/errors.hpp"
#include "shapelab/shape_calculus.hpp"
#include "shapelab/vector_field.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>

namespace shapelab {

namespace {

using std::numbers::pi;
namespace odeint = boost::numeric::odeint;
using GK = boost::math::quadrature::gauss_kronrod<double, 61>;

constexpr double kStart = 1e-5;   // series start away from the coordinate singularity
constexpr double kShootTol = 1e-10;

double sphere_measure(int n) { // |S^n|
    return 2.0 * std::pow(pi, 0.5 * (n + 1)) / std::tgamma(0.5 * (n + 1));
}

// Regular solution of psi'' + (d - 2) cot psi' + mu psi = 0 with the weighted integrals of psi^2
// and psi'^2 against sin^{d-2}, state (psi, psi', int psi^2 w, int psi'^2 w).
using State = std::array<double, 4>;

State integrate_cap(int dim, double mu, double theta_end, std::vector<double>* times = nullptr,
                    std::vector<State>* out = nullptr) {
    auto rhs = [dim, mu](const State& y, State& dy, double t) {
        double w = std::pow(std::sin(t), dim - 2);
        dy[0] = y[1];
        dy[1] = -(dim - 2) * std::cos(t) / std::sin(t) * y[1] - mu * y[0];
        dy[2] = y[0] * y[0] * w;
        dy[3] = y[1] * y[1] * w;
    };
    double e = kStart;
    double a = mu / (2.0 * (dim - 1));
    // psi = 1 - a t^2 near the pole; the weighted integrals start at O(t^{d-1})
    State y{1.0 - a * e * e, -2.0 * a * e, std::pow(e, dim - 1) / (dim - 1), 0.0};
    auto stepper = odeint::make_controlled(1e-14, 1e-14, odeint::runge_kutta_dopri5<State>());
    if (times && out) {
        out->clear();
        std::vector<double> ts{e};
        for (double t : *times)
            if (t > e) ts.push_back(t);
        odeint::integrate_times(stepper, rhs, y, ts.begin(), ts.end(), 1e-4,
                                [&](const State& s, double) { out->push_back(s); });
        out->erase(out->begin());
        return y;
    }
    odeint::integrate_adaptive(stepper, rhs, y, e, theta_end, 1e-4);
    return y;
}

double bump(double s) { return std::fabs(s) < 1.0 ? std::exp(1.0 / (s * s - 1.0)) : 0.0; }
double bump_d(double s) { return std::fabs(s) < 1.0 ? bump(s) * (-2.0 * s / ((s * s - 1.0) * (s * s - 1.0))) : 0.0; }

} // namespace

double ConeSpec::value(double th) const {
    if (th >= theta0) return 0.0;
    auto it = std::upper_bound(theta.begin(), theta.end(), th);
    std::size_t k = std::clamp<std::size_t>(it - theta.begin(), 1, theta.size() - 1);
    double t = (th - theta[k - 1]) / (theta[k] - theta[k - 1]);
    return (1 - t) * phi[k - 1] + t * phi[k];
}

bool ConeSpec::is_half_space() const { return std::fabs(theta0 - pi / 2) < 1e-12; }

void ConeSpec::write_csv(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw Error(ErrorCode::Validation, "cannot write " + path);
    os << std::setprecision(17) << "theta,phi,dphi\n";
    for (std::size_t k = 0; k < theta.size(); ++k) os << theta[k] << ',' << phi[k] << ',' << dphi[k] << '\n';
}

std::optional<ConeSpec> solve_cap(int dim, double theta0, int samples) {
    if (dim < 2) throw Error(ErrorCode::Validation, "dim must be at least 2");
    if (!(theta0 > 0.0 && theta0 < pi)) throw Error(ErrorCode::Validation, "theta0 must lie in (0, pi)");
    if (samples < 3) throw Error(ErrorCode::Validation, "need at least 3 profile samples");
    ConeSpec c;
    c.dim = dim;
    c.theta0 = theta0;
    for (int k = 0; k < samples; ++k) c.theta.push_back(theta0 * k / (samples - 1));
    std::vector<State> ys;
    integrate_cap(dim, double(dim - 1), theta0, &c.theta, &ys);
    c.phi.push_back(1.0);
    c.dphi.push_back(0.0);
    for (const State& y : ys) {
        c.phi.push_back(y[0]);
        c.dphi.push_back(y[1]);
    }
    if (std::fabs(c.phi.back()) > kShootTol) return std::nullopt;
    for (std::size_t k = 0; k + 1 < c.phi.size(); ++k)
        if (!(c.phi[k] > 0.0)) return std::nullopt;
    double s = std::fabs(c.dphi.back());
    if (!(s > 0.0)) return std::nullopt;
    for (std::size_t k = 0; k < c.phi.size(); ++k) {
        c.phi[k] /= s;
        c.dphi[k] /= s;
    }
    return c;
}

std::optional<double> first_cap_zero(int dim) {
    if (dim < 2) throw Error(ErrorCode::Validation, "dim must be at least 2");
    const int n = 400;
    double prev_t = kStart, prev = 1.0;
    for (int k = 1; k < n; ++k) {
        double t = pi * k / n;
        double v = integrate_cap(dim, dim - 1.0, t)[0];
        if (v == 0.0) return t;
        if (prev > 0.0 && v < 0.0) {
            boost::math::tools::eps_tolerance<double> tol(50);
            std::uintmax_t it = 100;
            auto r = boost::math::tools::toms748_solve(
                [dim](double th) { return integrate_cap(dim, dim - 1.0, th)[0]; }, prev_t, t, prev, v, tol, it);
            return 0.5 * (r.first + r.second);
        }
        prev_t = t;
        prev = v;
    }
    return std::nullopt;
}

double mean_curvature(const ConeSpec& spec, double r) {
    if (!(r > 0.0)) throw Error(ErrorCode::Validation, "r must be positive");
    return (spec.dim - 2) * std::cos(spec.theta0) / std::sin(spec.theta0) / r;
}

std::vector<double> cap_neumann_eigenvalues(int dim, double theta0, int modes) {
    std::vector<double> mu;
    if (modes <= 0) return mu;
    mu.push_back(0.0);
    auto slope = [&](double m) { return integrate_cap(dim, m, theta0)[1]; };
    double step = 0.05 * std::pow(pi / theta0, 2);
    double a = step, fa = slope(a);
    while (int(mu.size()) < modes) {
        double b = a + step, fb = slope(b);
        if (fa * fb < 0.0) {
            boost::math::tools::eps_tolerance<double> tol(50);
            std::uintmax_t it = 100;
            auto r = boost::math::tools::toms748_solve(slope, a, b, fa, fb, tol, it);
            mu.push_back(0.5 * (r.first + r.second));
        }
        a = b;
        fa = fb;
        if (a > 1e6) throw Error(ErrorCode::NoConvergence, "cap eigenvalue scan did not find enough modes");
    }
    return mu;
}

void RayleighReport::write_csv(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw Error(ErrorCode::Validation, "cannot write " + path);
    os << "# " << family << '\n' << std::setprecision(17) << "s,mode,value\n";
    for (const auto& v : values) os << v.s << ',' << v.mode << ',' << v.value << '\n';
    os << "min,," << min_value << '\n';
}

RayleighReport cjk_form(const ConeSpec& spec, const CjkFamily& fam) {
    const int d = spec.dim;
    if (!(fam.r_in > 0.0 && fam.r_out > fam.r_in)) throw Error(ErrorCode::Validation, "annulus must satisfy 0 < r_in < r_out");
    if (fam.s_samples < 1 || fam.modes < 1) throw Error(ErrorCode::Validation, "empty test family");
    const double m = 0.5 * (fam.r_in + fam.r_out), w = 0.5 * (fam.r_out - fam.r_in);
    const double S = sphere_measure(d - 2);
    const double H1 = (d - 2) * std::cos(spec.theta0) / std::sin(spec.theta0); // H r
    const double sin_w = std::pow(std::sin(spec.theta0), d - 2);
    auto mu = cap_neumann_eigenvalues(d, spec.theta0, fam.modes);

    RayleighReport rep;
    rep.family = "axisymmetric cap cone d=" + std::to_string(d) + " theta0=" + std::to_string(spec.theta0) +
                 "; zonal test functions only, a subfamily of all test functions";
    const double s0 = (2.0 - d) / 2.0;
    for (int i = 0; i < fam.s_samples; ++i) {
        double s = fam.s_samples == 1 ? s0 : s0 - 1.0 + 2.0 * i / (fam.s_samples - 1);
        auto R = [&](double r) { return fam.amplitude * bump((r - m) / w) * std::pow(r, s); };
        auto dR = [&](double r) {
            double b = bump((r - m) / w), db = bump_d((r - m) / w) / w;
            return fam.amplitude * (db * std::pow(r, s) + b * s * std::pow(r, s - 1));
        };
        double A = GK::integrate([&](double r) { return dR(r) * dR(r) * std::pow(r, d - 1); }, fam.r_in, fam.r_out, 15, 1e-13);
        double B = GK::integrate([&](double r) { return R(r) * R(r) * std::pow(r, d - 3); }, fam.r_in, fam.r_out, 15, 1e-13);
        for (int k = 0; k < fam.modes; ++k) {
            State y = integrate_cap(d, mu[k], spec.theta0);
            double C = S * y[2], E = S * y[3];
            double boundary = H1 * S * sin_w * y[0] * y[0] * B;
            rep.values.push_back({s, k, A * C + B * E - boundary});
        }
    }
    rep.min_value = rep.values.front().value;
    for (const auto& v : rep.values) rep.min_value = std::min(rep.min_value, v.value);
    return rep;
}

Delta2Check cross_check_delta2G(const ConeSpec& spec, const ConeTestFn& fn, int cells, double box, double tol) {
    const int d = spec.dim;
    if (d != 2 && d != 3) throw Error(ErrorCode::Validation, "gridded cross-check supports d = 2 and 3");
    if (!spec.is_half_space())
        throw Error(ErrorCode::Validation, "xi = phi grad u is built natively only for the half-space cap");
    if (!(fn.rho > 0.0) || norm(fn.center) <= fn.rho)
        throw Error(ErrorCode::Validation, "test function support must stay away from the origin");
    Delta2Check out;
    if (fn.amplitude == 0.0) return out;
    const int ax = d - 1;
    Grid g = Grid::cube(d, -box, box, cells);
    ScalarField u = ScalarField::sample(g, [ax](const Vec& x) { return std::max(x[ax], 0.0); });
    Vec e{};
    e[ax] = 1.0;
    auto xi = VectorFieldSpec::axis(d, fn.center, fn.rho, e, fn.amplitude);
    out.delta2G = one_phase_variations(u, 1.0, xi, tol).d2G;

    // int over {x_d > 0} of |grad phi|^2 in polar coordinates about the centre: along a ray with
    // direction component t = omega . e_d the admissible s are those with c_d + s t > 0
    const double cd = fn.center[ax], rho = fn.rho, a = fn.amplitude;
    auto ray = [&](double t) {
        double lo = 0.0, hi = rho;
        if (t > 0.0) lo = std::max(lo, -cd / t);
        else if (t < 0.0) hi = std::min(hi, -cd / t);
        else if (cd <= 0.0) return 0.0;
        if (hi <= lo) return 0.0;
        return GK::integrate(
            [&](double s) {
                double g1 = a * bump_d(s / rho) / rho;
                return g1 * g1 * std::pow(s, d - 1);
            },
            lo, hi, 15, 1e-13);
    };
    double grad2;
    if (d == 2) grad2 = GK::integrate([&](double b) { return ray(std::sin(b)); }, 0.0, 2 * pi, 15, 1e-12);
    else grad2 = 2 * pi * GK::integrate(ray, -1.0, 1.0, 15, 1e-12);
    // H vanishes on the half-space, so the boundary term drops out
    out.boundary_form = grad2;
    return out;
}

} // namespace shapelab
