#include "shapelab/field.hpp"
#include "shapelab/errors.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>

namespace shapelab {

const char* error_name(ErrorCode c) {
    switch (c) {
    case ErrorCode::Validation: return "ValidationError";
    case ErrorCode::BallOutsideGrid: return "BallOutsideGrid";
    case ErrorCode::ScaleBelowGrid: return "ScaleBelowGrid";
    case ErrorCode::MissingDerivatives: return "MissingDerivatives";
    case ErrorCode::EmptyDomain: return "EmptyDomain";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::StepCollapse: return "StepCollapse";
    case ErrorCode::NoDescent: return "NoDescent";
    case ErrorCode::NotHarmonic: return "NotHarmonic";
    }
    return "Error";
}

bool is_numerical(ErrorCode c) {
    switch (c) {
    case ErrorCode::Validation:
    case ErrorCode::BallOutsideGrid:
    case ErrorCode::ScaleBelowGrid:
    case ErrorCode::MissingDerivatives:
        return false;
    default:
        return true;
    }
}

Mat inverse(const Mat& a, int dim) {
    Mat r{};
    double d = det(a, dim);
    if (dim == 2) {
        r[0][0] = a[1][1] / d;
        r[0][1] = -a[0][1] / d;
        r[1][0] = -a[1][0] / d;
        r[1][1] = a[0][0] / d;
        return r;
    }
    r[0][0] = (a[1][1] * a[2][2] - a[1][2] * a[2][1]) / d;
    r[0][1] = (a[0][2] * a[2][1] - a[0][1] * a[2][2]) / d;
    r[0][2] = (a[0][1] * a[1][2] - a[0][2] * a[1][1]) / d;
    r[1][0] = (a[1][2] * a[2][0] - a[1][0] * a[2][2]) / d;
    r[1][1] = (a[0][0] * a[2][2] - a[0][2] * a[2][0]) / d;
    r[1][2] = (a[0][2] * a[1][0] - a[0][0] * a[1][2]) / d;
    r[2][0] = (a[1][0] * a[2][1] - a[1][1] * a[2][0]) / d;
    r[2][1] = (a[0][1] * a[2][0] - a[0][0] * a[2][1]) / d;
    r[2][2] = (a[0][0] * a[1][1] - a[0][1] * a[1][0]) / d;
    return r;
}

// ---------------------------------------------------------------- Grid

Grid Grid::make(int dim, const Vec& origin, double h, const std::array<int, 3>& n) {
    Grid g;
    g.dim = dim;
    g.origin = origin;
    g.h = h;
    g.n = n;
    if (dim == 2) {
        g.n[2] = 0;
        g.origin[2] = 0.0;
    }
    for (int a = 0; a < 3; ++a) g.extent[a] = a < dim ? g.n[a] * h : 0.0;
    g.validate();
    return g;
}

Grid Grid::cube(int dim, double lo, double hi, int cells) {
    double h = (hi - lo) / cells;
    return make(dim, {lo, lo, dim == 3 ? lo : 0.0}, h, {cells, cells, dim == 3 ? cells : 0});
}

void Grid::validate() const {
    if (dim != 2 && dim != 3) throw Error(ErrorCode::Validation, "grid dim must be 2 or 3");
    if (!(h > 0.0) || !std::isfinite(h)) throw Error(ErrorCode::Validation, "grid spacing must be positive");
    for (int a = 0; a < dim; ++a) {
        if (n[a] < 16) throw Error(ErrorCode::Validation, "grid needs at least 16 cells per axis");
        if (std::fabs(extent[a] - n[a] * h) > 1e-12 * std::max(1.0, extent[a]))
            throw Error(ErrorCode::Validation, "grid extent must equal n*h");
    }
}

std::size_t Grid::node_count() const {
    return std::size_t(nodes_along(0)) * nodes_along(1) * nodes_along(2);
}
std::size_t Grid::cell_count() const {
    return std::size_t(cells_along(0)) * cells_along(1) * cells_along(2);
}
std::size_t Grid::stride(int a) const {
    if (a == 0) return 1;
    if (a == 1) return std::size_t(n[0] + 1);
    return std::size_t(n[0] + 1) * std::size_t(n[1] + 1);
}
std::array<int, 3> Grid::node_ijk(std::size_t idx) const {
    int nx = n[0] + 1, ny = nodes_along(1);
    return {int(idx % nx), int((idx / nx) % ny), int(idx / (std::size_t(nx) * ny))};
}
std::array<int, 3> Grid::cell_ijk(std::size_t idx) const {
    int nx = n[0], ny = cells_along(1);
    return {int(idx % nx), int((idx / nx) % ny), int(idx / (std::size_t(nx) * ny))};
}
Vec Grid::cell_center(std::size_t cidx) const {
    auto c = cell_ijk(cidx);
    Vec x = node(c[0], c[1], c[2]);
    for (int a = 0; a < dim; ++a) x[a] += 0.5 * h;
    return x;
}
bool Grid::contains(const Vec& x, double slack) const {
    for (int a = 0; a < dim; ++a)
        if (x[a] < origin[a] - slack || x[a] > origin[a] + extent[a] + slack) return false;
    return true;
}
int Grid::max_cells() const {
    int m = 0;
    for (int a = 0; a < dim; ++a) m = std::max(m, n[a]);
    return m;
}

bool same_grid(const Grid& a, const Grid& b) {
    if (a.dim != b.dim || a.n != b.n) return false;
    for (int i = 0; i < 3; ++i)
        if (std::fabs(a.origin[i] - b.origin[i]) > 1e-12 || std::fabs(a.extent[i] - b.extent[i]) > 1e-12) return false;
    return true;
}

// ---------------------------------------------------------------- fields

ScalarField ScalarField::sample(const Grid& g, const std::function<double(const Vec&)>& fn) {
    ScalarField f(g);
    for (std::size_t i = 0; i < f.values.size(); ++i) f.values[i] = fn(g.node(i));
    return f;
}

namespace {

// Locate the cell containing x (clamped) and the local coordinates in [0,1].
void locate(const Grid& g, const Vec& x, std::array<int, 3>& c, Vec& s) {
    c = {0, 0, 0};
    s = {0.0, 0.0, 0.0};
    for (int a = 0; a < g.dim; ++a) {
        double t = (x[a] - g.origin[a]) / g.h;
        t = std::clamp(t, 0.0, double(g.n[a]));
        int i = std::min(int(std::floor(t)), g.n[a] - 1);
        c[a] = i;
        s[a] = t - i;
    }
}

template <class T, class Get>
T multilinear(const Grid& g, const Vec& x, Get get, T zero) {
    std::array<int, 3> c;
    Vec s;
    locate(g, x, c, s);
    T acc = zero;
    int corners = g.dim == 2 ? 4 : 8;
    for (int m = 0; m < corners; ++m) {
        int di = m & 1, dj = (m >> 1) & 1, dk = (m >> 2) & 1;
        double w = (di ? s[0] : 1 - s[0]) * (dj ? s[1] : 1 - s[1]);
        if (g.dim == 3) w *= dk ? s[2] : 1 - s[2];
        if (w == 0.0) continue;
        acc = acc + w * get(g.node_index(c[0] + di, c[1] + dj, c[2] + dk));
    }
    return acc;
}

} // namespace

double ScalarField::interpolate(const Vec& x) const {
    return multilinear<double>(grid, x, [&](std::size_t i) { return values[i]; }, 0.0);
}

bool ScalarField::finite() const {
    return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

double ScalarField::max_abs() const {
    double m = 0;
    for (double v : values) m = std::max(m, std::fabs(v));
    return m;
}

Vec ScalarField::interpolate_gradient(const Vec& x) const {
    std::array<int, 3> c;
    Vec s;
    locate(grid, x, c, s);
    Vec gr{0.0, 0.0, 0.0};
    int corners = grid.dim == 2 ? 4 : 8;
    for (int m = 0; m < corners; ++m) {
        int d[3] = {m & 1, (m >> 1) & 1, (m >> 2) & 1};
        double v = values[grid.node_index(c[0] + d[0], c[1] + d[1], c[2] + d[2])];
        for (int a = 0; a < grid.dim; ++a) {
            double w = (d[a] ? 1.0 : -1.0) / grid.h;
            for (int b = 0; b < grid.dim; ++b)
                if (b != a) w *= d[b] ? s[b] : 1 - s[b];
            gr[a] += w * v;
        }
    }
    return gr;
}

Vec VectorField::interpolate(const Vec& x) const {
    return multilinear<Vec>(grid, x, [&](std::size_t i) { return values[i]; }, Vec{0.0, 0.0, 0.0});
}

// ---------------------------------------------------------------- domains

double cell_fraction(const double* c, int dim, int sub) {
    int inside = 0, total = 0;
    double inv = 1.0 / sub;
    int kmax = dim == 3 ? sub : 1;
    for (int k = 0; k < kmax; ++k) {
        double z = (k + 0.5) * inv;
        for (int j = 0; j < sub; ++j) {
            double y = (j + 0.5) * inv;
            for (int i = 0; i < sub; ++i) {
                double x = (i + 0.5) * inv;
                double v = (1 - x) * (1 - y) * c[0] + x * (1 - y) * c[1] + (1 - x) * y * c[2] + x * y * c[3];
                if (dim == 3)
                    v = (1 - z) * v +
                        z * ((1 - x) * (1 - y) * c[4] + x * (1 - y) * c[5] + (1 - x) * y * c[6] + x * y * c[7]);
                inside += v > 0.0;
                ++total;
            }
        }
    }
    return double(inside) / total;
}

DomainRep DomainRep::from_phi(ScalarField phi) {
    DomainRep d;
    d.grid = phi.grid;
    d.phi = std::move(phi);
    const Grid& g = d.grid;
    d.volfrac.assign(g.cell_count(), 0.0);
    int corners = g.dim == 2 ? 4 : 8;
    double c[8];
    for (std::size_t ci = 0; ci < d.volfrac.size(); ++ci) {
        auto ijk = g.cell_ijk(ci);
        int pos = 0;
        for (int m = 0; m < corners; ++m) {
            c[m] = d.phi.values[g.node_index(ijk[0] + (m & 1), ijk[1] + ((m >> 1) & 1), ijk[2] + ((m >> 2) & 1))];
            pos += c[m] > 0.0;
        }
        if (pos == corners) d.volfrac[ci] = 1.0;
        else if (pos == 0) d.volfrac[ci] = 0.0;
        else d.volfrac[ci] = cell_fraction(c, g.dim, 4);
    }
    return d;
}

DomainRep DomainRep::from_function(const Grid& g, const std::function<double(const Vec&)>& fn) {
    return from_phi(ScalarField::sample(g, fn));
}

bool DomainRep::empty() const {
    return std::none_of(volfrac.begin(), volfrac.end(), [](double v) { return v > 0.0; });
}

double volume(const DomainRep& dom) {
    double s = 0.0;
    for (double v : dom.volfrac) s += v;
    return s * dom.grid.cell_volume();
}

namespace {

// Positive fraction of the linear interpolant on a simplex with vertex values v[0..dim].
double simplex_fraction(const double* v, int dim) {
    int pos = 0;
    for (int i = 0; i <= dim; ++i) pos += v[i] > 0.0;
    if (pos == 0) return 0.0;
    if (pos == dim + 1) return 1.0;
    auto isolated = [&](int a) {
        double t = 1.0;
        for (int j = 0; j <= dim; ++j)
            if (j != a) t *= v[a] / (v[a] - v[j]);
        return t;
    };
    if (pos == 1 || pos == dim) {
        bool lone_positive = pos == 1;
        for (int a = 0; a <= dim; ++a)
            if ((v[a] > 0.0) == lone_positive) return lone_positive ? isolated(a) : 1.0 - isolated(a);
    }
    // tetrahedron split two against two: cut the positive part into the corner at a and a prism
    int a = -1, b = -1, c = -1, d = -1;
    for (int i = 0; i <= 3; ++i) {
        if (v[i] > 0.0) (a < 0 ? a : b) = i;
        else (c < 0 ? c : d) = i;
    }
    double ac = v[a] / (v[a] - v[c]), ad = v[a] / (v[a] - v[d]);
    double bc = v[b] / (v[b] - v[c]), bd = v[b] / (v[b] - v[d]);
    return ac * ad + ac * (1.0 - ad) * bd + (1.0 - ac) * bc * bd;
}

} // namespace

double simplex_volume(const DomainRep& dom) {
    const Grid& g = dom.grid;
    const ScalarField& phi = dom.phi;
    const int corners = g.dim == 2 ? 4 : 8;
    const int perms3[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    double total = 0.0;
    for (std::size_t ci = 0; ci < g.cell_count(); ++ci) {
        auto c = g.cell_ijk(ci);
        double cv[8];
        bool anypos = false, anyneg = false;
        for (int m = 0; m < corners; ++m) {
            cv[m] = phi[g.node_index(c[0] + (m & 1), c[1] + ((m >> 1) & 1), c[2] + ((m >> 2) & 1))];
            (cv[m] > 0.0 ? anypos : anyneg) = true;
        }
        if (!anypos) continue;
        if (!anyneg) {
            total += 1.0;
            continue;
        }
        // Kuhn simplices along the main diagonal
        double frac = 0.0;
        int nperm = g.dim == 2 ? 2 : 6;
        for (int k = 0; k < nperm; ++k) {
            double v[4];
            int m = 0;
            v[0] = cv[0];
            for (int s = 0; s < g.dim; ++s) {
                int axis = g.dim == 2 ? (k == 0 ? s : 1 - s) : perms3[k][s];
                m |= 1 << axis;
                v[s + 1] = cv[m];
            }
            frac += simplex_fraction(v, g.dim);
        }
        total += frac / nperm;
    }
    return total * g.cell_volume();
}

double domain_quadrature(const DomainRep& dom, const std::function<double(const Vec&)>& fn) {
    const Grid& g = dom.grid;
    const int sub = 4;
    const int corners = g.dim == 2 ? 4 : 8;
    const double cellv = g.cell_volume();
    const double subv = cellv / std::pow(double(sub), g.dim);
    double total = 0.0;
    double ph[8];
    for (std::size_t ci = 0; ci < dom.volfrac.size(); ++ci) {
        double vf = dom.volfrac[ci];
        if (vf <= 0.0) continue;
        if (vf >= 1.0) {
            total += cellv * fn(g.cell_center(ci));
            continue;
        }
        auto ijk = g.cell_ijk(ci);
        Vec x0 = g.node(ijk[0], ijk[1], ijk[2]);
        for (int m = 0; m < corners; ++m)
            ph[m] = dom.phi.values[g.node_index(ijk[0] + (m & 1), ijk[1] + ((m >> 1) & 1), ijk[2] + ((m >> 2) & 1))];
        double inv = 1.0 / sub;
        int kmax = g.dim == 3 ? sub : 1;
        for (int c = 0; c < kmax; ++c)
            for (int b = 0; b < sub; ++b)
                for (int a = 0; a < sub; ++a) {
                    double sx = (a + 0.5) * inv, sy = (b + 0.5) * inv, sz = g.dim == 3 ? (c + 0.5) * inv : 0.0;
                    double v = (1 - sx) * (1 - sy) * ph[0] + sx * (1 - sy) * ph[1] + (1 - sx) * sy * ph[2] + sx * sy * ph[3];
                    if (g.dim == 3)
                        v = (1 - sz) * v + sz * ((1 - sx) * (1 - sy) * ph[4] + sx * (1 - sy) * ph[5] +
                                                 (1 - sx) * sy * ph[6] + sx * sy * ph[7]);
                    if (!(v > 0.0)) continue;
                    Vec p = {x0[0] + sx * g.h, x0[1] + sy * g.h, g.dim == 3 ? x0[2] + sz * g.h : 0.0};
                    total += subv * fn(p);
                }
    }
    return total;
}

// ---------------------------------------------------------------- ball quadrature

void check_ball_inside(const Grid& grid, const BallRegion& ball) {
    if (!(ball.radius > 0.0)) throw Error(ErrorCode::Validation, "ball radius must be positive");
    double slack = 1e-12 * std::max(1.0, ball.radius);
    for (int a = 0; a < grid.dim; ++a) {
        if (ball.center[a] - ball.radius < grid.origin[a] - slack ||
            ball.center[a] + ball.radius > grid.origin[a] + grid.extent[a] + slack)
            throw Error(ErrorCode::BallOutsideGrid, "ball leaves the grid box");
    }
}

double ball_quadrature(const Grid& g, const BallRegion& ball, const std::function<double(const Vec&)>& fn,
                       const DomainRep* dom) {
    check_ball_inside(g, ball);
    // cut cells are subsampled more finely when the ball spans few cells
    const int base = g.dim == 2 ? 8 : 4;
    const int refine = std::clamp(int(std::ceil((g.dim == 2 ? 16.0 : 32.0) * g.h / ball.radius)), 1, 8);
    const int sub = base * refine;
    const double r2 = ball.radius * ball.radius;
    std::array<int, 3> lo{0, 0, 0}, hi{1, 1, 1};
    for (int a = 0; a < g.dim; ++a) {
        lo[a] = std::max(0, int(std::floor((ball.center[a] - ball.radius - g.origin[a]) / g.h)));
        hi[a] = std::min(g.n[a], int(std::ceil((ball.center[a] + ball.radius - g.origin[a]) / g.h)));
    }
    const int corners = g.dim == 2 ? 4 : 8;
    const double cellv = g.cell_volume();
    const double subv = cellv / std::pow(double(sub), g.dim);
    double total = 0.0;
    double ph[8];
    for (int k = lo[2]; k < hi[2]; ++k)
        for (int j = lo[1]; j < hi[1]; ++j)
            for (int i = lo[0]; i < hi[0]; ++i) {
                Vec x0 = g.node(i, j, k);
                int in_ball = 0, in_dom = 0;
                for (int m = 0; m < corners; ++m) {
                    Vec p = x0;
                    p[0] += (m & 1) * g.h;
                    p[1] += ((m >> 1) & 1) * g.h;
                    if (g.dim == 3) p[2] += ((m >> 2) & 1) * g.h;
                    Vec dv = p - ball.center;
                    in_ball += dot(dv, dv) <= r2;
                    if (dom) {
                        ph[m] = dom->phi.values[g.node_index(i + (m & 1), j + ((m >> 1) & 1), k + ((m >> 2) & 1))];
                        in_dom += ph[m] > 0.0;
                    }
                }
                // A cell whose corners all miss the ball can still be clipped by it when the
                // ball is small; only skip when the cell is clearly away from the sphere.
                Vec cc = x0;
                for (int a = 0; a < g.dim; ++a) cc[a] += 0.5 * g.h;
                double dc = norm(cc - ball.center);
                double half_diag = 0.5 * g.h * std::sqrt(double(g.dim));
                if (in_ball == 0 && dc > ball.radius + half_diag) continue;
                if (dom && in_dom == 0) continue;
                bool full = in_ball == corners && (!dom || in_dom == corners);
                if (full) {
                    total += cellv * fn(cc);
                    continue;
                }
                double inv = 1.0 / sub;
                int kmax = g.dim == 3 ? sub : 1;
                for (int c = 0; c < kmax; ++c)
                    for (int b = 0; b < sub; ++b)
                        for (int a = 0; a < sub; ++a) {
                            double sx = (a + 0.5) * inv, sy = (b + 0.5) * inv, sz = g.dim == 3 ? (c + 0.5) * inv : 0.0;
                            Vec p = {x0[0] + sx * g.h, x0[1] + sy * g.h, g.dim == 3 ? x0[2] + sz * g.h : 0.0};
                            Vec dv = p - ball.center;
                            if (dot(dv, dv) > r2) continue;
                            if (dom) {
                                double v = (1 - sx) * (1 - sy) * ph[0] + sx * (1 - sy) * ph[1] + (1 - sx) * sy * ph[2] +
                                           sx * sy * ph[3];
                                if (g.dim == 3)
                                    v = (1 - sz) * v + sz * ((1 - sx) * (1 - sy) * ph[4] + sx * (1 - sy) * ph[5] +
                                                             (1 - sx) * sy * ph[6] + sx * sy * ph[7]);
                                if (!(v > 0.0)) continue;
                            }
                            total += subv * fn(p);
                        }
            }
    return total;
}

double ball_measure(const Grid& grid, const BallRegion& ball, const DomainRep* dom) {
    return ball_quadrature(grid, ball, [](const Vec&) { return 1.0; }, dom);
}

const SphereRule& sphere_rule(int dim) {
    static const SphereRule rule2 = [] {
        SphereRule r;
        const int m = 256;
        for (int k = 0; k < m; ++k) {
            double th = 2.0 * std::numbers::pi * (k + 0.5) / m;
            r.points.push_back({std::cos(th), std::sin(th), 0.0});
            r.weights.push_back(2.0 * std::numbers::pi / m);
        }
        return r;
    }();
    static const SphereRule rule3 = [] {
        SphereRule r;
        using GL = boost::math::quadrature::gauss<double, 32>;
        std::vector<std::pair<double, double>> nodes; // (cos theta, weight) on [-1,1]
        const auto& x = GL::abscissa();
        const auto& w = GL::weights();
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (x[i] == 0.0) {
                nodes.push_back({0.0, w[i]});
            } else {
                nodes.push_back({x[i], w[i]});
                nodes.push_back({-x[i], w[i]});
            }
        }
        const int m = 32;
        for (auto [z, wz] : nodes) {
            double s = std::sqrt(std::max(0.0, 1.0 - z * z));
            for (int k = 0; k < m; ++k) {
                double ph = 2.0 * std::numbers::pi * (k + 0.5) / m;
                r.points.push_back({s * std::cos(ph), s * std::sin(ph), z});
                r.weights.push_back(wz * 2.0 * std::numbers::pi / m);
            }
        }
        return r;
    }();
    return dim == 2 ? rule2 : rule3;
}

double ball_integral(const ScalarField& field, const BallRegion& ball, BallMode mode, const DomainRep* restrict_to) {
    const Grid& g = field.grid;
    if (mode == BallMode::Volume)
        return ball_quadrature(g, ball, [&](const Vec& x) { return field.interpolate(x); }, restrict_to);
    check_ball_inside(g, ball);
    const SphereRule& rule = sphere_rule(g.dim);
    double scale = g.dim == 2 ? ball.radius : ball.radius * ball.radius;
    double s = 0.0;
    for (std::size_t q = 0; q < rule.points.size(); ++q)
        s += rule.weights[q] * field.interpolate(ball.center + ball.radius * rule.points[q]);
    return s * scale;
}

// ---------------------------------------------------------------- gradient

VectorField gradient(const ScalarField& f) {
    const Grid& g = f.grid;
    VectorField out(g);
    const double inv2h = 0.5 / g.h;
    for (std::size_t idx = 0; idx < out.values.size(); ++idx) {
        auto c = g.node_ijk(idx);
        for (int a = 0; a < g.dim; ++a) {
            std::size_t s = g.stride(a);
            int i = c[a], n = g.n[a];
            double d;
            if (i > 0 && i < n) d = (f.values[idx + s] - f.values[idx - s]) * inv2h;
            else if (i == 0) d = (-3.0 * f.values[idx] + 4.0 * f.values[idx + s] - f.values[idx + 2 * s]) * inv2h;
            else d = (3.0 * f.values[idx] - 4.0 * f.values[idx - s] + f.values[idx - 2 * s]) * inv2h;
            out.values[idx][a] = d;
        }
    }
    return out;
}

// ---------------------------------------------------------------- I/O

namespace {

std::uint64_t to_le(std::uint64_t v) {
    if constexpr (std::endian::native == std::endian::little) return v;
    std::uint64_t r = 0;
    for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xffu) << (8 * (7 - i));
    return r;
}

} // namespace

void write_fld1(const std::string& path, const ScalarField& field) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error(ErrorCode::Validation, "cannot open " + path + " for writing");
    const Grid& g = field.grid;
    os << std::setprecision(17);
    os << "FLD1\n";
    os << "dim " << g.dim << "\n";
    os << "n";
    for (int a = 0; a < g.dim; ++a) os << ' ' << g.n[a];
    os << "\norigin";
    for (int a = 0; a < g.dim; ++a) os << ' ' << g.origin[a];
    os << "\nextent";
    for (int a = 0; a < g.dim; ++a) os << ' ' << g.extent[a];
    os << "\n";
    for (double v : field.values) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, 8);
        bits = to_le(bits);
        os.write(reinterpret_cast<const char*>(&bits), 8);
    }
    if (!os) throw Error(ErrorCode::Validation, "write failed for " + path);
}

ScalarField read_fld1(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error(ErrorCode::Validation, "cannot open " + path);
    std::string line;
    auto next = [&](const char* key) {
        if (!std::getline(is, line)) throw Error(ErrorCode::Validation, "truncated FLD1 header in " + path);
        std::istringstream ss(line);
        std::string k;
        ss >> k;
        if (k != key) throw Error(ErrorCode::Validation, std::string("expected '") + key + "' in FLD1 header");
        return std::string(line.begin() + std::min(line.size(), k.size()), line.end());
    };
    if (!std::getline(is, line) || line != "FLD1") throw Error(ErrorCode::Validation, path + " is not an FLD1 file");
    int dim = std::stoi(next("dim"));
    if (dim != 2 && dim != 3) throw Error(ErrorCode::Validation, "FLD1 dim must be 2 or 3");
    std::array<int, 3> n{0, 0, 0};
    Vec origin{0, 0, 0}, extent{0, 0, 0};
    {
        std::istringstream ss(next("n"));
        for (int a = 0; a < dim; ++a) ss >> n[a];
    }
    {
        std::istringstream ss(next("origin"));
        for (int a = 0; a < dim; ++a) ss >> origin[a];
    }
    {
        std::istringstream ss(next("extent"));
        for (int a = 0; a < dim; ++a) ss >> extent[a];
    }
    Grid g = Grid::make(dim, origin, extent[0] / n[0], n);
    ScalarField f(g);
    for (double& v : f.values) {
        std::uint64_t bits;
        if (!is.read(reinterpret_cast<char*>(&bits), 8)) throw Error(ErrorCode::Validation, "truncated FLD1 payload");
        bits = to_le(bits);
        std::memcpy(&v, &bits, 8);
    }
    return f;
}

void write_field_csv(const std::string& path, const ScalarField& field) {
    std::ofstream os(path);
    if (!os) throw Error(ErrorCode::Validation, "cannot open " + path + " for writing");
    const Grid& g = field.grid;
    os << std::setprecision(17);
    os << (g.dim == 2 ? "x,y,value\n" : "x,y,z,value\n");
    for (std::size_t i = 0; i < field.values.size(); ++i) {
        Vec x = g.node(i);
        os << x[0] << ',' << x[1];
        if (g.dim == 3) os << ',' << x[2];
        os << ',' << field.values[i] << '\n';
    }
}

} // namespace shapelab
