#include "shapelab/vector_field.hpp"

#include "shapelab/errors.hpp"

#include <cmath>
#include <sstream>

namespace shapelab {

namespace {

// Value with first and second derivative in one variable.
struct Dual2 {
    double v, d, dd;
};
Dual2 operator+(Dual2 a, Dual2 b) { return {a.v + b.v, a.d + b.d, a.dd + b.dd}; }
Dual2 operator-(double s, Dual2 a) { return {s - a.v, -a.d, -a.dd}; }
Dual2 operator*(Dual2 a, Dual2 b) { return {a.v * b.v, a.d * b.v + a.v * b.d, a.dd * b.v + 2 * a.d * b.d + a.v * b.dd}; }
Dual2 operator*(double s, Dual2 a) { return {s * a.v, s * a.d, s * a.dd}; }
Dual2 recip(Dual2 a) {
    double i = 1.0 / a.v;
    return {i, -a.d * i * i, -a.dd * i * i + 2 * a.d * a.d * i * i * i};
}
Dual2 operator/(Dual2 a, Dual2 b) { return a * recip(b); }
Dual2 exp(Dual2 a) {
    double e = std::exp(a.v);
    return {e, e * a.d, e * (a.dd + a.d * a.d)};
}

Dual2 bump(double s) {
    if (s >= 1.0) return {0.0, 0.0, 0.0};
    Dual2 x{s, 1.0, 0.0};
    return exp(recip(x * x + Dual2{-1.0, 0.0, 0.0}));
}

// exp(-1/t) for t > 0, zero otherwise
Dual2 edge(Dual2 t) {
    if (t.v <= 0.0) return {0.0, 0.0, 0.0};
    return exp(-1.0 * recip(t));
}

Dual2 plateau_profile(double s, double a) {
    if (s <= a) return {1.0, 0.0, 0.0};
    if (s >= 1.0) return {0.0, 0.0, 0.0};
    Dual2 t = (1.0 / (1.0 - a)) * (1.0 - Dual2{s, 1.0, 0.0});
    Dual2 p = edge(t), q = edge(1.0 - t);
    return p / (p + q);
}

Mat outer(const Vec& a, const Vec& b) {
    Mat m;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) m[i][j] = a[i] * b[j];
    return m;
}

} // namespace

Vec Jet::grad_div() const {
    Vec g{};
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k) g[i] += H[k][i][k];
    return g;
}

bool Jet::zero() const {
    if (max_abs(D) != 0.0 || norm(xi) != 0.0) return false;
    for (const auto& m : H)
        if (max_abs(m) != 0.0) return false;
    return true;
}

VectorFieldSpec VectorFieldSpec::axis(int dim, const Vec& center, double rho, const Vec& direction, double amplitude) {
    VectorFieldSpec s;
    s.dim = dim;
    s.kind = FieldKind::Axis;
    s.center = center;
    s.rho = rho;
    s.direction = direction;
    s.amplitude = amplitude;
    return s;
}

VectorFieldSpec VectorFieldSpec::radial(int dim, const Vec& center, double rho, const Vec& origin, double amplitude) {
    VectorFieldSpec s = axis(dim, center, rho, {0, 0, 0}, amplitude);
    s.kind = FieldKind::Radial;
    s.origin = origin;
    return s;
}

VectorFieldSpec VectorFieldSpec::rotational(int dim, const Vec& center, double rho, const Vec& origin,
                                            double amplitude) {
    VectorFieldSpec s = radial(dim, center, rho, origin, amplitude);
    s.kind = FieldKind::Rotational;
    return s;
}

VectorFieldSpec VectorFieldSpec::zero(int dim) {
    VectorFieldSpec s;
    s.dim = dim;
    s.amplitude = 0.0;
    return s;
}

Jet VectorFieldSpec::eval(const Vec& x) const {
    Jet j;
    if (amplitude == 0.0) return j;
    Vec dx = x - center;
    double r = norm(dx);
    if (r >= rho) return j;
    double s = r / rho;
    Dual2 p = profile == Profile::Bump ? bump(s) : plateau_profile(s, plateau);
    double P = p.v, P1 = p.d / rho, P2 = p.dd / (rho * rho);
    // grad P and Hessian of P; at the centre P1/r tends to P2
    Vec gP{};
    Mat hP{};
    if (r > 1e-12 * rho) {
        Vec n = (1.0 / r) * dx;
        gP = P1 * n;
        hP = P2 * outer(n, n) + (P1 / r) * (identity(dim) - outer(n, n));
    } else {
        hP = P2 * identity(dim);
    }
    Mat M{};
    Vec a{};
    switch (kind) {
    case FieldKind::Axis:
        a = direction;
        break;
    case FieldKind::Radial:
        M = identity(dim);
        a = x - origin;
        break;
    case FieldKind::Rotational:
        M[0][1] = -1.0;
        M[1][0] = 1.0;
        a = M * (x - origin);
        break;
    }
    a = amplitude * a;
    M = amplitude * M;
    j.xi = P * a;
    for (int k = 0; k < dim; ++k)
        for (int c = 0; c < dim; ++c) j.D[k][c] = M[k][c] * P + a[k] * gP[c];
    for (int k = 0; k < dim; ++k)
        for (int i = 0; i < dim; ++i)
            for (int c = 0; c < dim; ++c) j.H[k][i][c] = M[k][c] * gP[i] + M[k][i] * gP[c] + a[k] * hP[i][c];
    return j;
}

std::string VectorFieldSpec::describe() const {
    std::ostringstream os;
    os.precision(6);
    const char* k = kind == FieldKind::Axis ? "axis" : kind == FieldKind::Radial ? "radial" : "rotational";
    os << k << (profile == Profile::Plateau ? "-plateau" : "") << " c=(" << center[0] << " " << center[1] << " "
       << center[2] << ") rho=" << rho << " amp=" << amplitude;
    if (kind == FieldKind::Axis) os << " dir=(" << direction[0] << " " << direction[1] << " " << direction[2] << ")";
    return os.str();
}

void VectorFieldSpec::validate(const Grid& grid) const {
    if (dim != grid.dim) throw Error(ErrorCode::Validation, "vector field dimension differs from the grid");
    if (!(rho > 0.0)) throw Error(ErrorCode::Validation, "support radius must be positive");
    if (profile == Profile::Plateau && !(plateau >= 0.0 && plateau < 1.0))
        throw Error(ErrorCode::Validation, "plateau fraction must lie in [0, 1)");
    if (amplitude == 0.0) return;
    for (int a = 0; a < dim; ++a)
        if (!(center[a] - rho > grid.origin[a]) || !(center[a] + rho < grid.origin[a] + grid.extent[a]))
            throw Error(ErrorCode::Validation, "vector field support must lie strictly inside the box");
}

Vec FlowMap::map(const Vec& x, double t) const {
    Vec y;
    Mat J;
    map_with_jacobian(x, t, y, J);
    return y;
}

void FlowMap::map_with_jacobian(const Vec& x, double t, Vec& y, Mat& J) const {
    const int dim = spec->dim;
    y = x;
    J = identity(dim);
    if (t == 0.0 || spec->is_zero()) return;
    // points whose whole trajectory stays outside the support are fixed; a trajectory can only
    // enter the support if it starts inside it since xi vanishes outside
    if (norm(x - spec->center) >= spec->rho) return;
    const int n = std::max(1, substeps);
    const double dt = t / n;
    auto rhs = [&](const Vec& p, const Mat& m, Vec& dp, Mat& dm) {
        Jet j = spec->eval(p);
        dp = j.xi;
        dm = j.D * m;
    };
    for (int s = 0; s < n; ++s) {
        Vec k1, k2, k3, k4;
        Mat m1, m2, m3, m4;
        rhs(y, J, k1, m1);
        rhs(y + (0.5 * dt) * k1, J + (0.5 * dt) * m1, k2, m2);
        rhs(y + (0.5 * dt) * k2, J + (0.5 * dt) * m2, k3, m3);
        rhs(y + dt * k3, J + dt * m3, k4, m4);
        y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        J = J + (dt / 6.0) * (m1 + 2.0 * m2 + 2.0 * m3 + m4);
    }
}

Mat delta_A(const Jet& j, int dim, int order) {
    const Mat& M = j.D;
    Mat Mt = transpose(M);
    double dv = j.div();
    Mat I = identity(dim);
    if (order == 1) return dv * I - M - Mt;
    if (order != 2) throw Error(ErrorCode::Validation, "variation order must be 1 or 2");
    // (xi . grad) applied to Dxi
    Mat transport{};
    for (int k = 0; k < 3; ++k)
        for (int c = 0; c < 3; ++c)
            for (int i = 0; i < 3; ++i) transport[k][c] += j.xi[i] * j.H[k][c][i];
    Mat S = M + Mt;
    Mat T = transport + transpose(transport);
    double scal = 0.5 * (dv * dv + dot(j.xi, j.grad_div()));
    return M * Mt + 0.5 * (Mt * Mt) + 0.5 * (M * M) - 0.5 * T - dv * S + scal * I;
}

Mat delta_A(const VectorFieldSpec& spec, const Vec& x, int order) { return delta_A(spec.eval(x), spec.dim, order); }

double delta_f(const AnalyticScalar& w, const Jet& j, const Vec& x, int order, bool printed_q_form) {
    if (order != 1 && order != 2) throw Error(ErrorCode::Validation, "variation order must be 1 or 2");
    if (j.zero()) return 0.0;
    if (!w.has_grad() || (order == 2 && !w.has_hess()))
        throw Error(ErrorCode::MissingDerivatives, "data '" + w.description + "' lacks derivatives for this order");
    double wv = w(x);
    Vec gw = w.grad(x);
    double dv = j.div();
    if (order == 1) return dot(gw, j.xi) + wv * dv;
    Mat hw = w.hess(x);
    double quad = 0.5 * dot(j.xi, hw * j.xi);
    double jac = 0.5 * wv * (dv * dv + dot(j.xi, j.grad_div()));
    double cross = dot(gw, j.xi) * dv;
    if (printed_q_form) return cross + quad + jac;
    return quad + 0.5 * dot(gw, j.D * j.xi) + jac + cross;
}

double delta_f(const AnalyticScalar& w, const VectorFieldSpec& spec, const Vec& x, int order, bool printed_q_form) {
    return delta_f(w, spec.eval(x), x, order, printed_q_form);
}

} // namespace shapelab
