#include "shapelab/elliptic.hpp"
#include "shapelab/errors.hpp"

#include <algorithm>
#include <cmath>

namespace shapelab {

namespace {

constexpr double kSnap = 0.05;

bool on_box_face(const Grid& g, const std::array<int, 3>& c) {
    for (int a = 0; a < g.dim; ++a)
        if (c[a] == 0 || c[a] == g.n[a]) return true;
    return false;
}

// Neighbour node along axis a on side s (+1/-1), or false at the box faces.
bool neighbour(const Grid& g, std::size_t p, int a, int s, std::size_t& q) {
    auto c = g.node_ijk(p);
    int i = c[a] + s;
    if (i < 0 || i > g.n[a]) return false;
    q = s > 0 ? p + g.stride(a) : p - g.stride(a);
    return true;
}

Vec phi_gradient(const ScalarField& phi, std::size_t p) {
    const Grid& g = phi.grid;
    auto c = g.node_ijk(p);
    Vec gr{0, 0, 0};
    for (int a = 0; a < g.dim; ++a) {
        std::size_t s = g.stride(a);
        if (c[a] > 0 && c[a] < g.n[a]) gr[a] = (phi[p + s] - phi[p - s]) / (2 * g.h);
        else if (c[a] == 0) gr[a] = (phi[p + s] - phi[p]) / g.h;
        else gr[a] = (phi[p] - phi[p - s]) / g.h;
    }
    return gr;
}

} // namespace

// ---------------------------------------------------------------- stencil

CutStencil::CutStencil(const DomainRep& dom, const ScalarField* bdata) : dom_(&dom) {
    const Grid& g = dom.grid;
    const ScalarField& phi = dom.phi;
    const std::size_t N = g.node_count();
    const bool have_b = bdata && !bdata->empty();
    auto bval = [&](std::size_t i) { return have_b ? bdata->values[i] : 0.0; };
    ids_.assign(N, -1);
    fixed_.assign(N, 0.0);
    for (std::size_t p = 0; p < N; ++p) {
        if (!(phi[p] > 0.0)) continue;
        fixed_[p] = bval(p);
        auto c = g.node_ijk(p);
        if (on_box_face(g, c)) continue;
        bool snapped = false;
        for (int a = 0; a < g.dim && !snapped; ++a)
            for (int s = -1; s <= 1; s += 2) {
                std::size_t q;
                neighbour(g, p, a, s, q);
                if (phi[q] <= 0.0 && phi[p] / (phi[p] - phi[q]) < kSnap) {
                    snapped = true;
                    break;
                }
            }
        if (snapped) continue;
        ids_[p] = int(nodes_.size());
        nodes_.push_back(p);
    }
    const int S = slots();
    legs_.resize(nodes_.size() * S);
    for (std::size_t u = 0; u < nodes_.size(); ++u) {
        std::size_t p = nodes_[u];
        fixed_[p] = 0.0;
        for (int a = 0; a < g.dim; ++a)
            for (int side = 0; side < 2; ++side) {
                int s = side ? 1 : -1;
                std::size_t q = s > 0 ? p + g.stride(a) : p - g.stride(a);
                Leg& L = legs_[u * S + 2 * a + side];
                if (ids_[q] >= 0) {
                    L = {ids_[q], 1.0, 0.0};
                } else if (phi[q] > 0.0) {
                    L = {-1, 1.0, bval(q)};
                } else {
                    double th = phi[p] / (phi[p] - phi[q]);
                    L = {-1, th, (1.0 - th) * bval(p) + th * bval(q)};
                }
            }
    }
}

Vec CutStencil::leg_midpoint(std::size_t u, int slot) const {
    const Grid& g = grid();
    int a = slot / 2;
    double s = (slot % 2) ? 1.0 : -1.0;
    Vec x = g.node(nodes_[u]);
    x[a] += s * 0.5 * legs_[u * slots() + slot].theta * g.h;
    return x;
}

ScalarField CutStencil::to_field(const std::vector<double>& x) const {
    ScalarField f(grid());
    f.values = fixed_;
    for (std::size_t u = 0; u < nodes_.size(); ++u) f.values[nodes_[u]] = x[u];
    return f;
}

std::vector<double> CutStencil::from_field(const ScalarField& f) const {
    std::vector<double> x(nodes_.size());
    for (std::size_t u = 0; u < nodes_.size(); ++u) x[u] = f.values[nodes_[u]];
    return x;
}

// ---------------------------------------------------------------- operator

CutOperator::CutOperator(const CutStencil& st, const TensorFn& A) : st_(&st) {
    const Grid& g = st.grid();
    const int S = st.slots();
    const std::size_t U = st.unknowns();
    const double ih2 = 1.0 / (g.h * g.h);
    coef_.assign(U * S, 0.0);
    diag_.assign(U, 0.0);
    for (std::size_t u = 0; u < U; ++u)
        for (int slot = 0; slot < S; ++slot) {
            const auto& L = st.leg(u, slot);
            if (L.nb >= 0 && slot % 2 == 0) continue; // shared edge, filled from the lower node
            int a = slot / 2;
            double w = A ? A(st.leg_midpoint(u, slot))[a][a] : 1.0;
            double c = w / L.theta * ih2;
            coef_[u * S + slot] = c;
            if (L.nb >= 0) coef_[std::size_t(L.nb) * S + slot - 1] = c;
        }
    for (std::size_t u = 0; u < U; ++u)
        for (int slot = 0; slot < S; ++slot) diag_[u] += coef_[u * S + slot];

    if (A) build_cross(A);
    build_mic();
}

void CutOperator::build_mic() {
    const CutStencil& st = *st_;
    const int S = st.slots();
    const std::size_t U = st.unknowns();
    const double tau = 0.97, sigma = 0.25;
    mic_.assign(U, 0.0);
    // unknowns are numbered in node order, so even slots point to earlier unknowns
    for (std::size_t u = 0; u < U; ++u) {
        double e = diag_[u];
        for (int slot = 0; slot < S; slot += 2) {
            int q = st.leg(u, slot).nb;
            if (q < 0) continue;
            double c = coef_[u * S + slot], pq = mic_[q];
            double rest = 0.0;
            for (int b = 1; b < S; b += 2)
                if (b != slot + 1 && st.leg(std::size_t(q), b).nb >= 0) rest += coef_[std::size_t(q) * S + b];
            e -= (c * pq) * (c * pq) + tau * c * rest * pq * pq;
        }
        if (e < sigma * diag_[u]) e = diag_[u];
        mic_[u] = 1.0 / std::sqrt(e);
    }
}

void CutOperator::precondition(const double* r, double* z) const {
    const CutStencil& st = *st_;
    const int S = st.slots();
    const std::size_t U = st.unknowns();
    for (std::size_t u = 0; u < U; ++u) {
        double t = r[u];
        for (int slot = 0; slot < S; slot += 2) {
            int q = st.leg(u, slot).nb;
            if (q >= 0) t += coef_[u * S + slot] * mic_[q] * z[q];
        }
        z[u] = t * mic_[u];
    }
    for (std::size_t k = U; k-- > 0;) {
        double t = z[k];
        for (int slot = 1; slot < S; slot += 2) {
            int v = st.leg(k, slot).nb;
            if (v >= 0) t += coef_[k * S + slot] * mic_[k] * z[v];
        }
        z[k] = t * mic_[k];
    }
}

void CutOperator::build_cross(const TensorFn& A) {
    const CutStencil& st = *st_;
    const Grid& g = st.grid();
    const DomainRep& dom = st.domain();
    const int corners = g.dim == 2 ? 4 : 8;
    const double e = 1.0 / ((g.dim == 2 ? 2.0 : 4.0) * g.h);
    for (std::size_t ci = 0; ci < g.cell_count(); ++ci) {
        double vf = dom.volfrac[ci];
        if (vf <= 0.0) continue;
        auto c = g.cell_ijk(ci);
        CrossCell cc;
        cc.ids.fill(-1);
        bool any = false;
        for (int m = 0; m < corners; ++m) {
            int id = st.id_of(g.node_index(c[0] + (m & 1), c[1] + ((m >> 1) & 1), c[2] + ((m >> 2) & 1)));
            cc.ids[m] = id;
            any = any || id >= 0;
        }
        if (!any) continue;
        Mat Ac = A(g.cell_center(ci));
        cc.m = Mat{};
        double mx = 0.0;
        for (int k = 0; k < g.dim; ++k)
            for (int l = 0; l < g.dim; ++l)
                if (k != l) {
                    cc.m[k][l] = vf * Ac[k][l];
                    mx = std::max(mx, std::fabs(cc.m[k][l]));
                }
        if (mx == 0.0) continue;
        for (int m = 0; m < corners; ++m) {
            if (cc.ids[m] < 0) continue;
            double d = 0.0;
            for (int k = 0; k < g.dim; ++k)
                for (int l = 0; l < g.dim; ++l) {
                    if (k == l) continue;
                    double sk = ((m >> k) & 1) ? 1.0 : -1.0, sl = ((m >> l) & 1) ? 1.0 : -1.0;
                    d += cc.m[k][l] * sk * sl * e * e;
                }
            diag_[cc.ids[m]] += d;
        }
        cross_.push_back(cc);
    }
}

void CutOperator::apply(const double* x, double* y) const {
    const CutStencil& st = *st_;
    const int S = st.slots();
    const std::size_t U = st.unknowns();
    for (std::size_t u = 0; u < U; ++u) {
        double xu = x[u], acc = 0.0;
        const double* c = &coef_[u * S];
        for (int slot = 0; slot < S; ++slot) {
            int nb = st.leg(u, slot).nb;
            acc += c[slot] * (xu - (nb >= 0 ? x[nb] : 0.0));
        }
        y[u] = acc;
    }
    if (cross_.empty()) return;
    const int dim = st.grid().dim;
    const int corners = dim == 2 ? 4 : 8;
    const double e = 1.0 / ((dim == 2 ? 2.0 : 4.0) * st.grid().h);
    for (const auto& cc : cross_) {
        double v[8];
        for (int m = 0; m < corners; ++m) v[m] = cc.ids[m] >= 0 ? x[cc.ids[m]] : 0.0;
        double G[3] = {0, 0, 0};
        for (int k = 0; k < dim; ++k)
            for (int m = 0; m < corners; ++m)
                if (!((m >> k) & 1)) G[k] += v[m | (1 << k)] - v[m];
        for (int k = 0; k < dim; ++k) G[k] *= e;
        for (int k = 0; k < dim; ++k) {
            double s = 0.0;
            for (int l = 0; l < dim; ++l) s += cc.m[k][l] * G[l];
            s *= e;
            for (int m = 0; m < corners; ++m) {
                if (cc.ids[m] < 0) continue;
                y[cc.ids[m]] += ((m >> k) & 1) ? s : -s;
            }
        }
    }
}

std::vector<double> CutOperator::dirichlet_rhs() const {
    const CutStencil& st = *st_;
    const int S = st.slots();
    std::vector<double> b(st.unknowns(), 0.0);
    for (std::size_t u = 0; u < b.size(); ++u)
        for (int slot = 0; slot < S; ++slot) {
            const auto& L = st.leg(u, slot);
            if (L.nb < 0) b[u] += coef_[u * S + slot] * L.gval;
        }
    return b;
}

std::vector<double> CutOperator::apply_field(const ScalarField& u) const {
    std::vector<double> x = st_->from_field(u), y(x.size());
    apply(x.data(), y.data());
    return y;
}

double CutOperator::form(const ScalarField& u, const ScalarField& w) const {
    std::vector<double> y = apply_field(u);
    double s = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) s += y[k] * w.values[st_->node_of(k)];
    return s * st_->grid().cell_volume();
}

// ---------------------------------------------------------------- PCG

std::vector<double> pcg(const CutOperator& L, const std::vector<double>& b, std::vector<double> x, double tol,
                        int max_iter, SolveStats* stats) {
    const std::size_t n = b.size();
    if (x.size() != n) x.assign(n, 0.0);
    auto dotv = [n](const std::vector<double>& a, const std::vector<double>& c) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += a[i] * c[i];
        return s;
    };
    double bnorm = std::sqrt(dotv(b, b));
    if (bnorm == 0.0) {
        x.assign(n, 0.0);
        if (stats) *stats = {0, 0.0};
        return x;
    }
    std::vector<double> r(n), z(n), p(n), Ap(n);
    L.apply(x.data(), Ap.data());
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - Ap[i];
    L.precondition(r.data(), z.data());
    p = z;
    double rz = dotv(r, z);
    int it = 0;
    double rn = std::sqrt(dotv(r, r));
    while (rn > tol * bnorm) {
        if (it >= max_iter)
            throw Error(ErrorCode::NoConvergence, "PCG stalled at relative residual " + std::to_string(rn / bnorm) +
                                                      " after " + std::to_string(it) + " iterations");
        L.apply(p.data(), Ap.data());
        double alpha = rz / dotv(p, Ap);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * Ap[i];
        }
        L.precondition(r.data(), z.data());
        double rz1 = dotv(r, z);
        double beta = rz1 / rz;
        rz = rz1;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
        rn = std::sqrt(dotv(r, r));
        ++it;
    }
    if (stats) *stats = {it, rn / bnorm};
    return x;
}

// ---------------------------------------------------------------- problems

namespace {

int default_iters(const Grid& g, int max_iter) { return max_iter > 0 ? max_iter : 50 * g.max_cells(); }

void require_domain(const DomainRep* dom) {
    if (!dom) throw Error(ErrorCode::Validation, "problem has no domain");
    if (dom->empty()) throw Error(ErrorCode::EmptyDomain, "domain has zero volume");
}

std::vector<double> assemble_rhs(const CutStencil& st, const CutOperator& L, const ScalarField& rhs) {
    std::vector<double> b = L.dirichlet_rhs();
    if (!rhs.empty())
        for (std::size_t u = 0; u < b.size(); ++u) b[u] += rhs.values[st.node_of(u)];
    return b;
}

} // namespace

ScalarField solve_dirichlet(const DirichletProblem& p, SolveStats* stats) {
    require_domain(p.dom);
    CutStencil st(*p.dom, p.boundary_data.empty() ? nullptr : &p.boundary_data);
    if (st.unknowns() == 0) throw Error(ErrorCode::EmptyDomain, "domain has no interior unknowns");
    CutOperator L(st);
    std::vector<double> b = assemble_rhs(st, L, p.rhs);
    std::vector<double> x0 = p.initial_guess ? st.from_field(*p.initial_guess) : std::vector<double>{};
    std::vector<double> x = pcg(L, b, std::move(x0), p.tol, default_iters(p.dom->grid, p.max_iter), stats);
    return st.to_field(x);
}

double residual_check(const ScalarField& u, const DirichletProblem& p) {
    require_domain(p.dom);
    CutStencil st(*p.dom, p.boundary_data.empty() ? nullptr : &p.boundary_data);
    CutOperator L(st);
    std::vector<double> b = assemble_rhs(st, L, p.rhs);
    std::vector<double> Lu = L.apply_field(u);
    double rn = 0.0, bn = 0.0;
    for (std::size_t k = 0; k < b.size(); ++k) {
        rn += (b[k] - Lu[k]) * (b[k] - Lu[k]);
        bn += b[k] * b[k];
    }
    return bn > 0.0 ? std::sqrt(rn / bn) : std::sqrt(rn);
}

std::vector<double> discrete_divergence(const CutStencil& st, const VectorField& F) {
    const Grid& g = st.grid();
    const int S = st.slots();
    std::vector<double> d(st.unknowns(), 0.0);
    for (std::size_t u = 0; u < d.size(); ++u) {
        std::size_t p = st.node_of(u);
        for (int slot = 0; slot < S; ++slot) {
            int a = slot / 2;
            int s = (slot % 2) ? 1 : -1;
            std::size_t q = s > 0 ? p + g.stride(a) : p - g.stride(a);
            double th = st.leg(u, slot).theta;
            double fm = (1.0 - 0.5 * th) * F.values[p][a] + 0.5 * th * F.values[q][a];
            d[u] += s * fm / g.h;
        }
    }
    return d;
}

ScalarField solve_divform(const DivFormProblem& p, SolveStats* stats) {
    require_domain(p.dom);
    CutStencil st(*p.dom);
    if (st.unknowns() == 0) throw Error(ErrorCode::EmptyDomain, "domain has no interior unknowns");
    CutOperator L(st);
    std::vector<double> b(st.unknowns(), 0.0);
    if (!p.source.empty())
        for (std::size_t u = 0; u < b.size(); ++u) b[u] += p.source.values[st.node_of(u)];
    if (!p.flux.empty()) {
        auto dv = discrete_divergence(st, p.flux);
        for (std::size_t u = 0; u < b.size(); ++u) b[u] += dv[u];
    }
    for (const auto& tf : p.tensor_fluxes) {
        CutOperator LA(st, tf.A);
        auto y = LA.apply_field(tf.u);
        for (std::size_t u = 0; u < b.size(); ++u) b[u] -= y[u];
    }
    std::vector<double> x = pcg(L, b, {}, p.tol, default_iters(p.dom->grid, p.max_iter), stats);
    return st.to_field(x);
}

// ---------------------------------------------------------------- interface crossings

std::vector<Crossing> interface_crossings(const DomainRep& dom) {
    const Grid& g = dom.grid;
    const ScalarField& phi = dom.phi;
    std::vector<Crossing> out;
    const double hd1 = g.dim == 2 ? g.h : g.h * g.h;
    for (std::size_t p = 0; p < g.node_count(); ++p) {
        if (!(phi[p] > 0.0)) continue;
        for (int a = 0; a < g.dim; ++a)
            for (int s = -1; s <= 1; s += 2) {
                std::size_t q;
                if (!neighbour(g, p, a, s, q) || phi[q] > 0.0) continue;
                Crossing c;
                c.axis = a;
                c.side = s;
                c.inner = p;
                c.outer = q;
                c.theta = phi[p] / (phi[p] - phi[q]);
                c.x = g.node(p);
                c.x[a] += s * c.theta * g.h;
                Vec gp = phi_gradient(phi, p), gq = phi_gradient(phi, q);
                Vec gr = (1.0 - c.theta) * gp + c.theta * gq;
                double gn = norm(gr);
                if (gn > 0.0) c.normal = (-1.0 / gn) * gr;
                else {
                    c.normal = {0, 0, 0};
                    c.normal[a] = s;
                }
                double s4 = 0.0;
                for (int b = 0; b < g.dim; ++b) s4 += std::pow(c.normal[b], 4);
                double na = std::fabs(c.normal[a]);
                c.weight = na > 0.0 ? hd1 * std::pow(na, 3) / s4 : 0.0;
                out.push_back(c);
            }
    }
    return out;
}

std::vector<Vec> sample_boundary_points(const DomainRep& dom, std::size_t max_points, double margin) {
    const Grid& g = dom.grid;
    std::vector<Vec> pts;
    for (const auto& c : interface_crossings(dom)) {
        bool inside = true;
        for (int a = 0; a < g.dim; ++a)
            if (c.x[a] - margin < g.origin[a] || c.x[a] + margin > g.origin[a] + g.extent[a]) inside = false;
        if (inside) pts.push_back(c.x);
    }
    if (max_points == 0 || pts.empty()) return {};
    std::size_t stride = std::max<std::size_t>(1, (pts.size() + max_points - 1) / max_points);
    std::vector<Vec> out;
    for (std::size_t k = 0; k < pts.size() && out.size() < max_points; k += stride) out.push_back(pts[k]);
    return out;
}

double inward_axis_derivative(const ScalarField& u, const DomainRep& dom, const Crossing& c, double bv) {
    const Grid& g = dom.grid;
    const ScalarField& phi = dom.phi;
    const int s = -c.side; // inward step
    std::size_t p = c.inner, p1 = 0, p2 = 0;
    bool has1 = neighbour(g, p, c.axis, s, p1) && phi[p1] > 0.0;
    bool has2 = has1 && neighbour(g, p1, c.axis, s, p2) && phi[p2] > 0.0;
    double a, b, u1, u2;
    bool quad;
    // snapped inner nodes carry the boundary value, so the fit starts one node further in
    bool snapped = c.theta < kSnap;
    for (int ax = 0; ax < g.dim && !snapped; ++ax)
        for (int sd = -1; sd <= 1 && !snapped; sd += 2) {
            std::size_t q;
            if (neighbour(g, p, ax, sd, q) && phi[q] <= 0.0 && phi[p] / (phi[p] - phi[q]) < kSnap) snapped = true;
        }
    if (!snapped) {
        a = c.theta * g.h;
        u1 = u[p];
        quad = has1;
        b = a + g.h;
        u2 = has1 ? u[p1] : 0.0;
    } else {
        if (!has1) return (u[p] - bv) / std::max(c.theta * g.h, 1e-300);
        a = (c.theta + 1.0) * g.h;
        u1 = u[p1];
        quad = has2;
        b = a + g.h;
        u2 = has2 ? u[p2] : 0.0;
    }
    if (!quad) return (u1 - bv) / a;
    return ((u1 - bv) * b * b - (u2 - bv) * a * a) / (a * b * (b - a));
}

} // namespace shapelab
