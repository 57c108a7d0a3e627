#include "shapelab/levelset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace shapelab {

namespace {

bool near_interface(const ScalarField& phi, std::size_t p) {
    const Grid& g = phi.grid;
    auto c = g.node_ijk(p);
    bool pos = phi[p] > 0.0;
    for (int a = 0; a < g.dim; ++a) {
        std::size_t s = g.stride(a);
        if (c[a] > 0 && (phi[p - s] > 0.0) != pos) return true;
        if (c[a] < g.n[a] && (phi[p + s] > 0.0) != pos) return true;
    }
    return false;
}

Vec central_gradient(const ScalarField& phi, std::size_t p) {
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

// Godunov update of |grad d| = 1 from the sorted neighbour minima.
double eikonal_update(std::array<double, 3> a, int dim, double h) {
    std::sort(a.begin(), a.begin() + dim);
    double x = a[0] + h;
    if (dim >= 2 && x > a[1]) {
        double d = 2 * h * h - (a[0] - a[1]) * (a[0] - a[1]);
        x = 0.5 * (a[0] + a[1] + std::sqrt(std::max(d, 0.0)));
        if (dim == 3 && x > a[2]) {
            double s = a[0] + a[1] + a[2];
            double q = a[0] * a[0] + a[1] * a[1] + a[2] * a[2];
            double disc = s * s - 3 * (q - h * h);
            x = (s + std::sqrt(std::max(disc, 0.0))) / 3;
        }
    }
    return x;
}

} // namespace

ScalarField reinitialize(const ScalarField& phi, int passes) {
    const Grid& g = phi.grid;
    const std::size_t N = g.node_count();
    const double big = std::numeric_limits<double>::max() / 4;
    std::vector<double> d(N, big);
    std::vector<char> frozen(N, 0);
    for (std::size_t p = 0; p < N; ++p) {
        if (!near_interface(phi, p)) continue;
        double gn = norm(central_gradient(phi, p));
        d[p] = gn > 0.0 ? std::fabs(phi[p]) / gn : 0.0;
        frozen[p] = 1;
    }
    bool any = std::any_of(frozen.begin(), frozen.end(), [](char c) { return c != 0; });
    ScalarField out = phi;
    if (!any) return out; // no interface: keep the input
    int nk = g.dim == 3 ? g.n[2] + 1 : 1;
    int orders = 1 << g.dim;
    for (int pass = 0; pass < passes; ++pass)
        for (int o = 0; o < orders; ++o) {
            int si = (o & 1) ? -1 : 1, sj = (o & 2) ? -1 : 1, sk = (o & 4) ? -1 : 1;
            for (int kk = 0; kk < nk; ++kk) {
                int k = sk > 0 ? kk : nk - 1 - kk;
                for (int jj = 0; jj <= g.n[1]; ++jj) {
                    int j = sj > 0 ? jj : g.n[1] - jj;
                    for (int ii = 0; ii <= g.n[0]; ++ii) {
                        int i = si > 0 ? ii : g.n[0] - ii;
                        std::size_t p = g.node_index(i, j, k);
                        if (frozen[p]) continue;
                        std::array<double, 3> a{big, big, big};
                        int c[3] = {i, j, k};
                        for (int ax = 0; ax < g.dim; ++ax) {
                            std::size_t s = g.stride(ax);
                            double m = big;
                            if (c[ax] > 0) m = std::min(m, d[p - s]);
                            if (c[ax] < g.n[ax]) m = std::min(m, d[p + s]);
                            a[ax] = m;
                        }
                        double x = eikonal_update(a, g.dim, g.h);
                        if (x < d[p]) d[p] = x;
                    }
                }
            }
        }
    for (std::size_t p = 0; p < N; ++p) out[p] = phi[p] > 0.0 ? d[p] : -d[p];
    return out;
}

void extend_speed(const ScalarField& phi, std::vector<double>& V, const std::vector<char>& seed, int steps) {
    const Grid& g = phi.grid;
    const std::size_t N = g.node_count();
    std::vector<double> next = V;
    for (std::size_t p = 0; p < N; ++p)
        if (!seed[p]) V[p] = 0.0;
    std::vector<char> known = seed;
    for (int it = 0; it < steps; ++it) {
        std::vector<char> known_next = known;
        for (std::size_t p = 0; p < N; ++p) {
            if (seed[p]) {
                next[p] = V[p];
                continue;
            }
            auto c = g.node_ijk(p);
            double ap = std::fabs(phi[p]);
            double acc = 0.0, wsum = 0.0;
            for (int a = 0; a < g.dim; ++a)
                for (int s = -1; s <= 1; s += 2) {
                    int ci = c[a] + s;
                    if (ci < 0 || ci > g.n[a]) continue;
                    std::size_t q = s > 0 ? p + g.stride(a) : p - g.stride(a);
                    if (!known[q]) continue;
                    double aq = std::fabs(phi[q]);
                    if (!(aq < ap)) continue; // upwind: information flows away from the interface
                    double w = ap - aq;
                    acc += w * V[q];
                    wsum += w;
                }
            if (wsum > 0.0) {
                next[p] = acc / wsum;
                known_next[p] = 1;
            } else {
                next[p] = V[p];
            }
        }
        V.swap(next);
        known.swap(known_next);
    }
}

ScalarField advance(const ScalarField& phi, const std::vector<double>& V, double dt) {
    const Grid& g = phi.grid;
    ScalarField out = phi;
    for (std::size_t p = 0; p < g.node_count(); ++p) {
        double v = V[p];
        if (v == 0.0) continue;
        auto c = g.node_ijk(p);
        double grow = 0.0, shrink = 0.0;
        for (int a = 0; a < g.dim; ++a) {
            std::size_t s = g.stride(a);
            double dm = c[a] > 0 ? (phi[p] - phi[p - s]) / g.h : 0.0;
            double dp = c[a] < g.n[a] ? (phi[p + s] - phi[p]) / g.h : 0.0;
            // phi_t + F |grad phi| = 0 with F = -V
            grow += std::pow(std::min(dm, 0.0), 2) + std::pow(std::max(dp, 0.0), 2);
            shrink += std::pow(std::max(dm, 0.0), 2) + std::pow(std::min(dp, 0.0), 2);
        }
        double F = -v;
        double gradient = F > 0.0 ? std::sqrt(shrink) : std::sqrt(grow);
        out[p] = phi[p] - dt * F * gradient;
    }
    return out;
}

ScalarField box_distance(const Grid& g) {
    return ScalarField::sample(g, [&](const Vec& x) {
        double d = std::numeric_limits<double>::max();
        for (int a = 0; a < g.dim; ++a) d = std::min({d, x[a] - g.origin[a], g.origin[a] + g.extent[a] - x[a]});
        return d;
    });
}

} // namespace shapelab
