#pragma once

#include "shapelab/elliptic.hpp"
#include "shapelab/problem.hpp"

#include <string>
#include <vector>

namespace shapelab {

// u_{x0,r}(x) = u(x0 + r x) / r sampled on the cube [-R_target, R_target]^d with `cells` cells per
// axis. Needs B_{r R_target}(x0) inside the grid box and r >= 4h.
ScalarField rescale(const ScalarField& u, const Vec& x0, double r, double R_target = 1.25, int cells = 80);

// r_max 2^{-k} down to min_factor * h.
std::vector<double> dyadic_ladder(double r_max, double h, double min_factor = 8.0);

struct WeissTrace {
    Vec center{};
    double lam = 0.0;
    std::vector<double> radii; // strictly decreasing
    std::vector<double> W;
    std::vector<double> D;     // integral over the unit sphere of |x . grad u_r - u_r|^2
    // max over consecutive radii of (W(r_small) - W(r_big))^+
    double monotonicity_defect() const;
    void write_csv(const std::string& path) const;
};

// W(r) = int_{B_1} |grad u_r|^2 + lam |{u_r > 0} cap B_1| - int_{dB_1} u_r^2 evaluated on the
// original grid through the signed extension of the non-negative field u.
WeissTrace weiss_trace(const ScalarField& u, const Vec& x0, double lam, const std::vector<double>& radii);

enum class Verdict { Regular, Singular, Inconclusive };
const char* verdict_name(Verdict v);

struct BoundaryPointReport {
    Vec center{};
    Vec best_nu{};
    double alpha = 0.0, beta = 0.0;
    double fit_error = 0.0;
    Verdict verdict = Verdict::Inconclusive;
    double radius = 0.0;         // scale of the fit (0 when the fields were given already rescaled)
    double smallest_radius = 0.0;
    double weiss_D = 0.0;
};

// Best half-plane pair alpha (x.nu)^+, beta (x.nu)^+ for fields on a reference grid, least squares
// on B_1 over a direction grid (256 angles in 2D, 1026 Fibonacci points in 3D) refined by a local
// pattern search. fit_error is the larger of the two relative sup deviations on B_1.
BoundaryPointReport halfplane_fit(const ScalarField& u_r, const ScalarField& v_r, double Qx0, double tau = 0.1);

struct LadderRow {
    std::size_t point = 0;
    double radius = 0.0;
    double W = 0.0, D = 0.0;
    double alpha = 0.0, beta = 0.0, fit_error = 0.0;
    Vec nu{};
};

struct ClassifyReport {
    std::vector<BoundaryPointReport> points;
    std::vector<LadderRow> rows;
    double lambda = 0.0;       // median of u / v on the band h < dist < 4h
    double ratio_min = 0.0, ratio_max = 0.0;
    double ratio_spread = 0.0; // ratio_max / ratio_min
    void write_csv(const std::string& path) const;
};

struct BandRatio {
    double lambda = 1.0; // median of u / v on h < dist < 4h, 1 when the band is empty
    double min = 0.0, max = 0.0;
    std::size_t samples = 0;
};
BandRatio boundary_ratio(const DomainRep& dom, const ScalarField& u, const ScalarField& v);

// Points must lie within h of the boundary. The fit is taken at the ladder radius with the
// smallest Weiss integrand D; a point is singular when the fit at the smallest radius misses by 3 tau.
ClassifyReport classify_boundary(const DomainRep& dom, const ProblemData& data, const ScalarField& u,
                                 const ScalarField& v, const std::vector<Vec>& points,
                                 const std::vector<double>& ladder, double tau = 0.1);
ClassifyReport classify_boundary(const DomainRep& dom, const ProblemData& data, const std::vector<Vec>& points,
                                 const std::vector<double>& ladder, double tau = 0.1, double tol = 1e-10);

} // namespace shapelab
