#pragma once

#include "shapelab/field.hpp"

#include <optional>
#include <string>
#include <vector>

namespace shapelab {

// Axially symmetric 1-homogeneous cone u = r phi(theta) with Omega_u = {theta < theta0}, theta
// measured from the last coordinate axis. phi(theta0) = 0 and |phi'(theta0)| = 1.
struct ConeSpec {
    int dim = 2;
    double theta0 = 0.0;
    std::vector<double> theta, phi, dphi;

    double value(double th) const;
    bool is_half_space() const;
    void write_csv(const std::string& path) const;
};

// Regular solution of phi'' + (d - 2) cot(theta) phi' + (d - 1) phi = 0, phi(0) = 1, phi'(0) = 0,
// integrated to theta0. Empty when phi does not vanish at theta0 to 1e-10 or vanishes earlier.
std::optional<ConeSpec> solve_cap(int dim, double theta0, int samples = 2001);

// First zero of the regular solution in (0, pi), or empty.
std::optional<double> first_cap_zero(int dim);

// H(r) = (d - 2) cot(theta0) / r, normal pointing into the complement.
double mean_curvature(const ConeSpec& spec, double r);

struct CjkTest {
    double s = 0.0;
    int mode = 0;
    double value = 0.0;
};

struct RayleighReport {
    std::string family;
    std::vector<CjkTest> values;
    double min_value = 0.0;
    bool unstable() const { return min_value < 0.0; }
    void write_csv(const std::string& path) const;
};

// Test functions phi = amplitude * b(|x|) |x|^s psi_k(theta) with b a bump on the annulus
// (r_in, r_out), s scanned over [(2 - d)/2 - 1, (2 - d)/2 + 1], psi_k the first `modes` zonal
// Neumann eigenfunctions of the cap. Each value is int_Omega |grad phi|^2 - int_dOmega H phi^2.
struct CjkFamily {
    double r_in = 1.0, r_out = 2.0;
    int s_samples = 9;
    int modes = 8;
    double amplitude = 1.0;
};
RayleighReport cjk_form(const ConeSpec& spec, const CjkFamily& family = {});

// Zonal Neumann eigenvalues of the cap, in increasing order.
std::vector<double> cap_neumann_eigenvalues(int dim, double theta0, int modes);

// phi = amplitude * bump(|x - center| / rho) with the support away from the origin.
struct ConeTestFn {
    Vec center{};
    double rho = 0.5;
    double amplitude = 1.0;
};

struct Delta2Check {
    double boundary_form = 0.0; // int_Omega |grad phi|^2 - int_dOmega H phi^2 by direct quadrature
    double delta2G = 0.0;       // second variation of int |grad u|^2 + |{u > 0}| along xi = phi grad u
};

// Grids u on [-box, box]^d with `cells` cells and evaluates both sides. d in {2, 3}; the field
// xi = phi grad u is built natively for the half-space cap, where grad u is constant.
Delta2Check cross_check_delta2G(const ConeSpec& spec, const ConeTestFn& phi, int cells = 128, double box = 2.0,
                                double tol = 1e-8);

} // namespace shapelab
