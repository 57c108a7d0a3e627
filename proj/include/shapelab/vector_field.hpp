#pragma once

#include "shapelab/field.hpp"
#include "shapelab/problem.hpp"

#include <string>

namespace shapelab {

// Pointwise values of a vector field: xi, D[k][j] = d_j xi_k and H[k][i][j] = d_i d_j xi_k.
struct Jet {
    Vec xi{};
    Mat D{};
    std::array<Mat, 3> H{};

    double div() const { return trace(D); }
    Vec grad_div() const;
    bool zero() const;
};

enum class FieldKind { Axis, Radial, Rotational };
enum class Profile { Bump, Plateau };

// xi(x) = (M (x - origin) + a) P(|x - center| / rho). The bump profile is exp(1/(s^2-1)); the
// plateau profile equals 1 for s <= plateau and decays smoothly to 0 at s = 1.
struct VectorFieldSpec {
    int dim = 2;
    FieldKind kind = FieldKind::Axis;
    Profile profile = Profile::Bump;
    double plateau = 0.5;
    Vec center{};
    double rho = 0.5;
    Vec direction{1.0, 0.0, 0.0}; // axis kind
    Vec origin{};                 // radial and rotational kinds
    double amplitude = 1.0;

    static VectorFieldSpec axis(int dim, const Vec& center, double rho, const Vec& direction, double amplitude = 1.0);
    static VectorFieldSpec radial(int dim, const Vec& center, double rho, const Vec& origin, double amplitude = 1.0);
    // Rotation in the (x1, x2) plane about origin.
    static VectorFieldSpec rotational(int dim, const Vec& center, double rho, const Vec& origin,
                                      double amplitude = 1.0);
    static VectorFieldSpec zero(int dim);

    Jet eval(const Vec& x) const;
    BallRegion support() const { return {center, rho}; }
    bool is_zero() const { return amplitude == 0.0; }
    std::string describe() const;
    // Throws Validation when the support is not strictly inside the grid box.
    void validate(const Grid& grid) const;
};

// Flow of xi integrated with the classical fourth-order scheme, `substeps` steps per call.
struct FlowMap {
    const VectorFieldSpec* spec = nullptr;
    int substeps = 16;

    Vec map(const Vec& x, double t) const;
    // Phi_t(x) and its Jacobian.
    void map_with_jacobian(const Vec& x, double t, Vec& y, Mat& J) const;
};

// Coefficient variations: order 1 gives -Dxi - (Dxi)^T + div(xi) Id, order 2 the second-order
// coefficient of the pulled-back identity matrix.
Mat delta_A(const Jet& j, int dim, int order);
Mat delta_A(const VectorFieldSpec& spec, const Vec& x, int order);

// Variations of a source density: order 1 is div(w xi), order 2 the t^2 coefficient of w(Phi_t) J_t.
// printed_q_form selects the shortened second-order formula used for Q (no grad w . Dxi xi term).
double delta_f(const AnalyticScalar& w, const Jet& j, const Vec& x, int order, bool printed_q_form = false);
double delta_f(const AnalyticScalar& w, const VectorFieldSpec& spec, const Vec& x, int order,
               bool printed_q_form = false);

} // namespace shapelab
