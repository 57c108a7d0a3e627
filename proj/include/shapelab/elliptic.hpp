#pragma once

#include "shapelab/field.hpp"

#include <functional>
#include <vector>

namespace shapelab {

using TensorFn = std::function<Mat(const Vec&)>;

// Unknown numbering and interface legs of the cut-cell Dirichlet discretisation.
// Unknowns are nodes with phi > 0 that are neither on the box faces nor snapped to the
// interface (crossing closer than 0.05 h). Every unknown has 2*dim legs; a leg either ends
// at another unknown or at a Dirichlet point theta*h away carrying value gval.
class CutStencil {
public:
    struct Leg {
        int nb = -1;
        double theta = 1.0;
        double gval = 0.0;
    };

    explicit CutStencil(const DomainRep& dom, const ScalarField* boundary_data = nullptr);

    const DomainRep& domain() const { return *dom_; }
    const Grid& grid() const { return dom_->grid; }
    std::size_t unknowns() const { return nodes_.size(); }
    int slots() const { return 2 * grid().dim; }
    std::size_t node_of(std::size_t u) const { return nodes_[u]; }
    int id_of(std::size_t node) const { return ids_[node]; }
    const Leg& leg(std::size_t u, int slot) const { return legs_[u * slots() + slot]; }
    // Midpoint of the part of the leg inside the domain.
    Vec leg_midpoint(std::size_t u, int slot) const;
    // Value carried by non-unknown nodes (Dirichlet nodes keep their boundary value).
    double fixed_value(std::size_t node) const { return fixed_[node]; }

    ScalarField to_field(const std::vector<double>& x) const;
    std::vector<double> from_field(const ScalarField& f) const;

private:
    const DomainRep* dom_;
    std::vector<std::size_t> nodes_;
    std::vector<int> ids_;
    std::vector<Leg> legs_;
    std::vector<double> fixed_;
};

// Symmetric operator L_A with h^dim * w^T L_A u approximating the integral of A grad u . grad w.
// Diagonal entries of A weight the (possibly shortened) edges, off-diagonal entries enter through
// cell-centred gradients weighted by the volume fraction. A = Id reproduces the symmetric
// ghost-value Laplacian.
class CutOperator {
public:
    explicit CutOperator(const CutStencil& st, const TensorFn& A = nullptr);

    const CutStencil& stencil() const { return *st_; }
    void apply(const double* x, double* y) const;
    const std::vector<double>& diagonal() const { return diag_; }
    // Modified incomplete Cholesky solve z = M^{-1} r built from the edge coefficients.
    void precondition(const double* r, double* z) const;
    // Right-hand side contribution of the Dirichlet legs.
    std::vector<double> dirichlet_rhs() const;
    // L_A applied to a node field (values at non-unknown nodes are treated as zero).
    std::vector<double> apply_field(const ScalarField& u) const;
    // h^dim * w^T L_A u for node fields vanishing off the unknowns.
    double form(const ScalarField& u, const ScalarField& w) const;
    bool has_cross_terms() const { return !cross_.empty(); }

private:
    struct CrossCell {
        std::array<int, 8> ids;
        Mat m;
    };
    const CutStencil* st_;
    std::vector<double> coef_; // per unknown per slot
    std::vector<double> diag_;
    std::vector<double> mic_;  // inverse square roots of the pivots
    std::vector<CrossCell> cross_;
    void build_mic();
    void build_cross(const TensorFn& A);
};

struct SolveStats {
    int iterations = 0;
    double residual = 0.0;
};

// MIC(0)-preconditioned conjugate gradients on L x = b; throws NoConvergence.
std::vector<double> pcg(const CutOperator& L, const std::vector<double>& b, std::vector<double> x0, double tol,
                        int max_iter, SolveStats* stats = nullptr);

struct DirichletProblem {
    const DomainRep* dom = nullptr;
    ScalarField rhs;
    ScalarField boundary_data; // empty means homogeneous data
    double tol = 1e-10;
    int max_iter = 0;          // 0 selects 50 * max cells per axis
    const ScalarField* initial_guess = nullptr;
};

ScalarField solve_dirichlet(const DirichletProblem& p, SolveStats* stats = nullptr);
double residual_check(const ScalarField& u, const DirichletProblem& p);

// Flux of the form A grad u; assembled through CutOperator so it matches the energy quadrature.
struct TensorFlux {
    TensorFn A;
    ScalarField u;
};

// -Lap w = div F + div(sum A_i grad u_i) + source in Omega, w = 0 on the boundary.
struct DivFormProblem {
    const DomainRep* dom = nullptr;
    VectorField flux;                 // node-sampled flux, may be empty
    std::vector<TensorFlux> tensor_fluxes;
    ScalarField source;               // may be empty
    double tol = 1e-10;
    int max_iter = 0;
};

ScalarField solve_divform(const DivFormProblem& p, SolveStats* stats = nullptr);

// Centred flux differencing of a node flux on the unknowns (leg midpoints carry the flux).
std::vector<double> discrete_divergence(const CutStencil& st, const VectorField& flux);

// Grid-line crossings of the zero level set between an inside and an outside node.
struct Crossing {
    Vec x{};
    int axis = 0;
    int side = 1;            // outward direction along the axis
    std::size_t inner = 0;   // node with phi > 0
    std::size_t outer = 0;   // node with phi <= 0
    double theta = 0.0;      // distance from inner node in units of h
    Vec normal{};            // outward unit normal from grad phi
    double weight = 0.0;     // surface quadrature weight
};

std::vector<Crossing> interface_crossings(const DomainRep& dom);

// Up to max_points crossing points at a fixed stride, keeping only those whose ball of radius
// `margin` lies inside the grid box.
std::vector<Vec> sample_boundary_points(const DomainRep& dom, std::size_t max_points, double margin = 0.0);

// One-sided second-order derivative of u along the crossing axis, measured inward from the
// interface point where u takes boundary_value.
double inward_axis_derivative(const ScalarField& u, const DomainRep& dom, const Crossing& c,
                              double boundary_value = 0.0);

// |grad u| at the crossing, from the axis derivative and the normal.
inline double crossing_gradient_norm(const ScalarField& u, const DomainRep& dom, const Crossing& c,
                                     double boundary_value = 0.0) {
    double n = std::fabs(c.normal[c.axis]);
    return std::fabs(inward_axis_derivative(u, dom, c, boundary_value)) / std::max(n, 1e-12);
}

} // namespace shapelab
