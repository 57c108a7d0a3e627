#pragma once

#include "shapelab/geometry.hpp"

#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace shapelab {

// Node-centred Cartesian grid. n counts cells per axis, so an axis carries n+1 nodes.
struct Grid {
    int dim = 2;
    Vec origin{0.0, 0.0, 0.0};
    Vec extent{0.0, 0.0, 0.0};
    std::array<int, 3> n{0, 0, 0};
    double h = 0.0;

    static Grid make(int dim, const Vec& origin, double h, const std::array<int, 3>& n);
    // Cube [lo, hi]^dim with `cells` cells per axis.
    static Grid cube(int dim, double lo, double hi, int cells);

    int nodes_along(int a) const { return a < dim ? n[a] + 1 : 1; }
    int cells_along(int a) const { return a < dim ? n[a] : 1; }
    std::size_t node_count() const;
    std::size_t cell_count() const;
    std::size_t stride(int a) const;
    std::size_t node_index(int i, int j, int k) const {
        return std::size_t(i) + std::size_t(n[0] + 1) * (std::size_t(j) + std::size_t(nodes_along(1)) * std::size_t(k));
    }
    std::size_t cell_index(int i, int j, int k) const {
        return std::size_t(i) + std::size_t(n[0]) * (std::size_t(j) + std::size_t(cells_along(1)) * std::size_t(k));
    }
    std::array<int, 3> node_ijk(std::size_t idx) const;
    std::array<int, 3> cell_ijk(std::size_t idx) const;
    Vec node(int i, int j, int k) const {
        return {origin[0] + i * h, origin[1] + j * h, dim == 3 ? origin[2] + k * h : 0.0};
    }
    Vec node(std::size_t idx) const {
        auto c = node_ijk(idx);
        return node(c[0], c[1], c[2]);
    }
    Vec cell_center(std::size_t cidx) const;
    Vec upper() const { return origin + extent; }
    bool contains(const Vec& x, double slack = 0.0) const;
    double cell_volume() const { return dim == 2 ? h * h : h * h * h; }
    int max_cells() const;
    void validate() const;
};

bool same_grid(const Grid& a, const Grid& b);

struct ScalarField {
    Grid grid;
    std::vector<double> values;

    ScalarField() = default;
    explicit ScalarField(const Grid& g, double fill = 0.0) : grid(g), values(g.node_count(), fill) {}

    static ScalarField sample(const Grid& g, const std::function<double(const Vec&)>& fn);

    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }
    double at(int i, int j, int k = 0) const { return values[grid.node_index(i, j, k)]; }
    bool empty() const { return values.empty(); }

    // Multilinear interpolation; points outside the box are clamped to it.
    double interpolate(const Vec& x) const;
    // Gradient of the multilinear interpolant in the cell containing x.
    Vec interpolate_gradient(const Vec& x) const;
    bool finite() const;
    double max_abs() const;
};

struct VectorField {
    Grid grid;
    std::vector<Vec> values;

    VectorField() = default;
    explicit VectorField(const Grid& g) : grid(g), values(g.node_count(), Vec{0.0, 0.0, 0.0}) {}
    bool empty() const { return values.empty(); }
    Vec interpolate(const Vec& x) const;
};

// Omega = {phi > 0} together with per-cell volume fractions.
struct DomainRep {
    Grid grid;
    ScalarField phi;
    std::vector<double> volfrac;

    static DomainRep from_phi(ScalarField phi);
    static DomainRep from_function(const Grid& g, const std::function<double(const Vec&)>& fn);

    bool inside(std::size_t node) const { return phi.values[node] > 0.0; }
    bool empty() const;
};

// Fraction of the cell where the multilinear interpolant of the corner values is positive,
// estimated on `sub`^dim midpoints.
double cell_fraction(const double* corners, int dim, int sub);

struct BallRegion {
    Vec center{0.0, 0.0, 0.0};
    double radius = 1.0;
};

enum class BallMode { Volume, Surface };

double volume(const DomainRep& dom);
// |{phi > 0}| for the piecewise linear interpolant on Kuhn simplices; continuous in phi.
double simplex_volume(const DomainRep& dom);

// Integral over Omega: midpoint rule on full cells, the volume-fraction sub-samples on cut cells.
double domain_quadrature(const DomainRep& dom, const std::function<double(const Vec&)>& fn);

// Volume mode integrates over the ball (optionally intersected with a domain); surface mode
// integrates over the sphere with the fixed angular rule below.
double ball_integral(const ScalarField& field, const BallRegion& ball, BallMode mode,
                     const DomainRep* restrict_to = nullptr);

// Measure |B ∩ Omega| (or |B| when dom is null).
double ball_measure(const Grid& grid, const BallRegion& ball, const DomainRep* dom);

// Generic volume quadrature over a ball: fn is evaluated at sample points with weights.
double ball_quadrature(const Grid& grid, const BallRegion& ball, const std::function<double(const Vec&)>& fn,
                       const DomainRep* restrict_to = nullptr);

// Unit-sphere rule: 256 equal arcs in 2D, 32 Gauss-Legendre latitudes x 32 longitudes in 3D.
struct SphereRule {
    std::vector<Vec> points;
    std::vector<double> weights;
};
const SphereRule& sphere_rule(int dim);

void check_ball_inside(const Grid& grid, const BallRegion& ball);

VectorField gradient(const ScalarField& field);

// FLD1 dump: text header (FLD1, dim, n, origin, extent) followed by raw little-endian doubles.
void write_fld1(const std::string& path, const ScalarField& field);
ScalarField read_fld1(const std::string& path);
void write_field_csv(const std::string& path, const ScalarField& field);

} // namespace shapelab
