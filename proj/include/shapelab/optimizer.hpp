#pragma once

#include "shapelab/elliptic.hpp"
#include "shapelab/problem.hpp"

#include <string>
#include <vector>

namespace shapelab {

enum class OptMode { General, Bernoulli, Heat };

const char* mode_name(OptMode m);
OptMode parse_mode(const std::string& s);

struct OptimizeConfig {
    OptMode mode = OptMode::General;
    ProblemData data;
    double lambda = 1.0;      // Bernoulli mode: g = f / (2 lambda^2)
    double Lambda = 1.0;      // heat mode constant
    AnalyticScalar heat_boundary = AnalyticScalar::constant(1.0); // u on the box faces in heat mode
    DomainRep init;           // empty selects {dist(x, boundary of D) > 0.2 diam D}
    ScalarField design;       // signed distance of D; empty means the grid box
    double step = 0.25;       // dt max(|V|, |grad u||grad v|) <= step h
    int max_steps = 400;
    int reinit_every = 10;
    double stop_tol = 1e-3;   // on max |V| over the free boundary
    double tol = 1e-10;       // linear solver tolerance
    int max_halvings = 8;
    int coarse_levels = 0;    // descend first on grids coarsened 2^k times, then prolong phi

    void validate() const;
};

struct OptStep {
    int step = 0;
    double energy = 0.0;
    double volume = 0.0;
    double max_speed = 0.0;
    double dt = 0.0;
    int halvings = 0;
    int level = 0; // 0 is the finest grid
};

struct OptTrace {
    std::vector<OptStep> steps;
    bool converged = false;
    void write_csv(const std::string& path) const;
};

struct OptimizeResult {
    DomainRep domain;
    OptTrace trace;
    ScalarField u, v;
};

// Speed |grad u||grad v| - Q at the interface crossings whose axis carries at least half of the
// normal (nearly tangential crossings amplify the axis derivative). `free` marks crossings away
// from the boundary of D.
struct SpeedSample {
    Vec x{};
    double speed = 0.0;
    double pressure = 0.0; // |grad u||grad v|, which sets the explicit step bound
    bool free = true;
    std::size_t inner = 0, outer = 0;
};

// Energy of dom in the given mode; u and v receive the states (warm-started from their contents
// when they live on the same grid).
double mode_energy(const OptimizeConfig& cfg, const DomainRep& dom, ScalarField& u, ScalarField& v);
std::vector<SpeedSample> boundary_speed(const OptimizeConfig& cfg, const DomainRep& dom, const ScalarField& u,
                                        const ScalarField& v);

OptimizeResult optimize(const OptimizeConfig& cfg);

// Radial energy of B_r for constant f, g, Q: -sigma_d f g r^{d+2} / (d^2 (d+2)) + Q sigma_d r^d / d.
double radial_energy(int dim, double f, double g, double Q, double r);
// Minimiser of radial_energy over `samples` uniformly spaced radii in [0, rmax].
double radial_minimizer(int dim, double f, double g, double Q, double rmax, int samples = 10001);
// Interior critical radius d sqrt(Q / (f g)).
double radial_critical_radius(int dim, double f, double g, double Q);

struct DiagnosticsReport {
    bool empty = false;
    std::vector<double> radii;
    std::size_t points = 0;
    double lipschitz = 0.0;         // max |u(x) - u(y)| / |x - y| over grid edges
    double nondegeneracy_min = 0.0; // min over points and radii of sup_{B_r} u / r (nodes and sphere samples)
    double density_min = 0.0;       // min of |B_r cap Omega| / |B_r|
    double density_max = 0.0;
    double exterior_density_min = 0.0; // min of |B_r \ Omega| / |B_r|
    double levelset_slope = 0.0;    // median fitted C in |{0 < u < r t} cap B_r| ~ C t |B_r|
    double levelset_slope_min = 0.0, levelset_slope_max = 0.0;
    std::vector<std::string> flags;
    void write_csv(const std::string& path) const;
};

// r_max <= 0 selects a quarter of the equal-volume radius; max_points caps the boundary sample.
DiagnosticsReport diagnostics(const DomainRep& dom, const ProblemData& data, double r_max = 0.0,
                              std::size_t max_points = 32, double tol = 1e-10);
DiagnosticsReport diagnostics(const DomainRep& dom, const ScalarField& u, double r_max = 0.0,
                              std::size_t max_points = 32);

enum class ProbeDirection { Outward, Inward };

// Margin of the local minimality inequality in the ball (>= -tolerance when it holds).
double minimality_probe(const DomainRep& dom, const ProblemData& data, const ScalarField& u, const BallRegion& ball,
                        ProbeDirection dir, double tol = 1e-10);
double minimality_probe(const DomainRep& dom, const ProblemData& data, const BallRegion& ball, ProbeDirection dir,
                        double tol = 1e-10);

} // namespace shapelab
