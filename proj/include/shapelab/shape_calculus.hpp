#pragma once

#include "shapelab/elliptic.hpp"
#include "shapelab/problem.hpp"
#include "shapelab/vector_field.hpp"

#include <string>
#include <utility>
#include <vector>

namespace shapelab {

// 1/2 int |grad u|^2 - int f u over the region (multilinear u, sub-cell quadrature on cut cells).
double energy_Ef(const ScalarField& u, const AnalyticScalar& f, const DomainRep& region);
double energy_Ef(const ScalarField& u, const AnalyticScalar& f, const BallRegion& region);
inline double energy_Ef(const ScalarField& u, const ProblemData& data, const DomainRep& region) {
    return energy_Ef(u, data.f, region);
}
inline double energy_Ef(const ScalarField& u, const ProblemData& data, const BallRegion& region) {
    return energy_Ef(u, data.f, region);
}

struct EnergyReport {
    double F = 0.0;           // -h^d sum g u + int_Omega Q
    double F_symmetric = 0.0; // a(u, v) - h^d sum (g u + f v) + int_Omega Q
    double volume = 0.0;
    ScalarField u, v;
};

// Solves both states; throws NoConvergence if the two forms disagree by more than 10 tol (scaled).
EnergyReport energy_F_report(const DomainRep& dom, const ProblemData& data, double tol = 1e-10);
inline double energy_F(const DomainRep& dom, const ProblemData& data, double tol = 1e-10) {
    return energy_F_report(dom, data, tol).F;
}

// Signed companion of a non-negative field: equal to u where u > 0, extended linearly across the
// zero set along grid lines so that {psi > 0} locates the free boundary to second order.
ScalarField signed_extension(const ScalarField& u);

// int (|grad u|^2 + lam 1{u > 0}) over the region.
double energy_G(const ScalarField& u, double lam, const BallRegion& region);
double energy_G(const ScalarField& u, double lam, const DomainRep& region);

// delta u (order 1) or delta^2 u (order 2) on dom; du is delta u and is computed when absent.
ScalarField linearized_state(const ScalarField& u, const DomainRep& dom, const AnalyticScalar& w,
                             const VectorFieldSpec& spec, int order, const ScalarField* du = nullptr,
                             double tol = 1e-10);

struct FirstVariation {
    double volume_form = 0.0;
    double surface_form = 0.0; // sum over crossings of (nu . xi)(Q - |grad u||grad v|)
};

FirstVariation first_variation(const DomainRep& dom, const ProblemData& data, const VectorFieldSpec& spec,
                               double tol = 1e-10);
// Same with precomputed states.
FirstVariation first_variation(const DomainRep& dom, const ProblemData& data, const VectorFieldSpec& spec,
                               const ScalarField& u, const ScalarField& v);

struct VariationOptions {
    double tol = 1e-10;
    std::vector<double> ladder{0.04, 0.02, 0.01};
    int flow_substeps = 16;
    bool printed_q_form = false; // use the shortened second-order Q formula
    bool regrid_check = true;    // also solve on the advected level set
};

struct TaylorRow {
    double t = 0.0;
    double F_t = 0.0;       // pulled-back functional on the fixed grid
    double remainder = 0.0; // |F_t - F0 - t dF - t^2 d2F|
    double F_regrid = 0.0;  // functional on the advected level set (NaN when skipped)
};

struct VariationReport {
    std::string field;
    double F0 = 0.0, deltaF = 0.0, delta2F = 0.0, deltaF_surface = 0.0;
    ScalarField u, v, deltaU, deltaV;
    std::vector<TaylorRow> rows;

    std::vector<std::pair<double, double>> taylor_remainders() const;
    // log2(R(t_i) / R(t_{i+1})) for consecutive ladder entries.
    std::vector<double> exponents() const;
    double min_exponent() const;
    void write_csv(const std::string& path) const;
};

// Functional of the domain mapped by Phi_t, evaluated through the change of variables on the
// fixed grid (coefficients J DPhi^{-1} DPhi^{-T}, densities w(Phi_t) J).
double pulled_back_energy(const DomainRep& dom, const ProblemData& data, const VectorFieldSpec& spec, double t,
                          const VariationOptions& opt = {}, ScalarField* u_out = nullptr);

// Level set advected by the flow: phi_t = phi o Phi_{-t}.
DomainRep advect_domain(const DomainRep& dom, const VectorFieldSpec& spec, double t, int substeps = 16);

VariationReport second_variation(const DomainRep& dom, const ProblemData& data, const VectorFieldSpec& spec,
                                 const VariationOptions& opt = {});
VariationReport second_variation(const DomainRep& dom, const ProblemData& data, const VectorFieldSpec& spec,
                                 const EnergyReport& states, const VariationOptions& opt);
// Independent fields evaluated concurrently on shared states.
std::vector<VariationReport> second_variations(const DomainRep& dom, const ProblemData& data,
                                               const std::vector<VectorFieldSpec>& specs,
                                               const VariationOptions& opt = {});

struct OnePhaseVariation {
    double dG = 0.0;
    double d2G = 0.0;
    ScalarField du;
};

// Residual max |h^2 Lap_h u| / max|u| over nodes whose axis neighbours up to distance 2 are positive.
double harmonic_residual(const ScalarField& u);

// First and second variation of int |grad u|^2 + lam |{u > 0}|; NotHarmonic when the interior
// residual exceeds 100 tol.
OnePhaseVariation one_phase_variations(const ScalarField& u, double lam, const VectorFieldSpec& spec,
                                       double tol = 1e-8);

} // namespace shapelab
