#pragma once

#include "shapelab/field.hpp"

#include <functional>
#include <memory>
#include <string>

namespace shapelab {

// Scalar datum with optional exact first and second derivatives.
struct AnalyticScalar {
    std::string description;
    std::function<double(const Vec&)> value;
    std::function<Vec(const Vec&)> grad;
    std::function<Mat(const Vec&)> hess;

    static AnalyticScalar constant(double c);
    static AnalyticScalar affine(double c0, const Vec& slope);
    // offset + amp * exp(-|x - center|^2 / (2 width^2))
    static AnalyticScalar gaussian(double offset, double amp, const Vec& center, double width);
    // Grid data without derivatives; variations that need them raise MissingDerivatives.
    static AnalyticScalar sampled(std::shared_ptr<const ScalarField> field, std::string description);

    double operator()(const Vec& x) const { return value(x); }
    bool has_grad() const { return static_cast<bool>(grad); }
    bool has_hess() const { return static_cast<bool>(hess); }
    ScalarField sample(const Grid& g) const { return ScalarField::sample(g, value); }
    bool is_constant() const { return description.rfind("constant", 0) == 0; }
};

struct ProblemData {
    AnalyticScalar f = AnalyticScalar::constant(1.0);
    AnalyticScalar g = AnalyticScalar::constant(1.0);
    AnalyticScalar Q = AnalyticScalar::constant(0.25);
    double C1 = 1.0, C2 = 1.0, cQ = 0.25, CQ = 0.25;

    // Constant data; the structural constants are the tight ones.
    static ProblemData constants(double f, double g, double Q);
    // Check 0 <= C1 g <= f <= C2 g and cQ <= Q <= CQ on every node; throws Validation.
    void validate(const Grid& grid) const;
    // Tightest constants over the grid nodes.
    void fit_constants(const Grid& grid);
};

} // namespace shapelab
