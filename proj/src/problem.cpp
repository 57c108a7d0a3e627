#include "shapelab/problem.hpp"

#include "shapelab/errors.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace shapelab {

AnalyticScalar AnalyticScalar::constant(double c) {
    std::ostringstream os;
    os.precision(17);
    os << "constant(" << c << ")";
    return {os.str(), [c](const Vec&) { return c; }, [](const Vec&) { return Vec{0.0, 0.0, 0.0}; },
            [](const Vec&) { return Mat{}; }};
}

AnalyticScalar AnalyticScalar::affine(double c0, const Vec& slope) {
    std::ostringstream os;
    os.precision(17);
    os << "affine(" << c0 << ";" << slope[0] << "," << slope[1] << "," << slope[2] << ")";
    return {os.str(), [c0, slope](const Vec& x) { return c0 + dot(slope, x); }, [slope](const Vec&) { return slope; },
            [](const Vec&) { return Mat{}; }};
}

AnalyticScalar AnalyticScalar::gaussian(double offset, double amp, const Vec& center, double width) {
    if (!(width > 0.0)) throw Error(ErrorCode::Validation, "gaussian width must be positive");
    std::ostringstream os;
    os.precision(17);
    os << "gaussian(" << offset << ";" << amp << ";" << center[0] << "," << center[1] << "," << center[2] << ";"
       << width << ")";
    double w2 = width * width;
    auto bump = [=](const Vec& x) {
        Vec d = x - center;
        return amp * std::exp(-dot(d, d) / (2 * w2));
    };
    return {os.str(), [=](const Vec& x) { return offset + bump(x); },
            [=](const Vec& x) { return (-bump(x) / w2) * (x - center); },
            [=](const Vec& x) {
                Vec d = x - center;
                double e = bump(x);
                Mat m{};
                for (int i = 0; i < 3; ++i)
                    for (int j = 0; j < 3; ++j) m[i][j] = e * d[i] * d[j] / (w2 * w2);
                // in 2D the third diagonal slot is inert: fields never have a third component
                for (int i = 0; i < 3; ++i) m[i][i] -= e / w2;
                return m;
            }};
}

AnalyticScalar AnalyticScalar::sampled(std::shared_ptr<const ScalarField> field, std::string description) {
    return {std::move(description), [field](const Vec& x) { return field->interpolate(x); }, nullptr, nullptr};
}

ProblemData ProblemData::constants(double f, double g, double Q) {
    ProblemData p;
    p.f = AnalyticScalar::constant(f);
    p.g = AnalyticScalar::constant(g);
    p.Q = AnalyticScalar::constant(Q);
    p.C1 = p.C2 = g != 0.0 ? f / g : 0.0;
    p.cQ = p.CQ = Q;
    return p;
}

void ProblemData::fit_constants(const Grid& grid) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    double qlo = lo, qhi = -lo;
    for (std::size_t i = 0; i < grid.node_count(); ++i) {
        Vec x = grid.node(i);
        double fv = f(x), gv = g(x), qv = Q(x);
        if (gv > 0.0) {
            lo = std::min(lo, fv / gv);
            hi = std::max(hi, fv / gv);
        }
        qlo = std::min(qlo, qv);
        qhi = std::max(qhi, qv);
    }
    C1 = std::isfinite(lo) ? lo : 0.0;
    C2 = hi;
    cQ = qlo;
    CQ = qhi;
}

void ProblemData::validate(const Grid& grid) const {
    if (!(C1 >= 0.0) || !(C2 >= C1)) throw Error(ErrorCode::Validation, "need 0 <= C1 <= C2");
    if (!(cQ > 0.0) || !(CQ >= cQ)) throw Error(ErrorCode::Validation, "need 0 < cQ <= CQ");
    const double eps = 1e-12;
    for (std::size_t i = 0; i < grid.node_count(); ++i) {
        Vec x = grid.node(i);
        double fv = f(x), gv = g(x), qv = Q(x);
        double s = eps * (1.0 + std::fabs(fv) + std::fabs(gv));
        if (!(C1 * gv >= -s) || !(fv >= C1 * gv - s) || !(fv <= C2 * gv + s))
            throw Error(ErrorCode::Validation, "f, g violate 0 <= C1 g <= f <= C2 g");
        if (!(qv >= cQ - eps * std::fabs(qv)) || !(qv <= CQ + eps * std::fabs(qv)))
            throw Error(ErrorCode::Validation, "Q violates cQ <= Q <= CQ");
    }
}

} // namespace shapelab
