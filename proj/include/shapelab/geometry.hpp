#pragma once

#include <algorithm>
#include <array>
#include <cmath>

namespace shapelab {

// Points and small matrices live in 3 slots; in 2D the last slot stays zero.
using Vec = std::array<double, 3>;
using Mat = std::array<Vec, 3>; // m[row][col]

inline Vec operator+(const Vec& a, const Vec& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec operator-(const Vec& a, const Vec& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec operator*(double s, const Vec& a) { return {s * a[0], s * a[1], s * a[2]}; }
inline Vec operator-(const Vec& a) { return {-a[0], -a[1], -a[2]}; }
inline double dot(const Vec& a, const Vec& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

inline Mat zero_mat() { return Mat{}; }
inline Mat identity(int dim) {
    Mat m{};
    for (int i = 0; i < dim; ++i) m[i][i] = 1.0;
    return m;
}
inline Mat operator+(const Mat& a, const Mat& b) {
    Mat r;
    for (int i = 0; i < 3; ++i) r[i] = a[i] + b[i];
    return r;
}
inline Mat operator-(const Mat& a, const Mat& b) {
    Mat r;
    for (int i = 0; i < 3; ++i) r[i] = a[i] - b[i];
    return r;
}
inline Mat operator*(double s, const Mat& a) {
    Mat r;
    for (int i = 0; i < 3; ++i) r[i] = s * a[i];
    return r;
}
inline Mat operator*(const Mat& a, const Mat& b) {
    Mat r{};
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k)
            for (int j = 0; j < 3; ++j) r[i][j] += a[i][k] * b[k][j];
    return r;
}
inline Vec operator*(const Mat& a, const Vec& x) { return {dot(a[0], x), dot(a[1], x), dot(a[2], x)}; }
inline Mat transpose(const Mat& a) {
    Mat r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r[i][j] = a[j][i];
    return r;
}
inline double trace(const Mat& a) { return a[0][0] + a[1][1] + a[2][2]; }
inline double det(const Mat& a, int dim) {
    if (dim == 2) return a[0][0] * a[1][1] - a[0][1] * a[1][0];
    return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
           a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
}
Mat inverse(const Mat& a, int dim);
inline double max_abs(const Mat& a) {
    double m = 0;
    for (const auto& r : a)
        for (double v : r) m = std::max(m, std::fabs(v));
    return m;
}

} // namespace shapelab
