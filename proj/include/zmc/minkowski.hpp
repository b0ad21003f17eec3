#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>

// Linear algebra on R^4_1: coordinates (x1, x2, x3, x4) in a fixed
// orthonormal basis, inner product of signature (3,1) with x4 timelike.

namespace zmc {

struct Vec4 {
    double x1 = 0.0, x2 = 0.0, x3 = 0.0, x4 = 0.0;

    constexpr Vec4() = default;
    constexpr Vec4(double a, double b, double c, double d) : x1(a), x2(b), x3(c), x4(d) {}

    double& operator[](std::size_t k) { return (&x1)[k]; }
    double operator[](std::size_t k) const { return (&x1)[k]; }

    Vec4& operator+=(const Vec4& o) { x1 += o.x1; x2 += o.x2; x3 += o.x3; x4 += o.x4; return *this; }
    Vec4& operator-=(const Vec4& o) { x1 -= o.x1; x2 -= o.x2; x3 -= o.x3; x4 -= o.x4; return *this; }
    Vec4& operator*=(double s) { x1 *= s; x2 *= s; x3 *= s; x4 *= s; return *this; }
};

inline Vec4 operator+(Vec4 a, const Vec4& b) { return a += b; }
inline Vec4 operator-(Vec4 a, const Vec4& b) { return a -= b; }
inline Vec4 operator*(Vec4 a, double s) { return a *= s; }
inline Vec4 operator*(double s, Vec4 a) { return a *= s; }
inline Vec4 operator/(Vec4 a, double s) { return a *= (1.0 / s); }
inline Vec4 operator-(const Vec4& a) { return {-a.x1, -a.x2, -a.x3, -a.x4}; }

// signature (3,1) inner product: a.b = a1 b1 + a2 b2 + a3 b3 - a4 b4
inline double inner(const Vec4& a, const Vec4& b) {
    return a.x1 * b.x1 + a.x2 * b.x2 + a.x3 * b.x3 - a.x4 * b.x4;
}

// Euclidean norm, for drift/error reporting only (not metric geometry).
inline double euclid_norm(const Vec4& a) {
    return std::sqrt(a.x1 * a.x1 + a.x2 * a.x2 + a.x3 * a.x3 + a.x4 * a.x4);
}

enum class CausalCharacter { spacelike, timelike, lightlike };

inline const char* to_string(CausalCharacter c) {
    switch (c) {
        case CausalCharacter::spacelike: return "spacelike";
        case CausalCharacter::timelike: return "timelike";
        case CausalCharacter::lightlike: return "lightlike";
    }
    return "?";
}

inline CausalCharacter causal_character(const Vec4& v, double tol = 1e-10) {
    if (tol < 0.0) throw std::invalid_argument("causal_character: tol must be >= 0");
    const double q = inner(v, v);
    if (q < -tol) return CausalCharacter::timelike;
    if (q > tol) return CausalCharacter::spacelike;
    return CausalCharacter::lightlike;
}

// 4x4 real matrix, row-major. Used for frames and frame-system coefficients.
struct Mat4 {
    std::array<double, 16> m{};

    double& operator()(int i, int j) { return m[static_cast<std::size_t>(4 * i + j)]; }
    double operator()(int i, int j) const { return m[static_cast<std::size_t>(4 * i + j)]; }

    static Mat4 identity() {
        Mat4 r;
        for (int i = 0; i < 4; ++i) r(i, i) = 1.0;
        return r;
    }
};

inline Mat4 operator+(const Mat4& a, const Mat4& b) {
    Mat4 r;
    for (std::size_t k = 0; k < 16; ++k) r.m[k] = a.m[k] + b.m[k];
    return r;
}
inline Mat4 operator-(const Mat4& a, const Mat4& b) {
    Mat4 r;
    for (std::size_t k = 0; k < 16; ++k) r.m[k] = a.m[k] - b.m[k];
    return r;
}
inline Mat4 operator*(double s, const Mat4& a) {
    Mat4 r;
    for (std::size_t k = 0; k < 16; ++k) r.m[k] = s * a.m[k];
    return r;
}
inline Mat4 operator*(const Mat4& a, double s) { return s * a; }
inline Mat4 operator*(const Mat4& a, const Mat4& b) {
    Mat4 r;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            double s = 0.0;
            for (int k = 0; k < 4; ++k) s += a(i, k) * b(k, j);
            r(i, j) = s;
        }
    return r;
}
inline Vec4 operator*(const Mat4& a, const Vec4& v) {
    Vec4 r;
    for (int i = 0; i < 4; ++i) {
        double s = 0.0;
        for (int k = 0; k < 4; ++k) s += a(i, k) * v[static_cast<std::size_t>(k)];
        r[static_cast<std::size_t>(i)] = s;
    }
    return r;
}

inline double max_abs(const Mat4& a) {
    double r = 0.0;
    for (double e : a.m) r = std::max(r, std::abs(e));
    return r;
}

// Hyperbolic rotation mixing spatial axis k (0..2) with the timelike axis.
inline Mat4 boost(int spatial_axis, double rapidity) {
    if (spatial_axis < 0 || spatial_axis > 2) throw std::invalid_argument("boost: axis must be 0..2");
    Mat4 r = Mat4::identity();
    const double ch = std::cosh(rapidity), sh = std::sinh(rapidity);
    r(spatial_axis, spatial_axis) = ch;
    r(spatial_axis, 3) = sh;
    r(3, spatial_axis) = sh;
    r(3, 3) = ch;
    return r;
}

// Euclidean rotation in the plane of two spatial axes.
inline Mat4 spatial_rotation(int a, int b, double angle) {
    if (a < 0 || a > 2 || b < 0 || b > 2 || a == b) throw std::invalid_argument("spatial_rotation: bad axes");
    Mat4 r = Mat4::identity();
    const double c = std::cos(angle), s = std::sin(angle);
    r(a, a) = c; r(a, b) = -s;
    r(b, a) = s; r(b, b) = c;
    return r;
}

/**
 * Pseudo-orthonormal frame (x, y, n1, n2) with target Gram diag(-1, 1, 1, 1):
 * x timelike, the rest spacelike, mutually orthogonal.
 */
struct Frame4 {
    Vec4 x, y, n1, n2;

    const Vec4& row(int i) const {
        switch (i) {
            case 0: return x;
            case 1: return y;
            case 2: return n1;
            default: return n2;
        }
    }
    Vec4& row(int i) {
        switch (i) {
            case 0: return x;
            case 1: return y;
            case 2: return n1;
            default: return n2;
        }
    }

    // standard anchor of the reconstruction theorem: x = e4 timelike
    static Frame4 standard() {
        return {{0, 0, 0, 1}, {1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}};
    }
};

// max over the 10 independent Gram entries of |<f_i, f_j> - target_ij|
inline double gram_defect(const Frame4& f) {
    constexpr double target[4] = {-1.0, 1.0, 1.0, 1.0};
    double d = 0.0;
    for (int i = 0; i < 4; ++i)
        for (int j = i; j < 4; ++j) {
            const double want = (i == j) ? target[i] : 0.0;
            d = std::max(d, std::abs(inner(f.row(i), f.row(j)) - want));
        }
    return d;
}

inline Frame4 apply(const Mat4& m, const Frame4& f) {
    return {m * f.x, m * f.y, m * f.n1, m * f.n2};
}

} // namespace zmc
