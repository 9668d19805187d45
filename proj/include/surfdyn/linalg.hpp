#pragma once

// Fixed-size 2D vectors and 2x2 matrices. Surfaces only ever need d = 2, so
// everything here is closed form (no iterative eigen/SVD routines).

#include <algorithm>
#include <cmath>

namespace surfdyn {

inline constexpr int kDim = 2;

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
    constexpr Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }
    constexpr Vec2& operator*=(double s) { x *= s; y *= s; return *this; }

    friend constexpr Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
    friend constexpr Vec2 operator-(Vec2 a, const Vec2& b) { return a -= b; }
    friend constexpr Vec2 operator-(const Vec2& a) { return {-a.x, -a.y}; }
    friend constexpr Vec2 operator*(double s, Vec2 a) { return a *= s; }
    friend constexpr Vec2 operator*(Vec2 a, double s) { return a *= s; }
    friend constexpr Vec2 operator/(Vec2 a, double s) { return {a.x / s, a.y / s}; }
    friend constexpr bool operator==(const Vec2&, const Vec2&) = default;
};

constexpr double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double norm(const Vec2& a) { return std::hypot(a.x, a.y); }

/// Row-major 2x2 matrix [[a, b], [c, d]].
struct Mat2 {
    double a = 1.0, b = 0.0;
    double c = 0.0, d = 1.0;

    static constexpr Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
    static constexpr Mat2 diag(double p, double q) { return {p, 0.0, 0.0, q}; }
    static constexpr Mat2 from_columns(const Vec2& c0, const Vec2& c1) {
        return {c0.x, c1.x, c0.y, c1.y};
    }

    constexpr Vec2 col0() const { return {a, c}; }
    constexpr Vec2 col1() const { return {b, d}; }
    constexpr double det() const { return a * d - b * c; }
    constexpr double trace() const { return a + d; }
    constexpr Mat2 transposed() const { return {a, c, b, d}; }

    friend constexpr Vec2 operator*(const Mat2& m, const Vec2& v) {
        return {m.a * v.x + m.b * v.y, m.c * v.x + m.d * v.y};
    }
    friend constexpr Mat2 operator*(const Mat2& m, const Mat2& n) {
        return {m.a * n.a + m.b * n.c, m.a * n.b + m.b * n.d,
                m.c * n.a + m.d * n.c, m.c * n.b + m.d * n.d};
    }
    friend constexpr Mat2 operator*(double s, const Mat2& m) {
        return {s * m.a, s * m.b, s * m.c, s * m.d};
    }
    friend constexpr Mat2 operator-(const Mat2& m, const Mat2& n) {
        return {m.a - n.a, m.b - n.b, m.c - n.c, m.d - n.d};
    }
    friend constexpr Mat2 operator+(const Mat2& m, const Mat2& n) {
        return {m.a + n.a, m.b + n.b, m.c + n.c, m.d + n.d};
    }
    friend constexpr bool operator==(const Mat2&, const Mat2&) = default;
};

struct SingularValues {
    double max = 0.0;
    double min = 0.0;
};

/// Closed-form singular values of a 2x2 matrix.
///
/// With E = (a+d)/2, F = (a-d)/2, G = (c+b)/2, H = (c-b)/2 the singular
/// values are hypot(E,H) +- hypot(F,G). This form has no cancellation in the
/// largest singular value; the smallest is recovered from |det| when it would
/// otherwise lose digits.
inline SingularValues singular_values(const Mat2& m) {
    const double e = 0.5 * (m.a + m.d);
    const double f = 0.5 * (m.a - m.d);
    const double g = 0.5 * (m.c + m.b);
    const double h = 0.5 * (m.c - m.b);
    const double q = std::hypot(e, h);
    const double r = std::hypot(f, g);
    SingularValues sv;
    sv.max = q + r;
    const double det = std::abs(m.det());
    sv.min = sv.max > 0.0 ? det / sv.max : 0.0;
    return sv;
}

/// Spectral (operator 2-) norm.
inline double spectral_norm(const Mat2& m) { return singular_values(m).max; }

/// Frobenius-style max-abs-entry distance, used for approximate comparisons.
inline double max_abs_diff(const Mat2& m, const Mat2& n) {
    return std::max({std::abs(m.a - n.a), std::abs(m.b - n.b), std::abs(m.c - n.c),
                     std::abs(m.d - n.d)});
}

/// log+(t) = max(log t, 0), with log+(0) = 0.
inline double log_plus(double t) { return t > 1.0 ? std::log(t) : 0.0; }

}  // namespace surfdyn
