#pragma once

// Truncated univariate Taylor series ("jets") used to push curves through maps.
//
// A Taylor value u holds u_k = u^{(k)}(t0) / k! for k = 0..order(). Pushing a
// curve jet through a map written generically over the scalar type yields the
// jet of the composition, which is how every derivative of T^k o sigma o phi
// is obtained in this library.

#include <array>
#include <cmath>
#include <cstddef>
#include <string>

#include "surfdyn/errors.hpp"
#include "surfdyn/linalg.hpp"

namespace surfdyn {

inline constexpr int kMaxJetOrder = 7;

class Taylor {
  public:
    Taylor() = default;
    Taylor(double value, int order) : order_(order) {
        check_order(order);
        c_[0] = value;
    }

    /// The jet of t0 + scale * tau in the variable tau.
    static Taylor variable(double t0, double scale, int order) {
        Taylor t(t0, order);
        if (order >= 1) t.c_[1] = scale;
        return t;
    }

    int order() const { return order_; }
    double value() const { return c_[0]; }
    double coeff(int k) const { return c_[static_cast<std::size_t>(k)]; }
    double& coeff(int k) { return c_[static_cast<std::size_t>(k)]; }

    /// k-th derivative with respect to the jet variable.
    double derivative(int k) const {
        double f = 1.0;
        for (int j = 2; j <= k; ++j) f *= j;
        return f * coeff(k);
    }

    Taylor& operator+=(const Taylor& o) {
        const int n = merge(o);
        for (int k = 0; k <= n; ++k) c_[k] += o.c_[k];
        return *this;
    }
    Taylor& operator-=(const Taylor& o) {
        const int n = merge(o);
        for (int k = 0; k <= n; ++k) c_[k] -= o.c_[k];
        return *this;
    }
    Taylor& operator+=(double s) { c_[0] += s; return *this; }
    Taylor& operator-=(double s) { c_[0] -= s; return *this; }
    Taylor& operator*=(double s) {
        for (int k = 0; k <= order_; ++k) c_[k] *= s;
        return *this;
    }
    Taylor& operator*=(const Taylor& o) { return *this = *this * o; }

    friend Taylor operator+(Taylor a, const Taylor& b) { return a += b; }
    friend Taylor operator-(Taylor a, const Taylor& b) { return a -= b; }
    friend Taylor operator+(Taylor a, double s) { return a += s; }
    friend Taylor operator+(double s, Taylor a) { return a += s; }
    friend Taylor operator-(Taylor a, double s) { return a -= s; }
    friend Taylor operator-(double s, const Taylor& a) { return -a + s; }
    friend Taylor operator*(Taylor a, double s) { return a *= s; }
    friend Taylor operator*(double s, Taylor a) { return a *= s; }
    friend Taylor operator/(Taylor a, double s) { return a *= 1.0 / s; }
    friend Taylor operator-(Taylor a) { return a *= -1.0; }

    friend Taylor operator*(const Taylor& a, const Taylor& b) {
        Taylor out;
        out.order_ = a.order_ > b.order_ ? a.order_ : b.order_;
        // A constant (order 0) factor acts on every coefficient of the other.
        if (a.order_ == 0) return b * a.c_[0];
        if (b.order_ == 0) return a * b.c_[0];
        for (int k = 0; k <= out.order_; ++k) {
            double s = 0.0;
            for (int j = 0; j <= k; ++j) s += a.c_[j] * b.c_[k - j];
            out.c_[k] = s;
        }
        return out;
    }

    friend Taylor exp(const Taylor& u) {
        Taylor e(std::exp(u.c_[0]), u.order_);
        for (int k = 1; k <= u.order_; ++k) {
            double s = 0.0;
            for (int j = 1; j <= k; ++j) s += j * u.c_[j] * e.c_[k - j];
            e.c_[k] = s / k;
        }
        return e;
    }

  private:
    static void check_order(int order) {
        if (order < 0 || order > kMaxJetOrder)
            throw DomainError("jet order out of range [0, " + std::to_string(kMaxJetOrder) + "]");
    }

    int merge(const Taylor& o) {
        if (o.order_ > order_) order_ = o.order_;
        return order_;
    }

    int order_ = 0;
    std::array<double, kMaxJetOrder + 1> c_{};
};

struct TaylorSinCos {
    Taylor sin;
    Taylor cos;
};

/// sin and cos together via s' = c u', c' = -s u'.
inline TaylorSinCos sincos(const Taylor& u) {
    const int n = u.order();
    TaylorSinCos r{Taylor(std::sin(u.value()), n), Taylor(std::cos(u.value()), n)};
    for (int k = 1; k <= n; ++k) {
        double ss = 0.0, cc = 0.0;
        for (int j = 1; j <= k; ++j) {
            ss += j * u.coeff(j) * r.cos.coeff(k - j);
            cc += j * u.coeff(j) * r.sin.coeff(k - j);
        }
        r.sin.coeff(k) = ss / k;
        r.cos.coeff(k) = -cc / k;
    }
    return r;
}

inline Taylor sin(const Taylor& u) { return sincos(u).sin; }
inline Taylor cos(const Taylor& u) { return sincos(u).cos; }

/// Jet of a point of R^2: one Taylor series per coordinate.
struct TaylorVec {
    Taylor x;
    Taylor y;

    int order() const { return x.order() > y.order() ? x.order() : y.order(); }
    Vec2 value() const { return {x.value(), y.value()}; }
    Vec2 derivative(int k) const { return {x.derivative(k), y.derivative(k)}; }

    /// Jet of the straight line p + scale * tau * v.
    static TaylorVec line(Vec2 p, Vec2 v, double scale, int order) {
        TaylorVec out{Taylor(p.x, order), Taylor(p.y, order)};
        if (order >= 1) {
            out.x.coeff(1) = scale * v.x;
            out.y.coeff(1) = scale * v.y;
        }
        return out;
    }

    friend TaylorVec operator+(TaylorVec a, const TaylorVec& b) {
        a.x += b.x;
        a.y += b.y;
        return a;
    }
    friend TaylorVec operator-(TaylorVec a, const TaylorVec& b) {
        a.x -= b.x;
        a.y -= b.y;
        return a;
    }
    friend TaylorVec operator*(double s, TaylorVec a) {
        a.x *= s;
        a.y *= s;
        return a;
    }
    friend TaylorVec operator+(TaylorVec a, Vec2 p) {
        a.x += p.x;
        a.y += p.y;
        return a;
    }
    friend TaylorVec operator-(TaylorVec a, Vec2 p) {
        a.x -= p.x;
        a.y -= p.y;
        return a;
    }
};

/// Linear action of a matrix on a jet.
inline TaylorVec operator*(const Mat2& m, const TaylorVec& v) {
    return {m.a * v.x + m.b * v.y, m.c * v.x + m.d * v.y};
}

}  // namespace surfdyn
