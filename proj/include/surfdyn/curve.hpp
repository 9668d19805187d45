#pragma once

// Curve: a C^r 1-disk sigma : [0,1] -> R^2 with jets of every order.

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "surfdyn/linalg.hpp"
#include "surfdyn/smooth_map.hpp"
#include "surfdyn/taylor.hpp"

namespace surfdyn {

class CurveModel {
  public:
    virtual ~CurveModel() = default;
    /// Jet of tau -> sigma(t + scale * tau) at tau = 0.
    virtual TaylorVec expand(double t, double scale, int order) const = 0;
    virtual Vec2 value(double t) const { return expand(t, 1.0, 0).value(); }
};

/// Adapts a functor `template <class S> XY<S> f(const S& t)`.
template <class F>
class FunctorCurve final : public CurveModel {
  public:
    explicit FunctorCurve(F f) : f_(std::move(f)) {}

    TaylorVec expand(double t, double scale, int order) const override {
        XY<Taylor> v = f_(Taylor::variable(t, scale, order));
        return {std::move(v.x), std::move(v.y)};
    }
    Vec2 value(double t) const override {
        const XY<double> v = f_(t);
        return {v.x, v.y};
    }

  private:
    F f_;
};

class Curve {
  public:
    Curve(std::string name, std::shared_ptr<const CurveModel> model, double r);

    const std::string& name() const { return name_; }
    double smoothness() const { return r_; }

    Vec2 operator()(double t) const { return model_->value(t); }
    /// k-th derivative sigma^{(k)}(t).
    Vec2 derivative(double t, int k = 1) const { return expand(t, 1.0, k).derivative(k); }
    TaylorVec expand(double t, double scale, int order) const {
        return model_->expand(t, scale, order);
    }

    /// The curve t -> sigma(lo + (hi - lo) t).
    Curve reparametrized(double lo, double hi) const;

  private:
    std::string name_;
    std::shared_ptr<const CurveModel> model_;
    double r_;
};

template <class F>
Curve make_curve(std::string name, F f, double r) {
    return Curve(std::move(name), std::make_shared<FunctorCurve<F>>(std::move(f)), r);
}

/// t -> a + t (b - a).
Curve segment(Vec2 a, Vec2 b);

/// t -> sum_k coeffs[k] t^k.
Curve polynomial_curve(std::vector<Vec2> coeffs, double r = kMaxJetOrder);

/// t -> center + radius (cos 2 pi t, sin 2 pi t).
Curve circle(Vec2 center, double radius);

/// Union of disjoint closed parameter intervals, kept sorted.
struct IntervalUnion {
    std::vector<std::pair<double, double>> intervals;

    double measure() const;
    bool contains(double t) const;
    bool empty() const { return intervals.empty(); }
    /// Sort, drop empty pieces and merge touching ones.
    void normalize(double merge_gap = 0.0);
    static IntervalUnion full() { return {{{0.0, 1.0}}}; }
    IntervalUnion intersect(const IntervalUnion& other) const;
};

}  // namespace surfdyn
