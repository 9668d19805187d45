#pragma once

// SmoothMap: a C^r self-map of the flat 2-torus or of a box in R^2.
//
// Maps are evaluated through a MapModel. Built-in systems are written once as
// generic functors over the scalar type and therefore provide exact jets of
// every order up to kMaxJetOrder; user systems given as plain value
// evaluators fall back to central finite differences (see
// make_value_only_map) and are flagged as degraded.

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>

#include "surfdyn/linalg.hpp"
#include "surfdyn/taylor.hpp"

namespace surfdyn {

/// Where a map lives. Boxes are axis-aligned squares |p - center|_inf <= radius;
/// balls are Euclidean (the sqrt(d)-ball carrying localized maps).
struct Domain {
    enum class Kind { Torus, Box, Ball };

    Kind kind = Kind::Torus;
    Vec2 center{};
    double radius = 0.5;
    /// Radius R of the translation charts used by localize().
    double safe_radius = 0.25;

    static Domain torus() { return {Kind::Torus, {0.5, 0.5}, 0.5, 0.25}; }
    static Domain box(Vec2 center, double radius, std::optional<double> safe_radius = {}) {
        return {Kind::Box, center, radius, safe_radius.value_or(radius)};
    }
    static Domain ball(Vec2 center, double radius) {
        return {Kind::Ball, center, radius, radius};
    }

    bool is_torus() const { return kind == Kind::Torus; }
    bool contains(Vec2 p) const;
    /// Torus: reduce both coordinates into [0,1). Box: identity.
    Vec2 reduce(Vec2 p) const;
    /// Shortest displacement from a to b (nearest representative on the torus).
    Vec2 displacement(Vec2 a, Vec2 b) const;
    /// Flat quotient metric on the torus, Euclidean metric on a box.
    double distance(Vec2 a, Vec2 b) const { return norm(displacement(a, b)); }
};

/// Evaluation backend of a map of R^2 (lifted: no torus reduction).
class MapModel {
  public:
    virtual ~MapModel() = default;

    virtual Vec2 value(Vec2 p) const = 0;
    virtual TaylorVec push(const TaylorVec& curve) const = 0;
    virtual Mat2 jacobian(Vec2 p) const;
    /// Highest jet order push() supports.
    virtual int max_order() const { return kMaxJetOrder; }
};

/// Coordinates returned by generic map functors.
template <class S>
struct XY {
    S x;
    S y;
};

/// Adapts a functor `template <class S> XY<S> f(const S& x, const S& y)`.
template <class F>
class FunctorModel final : public MapModel {
  public:
    explicit FunctorModel(F f) : f_(std::move(f)) {}

    Vec2 value(Vec2 p) const override {
        const XY<double> v = f_(p.x, p.y);
        return {v.x, v.y};
    }
    TaylorVec push(const TaylorVec& c) const override {
        XY<Taylor> v = f_(c.x, c.y);
        return {std::move(v.x), std::move(v.y)};
    }

  private:
    F f_;
};

class SmoothMap {
  public:
    SmoothMap(std::string name, std::shared_ptr<const MapModel> model, Domain domain, double r,
              bool exact_jets = true);

    const std::string& name() const { return name_; }
    const Domain& domain() const { return domain_; }
    double smoothness() const { return r_; }
    /// False when derivatives come from finite differences.
    bool exact_jets() const { return exact_jets_; }
    const MapModel& model() const { return *model_; }

    /// T(p) reduced into the domain (mod 1 on the torus).
    Vec2 operator()(Vec2 p) const { return domain_.reduce(model_->value(p)); }
    /// T(p) on the universal cover.
    Vec2 lift(Vec2 p) const { return model_->value(p); }
    Mat2 jacobian(Vec2 p) const { return model_->jacobian(p); }
    TaylorVec push(const TaylorVec& curve) const;

    /// Derivatives of tau -> T(p + tau v), orders 0..order.
    TaylorVec directional_jet(Vec2 p, Vec2 v, int order) const {
        return push(TaylorVec::line(p, v, 1.0, order));
    }

    /// Operator norm of the symmetric k-linear map D^k_p T, estimated as the
    /// max of |D^k T[v,...,v]| over `directions` unit vectors (exact for k=1).
    double derivative_norm(Vec2 p, int k, int directions = 90) const;

    /// Precomputed Holder norm ||T||_s, if one was attached.
    std::optional<double> norm_certificate(double s) const;
    const std::map<double, double>& norm_certificates() const { return norms_; }
    bool norms_exact() const { return norms_exact_; }
    SmoothMap with_norms(std::map<double, double> norms, bool exact) const;

  private:
    std::string name_;
    std::shared_ptr<const MapModel> model_;
    Domain domain_;
    double r_;
    bool exact_jets_;
    std::map<double, double> norms_;
    bool norms_exact_ = false;
};

/// Wrap a generic functor as a SmoothMap with exact jets.
template <class F>
SmoothMap make_map(std::string name, F f, Domain domain, double r) {
    return SmoothMap(std::move(name), std::make_shared<FunctorModel<F>>(std::move(f)), domain, r,
                     true);
}

/// A map known only through its values. Derivatives use central finite
/// differences with step 1e-5 (first order) and jets are limited to order 2.
SmoothMap make_value_only_map(std::string name, std::function<Vec2(Vec2)> f, Domain domain,
                              double r);

}  // namespace surfdyn
