#include "surfdyn/smooth_map.hpp"

#include <cmath>
#include <numbers>

#include "surfdyn/errors.hpp"

namespace surfdyn {

namespace {

double wrap_unit(double v) {
    double w = v - std::floor(v);
    return w >= 1.0 ? 0.0 : w;
}

class ValueOnlyModel final : public MapModel {
  public:
    explicit ValueOnlyModel(std::function<Vec2(Vec2)> f) : f_(std::move(f)) {}

    Vec2 value(Vec2 p) const override { return f_(p); }

    Mat2 jacobian(Vec2 p) const override {
        constexpr double h = 1e-5;
        const Vec2 dx = (f_(p + Vec2{h, 0.0}) - f_(p - Vec2{h, 0.0})) / (2.0 * h);
        const Vec2 dy = (f_(p + Vec2{0.0, h}) - f_(p - Vec2{0.0, h})) / (2.0 * h);
        return Mat2::from_columns(dx, dy);
    }

    TaylorVec push(const TaylorVec& c) const override {
        const int order = c.order();
        const Vec2 p = c.value();
        const Vec2 v0 = f_(p);
        TaylorVec out{Taylor(v0.x, order), Taylor(v0.y, order)};
        if (order == 0) return out;
        const Mat2 j = jacobian(p);
        const Vec2 c1{c.x.coeff(1), c.y.coeff(1)};
        const Vec2 o1 = j * c1;
        out.x.coeff(1) = o1.x;
        out.y.coeff(1) = o1.y;
        if (order == 1) return out;
        // Second coefficient: J c2 + (1/2) D^2 f [c1, c1].
        const Vec2 c2{c.x.coeff(2), c.y.coeff(2)};
        Vec2 o2 = j * c2;
        const double len = norm(c1);
        if (len > 0.0) {
            constexpr double h = 1e-4;
            const Vec2 u = c1 / len;
            const Vec2 second = (f_(p + h * u) - 2.0 * v0 + f_(p - h * u)) / (h * h);
            o2 += 0.5 * len * len * second;
        }
        out.x.coeff(2) = o2.x;
        out.y.coeff(2) = o2.y;
        return out;
    }

    int max_order() const override { return 2; }

  private:
    std::function<Vec2(Vec2)> f_;
};

}  // namespace

bool Domain::contains(Vec2 p) const {
    if (is_torus()) return std::isfinite(p.x) && std::isfinite(p.y);
    if (kind == Kind::Ball) return norm(p - center) <= radius;
    return std::abs(p.x - center.x) <= radius && std::abs(p.y - center.y) <= radius;
}

Vec2 Domain::reduce(Vec2 p) const {
    if (!is_torus()) return p;
    return {wrap_unit(p.x), wrap_unit(p.y)};
}

Vec2 Domain::displacement(Vec2 a, Vec2 b) const {
    Vec2 d = b - a;
    if (is_torus()) {
        d.x -= std::round(d.x);
        d.y -= std::round(d.y);
    }
    return d;
}

Mat2 MapModel::jacobian(Vec2 p) const {
    const Vec2 c0 = push(TaylorVec::line(p, {1.0, 0.0}, 1.0, 1)).derivative(1);
    const Vec2 c1 = push(TaylorVec::line(p, {0.0, 1.0}, 1.0, 1)).derivative(1);
    return Mat2::from_columns(c0, c1);
}

SmoothMap::SmoothMap(std::string name, std::shared_ptr<const MapModel> model, Domain domain,
                     double r, bool exact_jets)
    : name_(std::move(name)), model_(std::move(model)), domain_(domain), r_(r),
      exact_jets_(exact_jets) {
    if (!(r_ > 1.0)) throw DomainError("smoothness r must exceed 1");
    if (!model_) throw DomainError("map model is null");
}

TaylorVec SmoothMap::push(const TaylorVec& curve) const {
    if (curve.order() > model_->max_order())
        throw DomainError("map '" + name_ + "' supports jets up to order " +
                          std::to_string(model_->max_order()));
    return model_->push(curve);
}

double SmoothMap::derivative_norm(Vec2 p, int k, int directions) const {
    if (k < 0) throw DomainError("derivative order must be nonnegative");
    if (k == 0) return norm(lift(p));
    if (k == 1) return spectral_norm(jacobian(p));
    double best = 0.0;
    for (int j = 0; j < directions; ++j) {
        const double th = std::numbers::pi * j / directions;
        const Vec2 v{std::cos(th), std::sin(th)};
        best = std::max(best, norm(directional_jet(p, v, k).derivative(k)));
    }
    return best;
}

std::optional<double> SmoothMap::norm_certificate(double s) const {
    auto it = norms_.find(s);
    if (it == norms_.end()) return std::nullopt;
    return it->second;
}

SmoothMap SmoothMap::with_norms(std::map<double, double> norms, bool exact) const {
    SmoothMap out = *this;
    out.norms_ = std::move(norms);
    out.norms_exact_ = exact;
    return out;
}

SmoothMap make_value_only_map(std::string name, std::function<Vec2(Vec2)> f, Domain domain,
                              double r) {
    return SmoothMap(std::move(name), std::make_shared<ValueOnlyModel>(std::move(f)), domain, r,
                     false);
}

}  // namespace surfdyn
