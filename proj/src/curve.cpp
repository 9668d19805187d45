#include "surfdyn/curve.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "surfdyn/errors.hpp"

namespace surfdyn {

namespace {

class ReparametrizedCurve final : public CurveModel {
  public:
    ReparametrizedCurve(Curve base, double lo, double hi)
        : base_(std::move(base)), lo_(lo), len_(hi - lo) {}

    TaylorVec expand(double t, double scale, int order) const override {
        return base_.expand(lo_ + len_ * t, len_ * scale, order);
    }
    Vec2 value(double t) const override { return base_(lo_ + len_ * t); }

  private:
    Curve base_;
    double lo_;
    double len_;
};

class PolynomialCurve final : public CurveModel {
  public:
    explicit PolynomialCurve(std::vector<Vec2> c) : c_(std::move(c)) {}

    TaylorVec expand(double t, double scale, int order) const override {
        const Taylor tt = Taylor::variable(t, scale, order);
        // Horner in the jet variable.
        TaylorVec acc{Taylor(0.0, order), Taylor(0.0, order)};
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) {
            acc.x = acc.x * tt + it->x;
            acc.y = acc.y * tt + it->y;
        }
        return acc;
    }
    Vec2 value(double t) const override {
        Vec2 acc{};
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = t * acc + *it;
        return acc;
    }

  private:
    std::vector<Vec2> c_;
};

}  // namespace

Curve::Curve(std::string name, std::shared_ptr<const CurveModel> model, double r)
    : name_(std::move(name)), model_(std::move(model)), r_(r) {
    if (!model_) throw DomainError("curve model is null");
    if (!(r_ > 0.0)) throw DomainError("curve smoothness must be positive");
}

Curve Curve::reparametrized(double lo, double hi) const {
    return Curve(name_ + "|[" + std::to_string(lo) + "," + std::to_string(hi) + "]",
                 std::make_shared<ReparametrizedCurve>(*this, lo, hi), r_);
}

Curve segment(Vec2 a, Vec2 b) { return polynomial_curve({a, b - a}); }

Curve polynomial_curve(std::vector<Vec2> coeffs, double r) {
    if (coeffs.empty()) coeffs.push_back({});
    return Curve("polynomial", std::make_shared<PolynomialCurve>(std::move(coeffs)), r);
}

Curve circle(Vec2 center, double radius) {
    return make_curve(
        "circle",
        [center, radius](const auto& t) {
            using std::cos;
            using std::sin;
            const auto th = 2.0 * std::numbers::pi * t;
            using S = std::decay_t<decltype(th)>;
            return XY<S>{center.x + radius * cos(th), center.y + radius * sin(th)};
        },
        kMaxJetOrder);
}

double IntervalUnion::measure() const {
    double m = 0.0;
    for (const auto& [lo, hi] : intervals) m += hi - lo;
    return m;
}

bool IntervalUnion::contains(double t) const {
    auto it = std::upper_bound(intervals.begin(), intervals.end(), t,
                               [](double v, const auto& iv) { return v < iv.first; });
    if (it == intervals.begin()) return false;
    --it;
    return t <= it->second;
}

void IntervalUnion::normalize(double merge_gap) {
    std::erase_if(intervals, [](const auto& iv) { return !(iv.second >= iv.first); });
    std::sort(intervals.begin(), intervals.end());
    std::vector<std::pair<double, double>> merged;
    for (const auto& iv : intervals) {
        if (!merged.empty() && iv.first <= merged.back().second + merge_gap)
            merged.back().second = std::max(merged.back().second, iv.second);
        else
            merged.push_back(iv);
    }
    intervals = std::move(merged);
}

IntervalUnion IntervalUnion::intersect(const IntervalUnion& other) const {
    IntervalUnion out;
    std::size_t i = 0, j = 0;
    while (i < intervals.size() && j < other.intervals.size()) {
        const double lo = std::max(intervals[i].first, other.intervals[j].first);
        const double hi = std::min(intervals[i].second, other.intervals[j].second);
        if (lo <= hi) out.intervals.emplace_back(lo, hi);
        if (intervals[i].second < other.intervals[j].second)
            ++i;
        else
            ++j;
    }
    return out;
}

}  // namespace surfdyn
