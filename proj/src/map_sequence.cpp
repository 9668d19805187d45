#include "surfdyn/map_sequence.hpp"

#include <algorithm>
#include <memory>

#include "surfdyn/errors.hpp"

namespace surfdyn {

namespace {

class ImageCurve final : public CurveModel {
  public:
    ImageCurve(MapSequence maps, Curve sigma, std::size_t k)
        : maps_(std::move(maps)), sigma_(std::move(sigma)), k_(k) {}

    TaylorVec expand(double t, double scale, int order) const override {
        return curve_jet(maps_, sigma_, k_, t, scale, order);
    }
    Vec2 value(double t) const override { return maps_.apply(k_, sigma_(t)); }

  private:
    MapSequence maps_;
    Curve sigma_;
    std::size_t k_;
};

}  // namespace

MapSequence::MapSequence(std::vector<SmoothMap> maps) : maps_(std::move(maps)) {}

MapSequence MapSequence::stationary(SmoothMap map) {
    MapSequence s({std::move(map)});
    s.stationary_ = true;
    return s;
}

std::optional<std::size_t> MapSequence::length() const {
    if (stationary_) return std::nullopt;
    return maps_.size();
}

const SmoothMap& MapSequence::map(std::size_t k) const {
    if (k == 0) throw DomainError("T_0 is the identity and has no stored map");
    if (stationary_) return maps_.front();
    if (k > maps_.size())
        throw DomainError("map sequence has " + std::to_string(maps_.size()) + " maps; T_" +
                          std::to_string(k) + " requested");
    return maps_[k - 1];
}

Vec2 MapSequence::apply(std::size_t k, Vec2 y) const {
    for (std::size_t j = 1; j <= k; ++j) y = map(j).lift(y);
    return y;
}

std::vector<Vec2> MapSequence::orbit(Vec2 y, std::size_t k) const {
    std::vector<Vec2> out;
    out.reserve(k + 1);
    out.push_back(y);
    for (std::size_t j = 1; j <= k; ++j) out.push_back(map(j).lift(out.back()));
    return out;
}

bool MapSequence::in_bowen_ball(Vec2 y, std::size_t n, double rho) const {
    for (std::size_t j = 0; j < n; ++j) {
        if (!(norm(y) < rho)) return false;
        if (j + 1 < n) y = map(j + 1).lift(y);
    }
    return true;
}

TaylorVec MapSequence::push(TaylorVec jet, std::size_t from, std::size_t to) const {
    for (std::size_t j = from + 1; j <= to; ++j) jet = map(j).push(jet);
    return jet;
}

Mat2 MapSequence::derivative(std::size_t k, Vec2 y) const {
    Mat2 d = Mat2::identity();
    for (std::size_t j = 1; j <= k; ++j) {
        d = map(j).jacobian(y) * d;
        y = map(j).lift(y);
    }
    return d;
}

std::optional<double> MapSequence::norm_bound(double s) const {
    std::optional<double> best;
    for (const auto& m : maps_) {
        auto c = m.norm_certificate(s);
        if (!c) return std::nullopt;
        best = std::max(best.value_or(0.0), *c);
    }
    return best;
}

TaylorVec curve_jet(const MapSequence& maps, const Curve& sigma, std::size_t k, double t,
                    double scale, int order) {
    return maps.push(sigma.expand(t, scale, order), 0, k);
}

Curve image_curve(const MapSequence& maps, const Curve& sigma, std::size_t k) {
    return Curve("T^" + std::to_string(k) + "(" + sigma.name() + ")",
                 std::make_shared<ImageCurve>(maps, sigma, k), sigma.smoothness());
}

}  // namespace surfdyn
