#pragma once

// MapSequence: maps T_1, T_2, ... of the sqrt(d)-ball of R^2 fixing the
// origin, with T_0 the identity. T^n = T_n o ... o T_0, and the Bowen ball
// B(n, rho) collects the points whose first n iterates stay in the rho-ball.

#include <cstddef>
#include <numbers>
#include <optional>
#include <vector>

#include "surfdyn/curve.hpp"
#include "surfdyn/smooth_map.hpp"

namespace surfdyn {

/// sqrt(d) for d = 2.
inline const double kBallRadius = std::numbers::sqrt2;

class MapSequence {
  public:
    /// T_1, ..., T_N given explicitly.
    explicit MapSequence(std::vector<SmoothMap> maps);
    /// T_k = map for every k >= 1.
    static MapSequence stationary(SmoothMap map);

    /// Number of maps T_1..T_N, or nullopt for a stationary sequence.
    std::optional<std::size_t> length() const;
    /// T_k for k >= 1.
    const SmoothMap& map(std::size_t k) const;

    /// T^k y = T_k o ... o T_1 (y).
    Vec2 apply(std::size_t k, Vec2 y) const;
    /// The points y, T^1 y, ..., T^k y.
    std::vector<Vec2> orbit(Vec2 y, std::size_t k) const;
    /// ||T^j y|| < rho for j = 0..n-1.
    bool in_bowen_ball(Vec2 y, std::size_t n, double rho) const;
    /// Jet of T_to o ... o T_{from+1} applied to `jet`.
    TaylorVec push(TaylorVec jet, std::size_t from, std::size_t to) const;
    /// Differential of T^k at y, i.e. D T_k ... D T_1.
    Mat2 derivative(std::size_t k, Vec2 y) const;

    /// Sup-norm-style certificates of every map, keyed by s (max over k).
    std::optional<double> norm_bound(double s) const;

  private:
    std::vector<SmoothMap> maps_;
    bool stationary_ = false;
};

/// Jet of tau -> T^k(sigma(t + scale * tau)).
TaylorVec curve_jet(const MapSequence& maps, const Curve& sigma, std::size_t k, double t,
                    double scale, int order);

/// The curve T^k o sigma as a Curve object.
Curve image_curve(const MapSequence& maps, const Curve& sigma, std::size_t k);

}  // namespace surfdyn
