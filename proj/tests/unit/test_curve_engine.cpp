#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "surfdyn/calibration.hpp"
#include "surfdyn/curve_engine.hpp"
#include "surfdyn/dynamics.hpp"
#include "surfdyn/errors.hpp"

using namespace surfdyn;

namespace {

MapSequence diag_sequence() { return MapSequence::stationary(builtin_system("diag_linear")); }

struct SinCos {
    template <class S>
    XY<S> operator()(const S& t) const {
        using std::cos;
        using std::sin;
        return {sin(8.0 * t), cos(8.0 * t)};
    }
};

}  // namespace

TEST_CASE("curve_length") {
    CHECK(curve_length(segment({0, 0}, {1, 0})) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::abs(curve_length(circle({0, 0}, 0.5)) - std::numbers::pi) < 1e-5);
    CHECK(curve_length(segment({0, 0}, {1, 0}), IntervalUnion{{{0.25, 0.75}}}) == doctest::Approx(0.5));
    CHECK(curve_length(segment({0, 0}, {1, 0}), IntervalUnion{}) == 0.0);
}

TEST_CASE("hyperbolic_time_set") {
    const auto diag = diag_sequence();
    HyperbolicParams p{std::log(2.0), 0.1, 2.0, 6};
    // Unit speed on the expanding axis: the derivative conditions hold everywhere, and the Bowen
    // condition |2^5 x| < sqrt 2 leaves a central interval of measure sqrt 2 / 16.
    const Curve exp_axis = segment({-0.5, 0}, {0.5, 0});
    const auto full = hyperbolic_time_set(diag, exp_axis, p, 1000);
    CHECK(std::abs(full.inner.measure() - std::sqrt(2.0) / 16) <= 2e-3);
    CHECK(std::abs(full.outer.measure() - std::sqrt(2.0) / 16) <= 2e-3);

    const auto id = MapSequence::stationary(builtin_system("identity"));
    CHECK(hyperbolic_time_set(id, exp_axis, p, 1000).outer.empty());
    CHECK(hyperbolic_time_set(diag, segment({0, -0.01}, {0, 0.01}), p, 1000).outer.empty());
}

TEST_CASE("hyperbolic_time_set is monotone in n") {
    const auto maps = localize(builtin_system("standard"), {0.2, 0.4}, 12, 0.05);
    const Curve sigma = segment({-0.5, -0.3}, {0.5, 0.3});
    HyperbolicParams p{0.3, 0.2, 3.0, 1};
    IntervalUnion prev = IntervalUnion::full();
    for (std::size_t n = 1; n <= 10; ++n) {
        p.n = n;
        const auto h = hyperbolic_time_set(maps, sigma, p, 2000, 1.0);
        for (const auto& [lo, hi] : h.outer.intervals) {
            CHECK(prev.contains(lo));
            CHECK(prev.contains(hi));
        }
        CHECK(h.inner.measure() <= h.outer.measure() + 1e-15);
        prev = h.outer;
    }
}

TEST_CASE("local_volume_growth") {
    const auto id = MapSequence::stationary(builtin_system("identity"));
    const auto none = local_volume_growth(id, segment({-0.5, 0}, {0.5, 0}), {0.5, 0.1, 2.0, 4});
    CHECK(none.inner_length == 0.0);
    CHECK(none.outer_length == 0.0);

    // |T^{n-1} o sigma| = 2^{n-1} / 2 on the expanding axis, until the Bowen restriction bites.
    const auto diag = diag_sequence();
    const Curve half = segment({-0.25, 0}, {0.25, 0});
    for (std::size_t n = 1; n <= 8; ++n) {
        const auto v = local_volume_growth(diag, half, {std::log(2.0), 0.1, 2.0, n}, kBallRadius, 4000);
        CHECK(v.raw_length == doctest::Approx(std::pow(2.0, n - 1) * 0.5).epsilon(1e-6));
        CHECK(v.inner_length <= v.outer_length + 1e-12);
        CHECK(v.outer_length <= v.raw_length + 1e-9);
        CHECK(v.outer_length <= 2 * 2 * kBallRadius + 1e-6);
    }

    // Cat map along the unstable direction: unrestricted length grows by the eigenvalue.
    const double lam = (3 + std::sqrt(5.0)) / 2;
    Vec2 u{1, lam - 2};
    u = u / norm(u);
    const Curve us = segment(-0.5 * u, 0.5 * u);
    const auto cat = builtin_system("cat");
    const HyperbolicParams hp{std::log(lam), 0.1, 2.0, 4};
    const auto v4 = local_volume_growth(cat, {0.1, 0.2}, us, hp, 0.05, 2000);
    HyperbolicParams hp5 = hp;
    hp5.n = 5;
    const auto v5 = local_volume_growth(cat, {0.1, 0.2}, us, hp5, 0.05, 2000);
    CHECK(v5.raw_length / v4.raw_length == doctest::Approx(lam).epsilon(1e-6));
}

TEST_CASE("oscillation_trim: closed-form exits") {
    const Curve wide = segment({-2, 0}, {2, 0});
    const auto t = oscillation_trim(wide);
    CHECK(t.a == doctest::Approx(0.25).epsilon(1e-9));
    CHECK(t.b == doctest::Approx(0.75).epsilon(1e-9));
    CHECK(t.length_product() == doctest::Approx(2.0).epsilon(1e-8));
    CHECK(verify_trim(wide, t).passed());

    const Curve inside = segment({0, 0}, {0.5, 0});
    const auto t2 = oscillation_trim(inside);
    CHECK(t2.a == 0.0);
    CHECK(t2.b == 1.0);
    CHECK(t2.length_product() == doctest::Approx(0.5));

    const Curve tilted = segment({-1, -0.15}, {1, 0.15});
    const auto t3 = oscillation_trim(tilted);
    const Vec2 dir = Vec2{1, 0.15} / norm(Vec2{1, 0.15});
    CHECK(std::abs(std::abs(dot(t3.axis, dir)) - 1.0) < 1e-9);
    CHECK(verify_trim(tilted, t3, 10000).passed());
    CHECK(trim_length_bound() == doctest::Approx(2 * std::sqrt(6.0)));
}

TEST_CASE("oscillation_trim: preconditions") {
    CHECK_THROWS_AS(oscillation_trim(segment({2, 2}, {3, 2})), PreconditionError);
    // A full circle has sigma' oscillation 2 ||sigma||_1 > ||sigma||_1 / 3.
    CHECK_THROWS_AS(oscillation_trim(circle({0, 0}, 0.5)), PreconditionError);
}

TEST_CASE("oscillation_trim: random curves and the speed invariant") {
    std::mt19937_64 rng(77);
    for (int i = 0; i < 60; ++i) {
        const auto s = sample_oscille_curve(rng);
        const auto t = oscillation_trim(s.curve);
        const auto cert = verify_trim(s.curve, t, 10000);
        CHECK(cert.passed());
        CHECK(t.min_speed >= 2.0 / 3.0 * t.c1 - 1e-9);
    }
}

TEST_CASE("landau_kolmogorov_check") {
    const Curve sq = polynomial_curve({{0, 0}, {0, 0}, {1, 0}});
    const auto a = landau_kolmogorov_check(sq, 2.0, c_lk(2.0));
    REQUIRE(a.ratios.size() == 3);
    CHECK(a.norm0 == doctest::Approx(1.0));
    CHECK(a.norm_s == doctest::Approx(2.0));
    CHECK(a.ratios[1] == doctest::Approx(2.0 / 3.0));
    CHECK(a.holds);

    // Constant curve: all the mass sits in the k = 0 term.
    const auto c = landau_kolmogorov_check(segment({0.3, 0.3}, {0.3, 0.3}), 2.5, c_lk(2.5));
    CHECK(c.ratios[0] == doctest::Approx(1.0));
    for (std::size_t k = 1; k < c.ratios.size(); ++k) CHECK(c.ratios[k] == 0.0);

    const Curve sc = make_curve("sincos", SinCos{}, 7.0);
    const auto b = landau_kolmogorov_check(sc, 2.0, c_lk(2.0));
    CHECK(b.norm_s == doctest::Approx(64.0).epsilon(1e-3));
    CHECK(b.ratios[1] == doctest::Approx(8.0 / 65.0).epsilon(1e-3));
    CHECK(b.holds);
}

TEST_CASE("landau_kolmogorov_check on a fixed degree-6 corpus") {
    std::mt19937_64 rng(4242);
    for (int i = 0; i < 200; ++i) {
        const Curve g = random_polynomial_curve(rng, 6);
        for (double s : {1.5, 2.0, 2.5, 3.0}) CHECK(landau_kolmogorov_check(g, s, c_lk(s)).holds);
    }
}

TEST_CASE("point_set_diameter") {
    CHECK(point_set_diameter({}) == 0.0);
    CHECK(point_set_diameter({{1, 1}}) == 0.0);
    CHECK(point_set_diameter({{0, 0}, {1, 0}, {0, 1}, {0.2, 0.2}}) == doctest::Approx(std::sqrt(2.0)));
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-1, 1);
    std::vector<Vec2> pts(300);
    for (auto& p : pts) p = {u(rng), u(rng)};
    double brute = 0;
    for (const auto& p : pts)
        for (const auto& q : pts) brute = std::max(brute, norm(p - q));
    CHECK(point_set_diameter(pts) == doctest::Approx(brute).epsilon(1e-12));
}
