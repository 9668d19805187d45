#include <cmath>
#include <numeric>

#include "doctest.h"
#include "surfdyn/combinatorics.hpp"
#include "surfdyn/dynamics.hpp"
#include "surfdyn/errors.hpp"

using namespace surfdyn;

namespace {

/// Pascal-triangle binomial, independent of count_admitting's multiplicative loop.
BigInt pascal(std::size_t n, std::size_t k) {
    std::vector<BigInt> row(k + 1, 0);
    row[0] = 1;
    for (std::size_t i = 1; i <= n; ++i)
        for (std::size_t j = std::min(i, k); j >= 1; --j) row[j] += row[j - 1];
    return row[k];
}

MapSequence diag_sequence(double l1, double l2) {
    return MapSequence::stationary(builtin_system("diag_linear", {{"l1", l1}, {"l2", l2}}));
}

}  // namespace

TEST_CASE("bernoulli_entropy") {
    CHECK(bernoulli_entropy(1.0) == 0.0);
    CHECK(bernoulli_entropy(2.0) == doctest::Approx(std::log(2.0)));
    CHECK(bernoulli_entropy(4.0) == doctest::Approx(0.25 * std::log(4.0) + 0.75 * std::log(4.0 / 3.0)).epsilon(1e-12));
    CHECK(std::abs(bernoulli_entropy(4.0) - 0.5623) < 1e-4);
    CHECK_THROWS_AS(bernoulli_entropy(0.5), DomainError);
    CHECK(bernoulli_entropy(1.0 + 1e-9) < 1e-7);
    double best = -1, arg = 0;
    for (double t = 1.0; t <= 100.0; t += 0.01)
        if (bernoulli_entropy(t) > best) {
            best = bernoulli_entropy(t);
            arg = t;
        }
    CHECK(arg == doctest::Approx(2.0).epsilon(0.01));
}

TEST_CASE("count_admitting") {
    CHECK(count_admitting(2, 2) == 6);
    CHECK(count_admitting(3, 1) == 1);
    CHECK(count_admitting(4, 3) == 495);
    for (std::size_t n = 1; n <= 40; ++n)
        for (std::size_t S = 1; S <= 10; ++S) CHECK(count_admitting(n, S) == pascal(n * S, n));
    CHECK_THROWS_AS(count_admitting(0, 2), DomainError);
}

TEST_CASE("enumerate_admitting") {
    const auto e = enumerate_admitting(2, 2);
    const std::vector<std::vector<int>> expect = {{1, 1}, {1, 2}, {1, 3}, {2, 1}, {2, 2}, {3, 1}};
    CHECK(e == expect);
    CHECK(enumerate_admitting(1, 3) == std::vector<std::vector<int>>{{1}, {2}, {3}});
    CHECK(enumerate_admitting(3, 1) == std::vector<std::vector<int>>{{1, 1, 1}});
    for (std::size_t n = 1; n <= 6; ++n)
        for (std::size_t S = 1; S <= 4; ++S) {
            const auto all = enumerate_admitting(n, S);
            CHECK(BigInt(all.size()) == pascal(n * S, n));
            CHECK(std::is_sorted(all.begin(), all.end()));
            for (const auto& k : all) {
                CHECK(std::accumulate(k.begin(), k.end(), 0) <= static_cast<int>(n * S));
                CHECK(*std::min_element(k.begin(), k.end()) >= 1);
            }
        }
    CHECK_THROWS_AS(enumerate_admitting(9, 1), DomainError);
    CHECK_THROWS_AS(enumerate_admitting(2, 6), DomainError);
}

TEST_CASE("combinatorial_bound_check") {
    const auto b = combinatorial_bound_check(2, 2);
    CHECK(b.log_count == doctest::Approx(std::log(6.0)));
    CHECK(b.bound == doctest::Approx(4 * std::log(2.0) + 1));
    CHECK(b.holds);
    const auto one = combinatorial_bound_check(3, 1);
    CHECK(one.log_count == 0.0);
    CHECK(one.bound == 1.0);
    CHECK(one.holds);
    const auto big = combinatorial_bound_check(6, 4);
    CHECK(big.log_count == doctest::Approx(std::log(134596.0)));
    CHECK(big.bound == doctest::Approx(24 * bernoulli_entropy(4.0) + 1));
    CHECK(big.holds);
    for (std::size_t n = 1; n <= 40; ++n)
        for (std::size_t S = 1; S <= 10; ++S) CHECK(combinatorial_bound_check(n, S).holds);
}

TEST_CASE("clamped_integer_part") {
    CHECK(clamped_integer_part(-3.2) == 0);
    CHECK(clamped_integer_part(0.0) == 0);
    CHECK(clamped_integer_part(2.7) == 2);
    CHECK(clamped_integer_part(3.0 - 1e-13) == 3);
    CHECK(clamped_integer_part(std::log(4.0)) == 1);
    CHECK_THROWS_AS(clamped_integer_part(std::nan("")), DomainError);
}

TEST_CASE("defect_sequence") {
    const auto diag = diag_sequence(2.0, 0.5);
    const Curve expanding = segment({0, 0}, {0.5, 0});
    const Curve contracting = segment({0, 0}, {0, 0.5});
    for (double t : {0.0, 0.3, 0.9}) {
        CHECK(defect_sequence(diag, expanding, t, 5) == DefectSequence(5, 1));
        // ratio 4 -> [log 4] + 1 = 2
        CHECK(defect_sequence(diag, contracting, t, 5) == DefectSequence(5, 2));
    }
    const auto id = MapSequence::stationary(builtin_system("identity"));
    CHECK(defect_sequence(id, circle({0, 0}, 0.3), 0.4, 6) == DefectSequence(6, 1));

    // Linear maps: t-independent along a fixed direction.
    const auto cat = MapSequence::stationary(builtin_system("cat"));
    const Curve seg = segment({-0.1, 0.2}, {0.2, 0.1});
    const auto k0 = defect_sequence(cat, seg, 0.0, 8);
    for (double t : {0.25, 0.5, 1.0}) CHECK(defect_sequence(cat, seg, t, 8) == k0);
    for (int k : k0) CHECK(k >= 1);

    // Vanishing derivative: the projection kills sigma' at step 1.
    const auto proj_map = [](const auto& x, const auto&) -> XY<std::decay_t<decltype(x)>> { return {x, 0.0 * x}; };
    const MapSequence proj = MapSequence::stationary(make_map("proj", proj_map, Domain::ball({0, 0}, 2), 2.0));
    try {
        defect_sequence(proj, segment({0, 0}, {0, 0.5}), 0.5, 3);
        FAIL("expected a degenerate tangency");
    } catch (const DegenerateTangencyError& e) {
        CHECK(e.step() == 1);
    }
}

TEST_CASE("lambda_plus and com_threshold") {
    CHECK(lambda_plus(diag_sequence(2.0, 0.5), 7) == doctest::Approx(std::log(2.0)));
    CHECK(lambda_plus(MapSequence::stationary(builtin_system("identity")), 3) == 0.0);
    // 1 - log 2 - 1/3 < 0, so the threshold never exceeds 1.
    CHECK(1.0 - std::log(2.0) - 1.0 / 3.0 < 0.0);
    for (double C : {1.5, 2.0, 10.0, 1e6}) CHECK(com_threshold(C) <= 1);
    CHECK(com_threshold(2.0) == static_cast<long long>(std::floor(std::log(2.0) / (1.0 - std::log(2.0) - 1.0 / 3.0))) + 1);
}

TEST_CASE("realized_class_bound") {
    std::vector<double> samples;
    for (int i = 0; i <= 1000; ++i) samples.push_back(i / 1000.0);

    const auto diag = diag_sequence(2.0, 0.5);
    const auto rep = realized_class_bound(diag, segment({-0.5, 0}, {0.5, 0}), std::log(2.0), 0.1, 2.0, 6, samples);
    CHECK(rep.observed == 1);
    CHECK(rep.log_bound == doctest::Approx(3.0 * 6 - 2));
    CHECK_FALSE(rep.empty);

    const auto id = MapSequence::stationary(builtin_system("identity"));
    const auto none = realized_class_bound(id, segment({-0.5, 0}, {0.5, 0}), 0.5, 0.1, 2.0, 6, samples);
    CHECK(none.observed == 0);
    CHECK(none.empty);

    // diag(3, 2) along the diagonal: the sampler is the oracle; only the inequality is asserted.
    const auto d32 = MapSequence::stationary(builtin_system("diag_linear", {{"l1", 3.0}, {"l2", 2.0}}));
    const Vec2 u = Vec2{0.5, 0.5} / std::sqrt(2.0);
    const auto mixed = realized_class_bound(d32, segment(-1e-7 * u, 1e-7 * u), std::log(2.0), 0.3, 2.0, 12, samples);
    CHECK(std::log(static_cast<double>(std::max<std::size_t>(mixed.observed, 1))) <= mixed.log_bound);

    CHECK_THROWS_AS(realized_class_bound(diag, segment({0, 0}, {1, 0}), 0.5, 0.5, 2.0, 4, samples), PreconditionError);
    CHECK_THROWS_AS(realized_class_bound(diag, segment({0, 0}, {1, 0}), 0.5, 0.1, 1.0, 4, samples), PreconditionError);
}
