#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "surfdyn/calibration.hpp"
#include "surfdyn/dynamics.hpp"
#include "surfdyn/errors.hpp"
#include "surfdyn/reparametrization.hpp"

using namespace surfdyn;

namespace {

const double kE = std::numbers::e;

struct SinTen {
    template <class S>
    XY<S> operator()(const S& t) const {
        using std::sin;
        return {sin(10.0 * t), 0.0 * t};
    }
};

JetSource source_of(const Curve& c) {
    return [c](double t, int order) { return c.expand(t, 1.0, order); };
}

/// Sampled sup of |d/du g(lo + L u)| = L sup |g'| over the chart.
double chart_first_norm(const Curve& g, const AffineChart& ch, int samples = 2001) {
    double best = 0.0;
    for (int i = 0; i < samples; ++i) best = std::max(best, norm(g.derivative(ch(i / (samples - 1.0)))));
    return best * ch.length();
}

/// Fine-grid oracle for {|g| <= a}: runs of consecutive samples.
std::vector<std::pair<double, double>> sampled_components(const Curve& g, double a, int samples) {
    std::vector<std::pair<double, double>> out;
    bool in = false;
    for (int i = 0; i < samples; ++i) {
        const double t = i / (samples - 1.0);
        const bool now = norm(g(t)) <= a;
        if (now && !in) out.push_back({t, t});
        if (now) out.back().second = t;
        in = now;
    }
    return out;
}

MapSequence diag_sequence() { return MapSequence::stationary(builtin_system("diag_linear")); }

Curve cat_unstable() {
    const double lam = (3 + std::sqrt(5.0)) / 2;
    Vec2 u{1, lam - 2};
    u = u / norm(u);
    return segment(-0.5 * u, 0.5 * u);
}

}  // namespace

TEST_CASE("ladders and constants") {
    CHECK(oscillation_ladder(2.0) == std::vector<double>{1.0});
    CHECK(oscillation_ladder(1.5) == std::vector<double>{0.5});
    CHECK(oscillation_ladder(3.5) == std::vector<double>{1.0, 2.0, 2.5});
    CHECK(norm_ladder(2.0) == std::vector<double>{1.0, 2.0});
    CHECK(norm_ladder(1.5) == std::vector<double>{1.0, 1.5});
    CHECK(norm_ladder(3.0) == std::vector<double>{1.0, 2.0, 3.0});
    CHECK(precondition_constant(2.0) == 1e3);
    CHECK(precondition_constant(2.5) == 1e3 * 8);
}

TEST_CASE("sublevel_charts: g = 0 gives a small cover of [0,1]") {
    const JetSource zero = [](double, int order) { return TaylorVec::line({0, 0}, {0, 0}, 1.0, order); };
    const auto charts = sublevel_charts(zero, 1.0, 2.0);
    REQUIRE_FALSE(charts.empty());
    CHECK(charts.size() <= 2);
    CHECK(sublevel_cover_misses(zero, 1.0, charts) == 0);
}

TEST_CASE("sublevel_charts: linear g") {
    const Curve g = segment({-0.5, 0}, {0.5, 0});
    const double a = 0.25;
    SublevelOptions opt;
    opt.budget = 1000;  // the caller's norm certificate fails here (||g||_1 = 1 > a)
    const auto charts = sublevel_charts(source_of(g), a, 2.0, opt);
    CHECK(sublevel_cover_misses(source_of(g), a, charts, 10001) == 0);
    double lo = 1, hi = 0;
    for (const auto& ch : charts) {
        lo = std::min(lo, ch.lo);
        hi = std::max(hi, ch.hi);
        // ||g o phi||_1 = (hi - lo) ||g'|| <= a / (12 e)
        CHECK(chart_first_norm(g, ch) <= a / (12 * kE) * (1 + kCertificateSlack));
    }
    CHECK(lo == doctest::Approx(0.25).epsilon(1e-9));
    CHECK(hi == doctest::Approx(0.75).epsilon(1e-9));
    CHECK(charts.size() >= static_cast<std::size_t>(std::ceil(0.5 / (a / (12 * kE)))));

    opt.budget = 3;
    CHECK_THROWS_AS(sublevel_charts(source_of(g), a, 2.0, opt), BudgetError);
}

TEST_CASE("sublevel_charts: oscillating g") {
    const Curve g = make_curve("sin10", SinTen{}, 7.0);
    const double a = 0.5;
    SublevelOptions opt;
    opt.budget = 10000;
    const auto charts = sublevel_charts(source_of(g), a, 2.0, opt);
    CHECK(sublevel_cover_misses(source_of(g), a, charts, 10001) == 0);
    for (const auto& ch : charts) CHECK(chart_first_norm(g, ch) <= a / (12 * kE) * (1 + kCertificateSlack));
    // Component ends agree with the fine-sampling oracle.
    const auto comps = sampled_components(g, a, 200001);
    for (const auto& [clo, chi] : comps) {
        bool lo_hit = false, hi_hit = false;
        for (const auto& ch : charts) {
            lo_hit = lo_hit || std::abs(ch.lo - clo) < 1e-5;
            hi_hit = hi_hit || std::abs(ch.hi - chi) < 1e-5;
        }
        CHECK(lo_hit);
        CHECK(hi_hit);
    }
}

TEST_CASE("BowenTracker and target_samples") {
    const auto maps = localize(builtin_system("cat"), {0.1, 0.2}, 12, 0.05);
    const Curve sigma = cat_unstable();
    BowenTracker tracker(maps, sigma);
    const double lam = (3 + std::sqrt(5.0)) / 2;
    for (std::size_t level = 0; level < 6; ++level) {
        CHECK(tracker.level() == level);
        // The Bowen set of the unstable segment is an interval of parameter length lam^-level.
        const double m = tracker.intervals().measure();
        CHECK(m >= std::pow(lam, -static_cast<double>(level)) * (1 - 1e-6));
        const auto ts = target_samples(maps, sigma, DefectSequence(level + 2, 1), level);
        CHECK(std::is_sorted(ts.begin(), ts.end()));
        CHECK(ts.size() > 100);
        for (double t : ts) {
            for (std::size_t i = 0; i <= level; ++i) CHECK(norm(maps.apply(i, sigma(t))) < 1.0);
        }
        tracker.advance();
    }
}

TEST_CASE("build_base_family and build_chart_family on identity maps") {
    const auto id = MapSequence::stationary(builtin_system("identity"));
    const Curve sigma = segment({0, 0}, {0.5, 0});
    const auto base = build_base_family(id, sigma, 2.0);
    CHECK(base.step == 0);
    CHECK_FALSE(base.charts.empty());
    CHECK(verify_chart_properties(base, id, sigma, {}, 2.0, 2001).all_passed());

    for (std::size_t n = 1; n <= 4; ++n) {
        const DefectSequence K(n - 1, 1);
        const auto fam = build_chart_family(id, sigma, K, 2.0);
        CHECK(fam.step == n);
        CHECK(fam.history.back().count == fam.charts.size());
        const auto rep = verify_chart_properties(fam, id, sigma, K, 2.0, 2001);
        CHECK(rep.all_passed());
        CHECK(rep.misses == 0);
        // Per-step factor from the construction's own arithmetic.
        const auto& d = fam.diagnostics;
        const double factor = (std::floor(std::exp(1.0)) + 1) * std::max(d.max_oscillation_split, 1) *
                              c_cover(2.0) * std::max(d.max_final_split, 1);
        for (std::size_t m = 1; m < fam.history.size(); ++m)
            CHECK(static_cast<double>(fam.history[m].count) <= factor * fam.history[m - 1].count);
    }
}

TEST_CASE("build_chart_family on diag(2, 1/2): properties and refinement") {
    const auto diag = diag_sequence();
    const Curve sigma = segment({-0.5, 0}, {0.5, 0});
    const DefectSequence K(4, 1);
    const auto fam = build_chart_family(diag, sigma, K, 2.0);
    const auto rep = verify_chart_properties(fam, diag, sigma, K, 2.0, 4001);
    CHECK(rep.image_in_bowen);
    CHECK(rep.norms_bounded);
    CHECK(rep.oscillation_small);
    CHECK(rep.covers_targets);
    CHECK(rep.count_bound);
    CHECK(rep.misses == 0);

    // Every step-(m+1) chart lies inside its parent at step m.
    for (std::size_t m = 1; m < fam.levels.size(); ++m)
        for (const auto& ch : fam.levels[m]) {
            REQUIRE(ch.lineage.parent >= 0);
            const auto& parent = fam.levels[m - 1][static_cast<std::size_t>(ch.lineage.parent)];
            CHECK(ch.lo >= parent.lo - 1e-15);
            CHECK(ch.hi <= parent.hi + 1e-15);
        }

    // Monotone branches: (T^n o sigma)' keeps its sign on every chart.
    for (const auto& ch : fam.charts) {
        const double first = diag.derivative(fam.step, sigma(ch(0))).a * sigma.derivative(ch(0)).x;
        for (int i = 1; i <= 50; ++i) {
            const double t = ch(i / 50.0);
            const double dx = (diag.derivative(fam.step, sigma(t)) * sigma.derivative(t)).x;
            CHECK(std::signbit(dx) == std::signbit(first));
        }
    }
}

TEST_CASE("verify_chart_properties: a single identity chart fails (ii) on diag data") {
    const auto diag = diag_sequence();
    const Curve sigma = segment({0, 0}, {0.1, 0});
    ChartFamily fam;
    fam.step = 4;
    fam.r = 2.0;
    fam.K = DefectSequence(3, 1);
    fam.charts = {AffineChart{}};
    fam.levels = {fam.charts};
    const auto rep = verify_chart_properties(fam, diag, sigma, fam.K, 2.0, 1001);
    CHECK_FALSE(rep.norms_bounded);
    // ||D(T^4 o sigma)|| = 16 ||sigma'|| = 1.6
    CHECK(rep.max_norm >= 1.6 - 1e-9);
}

TEST_CASE("derivative comparability inside a defect class (cat, curved sigma)") {
    const auto cat = MapSequence::stationary(builtin_system("cat"));
    const Curve sigma = polynomial_curve({{-0.02, -0.01}, {0.04, 0.01}, {0.0, 0.01}});
    const std::size_t n = 3;
    const DefectSequence K = defect_sequence(cat, sigma, 0.5, n - 1);
    const auto fam = build_chart_family(cat, sigma, K, 2.0);
    for (const auto& ch : fam.levels[n - 1]) {
        for (int i = 0; i <= 20; ++i)
            for (int j = 0; j <= 20; ++j) {
                const double t = ch(i / 20.0), s = ch(j / 20.0);
                const double an = norm(cat.derivative(n - 1, sigma(t)) * sigma.derivative(t));
                const double bn = norm(cat.derivative(n - 1, sigma(s)) * sigma.derivative(s));
                if (an / bn < 0.5 || an / bn > 2.0) continue;
                const double a1 = norm(cat.derivative(n, sigma(t)) * sigma.derivative(t));
                const double b1 = norm(cat.derivative(n, sigma(s)) * sigma.derivative(s));
                CHECK(a1 / b1 >= 1 / (4 * kE));
                CHECK(a1 / b1 <= 4 * kE);
            }
    }
}

TEST_CASE("build_chart_family preconditions") {
    const auto diag = diag_sequence();
    CHECK_THROWS_AS(build_chart_family(diag, segment({-2, 0}, {2, 0}), {}, 2.0), PreconditionError);
    const auto henon = localize(builtin_system("henon"), {0.1, 0.1}, 4, 0.1);
    CHECK_THROWS_AS(build_chart_family(henon, segment({-0.5, 0}, {0.5, 0}), {}, 2.0), PreconditionError);
    CHECK_THROWS_AS(build_chart_family(diag, segment({-0.5, 0}, {0.5, 0}), {0}, 2.0), DomainError);
}

TEST_CASE("fit_count_constants") {
    const auto ab = fit_count_constants({1, 2, 3, 4}, {1.0, 2.0, 3.0, 4.5});
    CHECK(ab.A == doctest::Approx(1.15));
    for (double m : {1.0, 2.0, 3.0, 4.0}) CHECK(ab.B + ab.A * m >= (m == 4.0 ? 4.5 : m) - 1e-12);
    const auto one = fit_count_constants({3}, {2.0});
    CHECK(one.A == 0.0);
    CHECK(one.B == 2.0);
}

TEST_CASE("reparametrize_bowen_ball: identity map has no hyperbolic times") {
    const auto id = builtin_system("identity");
    std::size_t size = 0;
    for (std::size_t n = 2; n <= 4; ++n) {
        const auto rep = reparametrize_bowen_ball(id, {0.3, 0.3}, segment({-0.5, 0}, {0.5, 0}), 0.5, 0.1, 2.0, n, 0.1, 2.0);
        if (n == 2) size = rep.charts.size();
        CHECK(rep.charts.size() == size);
        CHECK(rep.class_bound.empty);
    }
}

TEST_CASE("reparametrize_sequence: diag multiplicity matches the chart family") {
    const auto diag = diag_sequence();
    const Curve sigma = segment({-0.5, 0}, {0.5, 0});
    const auto rep = reparametrize_sequence(diag, sigma, std::log(2.0), 0.1, 2.0, 5, 2.0);
    REQUIRE(rep.classes.size() == 1);
    CHECK(rep.classes[0] == DefectSequence(4, 1));
    const auto fam = build_chart_family(diag, sigma, DefectSequence(4, 1), 2.0);
    CHECK(rep.charts.size() == fam.charts.size());
    for (const auto& lv : rep.levels) CHECK(lv.count == fam.levels[lv.n].size());
    CHECK(rep.lyapunov_term == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(rep.bound_holds);
    CHECK(rep.derivative_normalized);
    CHECK(rep.cover_misses == 0);
    CHECK(rep.class_bound.observed == 1);
}

TEST_CASE("calibration table") {
    CHECK(c_lk(1.0) == 1.0);
    CHECK(c_lk(0.5) == 1.0);
    const auto& t = calibration();
    CHECK(t.schema == "surfdyn-calibration-v1");
    double top = 0.0;
    for (const auto& [s, v] : t.c_cal) {
        CHECK(c_lk(s) == v);
        top = std::max(top, v);
    }
    CHECK(c_lk(7.25) == top);
    const auto round = calibration_from_json(calibration_to_json(t));
    CHECK(round.c_cal == t.c_cal);
    CHECK(round.c_cover == t.c_cover);
    CHECK_THROWS_AS(calibration_from_json("{"), SchemaError);
    CHECK_THROWS_AS(calibration_from_json(R"({"schema":"other"})"), SchemaError);
}
