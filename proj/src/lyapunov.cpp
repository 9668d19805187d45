#include "surfdyn/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "surfdyn/dynamics.hpp"
#include "surfdyn/errors.hpp"

namespace surfdyn {

namespace {

void check_e(int e) {
    if (e != 1 && e != 2) throw DomainError("exterior power e must be 1 or 2");
}

}  // namespace

OrbitSample OrbitSample::uniform(std::vector<Vec2> points) {
    OrbitSample s;
    const double w = points.empty() ? 0.0 : 1.0 / static_cast<double>(points.size());
    s.weights.assign(points.size(), w);
    s.points = std::move(points);
    return s;
}

void OrbitSample::validate() const {
    if (points.empty()) throw DomainError("empty orbit sample");
    if (points.size() != weights.size())
        throw DomainError("orbit sample has mismatched points and weights");
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) throw DomainError("orbit sample weights must be nonnegative");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-12) throw DomainError("orbit sample weights must sum to 1");
}

void CocycleAccumulator::step(const Mat2& jacobian) {
    ++steps_;
    const double det = jacobian.det();
    if (det == 0.0 || singular_) {
        singular_ = true;
        log_det_ = -std::numeric_limits<double>::infinity();
    } else {
        log_det_ += std::log(std::abs(det));
    }

    const Mat2 m = jacobian * q_;
    const Vec2 c0 = m.col0();
    const Vec2 c1 = m.col1();
    const double r11 = norm(c0);
    Vec2 q0 = r11 > 0.0 ? c0 / r11 : q_.col0();
    const Vec2 q1{-q0.y, q0.x};
    const Mat2 step{r11, dot(q0, c1), 0.0, dot(q1, c1)};
    q_ = Mat2::from_columns(q0, q1);
    r_ = step * r_;

    const double scale = std::max({std::abs(r_.a), std::abs(r_.b), std::abs(r_.d)});
    if (scale > 0.0) {
        r_ = (1.0 / scale) * r_;
        log_scale_ += std::log(scale);
    }
}

double CocycleAccumulator::log_norm() const {
    const double n = spectral_norm(r_);
    if (n == 0.0) return -std::numeric_limits<double>::infinity();
    return log_scale_ + std::log(n);
}

double log_plus_average(const SmoothMap& map, Vec2 x, std::size_t n) {
    if (n == 0) throw DomainError("log+ average needs n >= 1");
    const auto orbit = evaluate_orbit(map, x, n - 1);
    double sum = 0.0;
    for (const Vec2& p : orbit) sum += log_plus(spectral_norm(map.jacobian(p)));
    return sum / static_cast<double>(n);
}

LyapunovReport lyapunov_spectrum(const SmoothMap& map, Vec2 x, std::size_t n) {
    if (n < 10) throw PreconditionError("lyapunov_spectrum needs n >= 10");
    const auto orbit = evaluate_orbit(map, x, n - 1);
    LyapunovReport rep;
    rep.n_used = n;
    rep.convergence_trace.reserve(n);
    CocycleAccumulator acc;
    for (const Vec2& p : orbit) {
        acc.step(map.jacobian(p));
        rep.convergence_trace.push_back(acc.log_norm() / static_cast<double>(acc.steps()));
    }
    const double dn = static_cast<double>(n);
    const double chi1 = acc.log_norm() / dn;
    rep.singular = acc.singular();
    const double chi2 =
        rep.singular ? -std::numeric_limits<double>::infinity() : acc.log_det() / dn - chi1;
    rep.exponents = {chi1, std::min(chi1, chi2)};
    return rep;
}

double exterior_log_plus(int e, double log_norm, double log_det) {
    check_e(e);
    double v = std::max(log_norm, 0.0);
    if (e == 2) v = std::max(v, std::max(log_det, 0.0));
    return v;
}

std::vector<Vec2> sample_grid(const Domain& domain, std::size_t per_axis) {
    if (per_axis == 0) throw DomainError("sampling grid must have at least one point per axis");
    std::vector<Vec2> pts;
    pts.reserve(per_axis * per_axis);
    const double m = static_cast<double>(per_axis);
    for (std::size_t i = 0; i < per_axis; ++i)
        for (std::size_t j = 0; j < per_axis; ++j) {
            // Cell centers of a uniform subdivision of [0,1]^2, mapped onto the domain.
            const double u = (static_cast<double>(i) + 0.5) / m;
            const double v = (static_cast<double>(j) + 0.5) / m;
            Vec2 p = domain.is_torus()
                         ? Vec2{u, v}
                         : Vec2{domain.center.x + domain.radius * (2.0 * u - 1.0),
                                domain.center.y + domain.radius * (2.0 * v - 1.0)};
            if (domain.contains(p)) pts.push_back(p);
        }
    return pts;
}

ExteriorGrowth exterior_growth(const SmoothMap& map, int e, std::size_t n,
                               const std::vector<Vec2>& grid) {
    check_e(e);
    if (n == 0) throw DomainError("exterior_growth needs n >= 1");
    if (grid.empty()) throw DomainError("exterior_growth needs a nonempty grid");
    ExteriorGrowth out{e, n, 0.0, 0, 0};
    for (const Vec2& x : grid) {
        std::vector<Vec2> orbit;
        try {
            orbit = evaluate_orbit(map, x, n - 1);
        } catch (const EscapeError&) {
            ++out.points_skipped;
            continue;
        }
        CocycleAccumulator acc;
        for (const Vec2& p : orbit) acc.step(map.jacobian(p));
        const double v = exterior_log_plus(e, acc.log_norm(), acc.log_det());
        out.value = std::max(out.value, v / static_cast<double>(n));
        ++out.points_used;
    }
    return out;
}

std::vector<double> positive_sum_profile(const SmoothMap& map, const OrbitSample& sample, int e,
                                         std::size_t n_max) {
    check_e(e);
    sample.validate();
    if (n_max == 0) throw DomainError("n_max must be positive");
    std::vector<double> profile(n_max, 0.0);
    for (std::size_t i = 0; i < sample.points.size(); ++i) {
        const auto orbit = evaluate_orbit(map, sample.points[i], n_max - 1);
        CocycleAccumulator acc;
        for (std::size_t k = 0; k < n_max; ++k) {
            acc.step(map.jacobian(orbit[k]));
            profile[k] += sample.weights[i] * exterior_log_plus(e, acc.log_norm(), acc.log_det());
        }
    }
    return profile;
}

double empirical_positive_sum(const SmoothMap& map, const OrbitSample& sample, int e,
                              std::size_t n_max) {
    const auto profile = positive_sum_profile(map, sample, e, n_max);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < profile.size(); ++k)
        best = std::min(best, profile[k] / static_cast<double>(k + 1));
    return best;
}

}  // namespace surfdyn
