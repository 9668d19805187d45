#include "surfdyn/curve_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "surfdyn/errors.hpp"

namespace surfdyn {

namespace {

double cross(Vec2 o, Vec2 a, Vec2 b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); }

double grid_point(std::size_t i, std::size_t n) {
    return static_cast<double>(i) / static_cast<double>(n - 1);
}

struct CubeFrame {
    Vec2 u;
    Vec2 v;
    bool inside(Vec2 p) const { return std::abs(dot(p, u)) <= 1.0 && std::abs(dot(p, v)) <= 1.0; }
};

// Parameter where sigma crosses out of the cube between t_in (inside) and
// t_out (outside); returns the outside end of the final bracket.
double exit_parameter(const Curve& sigma, const CubeFrame& cube, double t_in, double t_out) {
    for (int it = 0; it < 80 && std::abs(t_out - t_in) > 1e-15; ++it) {
        const double mid = 0.5 * (t_in + t_out);
        if (cube.inside(sigma(mid)))
            t_in = mid;
        else
            t_out = mid;
    }
    return t_out;
}

}  // namespace

double curve_length(const Curve& sigma, const IntervalUnion& restriction) {
    using boost::math::quadrature::gauss_kronrod;
    auto speed = [&sigma](double t) { return norm(sigma.derivative(t, 1)); };
    double total = 0.0;
    for (const auto& [lo, hi] : restriction.intervals) {
        if (lo < -1e-12 || hi > 1.0 + 1e-12) throw DomainError("restriction must lie in [0,1]");
        if (!(hi > lo)) continue;
        double err = 0.0;
        total += gauss_kronrod<double, 31>::integrate(speed, lo, hi, 15, 1e-12, &err);
    }
    return total;
}

bool is_hyperbolic_time(const MapSequence& maps, const Curve& sigma, const HyperbolicParams& p,
                        double t, double rho) {
    TaylorVec jet = sigma.expand(t, 1.0, 1);
    for (std::size_t i = 1; i <= p.n; ++i) {
        if (!(norm(jet.value()) < rho)) return false;
        jet = maps.map(i).push(jet);
        const double d = norm(jet.derivative(1));
        const double di = static_cast<double>(i);
        if (d < std::exp((p.chi - p.gamma) * di) / p.C) return false;
        if (d > p.C * std::exp((p.chi + p.gamma) * di)) return false;
    }
    return true;
}

HyperbolicTimeSet hyperbolic_time_set(const MapSequence& maps, const Curve& sigma,
                                      const HyperbolicParams& p, std::size_t cells, double rho) {
    if (!(p.chi > 0.0) || !(p.gamma > 0.0) || !(p.C > 1.0))
        throw PreconditionError("hyperbolic times need chi > 0, gamma > 0, C > 1");
    if (cells == 0) throw DomainError("hyperbolic_time_set needs at least one cell");
    HyperbolicTimeSet out;
    out.cells = cells;
    out.samples_per_cell = 3;
    const double h = 1.0 / static_cast<double>(cells);
    // Cell c has samples at c h, (c + 1/2) h, (c + 1) h; ends are shared.
    std::vector<char> ends(cells + 1);
    for (std::size_t c = 0; c <= cells; ++c)
        ends[c] = is_hyperbolic_time(maps, sigma, p, std::min(1.0, c * h), rho);
    for (std::size_t c = 0; c < cells; ++c) {
        const bool mid = is_hyperbolic_time(maps, sigma, p, (c + 0.5) * h, rho);
        const int pass = ends[c] + ends[c + 1] + (mid ? 1 : 0);
        const std::pair<double, double> cell{c * h, std::min(1.0, (c + 1) * h)};
        if (pass == 3) out.inner.intervals.push_back(cell);
        if (pass > 0) out.outer.intervals.push_back(cell);
    }
    out.inner.normalize();
    out.outer.normalize();
    return out;
}

VolumeGrowthReport local_volume_growth(const MapSequence& maps, const Curve& sigma,
                                       const HyperbolicParams& p, double rho, std::size_t cells) {
    if (p.n == 0) throw DomainError("volume growth needs n >= 1");
    VolumeGrowthReport rep;
    rep.n = p.n;
    rep.params = p;
    rep.rho = rho;
    const auto set = hyperbolic_time_set(maps, sigma, p, cells, std::min(rho, kBallRadius));
    rep.inner = set.inner;
    rep.outer = set.outer;
    const Curve image = image_curve(maps, sigma, p.n - 1);
    rep.raw_length = curve_length(image);
    rep.inner_length = curve_length(image, rep.inner);
    rep.outer_length = curve_length(image, rep.outer);
    return rep;
}

VolumeGrowthReport local_volume_growth(const SmoothMap& map, Vec2 x, const Curve& sigma,
                                       const HyperbolicParams& p, double eps, std::size_t cells) {
    return local_volume_growth(localize(map, x, p.n, eps), sigma, p, 1.0, cells);
}

double trim_length_bound() { return 2.0 * std::sqrt(3.0 * kDim); }

double point_set_diameter(std::vector<Vec2> pts) {
    if (pts.size() < 2) return 0.0;
    std::sort(pts.begin(), pts.end(),
              [](Vec2 a, Vec2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
    std::vector<Vec2> hull(2 * pts.size());
    std::size_t k = 0;
    for (const Vec2& p : pts) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
        hull[k++] = p;
    }
    for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
        while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k > 1 ? k - 1 : k);
    const std::size_t h = hull.size();
    if (h < 3) return h == 2 ? norm(hull[0] - hull[1]) : 0.0;
    // Rotating calipers: advance the antipodal vertex while the triangle area grows.
    auto area = [&](std::size_t i, std::size_t j, std::size_t m) {
        return std::abs(cross(hull[i], hull[j], hull[m]));
    };
    double best = 0.0;
    std::size_t j = 1;
    for (std::size_t i = 0; i < h; ++i) {
        const std::size_t i1 = (i + 1) % h;
        while (area(i, i1, (j + 1) % h) > area(i, i1, j)) j = (j + 1) % h;
        best = std::max({best, norm(hull[i] - hull[j]), norm(hull[i1] - hull[j])});
    }
    return best;
}

TrimResult oscillation_trim(const Curve& sigma, std::size_t grid, std::optional<double> witness) {
    if (grid < 3) throw DomainError("oscillation_trim needs at least 3 grid points");
    std::vector<Vec2> vals(grid), ders(grid);
    for (std::size_t i = 0; i < grid; ++i) {
        const TaylorVec j = sigma.expand(grid_point(i, grid), 1.0, 1);
        vals[i] = j.value();
        ders[i] = j.derivative(1);
    }
    TrimResult res;
    std::size_t iw = grid;
    for (std::size_t i = 0; i < grid; ++i)
        if (norm(vals[i]) < 1.0) {
            iw = i;
            break;
        }
    if (iw == grid) throw PreconditionError("oscillation_trim: the curve does not meet B(0,1)");

    res.min_speed = norm(ders[0]);
    for (const Vec2& d : ders) {
        res.c1 = std::max(res.c1, norm(d));
        res.min_speed = std::min(res.min_speed, norm(d));
    }
    if (!(res.c1 > 0.0)) throw PreconditionError("oscillation_trim: the curve is constant");
    res.oscillation = point_set_diameter(ders);
    if (res.oscillation > res.c1 / 3.0 * (1.0 + 1e-9))
        throw PreconditionError("oscillation_trim: oscillation of sigma' exceeds ||sigma||_1 / 3");

    res.w = grid_point(iw, grid);
    Vec2 dw = ders[iw];
    if (witness) {
        const TaylorVec j = sigma.expand(*witness, 1.0, 1);
        if (!(norm(j.value()) < 1.0))
            throw PreconditionError("oscillation_trim: witness is not in B(0,1)");
        res.w = *witness;
        dw = j.derivative(1);
        // Scan from the first grid point at or after the witness.
        iw = std::min(grid - 1, static_cast<std::size_t>(std::ceil(*witness * (grid - 1))));
    }
    const double nw = norm(dw);
    if (!(nw > 0.0)) throw PreconditionError("oscillation_trim: sigma'(w) vanishes");
    res.axis = dw / nw;
    const CubeFrame cube{res.axis, {-res.axis.y, res.axis.x}};

    res.b = 1.0;
    // Grid points strictly after and strictly before w.
    std::size_t up = iw;
    while (up < grid && grid_point(up, grid) <= res.w) ++up;
    double prev = res.w;
    for (std::size_t i = up; i < grid; ++i) {
        if (!cube.inside(vals[i])) {
            res.b = exit_parameter(sigma, cube, prev, grid_point(i, grid));
            break;
        }
        prev = grid_point(i, grid);
    }
    res.a = 0.0;
    prev = res.w;
    for (std::size_t i = up; i-- > 0;) {
        if (grid_point(i, grid) >= res.w) continue;
        if (!cube.inside(vals[i])) {
            res.a = exit_parameter(sigma, cube, prev, grid_point(i, grid));
            break;
        }
        prev = grid_point(i, grid);
    }
    return res;
}

TrimCertificate verify_trim(const Curve& sigma, const TrimResult& trim, std::size_t samples) {
    if (samples < 2) throw DomainError("verify_trim needs at least 2 samples");
    TrimCertificate cert;
    cert.covers_unit_ball = true;
    double c1 = 0.0, min_speed = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < samples; ++i) {
        const double t = grid_point(i, samples);
        const TaylorVec j = sigma.expand(t, 1.0, 1);
        const double sp = norm(j.derivative(1));
        c1 = std::max(c1, sp);
        min_speed = std::min(min_speed, sp);
        if (norm(j.value()) < 1.0 && (t < trim.a - 1e-12 || t > trim.b + 1e-12))
            cert.covers_unit_ball = false;
    }
    cert.inside_ball = true;
    const double limit = kBallRadius * (1.0 + 1e-9);
    for (std::size_t i = 0; i < samples; ++i) {
        const double t = trim.a + (trim.b - trim.a) * grid_point(i, samples);
        if (!(norm(sigma(t)) <= limit)) cert.inside_ball = false;
    }
    cert.length_ok = (trim.b - trim.a) * c1 <= trim_length_bound();
    cert.speed_ok = min_speed >= 2.0 / 3.0 * c1 - 1e-6 * std::max(1.0, c1);
    return cert;
}

LandauKolmogorovCheck landau_kolmogorov_check(const Curve& g, double s, double c_cal,
                                              const NormGrid& grid) {
    if (!(s > 0.0)) throw DomainError("Landau-Kolmogorov check needs s > 0");
    LandauKolmogorovCheck out;
    out.norm0 = holder_norm_estimate(g, 0.0, grid).value;
    out.norm_s = holder_norm_estimate(g, s, grid).value;
    const double denom = out.norm0 + out.norm_s;
    const int top = static_cast<int>(std::floor(s + 1e-12));
    for (int k = 0; k <= top; ++k) {
        const double nk = k == 0 ? out.norm0 : holder_norm_estimate(g, k, grid).value;
        const double ratio = denom > 0.0 ? nk / denom : 0.0;
        out.ratios.push_back(ratio);
        if (ratio > c_cal) out.holds = false;
    }
    return out;
}

OscilleSample sample_oscille_curve(std::mt19937_64& rng, std::size_t grid, std::size_t max_attempts) {
    if (grid < 3) throw DomainError("sample_oscille_curve needs at least 3 grid points");
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto direction = [&] {
        const double th = 2.0 * std::numbers::pi * unit(rng);
        return Vec2{std::cos(th), std::sin(th)};
    };
    for (std::size_t attempt = 1; attempt <= max_attempts; ++attempt) {
        const Vec2 c{3.0 * unit(rng) - 1.5, 3.0 * unit(rng) - 1.5};
        const Vec2 u = direction();
        const double L = std::exp(std::log(0.5) + unit(rng) * std::log(40.0));
        const Vec2 q2 = (0.5 * L * unit(rng)) * direction();
        const Vec2 q3 = (0.3 * L * unit(rng)) * direction();
        // c + L u s + q2 s^2 + q3 s^3 with s = t - 1/2, in powers of t.
        const Vec2 a0 = c - 0.5 * L * u + 0.25 * q2 - 0.125 * q3;
        const Vec2 a1 = L * u - q2 + 0.75 * q3;
        const Vec2 a2 = q2 - 1.5 * q3;
        const Vec2 a3 = q3;
        Curve sigma = polynomial_curve({a0, a1, a2, a3});

        bool meets = false;
        double c1 = 0.0;
        std::vector<Vec2> ders(grid);
        for (std::size_t i = 0; i < grid; ++i) {
            const TaylorVec j = sigma.expand(grid_point(i, grid), 1.0, 1);
            meets = meets || norm(j.value()) < 1.0;
            ders[i] = j.derivative(1);
            c1 = std::max(c1, norm(ders[i]));
        }
        if (!meets || !(c1 > 0.0)) continue;
        if (point_set_diameter(ders) > c1 / 3.0) continue;
        return {std::move(sigma), attempt};
    }
    throw BudgetError("sample_oscille_curve: no admissible curve in " + std::to_string(max_attempts) +
                      " attempts");
}

}  // namespace surfdyn
