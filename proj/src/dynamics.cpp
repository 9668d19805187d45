#include "surfdyn/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>

#include "surfdyn/errors.hpp"

namespace surfdyn {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool is_integer(double s) { return std::abs(s - std::round(s)) < 1e-12; }

int holder_base_order(double s) {
    // ceil(s - 1), with s in (0,1) giving 0.
    return std::max(0, static_cast<int>(std::ceil(s - 1.0 - 1e-12)));
}

// --- built-in systems -------------------------------------------------------

struct CatMap {
    template <class S>
    XY<S> operator()(const S& x, const S& y) const {
        return {2.0 * x + y, x + y};
    }
};

struct PerturbedCat {
    double mu;
    template <class S>
    XY<S> operator()(const S& x, const S& y) const {
        using std::sin;
        const S kick = (mu / kTwoPi) * sin(kTwoPi * x);
        return {2.0 * x + y + kick, x + y + kick};
    }
};

struct Doubling {
    double mx, my;
    template <class S>
    XY<S> operator()(const S& x, const S& y) const {
        return {mx * x, my * y};
    }
};

struct Henon {
    double a, b;
    template <class S>
    XY<S> operator()(const S& x, const S& y) const {
        return {1.0 - a * x * x + y, b * x};
    }
};

struct Standard {
    double k;
    template <class S>
    XY<S> operator()(const S& x, const S& y) const {
        using std::sin;
        const S kick = (k / kTwoPi) * sin(kTwoPi * x);
        return {x + y + kick, y + kick};
    }
};

struct Identity {
    template <class S>
    XY<S> operator()(const S& x, const S& y) const {
        return {x, y};
    }
};

struct DiagLinear {
    double l1, l2;
    template <class S>
    XY<S> operator()(const S& x, const S& y) const {
        return {l1 * x, l2 * y};
    }
};

class LocalizedModel final : public MapModel {
  public:
    LocalizedModel(SmoothMap base, Vec2 p, double eps)
        : base_(std::move(base)), p_(p), tp_(base_.lift(p)), eps_(eps) {}

    Vec2 value(Vec2 v) const override { return (base_.lift(p_ + eps_ * v) - tp_) / eps_; }
    TaylorVec push(const TaylorVec& c) const override {
        return (1.0 / eps_) * (base_.push(eps_ * c + p_) - tp_);
    }
    Mat2 jacobian(Vec2 v) const override { return base_.jacobian(p_ + eps_ * v); }
    int max_order() const override { return base_.model().max_order(); }

  private:
    SmoothMap base_;
    Vec2 p_;
    Vec2 tp_;
    double eps_;
};

class ParamReader {
  public:
    ParamReader(const std::string& system, const Params& params)
        : system_(system), params_(params) {}

    double real(const std::string& key, double fallback) {
        seen_.push_back(key);
        auto it = params_.find(key);
        if (it == params_.end()) return fallback;
        if (const double* v = std::get_if<double>(&it->second)) {
            if (!std::isfinite(*v))
                throw DomainError("parameter '" + key + "' of " + system_ + " is not finite");
            return *v;
        }
        throw DomainError("parameter '" + key + "' of " + system_ + " must be a real number");
    }

    void reject_unknown() const {
        for (const auto& [k, v] : params_)
            if (std::find(seen_.begin(), seen_.end(), k) == seen_.end())
                throw DomainError("unknown parameter '" + k + "' for system " + system_);
    }

  private:
    std::string system_;
    const Params& params_;
    std::vector<std::string> seen_;
};

double grid_sup_jacobian_norm(const SmoothMap& m) {
    NormGrid g;
    g.map_points = 64;
    return holder_norm_estimate(m, 1.0, g).value;
}

}  // namespace

// --- orbits -------------------------------------------------------------------

std::vector<Vec2> evaluate_orbit(const SmoothMap& map, Vec2 x, std::size_t n) {
    const Domain& dom = map.domain();
    if (!dom.contains(x)) throw EscapeError(0, "starting point outside the domain of " + map.name());
    std::vector<Vec2> out;
    out.reserve(n + 1);
    out.push_back(dom.reduce(x));
    for (std::size_t k = 1; k <= n; ++k) {
        const Vec2 next = map(out.back());
        if (!dom.contains(next)) throw EscapeError(k, "orbit escaped the domain of " + map.name());
        out.push_back(next);
    }
    return out;
}

Mat2 derivative_cocycle(const SmoothMap& map, Vec2 x, std::size_t n) {
    const auto orbit = evaluate_orbit(map, x, n == 0 ? 0 : n - 1);
    Mat2 d = Mat2::identity();
    for (std::size_t k = 0; k < n; ++k) d = map.jacobian(orbit[k]) * d;
    return d;
}

// --- norms --------------------------------------------------------------------

NormEstimate jet_norm(const JetSource& g, double s, const NormGrid& grid, double lo, double hi) {
    if (!(s >= 0.0)) throw DomainError("Holder exponent must be nonnegative");
    const std::size_t n = std::max<std::size_t>(grid.curve_points, 2);
    const double len = hi - lo;
    NormEstimate est{s, 0.0, n, len / static_cast<double>(n - 1)};
    auto at = [&](std::size_t i) { return lo + len * static_cast<double>(i) / (n - 1); };

    if (is_integer(s)) {
        const int k = static_cast<int>(std::round(s));
        for (std::size_t i = 0; i < n; ++i)
            est.value = std::max(est.value, norm(g(at(i), k).derivative(k)));
        return est;
    }
    const int m = holder_base_order(s);
    const double alpha = s - m;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = at(i);
        const Vec2 base = g(t, m).derivative(m);
        for (double h : grid.steps) {
            if (!(h < len) || t + h > hi) continue;
            const Vec2 other = g(t + h, m).derivative(m);
            est.value = std::max(est.value, norm(other - base) / std::pow(h, alpha));
        }
    }
    return est;
}

NormEstimate holder_norm_estimate(const Curve& curve, double s, const NormGrid& grid) {
    if (s > curve.smoothness() + 1e-12)
        throw DomainError("unsupported smoothness: s = " + std::to_string(s) + " exceeds r = " +
                          std::to_string(curve.smoothness()));
    return jet_norm([&curve](double t, int order) { return curve.expand(t, 1.0, order); }, s,
                    grid);
}

NormEstimate holder_norm_estimate(const SmoothMap& map, double s, const NormGrid& grid) {
    if (s > map.smoothness() + 1e-12)
        throw DomainError("unsupported smoothness: s = " + std::to_string(s) + " exceeds r = " +
                          std::to_string(map.smoothness()));
    if (!(s > 0.0)) throw DomainError("map Holder norms need s > 0");
    const Domain& dom = map.domain();
    const std::size_t g = std::max<std::size_t>(grid.map_points, 2);

    std::vector<Vec2> pts;
    pts.reserve(g * g);
    double spacing = 0.0;
    if (dom.is_torus()) {
        spacing = 1.0 / static_cast<double>(g);
        for (std::size_t i = 0; i < g; ++i)
            for (std::size_t j = 0; j < g; ++j) pts.push_back({i * spacing, j * spacing});
    } else {
        spacing = 2.0 * dom.radius / static_cast<double>(g - 1);
        for (std::size_t i = 0; i < g; ++i)
            for (std::size_t j = 0; j < g; ++j) {
                const Vec2 p{dom.center.x - dom.radius + i * spacing,
                             dom.center.y - dom.radius + j * spacing};
                if (dom.contains(p)) pts.push_back(p);
            }
    }

    NormEstimate est{s, 0.0, pts.size(), spacing};
    if (is_integer(s)) {
        const int k = static_cast<int>(std::round(s));
        for (const Vec2& p : pts) est.value = std::max(est.value, map.derivative_norm(p, k));
        return est;
    }

    const int m = holder_base_order(s);
    const double alpha = s - m;
    const double r2 = std::numbers::sqrt2 / 2.0;
    const Vec2 dirs[] = {{1.0, 0.0}, {0.0, 1.0}, {r2, r2}, {r2, -r2}};
    constexpr int kTensorDirections = 36;
    auto difference = [&](Vec2 p, Vec2 q) {
        if (m == 0) return norm(map.lift(q) - map.lift(p));
        if (m == 1) return spectral_norm(map.jacobian(q) - map.jacobian(p));
        double best = 0.0;
        for (int j = 0; j < kTensorDirections; ++j) {
            const double th = std::numbers::pi * j / kTensorDirections;
            const Vec2 v{std::cos(th), std::sin(th)};
            const Vec2 dp = map.directional_jet(p, v, m).derivative(m);
            const Vec2 dq = map.directional_jet(q, v, m).derivative(m);
            best = std::max(best, norm(dq - dp));
        }
        return best;
    };
    for (const Vec2& p : pts)
        for (const Vec2& e : dirs)
            for (double h : grid.steps) {
                const Vec2 q = p + h * e;
                if (!dom.contains(q)) continue;
                est.value = std::max(est.value, difference(p, q) / std::pow(h, alpha));
            }
    return est;
}

// --- built-in systems ---------------------------------------------------------

const std::vector<std::string>& builtin_system_names() {
    static const std::vector<std::string> names = {
        "cat", "doubling2d", "henon", "standard", "identity", "diag_linear", "perturbed_cat"};
    return names;
}

SmoothMap builtin_system(const std::string& name, const Params& params) {
    ParamReader p(name, params);
    const double r = p.real("r", 2.0);
    if (!(r > 1.0)) throw DomainError("system smoothness r must exceed 1");
    const int top = static_cast<int>(std::ceil(r - 1e-12));

    // Certificates for s = 1..ceil(r), plus s = r itself.
    auto certs = [&](auto&& fn) {
        std::map<double, double> out;
        for (int s = 1; s <= top; ++s) out[static_cast<double>(s)] = fn(static_cast<double>(s));
        out[r] = fn(r);
        return out;
    };

    if (name == "cat") {
        p.reject_unknown();
        const double lam = (3.0 + std::sqrt(5.0)) / 2.0;
        return make_map("cat", CatMap{}, Domain::torus(), r)
            .with_norms(certs([&](double s) { return s <= 1.0 ? lam : 0.0; }), true);
    }
    if (name == "doubling2d") {
        const double mx = p.real("mx", 2.0);
        const double my = p.real("my", 2.0);
        p.reject_unknown();
        if (mx != std::round(mx) || my != std::round(my) || mx < 1.0 || my < 1.0)
            throw DomainError("doubling2d factors must be positive integers");
        return make_map("doubling2d", Doubling{mx, my}, Domain::torus(), r)
            .with_norms(certs([&](double s) { return s <= 1.0 ? std::max(mx, my) : 0.0; }), true);
    }
    if (name == "identity") {
        p.reject_unknown();
        return make_map("identity", Identity{}, Domain::torus(), r)
            .with_norms(certs([](double s) { return s <= 1.0 ? 1.0 : 0.0; }), true);
    }
    if (name == "diag_linear") {
        const double l1 = p.real("l1", 2.0);
        const double l2 = p.real("l2", 0.5);
        const double radius = p.real("radius", 1e3);
        p.reject_unknown();
        if (!(radius > 0.0)) throw DomainError("diag_linear radius must be positive");
        return make_map("diag_linear", DiagLinear{l1, l2}, Domain::box({0.0, 0.0}, radius, 0.25),
                        r)
            .with_norms(certs([&](double s) {
                            return s <= 1.0 ? std::max(std::abs(l1), std::abs(l2)) : 0.0;
                        }),
                        true);
    }
    if (name == "henon") {
        const double a = p.real("a", 1.4);
        const double b = p.real("b", 0.3);
        const double radius = p.real("radius", 2.0);
        p.reject_unknown();
        if (!(radius > 0.0)) throw DomainError("henon radius must be positive");
        SmoothMap m =
            make_map("henon", Henon{a, b}, Domain::box({0.0, 0.0}, radius, 0.25), r);
        const double d1 = grid_sup_jacobian_norm(m);
        // D^2 T [v, v] = (-2 a v_x^2, 0); Holder quotients of D T are <= 2|a|.
        return m.with_norms(certs([&](double s) {
                                if (s <= 1.0) return d1;
                                if (s <= 2.0) return 2.0 * std::abs(a);
                                return 0.0;
                            }),
                            false);
    }
    if (name == "standard" || name == "perturbed_cat") {
        const bool standard = name == "standard";
        const double k = p.real(standard ? "k" : "mu", standard ? 0.9 : 0.1);
        p.reject_unknown();
        SmoothMap m = standard ? make_map(name, Standard{k}, Domain::torus(), r)
                               : make_map(name, PerturbedCat{k}, Domain::torus(), r);
        const double d1 = grid_sup_jacobian_norm(m);
        // D^j T [v..v] = (2 pi)^{j-1} k * trig(2 pi x) v_x^j (1, 1).
        return m.with_norms(certs([&](double s) {
                                if (s <= 1.0) return d1;
                                const int j = static_cast<int>(std::ceil(s - 1e-12));
                                return std::numbers::sqrt2 * std::abs(k) *
                                       std::pow(kTwoPi, static_cast<double>(j - 1));
                            }),
                            false);
    }
    throw DomainError("unknown system '" + name + "'");
}

// --- localization -------------------------------------------------------------

MapSequence localize(const SmoothMap& map, Vec2 x, std::size_t n, double eps) {
    if (!(eps > 0.0)) throw PreconditionError("localization scale eps must be positive");
    const double limit = map.domain().safe_radius / kBallRadius;
    if (!(eps < limit))
        throw PreconditionError("eps = " + std::to_string(eps) +
                                " too large for chart validity (need eps < R/sqrt(d) = " +
                                std::to_string(limit) + ")");
    const auto orbit = evaluate_orbit(map, x, n == 0 ? 0 : n - 1);

    std::map<double, double> certs;
    for (const auto& [s, c] : map.norm_certificates())
        if (s >= 1.0) certs[s] = c * std::pow(eps, s - 1.0);

    std::vector<SmoothMap> maps;
    maps.reserve(n);
    for (std::size_t k = 1; k <= n; ++k) {
        maps.emplace_back(map.name() + "@loc" + std::to_string(k),
                          std::make_shared<LocalizedModel>(map, orbit[k - 1], eps),
                          Domain::ball({0.0, 0.0}, kBallRadius), map.smoothness(),
                          map.exact_jets());
        maps.back() = maps.back().with_norms(certs, map.norms_exact());
    }
    return MapSequence(std::move(maps));
}

}  // namespace surfdyn
