#include "surfdyn/reparametrization.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <tuple>

#include "surfdyn/calibration.hpp"
#include "surfdyn/curve_engine.hpp"
#include "surfdyn/errors.hpp"
#include "surfdyn/fit.hpp"

namespace surfdyn {

namespace {

constexpr double kE = std::numbers::e;
constexpr int kMaxHalvings = 40;
constexpr std::size_t kPieceNormGrid = 513;
constexpr std::size_t kTrackerSamples = 257;

bool same(double a, double b) { return std::abs(a - b) < 1e-12; }

/// Jet of tau -> g(t + L tau) from the jet of tau -> g(t + tau).
TaylorVec rescale(TaylorVec j, double L) {
    double f = 1.0;
    for (int k = 0; k <= j.order(); ++k) {
        if (k <= j.x.order()) j.x.coeff(k) *= f;
        if (k <= j.y.order()) j.y.coeff(k) *= f;
        f *= L;
    }
    return j;
}

/// Jet of the derivative (in the jet variable), one order lower.
TaylorVec differentiate(const TaylorVec& j) {
    const int o = std::max(j.order() - 1, 0);
    TaylorVec out{Taylor(0.0, o), Taylor(0.0, o)};
    for (int k = 0; k < j.order(); ++k) {
        if (k + 1 <= j.x.order()) out.x.coeff(k) = (k + 1) * j.x.coeff(k + 1);
        if (k + 1 <= j.y.order()) out.y.coeff(k) = (k + 1) * j.y.coeff(k + 1);
    }
    return out;
}

/// T^level o sigma.
struct LevelCurve {
    const MapSequence& maps;
    const Curve& sigma;
    std::size_t level;

    TaylorVec jet(double t, double scale, int order) const {
        return curve_jet(maps, sigma, level, t, scale, order);
    }
};

/// (T^level o sigma) o phi on [0,1].
JetSource chart_curve(const LevelCurve& c, double lo, double hi) {
    return [c, lo, hi](double t, int order) { return c.jet(lo + (hi - lo) * t, hi - lo, order); };
}

/// (T^level o sigma)' o phi on [0,1].
JetSource chart_derivative(const LevelCurve& c, double lo, double hi) {
    const double h = hi - lo;
    return [c, lo, h](double t, int order) {
        return (1.0 / h) * differentiate(c.jet(lo + h * t, h, order + 1));
    };
}

JetSource restrict_source(const JetSource& g, double lo, double hi) {
    return [g, lo, hi](double t, int order) { return rescale(g(lo + (hi - lo) * t, order), hi - lo); };
}

double sampled_norm(const JetSource& g, double s, std::size_t grid) {
    NormGrid ng;
    ng.curve_points = grid;
    return jet_norm(g, s, ng).value;
}

std::vector<double> unique_ladder(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end(), same), v.end());
    return v;
}

/// Bisection on the sign of f between an inside point and an outside point;
/// returns the outside end of the final bracket.
template <class F>
double boundary(const F& inside, double t_in, double t_out) {
    for (int it = 0; it < 80 && std::abs(t_out - t_in) > 1e-12; ++it) {
        const double mid = 0.5 * (t_in + t_out);
        if (inside(mid))
            t_in = mid;
        else
            t_out = mid;
    }
    return t_out;
}

/// Runs of `inside` on the sorted samples, with boundaries refined by bisection.
template <class F>
void inside_runs(const F& inside, const std::vector<double>& ts,
                 std::vector<std::pair<double, double>>& out) {
    const std::size_t n = ts.size();
    std::vector<char> in(n);
    for (std::size_t i = 0; i < n; ++i) in[i] = inside(ts[i]);
    std::size_t i = 0;
    while (i < n) {
        if (!in[i]) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < n && in[j + 1]) ++j;
        const double lo = i == 0 ? ts[0] : boundary(inside, ts[i], ts[i - 1]);
        const double hi = j + 1 == n ? ts[n - 1] : boundary(inside, ts[j], ts[j + 1]);
        out.emplace_back(lo, hi);
        i = j + 1;
    }
}

std::vector<double> uniform_points(double lo, double hi, std::size_t n) {
    std::vector<double> ts(n);
    for (std::size_t i = 0; i < n; ++i)
        ts[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    ts.back() = hi;
    return ts;
}

/// Samples of [0,1] in the tracked Bowen set at `level`, plus the uniform grid.
std::vector<double> candidate_samples(const MapSequence& maps, const Curve& sigma,
                                      std::size_t level, const TargetOptions& opt) {
    BowenTracker tracker(maps, sigma, opt.grid);
    while (tracker.level() < level) tracker.advance();
    std::vector<double> ts = uniform_points(0.0, 1.0, std::max<std::size_t>(opt.grid, 2));
    const auto& ivs = tracker.intervals().intervals;
    std::size_t per = opt.per_interval;
    if (ivs.size() > 10) per = std::max<std::size_t>(32, opt.per_interval * 10 / ivs.size());
    for (const auto& [p, q] : ivs)
        for (std::size_t j = 0; j < per; ++j)
            ts.push_back(p + (q - p) * (static_cast<double>(j) + 0.5) / static_cast<double>(per));
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
    return ts;
}

/// The order-1 jets of T^i o sigma at t for i = 0..level.
std::vector<TaylorVec> first_order_orbit(const MapSequence& maps, const Curve& sigma, double t,
                                         std::size_t level) {
    std::vector<TaylorVec> js;
    js.reserve(level + 1);
    js.push_back(sigma.expand(t, 1.0, 1));
    for (std::size_t i = 1; i <= level; ++i) js.push_back(maps.map(i).push(js.back()));
    return js;
}

bool in_unit_bowen(const std::vector<TaylorVec>& js) {
    for (const auto& j : js)
        if (!(norm(j.value()) < 1.0)) return false;
    return true;
}

/// k_i for the jets js (i >= 0); nullopt when the next derivative vanishes.
std::optional<int> defect_at(const MapSequence& maps, const std::vector<TaylorVec>& js,
                             std::size_t i) {
    const double di = norm(js[i].derivative(1));
    const double dn = norm(js[i + 1].derivative(1));
    if (!(dn > 0.0)) return std::nullopt;
    const double dt = spectral_norm(maps.map(i + 1).jacobian(js[i].value()));
    const double ratio = di * std::max(1.0, dt) / dn;
    return static_cast<int>(clamped_integer_part(std::log(std::max(ratio, 1.0)))) + 1;
}

bool matches_prefix(const MapSequence& maps, const std::vector<TaylorVec>& js,
                    const DefectSequence& K, std::size_t level) {
    for (std::size_t i = 1; i + 1 <= level; ++i) {
        const auto k = defect_at(maps, js, i);
        if (!k || *k != K[i - 1]) return false;
    }
    return true;
}

/// Merged chart images, for cover queries.
class CoverIndex {
  public:
    explicit CoverIndex(const std::vector<AffineChart>& charts) {
        for (const auto& c : charts) ivs_.emplace_back(c.lo - kCoverTolerance, c.hi + kCoverTolerance);
        std::sort(ivs_.begin(), ivs_.end());
        std::vector<std::pair<double, double>> merged;
        for (const auto& iv : ivs_) {
            if (!merged.empty() && iv.first <= merged.back().second)
                merged.back().second = std::max(merged.back().second, iv.second);
            else
                merged.push_back(iv);
        }
        ivs_ = std::move(merged);
    }
    bool covers(double t) const {
        auto it = std::upper_bound(ivs_.begin(), ivs_.end(), std::make_pair(t, 1e300));
        if (it == ivs_.begin()) return false;
        --it;
        return t <= it->second;
    }

  private:
    std::vector<std::pair<double, double>> ivs_;
};

std::pair<std::size_t, std::size_t> targets_in(const std::vector<double>& targets, double lo,
                                               double hi) {
    const auto b = std::lower_bound(targets.begin(), targets.end(), lo - kCoverTolerance);
    const auto e = std::upper_bound(targets.begin(), targets.end(), hi + kCoverTolerance);
    return {static_cast<std::size_t>(b - targets.begin()), static_cast<std::size_t>(e - targets.begin())};
}

bool meets(const std::vector<double>& targets, double lo, double hi) {
    const auto [b, e] = targets_in(targets, lo, hi);
    return b < e;
}

class Builder {
  public:
    Builder(const MapSequence& maps, const Curve& sigma, double r, const BuildOptions& opt,
            FamilyDiagnostics& diag)
        : maps_(maps), sigma_(sigma), r_(r), opt_(opt), diag_(diag),
          osc_ladder_(oscillation_ladder(r)) {}

    void regularize(std::size_t level, double lo, double hi, ChartLineage lin,
                    const std::vector<double>& targets, std::vector<AffineChart>& out) const {
        if (!(hi - lo >= kDegenerateChart)) {
            ++diag_.degenerate_discarded;
            return;
        }
        const auto [tb, te] = targets_in(targets, lo, hi);
        if (tb == te) {
            ++diag_.dropped_no_witness;
            return;
        }
        const double h = hi - lo;
        const double w = std::clamp((targets[tb] - lo) / h, 0.0, 1.0);
        const LevelCurve c{maps_, sigma_, level};
        const JetSource g = chart_derivative(c, lo, hi);
        const double gw = norm(g(w, 0).value());
        if (!(gw > 0.0))
            throw DegenerateTangencyError(level, "derivative of T^n o sigma vanishes at a witness");
        const double a = 4.0 * kE * gw;

        // (dess): ||g||_{r-1} <= 2 |g(w)|, enforced by halving.
        const double top = sampled_norm(g, r_ - 1.0, opt_.pipeline_grid);
        if (top > 2.0 * gw && lin.halvings < kMaxHalvings) {
            ++diag_.dess_halvings;
            ChartLineage half = lin;
            ++half.halvings;
            const double mid = lo + 0.5 * h;
            regularize(level, lo, mid, half, targets, out);
            regularize(level, mid, hi, half, targets, out);
            return;
        }

        SublevelOptions so;
        so.grid = opt_.sublevel_grid;
        for (std::size_t i = tb; i < te; ++i) so.extra_points.push_back(std::clamp((targets[i] - lo) / h, 0.0, 1.0));
        const auto xis = sublevel_charts(g, a, r_, so);
        diag_.sublevel_charts += xis.size();

        for (std::size_t x = 0; x < xis.size(); ++x) {
            const double xl = lo + h * xis[x].lo;
            const double xh = lo + h * xis[x].hi;
            if (!meets(targets, xl, xh)) continue;
            ChartLineage lx = lin;
            lx.xi = static_cast<int>(x);
            oscillation_stage(level, xl, xh, lx, targets, out);
        }
    }

  private:
    bool oscillation_ok(const LevelCurve& c, double lo, double hi) const {
        const JetSource g = chart_derivative(c, lo, hi);
        const double n0 = sampled_norm(g, 0.0, opt_.pipeline_grid);
        for (double s : osc_ladder_)
            if (sampled_norm(g, s, opt_.pipeline_grid) > opt_.margin * n0 / 3.0) return false;
        return true;
    }

    void oscillation_stage(std::size_t level, double lo, double hi, const ChartLineage& lin,
                           const std::vector<double>& targets, std::vector<AffineChart>& out) const {
        const LevelCurve c{maps_, sigma_, level};
        const Curve image = image_curve(maps_, sigma_, level);
        const int paper = diag_.paper_oscillation_split;
        const int limit = std::max(4 * paper, 64);
        const double h = hi - lo;
        for (int m = 1; m <= limit; ++m) {
            struct Piece {
                double lo, hi;
                int index;
                TrimResult trim;
            };
            std::vector<Piece> pieces;
            bool ok = true;
            for (int e = 0; e < m && ok; ++e) {
                const double pl = lo + h * e / m;
                const double ph = e + 1 == m ? hi : lo + h * (e + 1) / m;
                const auto [tb, te] = targets_in(targets, pl, ph);
                if (tb == te) continue;
                if (!oscillation_ok(c, pl, ph)) {
                    ok = false;
                    break;
                }
                const double w = std::clamp((targets[tb] - pl) / (ph - pl), 0.0, 1.0);
                try {
                    pieces.push_back({pl, ph, e, oscillation_trim(image.reparametrized(pl, ph), opt_.pipeline_grid, w)});
                } catch (const PreconditionError&) {
                    ok = false;
                }
            }
            if (!ok) continue;
            diag_.max_oscillation_split = std::max(diag_.max_oscillation_split, m);
            for (const Piece& p : pieces) {
                ChartLineage le = lin;
                le.eta = p.index;
                le.trim_a = p.trim.a;
                le.trim_b = p.trim.b;
                const double tl = p.lo + (p.hi - p.lo) * p.trim.a;
                const double th = p.lo + (p.hi - p.lo) * p.trim.b;
                final_stage(level, tl, th, le, targets, out);
            }
            return;
        }
        throw BudgetError("oscillation subdivision exceeded " + std::to_string(limit) + " pieces");
    }

    void final_stage(std::size_t level, double lo, double hi, const ChartLineage& lin,
                     const std::vector<double>& targets, std::vector<AffineChart>& out) const {
        if (!(hi - lo >= kDegenerateChart)) {
            ++diag_.degenerate_discarded;
            return;
        }
        const LevelCurve c{maps_, sigma_, level};
        const double first = sampled_norm(chart_curve(c, lo, hi), 1.0, opt_.pipeline_grid);
        int F = std::max(1, static_cast<int>(std::ceil(first / opt_.margin)));
        const double h = hi - lo;
        for (; F <= 4096; ++F) {
            std::vector<AffineChart> kept;
            bool ok = true;
            for (int f = 0; f < F && ok; ++f) {
                const double pl = lo + h * f / F;
                const double ph = f + 1 == F ? hi : lo + h * (f + 1) / F;
                if (!meets(targets, pl, ph)) continue;
                if (sampled_norm(chart_curve(c, pl, ph), 1.0, opt_.pipeline_grid) > opt_.margin ||
                    !oscillation_ok(c, pl, ph)) {
                    ok = false;
                    break;
                }
                ChartLineage lf = lin;
                lf.fin = f;
                kept.push_back({pl, ph, lf});
            }
            if (!ok) continue;
            diag_.max_final_split = std::max(diag_.max_final_split, F);
            for (auto& k : kept) {
                if (!(k.length() >= kDegenerateChart)) {
                    ++diag_.degenerate_discarded;
                    continue;
                }
                out.push_back(k);
            }
            return;
        }
        throw BudgetError("final normalizing subdivision exceeded 4096 pieces");
    }

    const MapSequence& maps_;
    const Curve& sigma_;
    double r_;
    const BuildOptions& opt_;
    FamilyDiagnostics& diag_;
    std::vector<double> osc_ladder_;
};

void check_family_preconditions(const MapSequence& maps, const Curve& sigma, double r) {
    for (double s : norm_ladder(r)) {
        const double v = holder_norm_estimate(sigma, s).value;
        if (v > 1.0 + kCertificateSlack)
            throw PreconditionError("sigma has ||sigma||_" + std::to_string(s) + " = " +
                                    std::to_string(v) + " > 1");
    }
    const double limit = 1.0 / precondition_constant(r);
    for (double s : norm_ladder(r)) {
        if (!(s > 1.0)) continue;
        const auto cert = maps.norm_bound(s);
        if (!cert)
            throw PreconditionError("no norm certificate for s = " + std::to_string(s) +
                                    " on the map sequence");
        if (*cert > limit * (1.0 + kCertificateSlack))
            throw PreconditionError("||T_n||_" + std::to_string(s) + " = " + std::to_string(*cert) +
                                    " exceeds 1/A_prec = " + std::to_string(limit));
    }
}

int first_step_defect(const MapSequence& maps, const Curve& sigma, const std::vector<double>& targets) {
    int k0 = 1;
    for (double t : targets) {
        const auto js = first_order_orbit(maps, sigma, t, 1);
        if (const auto k = defect_at(maps, js, 0)) k0 = std::max(k0, *k);
    }
    return k0;
}

void fill_certificates(ChartFamily& fam, const MapSequence& maps, const Curve& sigma,
                       const BuildOptions& opt) {
    fam.certificates.clear();
    const auto ladder = oscillation_ladder(fam.r);
    for (const auto& ch : fam.charts) {
        ChartCertificate cert;
        for (std::size_t k = 0; k <= fam.step; ++k)
            cert.max_first_norm = std::max(
                cert.max_first_norm,
                sampled_norm(chart_curve({maps, sigma, k}, ch.lo, ch.hi), 1.0, opt.pipeline_grid));
        const JetSource g = chart_derivative({maps, sigma, fam.step}, ch.lo, ch.hi);
        const double n0 = sampled_norm(g, 0.0, opt.pipeline_grid);
        for (double s : ladder)
            cert.oscillation_ratio =
                std::max(cert.oscillation_ratio, n0 > 0.0 ? sampled_norm(g, s, opt.pipeline_grid) / n0 : 0.0);
        fam.certificates.push_back(cert);
    }
}

void fit_family(ChartFamily& fam) {
    std::vector<double> ms, ys;
    for (const auto& rec : fam.history) {
        if (rec.count == 0) continue;
        ms.push_back(static_cast<double>(rec.step));
        ys.push_back(rec.normalized_log);
    }
    // The slope is fitted over the inductive steps only: level 0 is the base
    // cover and would bias A. B still covers every level.
    std::vector<double> sm, sy;
    for (std::size_t i = 0; i < ms.size(); ++i)
        if (ms[i] >= 1.0) {
            sm.push_back(ms[i]);
            sy.push_back(ys[i]);
        }
    LineFitAB ab = fit_count_constants(sm.size() >= 2 ? sm : ms, sm.size() >= 2 ? sy : ys);
    ab.B = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < ms.size(); ++i) ab.B = std::max(ab.B, ys[i] - ab.A * ms[i]);
    fam.A_fit = ab.A;
    fam.B_fit = ms.empty() ? 0.0 : ab.B;
}

double defect_sum(const DefectSequence& K, std::size_t m) {
    double s = 0.0;
    for (std::size_t i = 1; i + 1 <= m; ++i) s += K[i - 1];
    return s;
}

void record_level(ChartFamily& fam, std::size_t step, std::size_t targets, int split, int k) {
    LevelRecord rec;
    rec.step = step;
    rec.count = fam.levels.back().size();
    rec.targets = targets;
    rec.theta_split = split;
    rec.k = k;
    rec.normalized_log = rec.count > 0 ? std::log(static_cast<double>(rec.count)) -
                                             defect_sum(fam.K, step) / (fam.r - 1.0)
                                       : 0.0;
    fam.history.push_back(rec);
}

ChartFamily build_levels(const MapSequence& maps, const Curve& sigma, const DefectSequence& K,
                         std::size_t n, double r, const BuildOptions& opt) {
    if (!(r > 1.0)) throw DomainError("reparametrization needs r > 1");
    if (std::ceil(r) + 1 > kMaxJetOrder) throw DomainError("r too large for the jet order");
    for (int k : K)
        if (k < 1) throw DomainError("defect sequences have entries >= 1");
    if (opt.check_preconditions) check_family_preconditions(maps, sigma, r);

    ChartFamily fam;
    fam.step = n;
    fam.r = r;
    fam.K = K;
    fam.diagnostics.paper_oscillation_split =
        static_cast<int>(clamped_integer_part(3.0 * c_lk(r - 1.0))) + 1;
    fam.diagnostics.paper_final_split = static_cast<int>(clamped_integer_part(std::sqrt(kDim / 3.0))) + 1;
    Builder builder(maps, sigma, r, opt, fam.diagnostics);

    std::vector<AffineChart> level;
    {
        const auto targets = target_samples(maps, sigma, K, 0, opt.targets);
        builder.regularize(0, 0.0, 1.0, ChartLineage{}, targets, level);
        fam.levels.push_back(level);
        record_level(fam, 0, targets.size(), 1, 0);
    }
    for (std::size_t j = 1; j <= n; ++j) {
        const auto targets = target_samples(maps, sigma, K, j, opt.targets);
        int k;
        if (j == 1) {
            fam.k0 = first_step_defect(maps, sigma, targets);
            k = fam.k0;
        } else {
            k = K[j - 2];
        }
        const int split = static_cast<int>(clamped_integer_part(std::exp(k / (r - 1.0)))) + 1;
        std::vector<AffineChart> next;
        for (std::size_t p = 0; p < level.size(); ++p) {
            const AffineChart& parent = level[p];
            const double h = parent.length();
            for (int i = 0; i < split; ++i) {
                ChartLineage lin;
                lin.parent = static_cast<long>(p);
                lin.step = j;
                lin.theta = i;
                const double lo = parent.lo + h * i / split;
                const double hi = i + 1 == split ? parent.hi : parent.lo + h * (i + 1) / split;
                builder.regularize(j, lo, hi, lin, targets, next);
            }
        }
        level = std::move(next);
        fam.levels.push_back(level);
        record_level(fam, j, targets.size(), split, k);
    }
    fam.charts = level;
    fill_certificates(fam, maps, sigma, opt);
    fit_family(fam);
    return fam;
}

}  // namespace

std::vector<double> oscillation_ladder(double r) {
    const double rho = r - 1.0;
    std::vector<double> v{std::min(1.0, rho)};
    for (int k = 2; k <= static_cast<int>(std::floor(rho + 1e-12)); ++k) v.push_back(k);
    v.push_back(rho);
    return unique_ladder(v);
}

std::vector<double> norm_ladder(double r) {
    std::vector<double> v{1.0, std::min(2.0, r)};
    for (int k = 3; k <= static_cast<int>(std::floor(r + 1e-12)); ++k) v.push_back(k);
    v.push_back(r);
    return unique_ladder(v);
}

double precondition_constant(double r) {
    const double c_alg = r <= 2.0 ? 1.0 : std::pow(2.0, std::ceil(r));
    return 1e3 * c_alg;
}

double precondition_epsilon(const SmoothMap& map, double r) {
    double eps = 0.999 * map.domain().safe_radius / std::numbers::sqrt2;
    const double limit = 1.0 / precondition_constant(r);
    for (double s : norm_ladder(r)) {
        if (!(s > 1.0)) continue;
        const auto cert = map.norm_certificate(s);
        if (!cert)
            throw PreconditionError("no norm certificate for s = " + std::to_string(s) + " on " +
                                    map.name());
        if (*cert > 0.0) eps = std::min(eps, std::pow(limit / *cert, 1.0 / (s - 1.0)));
    }
    return eps;
}

std::vector<AffineChart> sublevel_charts(const JetSource& g, double a, double r,
                                         const SublevelOptions& opt) {
    if (!(a > 0.0)) throw DomainError("sublevel_charts needs a > 0");
    if (!(r > 1.0)) throw DomainError("sublevel_charts needs r > 1");
    if (opt.grid < 2) throw DomainError("sublevel_charts needs a grid of at least 2 points");
    const std::size_t budget =
        opt.budget > 0 ? opt.budget : static_cast<std::size_t>(std::floor(c_cover(r)));

    std::vector<double> ts = uniform_points(0.0, 1.0, opt.grid);
    for (double t : opt.extra_points)
        if (t >= 0.0 && t <= 1.0) ts.push_back(t);
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());

    auto inside = [&](double t) {
        const Vec2 v = g(t, 0).value();
        return dot(v, v) <= a * a;
    };
    std::vector<std::pair<double, double>> comps;
    inside_runs(inside, ts, comps);

    const auto ladder = oscillation_ladder(r);
    const double target = a / (12.0 * kE);
    auto piece_ok = [&](double lo, double hi) {
        const JetSource gp = restrict_source(g, lo, hi);
        for (double s : ladder)
            if (sampled_norm(gp, s, kPieceNormGrid) > target) return false;
        return true;
    };

    std::vector<AffineChart> charts;
    for (const auto& [lo, hi] : comps) {
        std::size_t p = 1;
        if (hi > lo) {
            const JetSource gc = restrict_source(g, lo, hi);
            for (double s : ladder) {
                const double m = sampled_norm(gc, s, kPieceNormGrid);
                if (m > 0.0) {
                    const double want = std::ceil(std::pow(m / (0.9 * target), 1.0 / s));
                    if (want > static_cast<double>(budget))
                        throw BudgetError("sublevel_charts: a component needs " +
                                          std::to_string(static_cast<long long>(want)) +
                                          " charts, budget " + std::to_string(budget));
                    p = std::max(p, static_cast<std::size_t>(want));
                }
            }
        }
        std::vector<std::tuple<double, double, int>> queue;
        for (std::size_t i = 0; i < p; ++i) {
            const double pl = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(p);
            const double ph = i + 1 == p ? hi : lo + (hi - lo) * static_cast<double>(i + 1) / static_cast<double>(p);
            queue.emplace_back(pl, ph, 0);
        }
        // Verify pieces in order, halving failures in place.
        for (std::size_t qi = 0; qi < queue.size(); ++qi) {
            const auto [pl, ph, depth] = queue[qi];
            if (ph > pl && !piece_ok(pl, ph)) {
                if (depth >= kMaxHalvings) throw BudgetError("sublevel_charts: halving did not converge");
                const double mid = 0.5 * (pl + ph);
                queue[qi] = {pl, mid, depth + 1};
                queue.insert(queue.begin() + static_cast<std::ptrdiff_t>(qi) + 1, {mid, ph, depth + 1});
                --qi;
                if (charts.size() + queue.size() > budget)
                    throw BudgetError("sublevel_charts: more than " + std::to_string(budget) +
                                      " charts needed");
                continue;
            }
        }
        for (const auto& [pl, ph, depth] : queue) {
            AffineChart c{pl, ph, {}};
            c.lineage.xi = static_cast<int>(charts.size());
            charts.push_back(c);
        }
        if (charts.size() > budget)
            throw BudgetError("sublevel_charts: more than " + std::to_string(budget) + " charts needed");
    }
    return charts;
}

std::size_t sublevel_cover_misses(const JetSource& g, double a,
                                  const std::vector<AffineChart>& charts, std::size_t grid) {
    const CoverIndex idx(charts);
    std::size_t misses = 0;
    for (double t : uniform_points(0.0, 1.0, std::max<std::size_t>(grid, 2))) {
        const Vec2 v = g(t, 0).value();
        if (dot(v, v) <= a * a && !idx.covers(t)) ++misses;
    }
    return misses;
}

BowenTracker::BowenTracker(const MapSequence& maps, const Curve& sigma, std::size_t grid)
    : maps_(maps), sigma_(sigma) {
    auto inside = [&](double t) { return norm(sigma_(t)) < 1.0; };
    inside_runs(inside, uniform_points(0.0, 1.0, std::max<std::size_t>(grid, 2)), set_.intervals);
}

void BowenTracker::advance() {
    ++level_;
    const std::size_t k = level_;
    auto inside = [&](double t) { return norm(maps_.apply(k, sigma_(t))) < 1.0; };
    IntervalUnion next;
    for (const auto& [p, q] : set_.intervals) {
        if (!(q > p)) {
            if (inside(p)) next.intervals.emplace_back(p, q);
            continue;
        }
        inside_runs(inside, uniform_points(p, q, kTrackerSamples), next.intervals);
    }
    set_ = std::move(next);
}

std::vector<double> target_samples(const MapSequence& maps, const Curve& sigma,
                                   const DefectSequence& K, std::size_t level,
                                   const TargetOptions& opt) {
    if (level >= 2 && K.size() + 1 < level)
        throw DomainError("defect sequence shorter than level - 1");
    std::vector<double> out;
    for (double t : candidate_samples(maps, sigma, level, opt)) {
        const auto js = first_order_orbit(maps, sigma, t, level);
        if (in_unit_bowen(js) && matches_prefix(maps, js, K, level)) out.push_back(t);
    }
    return out;
}

LineFitAB fit_count_constants(const std::vector<double>& ms, const std::vector<double>& ys) {
    LineFitAB ab;
    if (ms.empty()) return ab;
    if (ms.size() >= 2) {
        const LineFit f = fit_line(ms, ys);
        ab.A = f.slope;
    }
    ab.B = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < ms.size(); ++i) ab.B = std::max(ab.B, ys[i] - ab.A * ms[i]);
    return ab;
}

ChartFamily build_chart_family(const MapSequence& maps, const Curve& sigma,
                               const DefectSequence& K, double r, const BuildOptions& opt) {
    return build_levels(maps, sigma, K, K.size() + 1, r, opt);
}

ChartFamily build_base_family(const MapSequence& maps, const Curve& sigma, double r,
                              const BuildOptions& opt) {
    return build_levels(maps, sigma, {}, 0, r, opt);
}

PropertyReport verify_chart_properties(const ChartFamily& family, const MapSequence& maps,
                                       const Curve& sigma, const DefectSequence& K, double r,
                                       std::size_t grid, const TargetOptions& topt) {
    PropertyReport rep;
    const std::size_t n = family.step;
    const auto nl = norm_ladder(r);
    const auto ol = oscillation_ladder(r);
    const double radius_limit = kBallRadius * (1.0 + kCertificateSlack);
    for (const auto& ch : family.charts) {
        for (double t : uniform_points(0.0, 1.0, std::max<std::size_t>(grid, 2))) {
            Vec2 y = sigma(ch(t));
            double rad = norm(y);
            for (std::size_t k = 1; k <= n; ++k) {
                y = maps.map(k)(y);
                rad = std::max(rad, norm(y));
            }
            rep.max_radius = std::max(rep.max_radius, rad);
        }
        for (std::size_t k = 0; k <= n; ++k)
            for (double s : nl)
                rep.max_norm = std::max(rep.max_norm,
                                        sampled_norm(chart_curve({maps, sigma, k}, ch.lo, ch.hi), s, grid));
        const JetSource g = chart_derivative({maps, sigma, n}, ch.lo, ch.hi);
        const double n0 = sampled_norm(g, 0.0, grid);
        for (double s : ol) {
            const double v = sampled_norm(g, s, grid);
            const double ratio = n0 > 0.0 ? v / n0 : (v > 0.0 ? 1e300 : 0.0);
            rep.max_oscillation_ratio = std::max(rep.max_oscillation_ratio, ratio);
        }
    }
    rep.image_in_bowen = rep.max_radius < radius_limit;
    rep.norms_bounded = rep.max_norm <= 1.0 + kCertificateSlack;
    rep.oscillation_small = rep.max_oscillation_ratio <= 1.0 / 3.0 + kCertificateSlack;

    const auto targets = target_samples(maps, sigma, K, n, topt);
    const CoverIndex idx(family.charts);
    rep.targets = targets.size();
    for (double t : targets)
        if (!idx.covers(t)) ++rep.misses;
    rep.covers_targets = rep.misses == 0;

    rep.count_bound_value = family.B_fit + family.A_fit * static_cast<double>(n) +
                            defect_sum(K, n) / (r - 1.0);
    if (!family.charts.empty()) rep.log_count = std::log(static_cast<double>(family.charts.size()));
    rep.count_bound = rep.log_count <= rep.count_bound_value + 1e-9;
    return rep;
}

BowenReparamReport reparametrize_sequence(const MapSequence& maps, const Curve& sigma, double chi,
                                          double gamma, double C, std::size_t n, double r,
                                          const BuildOptions& opt) {
    if (!(chi > 0.0) || !(gamma > 0.0) || !(C > 1.0))
        throw PreconditionError("reparametrization needs chi > 0, gamma > 0, C > 1");
    if (n < 1) throw DomainError("reparametrization needs n >= 1");
    if (opt.check_preconditions) check_family_preconditions(maps, sigma, r);

    BowenReparamReport rep;
    rep.n = n;
    rep.r = r;
    rep.chi = chi;
    rep.gamma = gamma;
    rep.C = C;

    // Realized classes and the hyperbolic targets at each level.
    std::vector<std::set<DefectSequence>> classes(n + 1);
    std::vector<std::vector<double>> hyper(n + 1);
    for (std::size_t m = 1; m <= n; ++m) {
        const HyperbolicParams hp{chi, gamma, C, m};
        for (double t : candidate_samples(maps, sigma, m, opt.targets)) {
            const auto js = first_order_orbit(maps, sigma, t, m);
            if (!in_unit_bowen(js) || !is_hyperbolic_time(maps, sigma, hp, t, 1.0)) continue;
            DefectSequence K;
            bool ok = true;
            for (std::size_t i = 1; i + 1 <= m; ++i) {
                const auto k = defect_at(maps, js, i);
                if (!k) {
                    ok = false;
                    break;
                }
                K.push_back(*k);
            }
            if (!ok) continue;
            classes[m].insert(K);
            hyper[m].push_back(t);
        }
    }

    // Builds keyed by K; a longer build also serves its prefixes.
    std::map<DefectSequence, ChartFamily> builds;
    BuildOptions inner = opt;
    inner.check_preconditions = false;
    auto level_charts = [&](const DefectSequence& K, std::size_t m) -> const std::vector<AffineChart>& {
        for (const auto& [key, fam] : builds)
            if (key.size() >= K.size() && std::equal(K.begin(), K.end(), key.begin()) &&
                fam.levels.size() > m)
                return fam.levels[m];
        auto it = builds.emplace(K, build_chart_family(maps, sigma, K, r, inner)).first;
        return it->second.levels[m];
    };

    std::vector<double> ms, ys;
    for (std::size_t m = n; m >= 1; --m) {
        BowenReparamLevel lv;
        lv.n = m;
        lv.classes = classes[m].size();
        for (const auto& K : classes[m]) lv.count += level_charts(K, m).size();
        lv.lambda_plus = lambda_plus(maps, m);
        const double ex = lv.lambda_plus - chi;
        lv.lyapunov_term = (1.0 + bernoulli_entropy(static_cast<double>(clamped_integer_part(ex) + 3))) *
                           ex * static_cast<double>(m) / (r - 1.0);
        lv.log_count = lv.count > 0 ? std::log(static_cast<double>(lv.count)) : 0.0;
        rep.levels.push_back(lv);
        if (m == 1) break;
    }
    std::reverse(rep.levels.begin(), rep.levels.end());
    for (const auto& lv : rep.levels) {
        if (lv.count == 0) continue;
        ms.push_back(static_cast<double>(lv.n));
        ys.push_back(lv.log_count - lv.lyapunov_term);
    }
    const LineFitAB ab = fit_count_constants(ms, ys);
    rep.A_fit = ab.A;
    rep.B_fit = ms.empty() ? 0.0 : ab.B;

    for (const auto& K : classes[n]) {
        const auto& cs = level_charts(K, n);
        rep.charts.insert(rep.charts.end(), cs.begin(), cs.end());
        rep.classes.push_back(K);
    }
    const auto& top = rep.levels.back();
    rep.lambda_plus = top.lambda_plus;
    rep.lyapunov_term = top.lyapunov_term;
    rep.bound = rep.lyapunov_term + rep.A_fit * static_cast<double>(n) + rep.B_fit;
    rep.bound_holds = top.count == 0 || top.log_count <= rep.bound + 1e-9;

    for (const auto& ch : rep.charts)
        for (std::size_t l = 0; l <= n; ++l)
            rep.max_derivative = std::max(
                rep.max_derivative,
                sampled_norm(chart_curve({maps, sigma, l}, ch.lo, ch.hi), 1.0, opt.pipeline_grid));
    rep.derivative_normalized = rep.max_derivative <= 1.0 + kCertificateSlack;

    const CoverIndex idx(rep.charts);
    rep.hyperbolic_targets = hyper[n].size();
    for (double t : hyper[n])
        if (!idx.covers(t)) ++rep.cover_misses;

    rep.class_bound = realized_class_bound(maps, sigma, chi, gamma, C, n, hyper[n]);
    return rep;
}

BowenReparamReport reparametrize_bowen_ball(const SmoothMap& map, Vec2 x, const Curve& sigma,
                                            double chi, double gamma, double C, std::size_t n,
                                            double eps, double r, const BuildOptions& opt) {
    BowenReparamReport rep =
        reparametrize_sequence(localize(map, x, n, eps), sigma, chi, gamma, C, n, r, opt);
    rep.x = x;
    rep.eps = eps;
    return rep;
}

}  // namespace surfdyn
