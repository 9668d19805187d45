#include "surfdyn/entropy.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <numbers>
#include <random>
#include <unordered_map>

#include "surfdyn/dynamics.hpp"
#include "surfdyn/errors.hpp"
#include "surfdyn/fit.hpp"
#include "surfdyn/lyapunov.hpp"

namespace surfdyn {

namespace {

double unit_uniform(std::mt19937_64& rng) {
    // 53 random bits; independent of the standard library's distributions.
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

using CellKey = std::array<std::int64_t, 4>;

struct CellKeyHash {
    std::size_t operator()(const CellKey& k) const {
        std::uint64_t h = 1469598103934665603ull;
        for (std::int64_t v : k) {
            h ^= static_cast<std::uint64_t>(v) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
        }
        return static_cast<std::size_t>(h);
    }
};

// Buckets points by the cells of their positions at times 0 and n-1. Two
// points at d_n-distance < delta lie in neighboring cells in every coordinate.
class CellIndex {
  public:
    CellIndex(const OrbitTable& table, std::size_t n, double delta)
        : table_(table), last_(n - 1), delta_(delta) {
        torus_ = table.domain().is_torus();
        if (torus_) cells_ = std::max<std::int64_t>(1, static_cast<std::int64_t>(1.0 / delta));
    }

    void insert(std::size_t i) { buckets_[key(i)].push_back(i); }

    /// True when some inserted point is within delta of i in d_n.
    bool conflicts(std::size_t i, std::size_t n) const {
        const CellKey k = key(i);
        std::array<std::array<std::int64_t, 3>, 4> opts{};
        std::array<int, 4> count{};
        for (int c = 0; c < 4; ++c) count[c] = neighbors(k[c], opts[c]);
        CellKey probe{};
        for (int a = 0; a < count[0]; ++a) {
            probe[0] = opts[0][a];
            for (int b = 0; b < count[1]; ++b) {
                probe[1] = opts[1][b];
                for (int c = 0; c < count[2]; ++c) {
                    probe[2] = opts[2][c];
                    for (int d = 0; d < count[3]; ++d) {
                        probe[3] = opts[3][d];
                        auto it = buckets_.find(probe);
                        if (it == buckets_.end()) continue;
                        for (std::size_t j : it->second)
                            if (table_.bowen_distance(i, j, n) < delta_) return true;
                    }
                }
            }
        }
        return false;
    }

  private:
    std::int64_t cell(double v) const {
        if (torus_) return std::min(cells_ - 1, static_cast<std::int64_t>(std::floor(v * cells_)));
        return static_cast<std::int64_t>(std::floor(v / delta_));
    }

    CellKey key(std::size_t i) const {
        const Vec2 p = table_.at(i, 0);
        const Vec2 q = table_.at(i, last_);
        return {cell(p.x), cell(p.y), cell(q.x), cell(q.y)};
    }

    int neighbors(std::int64_t c, std::array<std::int64_t, 3>& out) const {
        if (!torus_) {
            out = {c - 1, c, c + 1};
            return 3;
        }
        if (cells_ <= 3) {
            for (std::int64_t v = 0; v < cells_; ++v) out[static_cast<std::size_t>(v)] = v;
            return static_cast<int>(cells_);
        }
        out = {(c + cells_ - 1) % cells_, c, (c + 1) % cells_};
        return 3;
    }

    const OrbitTable& table_;
    std::size_t last_;
    double delta_;
    bool torus_ = false;
    std::int64_t cells_ = 1;
    std::unordered_map<CellKey, std::vector<std::size_t>, CellKeyHash> buckets_;
};

void check_delta(double delta) {
    if (!(delta > 0.0)) throw DomainError("separation scale delta must be positive");
}

std::vector<std::size_t> iota_indices(std::size_t n) {
    std::vector<std::size_t> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = i;
    return v;
}

std::size_t max_n(const std::vector<std::size_t>& n_range) {
    std::size_t m = 0;
    for (std::size_t n : n_range) {
        if (n == 0) throw DomainError("n values must be positive");
        m = std::max(m, n);
    }
    return m;
}

// Exact maximum independent set size in the conflict graph (bitmasks, <= 20 vertices).
std::size_t max_independent(const std::vector<std::uint32_t>& adj, std::uint32_t avail) {
    if (avail == 0) return 0;
    const int v = std::countr_zero(avail);
    const std::uint32_t rest = avail & ~(1u << v);
    const std::size_t with = 1 + max_independent(adj, rest & ~adj[static_cast<std::size_t>(v)]);
    if ((adj[static_cast<std::size_t>(v)] & rest) == 0) return with;
    return std::max(with, max_independent(adj, rest));
}

}  // namespace

std::vector<Vec2> make_pool(const Domain& domain, const PoolSpec& spec) {
    if (spec.size == 0) throw DomainError("pool size must be positive");
    if (spec.kind == PoolSpec::Kind::Grid) {
        const auto per_axis =
            static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(spec.size))));
        return sample_grid(domain, std::max<std::size_t>(per_axis, 1));
    }
    std::mt19937_64 rng(spec.seed);
    std::vector<Vec2> pts;
    pts.reserve(spec.size);
    while (pts.size() < spec.size) {
        const double u = unit_uniform(rng);
        const double v = unit_uniform(rng);
        const Vec2 p = domain.is_torus()
                           ? Vec2{u, v}
                           : Vec2{domain.center.x + domain.radius * (2.0 * u - 1.0),
                                  domain.center.y + domain.radius * (2.0 * v - 1.0)};
        if (domain.contains(p)) pts.push_back(p);
    }
    return pts;
}

OrbitTable::OrbitTable(const SmoothMap& map, const std::vector<Vec2>& points, std::size_t length,
                       bool drop_escaping)
    : domain_(map.domain()), length_(length) {
    if (length == 0) throw DomainError("orbit table needs length >= 1");
    orbits_.reserve(points.size() * length);
    for (std::size_t i = 0; i < points.size(); ++i) {
        std::vector<Vec2> orbit;
        try {
            orbit = evaluate_orbit(map, points[i], length - 1);
        } catch (const EscapeError&) {
            if (!drop_escaping) throw;
            ++dropped_;
            continue;
        }
        kept_.push_back(i);
        orbits_.insert(orbits_.end(), orbit.begin(), orbit.end());
    }
}

double OrbitTable::bowen_distance(std::size_t i, std::size_t j, std::size_t n) const {
    double d = 0.0;
    const Vec2* a = &orbits_[i * length_];
    const Vec2* b = &orbits_[j * length_];
    for (std::size_t k = 0; k < n; ++k) d = std::max(d, domain_.distance(a[k], b[k]));
    return d;
}

std::vector<std::size_t> greedy_separated(const OrbitTable& table, std::size_t n, double delta,
                                          const std::vector<std::size_t>& candidates,
                                          const std::vector<std::size_t>& seed) {
    check_delta(delta);
    if (n == 0 || n > table.length()) throw DomainError("n outside the orbit table length");
    CellIndex index(table, n, delta);
    std::vector<std::size_t> chosen = seed;
    std::vector<bool> taken(table.size(), false);
    for (std::size_t i : seed) {
        index.insert(i);
        taken[i] = true;
    }
    for (std::size_t i : candidates) {
        if (taken[i] || index.conflicts(i, n)) continue;
        index.insert(i);
        taken[i] = true;
        chosen.push_back(i);
    }
    return chosen;
}

std::vector<Vec2> maximal_separated_set(const SmoothMap& map, const std::vector<Vec2>& pool,
                                        std::size_t n, double delta) {
    check_delta(delta);
    if (pool.empty()) return {};
    if (n == 0) throw DomainError("n must be positive");
    const OrbitTable table(map, pool, n);
    std::vector<Vec2> out;
    for (std::size_t i : greedy_separated(table, n, delta, iota_indices(table.size())))
        out.push_back(pool[table.source(i)]);
    return out;
}

double bowen_distance(const SmoothMap& map, Vec2 x, Vec2 y, std::size_t n) {
    const auto ox = evaluate_orbit(map, x, n == 0 ? 0 : n - 1);
    const auto oy = evaluate_orbit(map, y, n == 0 ? 0 : n - 1);
    double d = 0.0;
    for (std::size_t k = 0; k < n; ++k) d = std::max(d, map.domain().distance(ox[k], oy[k]));
    return d;
}

bool in_bowen_ball(const SmoothMap& map, Vec2 x, Vec2 y, std::size_t n, double eps) {
    return bowen_distance(map, x, y, n) < eps;
}

void fit_growth(EntropyEstimate& est) {
    if (est.n_range.size() != est.counts.size() || est.counts.empty())
        throw DomainError("growth fit needs one count per n");
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < est.counts.size(); ++i) {
        xs.push_back(static_cast<double>(est.n_range[i]));
        ys.push_back(std::log(static_cast<double>(std::max<std::size_t>(est.counts[i], 1))));
    }
    est.degenerate = std::all_of(est.counts.begin(), est.counts.end(),
                                 [&](std::size_t c) { return c == est.counts.front(); });
    const LineFit f = fit_line(xs, ys);
    est.slope = est.degenerate ? 0.0 : f.slope;
    est.slope_stderr = est.degenerate ? 0.0 : f.slope_stderr;
    est.value = std::max(est.slope, 0.0);
}

EntropyEstimate topological_entropy_estimate(const SmoothMap& map, const PoolSpec& pool,
                                             const std::vector<std::size_t>& n_range,
                                             double delta) {
    check_delta(delta);
    if (n_range.size() < 4) throw PreconditionError("entropy fit needs at least 4 values of n");
    if (!std::is_sorted(n_range.begin(), n_range.end()))
        throw PreconditionError("n_range must be increasing");
    const auto points = make_pool(map.domain(), pool);
    const OrbitTable table(map, points, max_n(n_range), true);
    const auto candidates = iota_indices(table.size());

    EntropyEstimate est;
    est.n_range = n_range;
    est.delta = delta;
    est.pool_size = table.size();
    est.pool_dropped = table.dropped();
    std::vector<std::size_t> set;
    for (std::size_t n : n_range) {
        set = greedy_separated(table, n, delta, candidates, set);
        est.counts.push_back(set.size());
    }
    fit_growth(est);
    return est;
}

std::vector<std::size_t> separated_counts_over_delta(const OrbitTable& table, std::size_t n,
                                                     const std::vector<double>& deltas) {
    if (!std::is_sorted(deltas.rbegin(), deltas.rend()))
        throw PreconditionError("delta ladder must be decreasing");
    const auto candidates = iota_indices(table.size());
    std::vector<std::size_t> set, counts;
    for (double d : deltas) {
        set = greedy_separated(table, n, d, candidates, set);
        counts.push_back(set.size());
    }
    return counts;
}

double local_entropy(const SmoothMap& map, Vec2 x, const std::vector<Vec2>& F, std::size_t n,
                     double delta, double eps) {
    check_delta(delta);
    if (!(delta < eps)) throw PreconditionError("local entropy needs delta < eps");
    if (n == 0) throw DomainError("n must be positive");
    if (F.empty()) return 0.0;
    std::vector<Vec2> pts{x};
    pts.insert(pts.end(), F.begin(), F.end());
    const OrbitTable table(map, pts, n);
    std::vector<std::size_t> members;
    for (std::size_t i = 1; i < table.size(); ++i)
        if (table.bowen_distance(0, i, n) < eps) members.push_back(i);
    if (members.empty()) return 0.0;

    if (members.size() <= 20) {
        std::vector<std::uint32_t> adj(members.size(), 0);
        for (std::size_t a = 0; a < members.size(); ++a)
            for (std::size_t b = a + 1; b < members.size(); ++b)
                if (table.bowen_distance(members[a], members[b], n) < delta) {
                    adj[a] |= 1u << b;
                    adj[b] |= 1u << a;
                }
        const std::uint32_t all = (1u << members.size()) - 1u;
        return std::log(static_cast<double>(max_independent(adj, all)));
    }
    return std::log(static_cast<double>(greedy_separated(table, n, delta, members).size()));
}

EntropyEstimate local_entropy_rate(const SmoothMap& map, Vec2 x, const std::vector<Vec2>& F,
                                   const std::vector<std::size_t>& n_range, double delta,
                                   double eps) {
    EntropyEstimate est;
    est.n_range = n_range;
    est.delta = delta;
    est.eps = eps;
    est.method = "local";
    est.pool_size = F.size();
    for (std::size_t n : n_range)
        est.counts.push_back(static_cast<std::size_t>(
            std::llround(std::exp(local_entropy(map, x, F, n, delta, eps)))));
    fit_growth(est);
    return est;
}

std::size_t greedy_spanning_count(const OrbitTable& table, std::size_t n, double delta,
                                  const std::vector<std::size_t>& targets) {
    // Each uncovered target opens a new d_n-ball; the opened centers are then
    // delta-separated, so the greedy separated pass computes exactly this cover.
    return greedy_separated(table, n, delta, targets).size();
}

std::vector<TailEntropyEstimate> tail_entropy_estimate(const SmoothMap& map,
                                                       const std::vector<double>& eps_ladder,
                                                       const std::vector<std::size_t>& n_range,
                                                       const std::vector<double>& delta_ladder,
                                                       const TailPoolSpec& pool) {
    if (eps_ladder.empty() || delta_ladder.empty() || n_range.empty())
        throw DomainError("tail entropy needs nonempty ladders");
    if (!std::is_sorted(eps_ladder.rbegin(), eps_ladder.rend()) ||
        !std::is_sorted(delta_ladder.rbegin(), delta_ladder.rend()))
        throw PreconditionError("eps and delta ladders must be sorted decreasing");
    const std::size_t length = max_n(n_range);
    const auto centers = sample_grid(map.domain(), pool.centers_per_axis);
    const double two_pi = 2.0 * std::numbers::pi;

    std::vector<TailEntropyEstimate> out;
    for (std::size_t e = 0; e < eps_ladder.size(); ++e) {
        const double eps = eps_ladder[e];
        TailEntropyEstimate tail;
        tail.eps = eps;
        tail.centers = centers;
        for (std::size_t c = 0; c < centers.size(); ++c) {
            const Vec2 x = centers[c];
            std::mt19937_64 rng(pool.seed ^ (0x9e3779b97f4a7c15ull * (e + 1)) ^ (c + 1));
            std::vector<Vec2> pts{x};
            pts.reserve(pool.local_points + 1);
            while (pts.size() < pool.local_points + 1) {
                const double rad = eps * std::sqrt(unit_uniform(rng));
                const double th = two_pi * unit_uniform(rng);
                const Vec2 p = x + Vec2{rad * std::cos(th), rad * std::sin(th)};
                if (map.domain().contains(p)) pts.push_back(map.domain().reduce(p));
            }
            const OrbitTable table(map, pts, length, true);
            if (table.size() == 0 || table.source(0) != 0) {
                tail.flags.push_back("center " + std::to_string(c) + " escapes the domain");
                continue;
            }
            for (double delta : delta_ladder) {
                if (!(delta < eps)) continue;
                EntropyEstimate est;
                est.n_range = n_range;
                est.delta = delta;
                est.eps = eps;
                est.method = "spanning";
                est.pool_size = table.size();
                est.pool_dropped = table.dropped();
                for (std::size_t n : n_range) {
                    std::vector<std::size_t> ball;
                    for (std::size_t i = 0; i < table.size(); ++i)
                        if (table.bowen_distance(0, i, n) < eps) ball.push_back(i);
                    if (ball.size() < 10)
                        tail.flags.push_back("sparse Bowen ball: center " + std::to_string(c) +
                                             ", n " + std::to_string(n) + ", " +
                                             std::to_string(ball.size()) + " points");
                    est.counts.push_back(greedy_spanning_count(table, n, delta, ball));
                }
                fit_growth(est);
                tail.fits.push_back(est);
            }
        }
        // The delta -> 0 proxy is the smallest delta below eps.
        double smallest = 0.0;
        for (const auto& f : tail.fits) smallest = smallest == 0.0 ? f.delta : std::min(smallest, f.delta);
        for (const auto& f : tail.fits)
            if (f.delta == smallest) {
                tail.value = std::max(tail.value, f.value);
                tail.value_stderr = std::max(tail.value_stderr, f.slope_stderr);
            }
        out.push_back(std::move(tail));
    }
    return out;
}

}  // namespace surfdyn
