#pragma once

// Separated and spanning sets for the Bowen metrics d_n, topological entropy
// fits, Newhouse local entropy and tail-entropy estimates.
//
// d_n(x, y) = max_{0<=k<n} d(T^k x, T^k y) with d the flat metric of the
// domain. Every "limit" below is a least-squares slope over a finite n-range;
// raw counts are kept so each value can be recomputed.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "surfdyn/smooth_map.hpp"

namespace surfdyn {

/// Points on which separated sets are built. Grid pools are cell centers of a
/// uniform grid (about `size` points); random pools are seeded uniform samples.
struct PoolSpec {
    enum class Kind { Grid, Random };
    Kind kind = Kind::Random;
    std::size_t size = 10000;
    std::uint64_t seed = 0;
};

std::vector<Vec2> make_pool(const Domain& domain, const PoolSpec& spec);

/// Orbit segments x, T x, ..., T^{length-1} x of a list of points.
class OrbitTable {
  public:
    /// With drop_escaping, points whose orbit leaves a box are left out (and
    /// counted); otherwise an EscapeError is raised.
    OrbitTable(const SmoothMap& map, const std::vector<Vec2>& points, std::size_t length,
               bool drop_escaping = false);

    std::size_t size() const { return kept_.size(); }
    std::size_t length() const { return length_; }
    std::size_t dropped() const { return dropped_; }
    /// Index into the original point list of kept point i.
    std::size_t source(std::size_t i) const { return kept_[i]; }
    Vec2 at(std::size_t i, std::size_t k) const { return orbits_[i * length_ + k]; }
    const Domain& domain() const { return domain_; }

    /// d_n between kept points i and j (n <= length()).
    double bowen_distance(std::size_t i, std::size_t j, std::size_t n) const;

  private:
    Domain domain_;
    std::size_t length_;
    std::vector<Vec2> orbits_;
    std::vector<std::size_t> kept_;
    std::size_t dropped_ = 0;
};

/// Greedy (n, delta)-separated subset in the given candidate order, starting
/// from `seed` (which must itself be (n, delta)-separated). Returns indices
/// into the table; seeds come first. Every candidate left out is within delta
/// of a selected point in d_n.
std::vector<std::size_t> greedy_separated(const OrbitTable& table, std::size_t n, double delta,
                                          const std::vector<std::size_t>& candidates,
                                          const std::vector<std::size_t>& seed = {});

/// Greedy maximal (n, delta)-separated subset of the pool, in pool order.
std::vector<Vec2> maximal_separated_set(const SmoothMap& map, const std::vector<Vec2>& pool,
                                        std::size_t n, double delta);

/// d_n(x, y) computed from scratch.
double bowen_distance(const SmoothMap& map, Vec2 x, Vec2 y, std::size_t n);
/// y in B(x, n, eps), i.e. d(T^k y, T^k x) < eps for k < n.
bool in_bowen_ball(const SmoothMap& map, Vec2 x, Vec2 y, std::size_t n, double eps);

struct EntropyEstimate {
    double value = 0.0;
    /// Raw least-squares slope before clamping at 0.
    double slope = 0.0;
    /// Standard error of the slope.
    double slope_stderr = 0.0;
    std::vector<std::size_t> n_range;
    std::vector<std::size_t> counts;
    double delta = 0.0;
    double eps = 0.0;
    std::string method = "separated";
    /// All counts equal: value forced to 0.
    bool degenerate = false;
    std::size_t pool_size = 0;
    std::size_t pool_dropped = 0;
};

/// Fills value/slope/degenerate from counts over n_range.
void fit_growth(EntropyEstimate& est);

/// Growth rate of maximal separated cardinalities over n_range (at least 4
/// values). Sets for successive n are nested: the set for n seeds the greedy
/// pass for the next n, so counts are nondecreasing in n.
EntropyEstimate topological_entropy_estimate(const SmoothMap& map, const PoolSpec& pool,
                                             const std::vector<std::size_t>& n_range,
                                             double delta);

/// Counts for a decreasing delta ladder on one pool, nested the same way
/// (each set seeds the next smaller delta). Result[i] belongs to deltas[i].
std::vector<std::size_t> separated_counts_over_delta(const OrbitTable& table, std::size_t n,
                                                     const std::vector<double>& deltas);

/// H(n, delta | x, F, eps): log of a maximal (n, delta)-separated subset of
/// F cap B(x, n, eps). Exact (exhaustive) when the intersection has at most
/// 20 points, greedy otherwise. Empty intersection gives 0.
double local_entropy(const SmoothMap& map, Vec2 x, const std::vector<Vec2>& F, std::size_t n,
                     double delta, double eps);

/// Growth rate h(delta | F, eps) of H(n, delta | x, F, eps) over n_range.
EntropyEstimate local_entropy_rate(const SmoothMap& map, Vec2 x, const std::vector<Vec2>& F,
                                   const std::vector<std::size_t>& n_range, double delta,
                                   double eps);

/// Greedy cover of `targets` by d_n-balls of radius delta centered at target
/// points (in order): the size of an (n, delta)-spanning set of the targets.
std::size_t greedy_spanning_count(const OrbitTable& table, std::size_t n, double delta,
                                  const std::vector<std::size_t>& targets);

struct TailPoolSpec {
    /// Centers x: cell centers of a centers_per_axis^2 grid of the domain.
    std::size_t centers_per_axis = 2;
    /// Random points drawn in the eps-ball around each center.
    std::size_t local_points = 20000;
    std::uint64_t seed = 0;
};

struct TailEntropyEstimate {
    double eps = 0.0;
    /// sup over centers of the fitted rate at the smallest delta.
    double value = 0.0;
    /// Largest slope standard error among the fits entering the sup.
    double value_stderr = 0.0;
    /// Per (center, delta) fits, centers outer.
    std::vector<EntropyEstimate> fits;
    std::vector<Vec2> centers;
    /// Human-readable flags, e.g. sparse Bowen balls.
    std::vector<std::string> flags;
};

/// For each eps (decreasing ladder): sup over centers x of the growth rate of
/// the minimal (n, delta)-spanning count of B(x, n, eps), using a local pool
/// in the eps-ball of x. Bowen balls with fewer than 10 pool points are flagged.
std::vector<TailEntropyEstimate> tail_entropy_estimate(const SmoothMap& map,
                                                       const std::vector<double>& eps_ladder,
                                                       const std::vector<std::size_t>& n_range,
                                                       const std::vector<double>& delta_ladder,
                                                       const TailPoolSpec& pool);

}  // namespace surfdyn
