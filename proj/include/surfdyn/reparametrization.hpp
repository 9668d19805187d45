#pragma once

// Affine reparametrization charts of a curve under a map sequence: the
// sublevel-set charting surrogate, the inductive chart-family builder,
// property verification and the Bowen-ball reparametrization pipeline.

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "surfdyn/combinatorics.hpp"
#include "surfdyn/curve.hpp"
#include "surfdyn/dynamics.hpp"
#include "surfdyn/map_sequence.hpp"

namespace surfdyn {

/// Charts shorter than this are discarded (and counted).
inline constexpr double kDegenerateChart = 1e-14;
/// Slack allowed on every sampled "<= bound" certificate.
inline constexpr double kCertificateSlack = 1e-6;
/// Parameter tolerance when testing whether a sample lies in a chart image.
inline constexpr double kCoverTolerance = 1e-12;

struct ChartLineage {
    /// Index of the parent chart in the previous level, -1 for level 0.
    long parent = -1;
    std::size_t step = 0;
    /// Piece index of the [e^{k/(r-1)}] + 1 subdivision.
    int theta = 0;
    /// Number of extra halvings applied before charting the sublevel set.
    int halvings = 0;
    /// Sublevel chart index.
    int xi = 0;
    /// Piece index of the oscillation subdivision.
    int eta = 0;
    /// Trim interval inside the eta piece.
    double trim_a = 0.0;
    double trim_b = 1.0;
    /// Piece index of the final normalizing subdivision.
    int fin = 0;
};

/// t -> lo + (hi - lo) t.
struct AffineChart {
    double lo = 0.0;
    double hi = 1.0;
    ChartLineage lineage;

    double length() const { return hi - lo; }
    double operator()(double t) const { return lo + (hi - lo) * t; }
    bool covers(double t, double tol = kCoverTolerance) const {
        return t >= lo - tol && t <= hi + tol;
    }
};

struct SublevelOptions {
    std::size_t grid = 10001;
    /// Chart budget; 0 means the calibrated C_cover(r).
    std::size_t budget = 0;
    /// Parameters that are sampled in addition to the grid.
    std::vector<double> extra_points;
};

/// Affine charts of [0,1] covering {t : |g(t)| <= a} with sampled
/// ||g o phi||_t <= a / (12 e) for t in {min(1, r-1), 2, ..., [r-1], r-1}.
/// Throws BudgetError when more than the budget of charts is needed.
std::vector<AffineChart> sublevel_charts(const JetSource& g, double a, double r,
                                         const SublevelOptions& opt = {});

/// Grid points of {|g| <= a} (grid of `grid` points) not covered by the charts.
std::size_t sublevel_cover_misses(const JetSource& g, double a,
                                  const std::vector<AffineChart>& charts, std::size_t grid = 10001);

/// The ladder {min(1, r-1), 2, ..., [r-1], r-1} of property (iii).
std::vector<double> oscillation_ladder(double r);
/// The ladder {1, min(2, r), 3, ..., [r], r} of property (ii).
std::vector<double> norm_ladder(double r);

/// A_prec = 10^3 C_alg with C_alg = 1 for r <= 2 and 2^ceil(r) otherwise.
double precondition_constant(double r);

/// Largest eps below the localization limit with ||T_{n,eps}||_s <= 1 / A_prec
/// for every certified s in [min(2, r), r].
double precondition_epsilon(const SmoothMap& map, double r);

/// Tracks interval approximations of sigma^{-1}(B(j+1, 1)) level by level.
class BowenTracker {
  public:
    BowenTracker(const MapSequence& maps, const Curve& sigma, std::size_t grid = 10001);

    std::size_t level() const { return level_; }
    const IntervalUnion& intervals() const { return set_; }
    void advance();

  private:
    const MapSequence& maps_;
    const Curve& sigma_;
    std::size_t level_ = 0;
    IntervalUnion set_;
};

struct TargetOptions {
    std::size_t grid = 10001;
    /// Adaptive samples per tracked interval (spread over fewer points when
    /// there are many intervals).
    std::size_t per_interval = 1024;
};

/// Sorted parameter samples of H(K_{level-1}) cap sigma^{-1}(B(level+1, 1)):
/// the uniform grid plus adaptive samples inside the tracked Bowen set,
/// filtered exactly. `K` may be longer than level - 1; only its prefix is used.
std::vector<double> target_samples(const MapSequence& maps, const Curve& sigma,
                                   const DefectSequence& K, std::size_t level,
                                   const TargetOptions& opt = {});

struct ChartCertificate {
    /// max over k <= n of sampled ||T^k o sigma o phi||_1.
    double max_first_norm = 0.0;
    /// max over the ladder of ||(T^n o sigma)' o phi||_s / ||(T^n o sigma)' o phi||_0.
    double oscillation_ratio = 0.0;
};

struct FamilyDiagnostics {
    std::size_t dropped_no_witness = 0;
    std::size_t degenerate_discarded = 0;
    std::size_t dess_halvings = 0;
    std::size_t sublevel_charts = 0;
    /// Largest oscillation subdivision used, against [3 C_LK] + 1.
    int max_oscillation_split = 0;
    int paper_oscillation_split = 0;
    /// Largest final subdivision used, against [sqrt(d/3)] + 1.
    int max_final_split = 0;
    int paper_final_split = 1;
};

struct LevelRecord {
    std::size_t step = 0;
    std::size_t count = 0;
    std::size_t targets = 0;
    /// Subdivision count [e^{k/(r-1)}] + 1 used to reach this level.
    int theta_split = 0;
    int k = 0;
    /// log #G_m - (1/(r-1)) sum_{i<m} k_i.
    double normalized_log = 0.0;
};

struct ChartFamily {
    std::size_t step = 0;
    double r = 2.0;
    DefectSequence K;
    std::vector<AffineChart> charts;
    std::vector<ChartCertificate> certificates;
    /// Charts of every level 0..step (the last equals `charts`).
    std::vector<std::vector<AffineChart>> levels;
    std::vector<LevelRecord> history;
    FamilyDiagnostics diagnostics;
    /// Fitted constants of log #G_m <= B + A m + (1/(r-1)) sum k_i.
    double A_fit = 0.0;
    double B_fit = 0.0;
    /// k_0 used for the first step (max over the targets of the i = 0 defect).
    int k0 = 1;
};

struct BuildOptions {
    std::size_t pipeline_grid = 1025;
    std::size_t sublevel_grid = 2049;
    TargetOptions targets;
    /// Internal threshold for "<= 1" and "<= 1/3" conditions.
    double margin = 0.999;
    bool check_preconditions = true;
};

/// G_n for n = K.size() + 1 (or n = 0 with `level_zero`).
ChartFamily build_chart_family(const MapSequence& maps, const Curve& sigma,
                               const DefectSequence& K, double r, const BuildOptions& opt = {});
/// G_0 only.
ChartFamily build_base_family(const MapSequence& maps, const Curve& sigma, double r,
                              const BuildOptions& opt = {});

struct LineFitAB {
    double A = 0.0;
    double B = 0.0;
};
/// Least-squares A over the (m, y_m) points and B = max (y_m - A m).
LineFitAB fit_count_constants(const std::vector<double>& ms, const std::vector<double>& ys);

struct PropertyReport {
    bool image_in_bowen = true;       // (i)
    bool norms_bounded = true;        // (ii)
    bool oscillation_small = true;    // (iii)
    bool covers_targets = true;       // (iv)
    bool count_bound = true;          // (v)
    double max_radius = 0.0;
    double max_norm = 0.0;
    double max_oscillation_ratio = 0.0;
    std::size_t targets = 0;
    std::size_t misses = 0;
    double log_count = -std::numeric_limits<double>::infinity();
    double count_bound_value = 0.0;
    double tolerance = kCertificateSlack;
    bool all_passed() const {
        return image_in_bowen && norms_bounded && oscillation_small && covers_targets && count_bound;
    }
};

/// Dense-sampling check of properties (i)-(v) at the family's own step.
PropertyReport verify_chart_properties(const ChartFamily& family, const MapSequence& maps,
                                       const Curve& sigma, const DefectSequence& K, double r,
                                       std::size_t grid = 1001, const TargetOptions& targets = {});

struct BowenReparamLevel {
    std::size_t n = 0;
    std::size_t classes = 0;
    std::size_t count = 0;
    double log_count = 0.0;
    double lambda_plus = 0.0;
    /// (1/(r-1)) (1 + H([l - chi] + 3)) (l - chi) n.
    double lyapunov_term = 0.0;
};

struct BowenReparamReport {
    std::size_t n = 0;
    double r = 2.0;
    double chi = 0.0;
    double gamma = 0.0;
    double C = 2.0;
    double eps = 0.0;
    Vec2 x{};
    std::vector<AffineChart> charts;
    std::vector<DefectSequence> classes;
    double lambda_plus = 0.0;
    double lyapunov_term = 0.0;
    double A_fit = 0.0;
    double B_fit = 0.0;
    double bound = 0.0;
    /// log #F_n <= lyapunov_term + A n + B.
    bool bound_holds = true;
    /// sampled ||D(T^l o sigma o psi)|| <= 1 + slack for l <= n.
    bool derivative_normalized = true;
    double max_derivative = 0.0;
    std::size_t hyperbolic_targets = 0;
    std::size_t cover_misses = 0;
    ClassBoundReport class_bound;
    std::vector<BowenReparamLevel> levels;
};

/// Localize at x, collect realized classes K_{m-1} on H^m cap sigma^{-1}(B(m+1, 1)) for
/// m = 1..n, and union the per-class chart families.
BowenReparamReport reparametrize_bowen_ball(const SmoothMap& map, Vec2 x, const Curve& sigma,
                                            double chi, double gamma, double C, std::size_t n,
                                            double eps, double r, const BuildOptions& opt = {});

/// Same on an explicit sequence (x and eps are recorded only).
BowenReparamReport reparametrize_sequence(const MapSequence& maps, const Curve& sigma, double chi,
                                          double gamma, double C, std::size_t n, double r,
                                          const BuildOptions& opt = {});

}  // namespace surfdyn
