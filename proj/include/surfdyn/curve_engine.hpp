#pragma once

// Curve lengths, hyperbolic-time sets, local volume growth, the oscillation
// trimming lemma and the Landau-Kolmogorov ratio check.

#include <cstddef>
#include <optional>
#include <random>
#include <vector>

#include "surfdyn/curve.hpp"
#include "surfdyn/dynamics.hpp"
#include "surfdyn/map_sequence.hpp"

namespace surfdyn {

/// Arclength of sigma over the restriction (adaptive Gauss-Kronrod, absolute
/// tolerance 1e-6 per interval).
double curve_length(const Curve& sigma, const IntervalUnion& restriction = IntervalUnion::full());

struct HyperbolicParams {
    double chi = 0.0;
    double gamma = 0.0;
    double C = 2.0;
    std::size_t n = 1;
};

/// t belongs to H^n(sigma, chi, gamma, C): sigma(t) in B(n, rho) and
/// C^{-1} e^{(chi-gamma)i} <= |D_t(T^i o sigma)| <= C e^{(chi+gamma)i} for i = 1..n.
bool is_hyperbolic_time(const MapSequence& maps, const Curve& sigma, const HyperbolicParams& p,
                        double t, double rho = kBallRadius);

struct HyperbolicTimeSet {
    /// Cells all of whose samples pass.
    IntervalUnion inner;
    /// Cells with at least one passing sample.
    IntervalUnion outer;
    std::size_t cells = 0;
    std::size_t samples_per_cell = 0;
};

/// Grid approximation of H^n on `cells` equal cells of [0,1], each sampled
/// at its two ends and midpoint. Intersected with sigma^{-1}(B(n, rho)).
HyperbolicTimeSet hyperbolic_time_set(const MapSequence& maps, const Curve& sigma,
                                      const HyperbolicParams& p, std::size_t cells = 10000,
                                      double rho = kBallRadius);

struct VolumeGrowthReport {
    std::size_t n = 0;
    HyperbolicParams params;
    /// Bowen radius in the coordinates of the sequence (1 for localized maps).
    double rho = 1.0;
    /// |T^{n-1} o sigma| with no restriction.
    double raw_length = 0.0;
    double inner_length = 0.0;
    double outer_length = 0.0;
    IntervalUnion inner;
    IntervalUnion outer;
};

/// V^{n}: length of T^{n-1} o sigma over H^n cap sigma^{-1}(B(n, rho)).
VolumeGrowthReport local_volume_growth(const MapSequence& maps, const Curve& sigma,
                                       const HyperbolicParams& p, double rho = 1.0,
                                       std::size_t cells = 10000);

/// The same for T localized at x with scale eps (sigma given in chart
/// coordinates, so B(x, n, eps) becomes B(n, 1)).
VolumeGrowthReport local_volume_growth(const SmoothMap& map, Vec2 x, const Curve& sigma,
                                       const HyperbolicParams& p, double eps,
                                       std::size_t cells = 10000);

struct TrimResult {
    double a = 0.0;
    double b = 1.0;
    /// Smallest grid parameter with |sigma(w)| < 1.
    double w = 0.0;
    /// Unit vector along sigma'(w); the cube has half-side 1 in the frame (u, u^perp).
    Vec2 axis{1.0, 0.0};
    /// Sampled ||sigma||_1.
    double c1 = 0.0;
    /// Sampled diameter of {sigma'(t)}.
    double oscillation = 0.0;
    /// Sampled min |sigma'|.
    double min_speed = 0.0;
    double length_product() const { return (b - a) * c1; }
};

/// The bound enforced on (b - a) ||sigma||_1: 2 sqrt(3 d).
double trim_length_bound();

/// Pick w, build the cube of half-side 1 aligned with sigma'(w) and scan
/// outward from w for the first exits (grid scan, then bisection).
/// Throws PreconditionError when sigma misses B(0,1) or the oscillation of
/// sigma' exceeds ||sigma||_1 / 3.
/// A caller-supplied witness (with |sigma(witness)| < 1) replaces the grid choice of w.
TrimResult oscillation_trim(const Curve& sigma, std::size_t grid = 10001,
                            std::optional<double> witness = std::nullopt);

struct TrimCertificate {
    /// sigma([0,1]) cap B(0,1) inside sigma([a,b]).
    bool covers_unit_ball = false;
    /// sigma([a,b]) inside B(0, sqrt(d) (1 + 1e-9)).
    bool inside_ball = false;
    /// (b - a) ||sigma||_1 <= 2 sqrt(3d).
    bool length_ok = false;
    /// min |sigma'| >= (2/3) ||sigma||_1 - tol.
    bool speed_ok = false;
    bool passed() const { return covers_unit_ball && inside_ball && length_ok && speed_ok; }
};

/// Dense-sampling check of a trim result (`samples` points on [0,1] and on [a,b]).
TrimCertificate verify_trim(const Curve& sigma, const TrimResult& trim,
                            std::size_t samples = 10000);

struct LandauKolmogorovCheck {
    /// ||g||_k / (||g||_0 + ||g||_s) for k = 0..[s].
    std::vector<double> ratios;
    double norm0 = 0.0;
    double norm_s = 0.0;
    bool holds = true;
};

LandauKolmogorovCheck landau_kolmogorov_check(const Curve& g, double s, double c_cal,
                                              const NormGrid& grid = {});

struct OscilleSample {
    Curve curve;
    std::size_t attempts = 0;
};

/// Rejection sampler of cubic curves c + L s u + q2 s^2 + q3 s^3 (s = t - 1/2)
/// meeting B(0,1) with sampled oscillation of sigma' at most ||sigma||_1 / 3
/// on `grid` points. Throws BudgetError after max_attempts rejections.
OscilleSample sample_oscille_curve(std::mt19937_64& rng, std::size_t grid = 10001,
                                   std::size_t max_attempts = 100000);

/// Diameter of a finite planar point set (convex hull, then pairwise on the hull).
double point_set_diameter(std::vector<Vec2> pts);

}  // namespace surfdyn
