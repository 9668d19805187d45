#pragma once

// Orbits, derivative cocycles, Holder-norm estimates, built-in systems and
// the localization of a map along an orbit.

#include <cstddef>
#include <functional>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "surfdyn/curve.hpp"
#include "surfdyn/map_sequence.hpp"
#include "surfdyn/smooth_map.hpp"

namespace surfdyn {

/// The points x, T x, ..., T^n x. Torus coordinates are reduced after every
/// step; leaving a box raises EscapeError naming the first escaping index.
std::vector<Vec2> evaluate_orbit(const SmoothMap& map, Vec2 x, std::size_t n);

/// D_x T^n = D_{T^{n-1}x} T ... D_x T.
Mat2 derivative_cocycle(const SmoothMap& map, Vec2 x, std::size_t n);

/// Sampling used by the Holder-norm estimators.
struct NormGrid {
    /// Parameter samples for curves on [0,1].
    std::size_t curve_points = 1001;
    /// Samples per axis for maps on 2D domains.
    std::size_t map_points = 64;
    /// Pair separations used for Holder difference quotients.
    std::vector<double> steps = {0.5, 0.25, 0.1, 1e-2, 1e-3, 1e-4};
};

/// A sampled lower estimate of a Holder norm with its grid metadata.
struct NormEstimate {
    double s = 0.0;
    double value = 0.0;
    std::size_t samples = 0;
    /// Grid spacing of the point samples.
    double resolution = 0.0;
};

/// Jet source t -> jet of a function [0,1] -> R^2 at t, in the parameter t.
using JetSource = std::function<TaylorVec(double t, int order)>;

/// ||g||_s for g given by its jets on [lo, hi]: for integer s the sup of
/// |g^{(s)}|, for fractional s the sup of the (s - ceil(s-1))-Holder quotient
/// of g^{(ceil(s-1))}. s = 0 is the sup norm.
NormEstimate jet_norm(const JetSource& g, double s, const NormGrid& grid = {}, double lo = 0.0,
                      double hi = 1.0);

NormEstimate holder_norm_estimate(const Curve& curve, double s, const NormGrid& grid = {});
NormEstimate holder_norm_estimate(const SmoothMap& map, double s, const NormGrid& grid = {});

using ParamValue = std::variant<double, std::string>;
using Params = std::map<std::string, ParamValue>;

/// Names accepted by builtin_system().
const std::vector<std::string>& builtin_system_names();

/// One of: cat, doubling2d, henon, standard, identity, diag_linear,
/// perturbed_cat. Every system accepts "r" (default 2); see the README for
/// the per-system parameters.
SmoothMap builtin_system(const std::string& name, const Params& params = {});

/// The localized sequence (T^x_{k,eps})_{k<=n}, with
/// T^x_{k,eps}(v) = (T(T^{k-1}x + eps v) - T(T^{k-1}x)) / eps
/// in the translation charts of the flat metric.
MapSequence localize(const SmoothMap& map, Vec2 x, std::size_t n, double eps);

}  // namespace surfdyn
