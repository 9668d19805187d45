#pragma once

// Lyapunov spectra, Birkhoff averages of log+ ||DT|| and exterior-power
// growth rates of the derivative cocycle of a surface map.

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "surfdyn/linalg.hpp"
#include "surfdyn/smooth_map.hpp"

namespace surfdyn {

/// Empirical stand-in for an invariant measure: weighted base points.
struct OrbitSample {
    std::vector<Vec2> points;
    std::vector<double> weights;

    /// Equal weights on the given points.
    static OrbitSample uniform(std::vector<Vec2> points);
    /// Throws DomainError unless weights are nonnegative and sum to 1 (1e-12).
    void validate() const;
};

/// Running product D_{x_{k-1}}T ... D_{x_0}T kept as Q R with R upper
/// triangular and rescaled, so that log norms never overflow.
class CocycleAccumulator {
  public:
    void step(const Mat2& jacobian);

    std::size_t steps() const { return steps_; }
    /// log ||D^n|| (log of the top singular value).
    double log_norm() const;
    /// log |det D^n|, or -inf once a singular factor was met.
    double log_det() const { return log_det_; }
    bool singular() const { return singular_; }

  private:
    Mat2 q_ = Mat2::identity();
    Mat2 r_ = Mat2::identity();
    double log_scale_ = 0.0;
    double log_det_ = 0.0;
    bool singular_ = false;
    std::size_t steps_ = 0;
};

struct LyapunovReport {
    /// chi_1 >= chi_2.
    std::array<double, 2> exponents{};
    std::size_t n_used = 0;
    std::string method = "qr_recursion";
    /// chi_1 partial values (1/k) log ||D^k|| for k = 1..n.
    std::vector<double> convergence_trace;
    /// Set when det D^n vanished; chi_2 is then -inf.
    bool singular = false;
};

/// (1/n) sum_{j<n} log+ ||D_{T^j x} T||.
double log_plus_average(const SmoothMap& map, Vec2 x, std::size_t n);

/// chi_1 from (1/n) log ||D_x T^n|| by QR recursion, chi_1 + chi_2 from
/// (1/n) log |det D_x T^n|. Needs n >= 10.
LyapunovReport lyapunov_spectrum(const SmoothMap& map, Vec2 x, std::size_t n);

/// max_{k<=e} log+ ||Lambda^k D||, given log ||D|| and log |det D|.
double exterior_log_plus(int e, double log_norm, double log_det);

struct ExteriorGrowth {
    int e = 1;
    std::size_t n = 0;
    double value = 0.0;
    std::size_t points_used = 0;
    /// Grid points whose orbit escaped the domain.
    std::size_t points_skipped = 0;
};

/// Uniform grid with `per_axis` points per axis: cell centers on the torus,
/// interior points of the box (or ball) otherwise.
std::vector<Vec2> sample_grid(const Domain& domain, std::size_t per_axis);

/// sup over the grid of (1/n) max_{k<=e} log+ ||Lambda^k D_x T^n||.
ExteriorGrowth exterior_growth(const SmoothMap& map, int e, std::size_t n,
                               const std::vector<Vec2>& grid);

/// Entry n - 1 is sum_x w(x) max_{k<=e} log+ ||Lambda^k D_x T^n||, n = 1..n_max.
std::vector<double> positive_sum_profile(const SmoothMap& map, const OrbitSample& sample, int e,
                                         std::size_t n_max);

/// min_{n<=n_max} of the profile divided by n.
double empirical_positive_sum(const SmoothMap& map, const OrbitSample& sample, int e,
                              std::size_t n_max = 64);

}  // namespace surfdyn
