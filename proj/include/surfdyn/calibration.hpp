#pragma once

// Calibrated constants: the Landau-Kolmogorov constant C_cal(s) and the
// sublevel chart budget C_cover(r), both for d = 2. The shipped table lives
// in data/calibration.json and is compiled into the library.

#include <cstdint>
#include <map>
#include <random>
#include <string>

#include "surfdyn/curve.hpp"

namespace surfdyn {

struct CalibrationTable {
    std::string schema = "surfdyn-calibration-v1";
    std::uint64_t seed = 0;
    std::size_t lk_corpus = 0;
    std::size_t cover_corpus = 0;
    int max_degree = 8;
    std::size_t grid = 0;
    double safety = 2.0;
    /// s -> C_cal(s).
    std::map<double, double> c_cal;
    /// r -> C_cover(r).
    std::map<double, double> c_cover;
};

/// The table compiled into the library.
const CalibrationTable& calibration();

/// C_cal(s): exact 1 for s <= 1 (the ratio ||g||_1 / (||g||_0 + ||g||_1) never
/// exceeds 1); the tabulated value when s is calibrated; otherwise the largest
/// tabulated value.
double c_lk(double s);

/// C_cover(r): the tabulated value, or the largest one for an uncalibrated r.
double c_cover(double r);

struct CalibrationConfig {
    std::uint64_t seed = 20130601;
    std::size_t lk_corpus = 10000;
    std::size_t cover_corpus = 2000;
    int max_degree = 8;
    std::size_t grid = 1001;
    double safety = 2.0;
    std::vector<double> orders = {1.5, 2.0, 2.5, 3.0};
};

/// Random polynomial curve sum_k c_k (2t - 1)^k with c_k ~ N(0, 1) in each
/// coordinate and degree uniform in 1..max_degree.
Curve random_polynomial_curve(std::mt19937_64& rng, int max_degree);

/// Largest Landau-Kolmogorov ratio of g at order s over k = 0..[s].
double lk_max_ratio(const Curve& g, double s, std::size_t grid);

/// Recompute the table from scratch.
CalibrationTable calibrate(const CalibrationConfig& cfg);

std::string calibration_to_json(const CalibrationTable& table);
/// Throws SchemaError on malformed input.
CalibrationTable calibration_from_json(const std::string& text);

}  // namespace surfdyn
