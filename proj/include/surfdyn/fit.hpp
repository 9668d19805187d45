#pragma once

// Ordinary least-squares line fits used for growth rates and fitted constants.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "surfdyn/errors.hpp"

namespace surfdyn {

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    /// Largest |y_i - (slope x_i + intercept)|.
    double max_residual = 0.0;
    /// Standard error of the slope (0 with fewer than 3 points).
    double slope_stderr = 0.0;
    /// False when all x coincide (slope set to 0).
    bool well_posed = true;
};

inline LineFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.empty()) throw DomainError("line fit needs matching samples");
    const double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    LineFit f;
    f.well_posed = sxx > 0.0;
    f.slope = f.well_posed ? sxy / sxx : 0.0;
    f.intercept = my - f.slope * mx;
    double ssr = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double res = ys[i] - f.slope * xs[i] - f.intercept;
        f.max_residual = std::max(f.max_residual, std::abs(res));
        ssr += res * res;
    }
    if (f.well_posed && xs.size() > 2) f.slope_stderr = std::sqrt(ssr / (n - 2.0) / sxx);
    return f;
}

}  // namespace surfdyn
