#pragma once

// The Bernoulli entropy function, sequences admitting a value S, and the
// defect-of-multiplicativity sequences of a curve under a map sequence.

#include <cstddef>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "surfdyn/curve.hpp"
#include "surfdyn/map_sequence.hpp"

namespace surfdyn {

using BigInt = boost::multiprecision::cpp_int;

/// H(t) = -(1/t) log(1/t) - (1 - 1/t) log(1 - 1/t) for t >= 1, H(1) = 0.
double bernoulli_entropy(double t);

/// Number of positive-integer n-tuples with mean <= S, i.e. C(nS, n).
BigInt count_admitting(std::size_t n, std::size_t S);

/// Natural log of a positive big integer.
double log_big(const BigInt& v);

/// Largest enumeration enumerate_admitting accepts.
inline constexpr std::size_t kEnumerationLimit = 5'000'000;

/// All positive-integer n-tuples with sum <= nS, in lexicographic order.
/// Refuses n > 8, S > 5, or more than kEnumerationLimit tuples.
std::vector<std::vector<int>> enumerate_admitting(std::size_t n, std::size_t S);

struct CombiBound {
    double log_count = 0.0;
    double bound = 0.0;
    bool holds = false;
};

/// log C(nS, n) against n S H(S) + 1.
CombiBound combinatorial_bound_check(std::size_t n, std::size_t S);

/// [x]: the largest nonnegative integer <= max(x, 0); values within 1e-12 of
/// an integer snap to it.
long long clamped_integer_part(double x);

using DefectSequence = std::vector<int>;

/// k_i = [log+ (|D_t(T^i o sigma)| max(1, |D T_{i+1}|) / |D_t(T^{i+1} o sigma)|)] + 1
/// for i = 1..n. Needs T_1..T_{n+1}.
DefectSequence defect_sequence(const MapSequence& maps, const Curve& sigma, double t,
                               std::size_t n);

/// lambda+_n = (1/n) sum_{i=1}^{n} log+ |D_0 T_i|.
double lambda_plus(const MapSequence& maps, std::size_t n);

/// Smallest integer exceeding log C / (1 - log 2 - 1/3).
long long com_threshold(double C);

struct ClassBoundReport {
    std::size_t observed = 0;
    double bound = 0.0;
    double log_bound = 0.0;
    double lambda_plus = 0.0;
    long long threshold = 0;
    std::size_t hyperbolic_samples = 0;
    /// Set when no sampled t was a hyperbolic time.
    bool empty = false;
    std::vector<DefectSequence> classes;
};

/// Distinct sequences K_{n-1} over sampled t in H^n(sigma, chi, gamma, C)
/// cap sigma^{-1}(B(n, 1)), against e^{3n-2} e^{(n-1)(l - chi) H([l - chi] + 3)}.
ClassBoundReport realized_class_bound(const MapSequence& maps, const Curve& sigma, double chi,
                                      double gamma, double C, std::size_t n,
                                      const std::vector<double>& samples);

}  // namespace surfdyn
