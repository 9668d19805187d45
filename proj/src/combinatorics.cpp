#include "surfdyn/combinatorics.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "surfdyn/curve_engine.hpp"
#include "surfdyn/errors.hpp"

namespace surfdyn {

namespace {

void check_counts(std::size_t n, std::size_t S) {
    if (n < 1 || S < 1) throw DomainError("n and S must be positive");
}

void enumerate_rec(std::size_t n, long long budget, std::vector<int>& cur,
                   std::vector<std::vector<int>>& out) {
    if (cur.size() == n) {
        out.push_back(cur);
        return;
    }
    // Remaining entries each need at least 1.
    const long long rest = static_cast<long long>(n - cur.size() - 1);
    for (long long k = 1; k <= budget - rest; ++k) {
        cur.push_back(static_cast<int>(k));
        enumerate_rec(n, budget - k, cur, out);
        cur.pop_back();
    }
}

}  // namespace

double bernoulli_entropy(double t) {
    if (!(t >= 1.0)) throw DomainError("H(t) needs t >= 1");
    const double p = 1.0 / t;
    const double q = 1.0 - p;
    double h = -p * std::log(p);
    if (q > 0.0) h -= q * std::log(q);
    return h;
}

BigInt count_admitting(std::size_t n, std::size_t S) {
    check_counts(n, S);
    const std::size_t top = n * S;
    BigInt c = 1;
    for (std::size_t i = 1; i <= n; ++i) {
        c *= top - n + i;
        c /= i;
    }
    return c;
}

double log_big(const BigInt& v) {
    if (v <= 0) throw DomainError("log of a nonpositive integer");
    using Float = boost::multiprecision::cpp_bin_float_50;
    return static_cast<double>(boost::multiprecision::log(Float(v)));
}

std::vector<std::vector<int>> enumerate_admitting(std::size_t n, std::size_t S) {
    check_counts(n, S);
    if (n > 8 || S > 5) throw DomainError("enumerate_admitting is limited to n <= 8, S <= 5");
    if (count_admitting(n, S) > kEnumerationLimit)
        throw DomainError("enumeration of C(" + std::to_string(n * S) + ", " + std::to_string(n) +
                          ") tuples exceeds the limit of " + std::to_string(kEnumerationLimit));
    std::vector<std::vector<int>> out;
    std::vector<int> cur;
    cur.reserve(n);
    enumerate_rec(n, static_cast<long long>(n * S), cur, out);
    return out;
}

CombiBound combinatorial_bound_check(std::size_t n, std::size_t S) {
    CombiBound b;
    b.log_count = log_big(count_admitting(n, S));
    b.bound = static_cast<double>(n * S) * bernoulli_entropy(static_cast<double>(S)) + 1.0;
    b.holds = b.log_count <= b.bound;
    return b;
}

long long clamped_integer_part(double x) {
    if (std::isnan(x)) throw DomainError("integer part of NaN");
    if (!(x > 0.0)) return 0;
    const double r = std::round(x);
    if (std::abs(x - r) < 1e-12) return static_cast<long long>(r);
    return static_cast<long long>(std::floor(x));
}

DefectSequence defect_sequence(const MapSequence& maps, const Curve& sigma, double t,
                               std::size_t n) {
    if (t < 0.0 || t > 1.0) throw DomainError("parameter t must lie in [0,1]");
    DefectSequence k;
    k.reserve(n);
    TaylorVec jet = maps.map(1).push(sigma.expand(t, 1.0, 1));
    for (std::size_t i = 1; i <= n; ++i) {
        const double di = norm(jet.derivative(1));
        const SmoothMap& next = maps.map(i + 1);
        const double dt = spectral_norm(next.jacobian(jet.value()));
        jet = next.push(jet);
        const double dn = norm(jet.derivative(1));
        if (!(dn > 0.0))
            throw DegenerateTangencyError(i, "derivative of T^{i+1} o sigma vanishes");
        const double ratio = di * std::max(1.0, dt) / dn;
        k.push_back(static_cast<int>(clamped_integer_part(std::log(std::max(ratio, 1.0)))) + 1);
    }
    return k;
}

double lambda_plus(const MapSequence& maps, std::size_t n) {
    if (n == 0) throw DomainError("lambda+_n needs n >= 1");
    double s = 0.0;
    for (std::size_t i = 1; i <= n; ++i) s += log_plus(spectral_norm(maps.map(i).jacobian({})));
    return s / static_cast<double>(n);
}

long long com_threshold(double C) {
    const double q = std::log(C) / (1.0 - std::log(2.0) - 1.0 / 3.0);
    return static_cast<long long>(std::floor(q)) + 1;
}

ClassBoundReport realized_class_bound(const MapSequence& maps, const Curve& sigma, double chi,
                                      double gamma, double C, std::size_t n,
                                      const std::vector<double>& samples) {
    if (!(chi > 0.0)) throw PreconditionError("chi must be positive");
    if (!(gamma > 0.0 && gamma < 1.0 / 3.0)) throw PreconditionError("gamma must lie in (0, 1/3)");
    if (!(C > 1.0)) throw PreconditionError("C must exceed 1");
    if (n < 1) throw DomainError("n must be positive");
    ClassBoundReport rep;
    rep.threshold = com_threshold(C);
    if (static_cast<long long>(n) <= rep.threshold)
        throw PreconditionError("n must exceed N(C) = " + std::to_string(rep.threshold));
    rep.lambda_plus = lambda_plus(maps, n);
    const double excess = rep.lambda_plus - chi;
    const double S = static_cast<double>(clamped_integer_part(excess) + 3);
    const double dn = static_cast<double>(n);
    rep.log_bound = 3.0 * dn - 2.0 + (dn - 1.0) * excess * bernoulli_entropy(S);
    rep.bound = std::exp(rep.log_bound);

    const HyperbolicParams p{chi, gamma, C, n};
    std::set<DefectSequence> seen;
    for (double t : samples) {
        if (!is_hyperbolic_time(maps, sigma, p, t, 1.0)) continue;
        ++rep.hyperbolic_samples;
        if (n >= 2) seen.insert(defect_sequence(maps, sigma, t, n - 1));
        else seen.insert(DefectSequence{});
    }
    rep.classes.assign(seen.begin(), seen.end());
    rep.observed = rep.classes.size();
    rep.empty = rep.hyperbolic_samples == 0;
    return rep;
}

}  // namespace surfdyn
