#include "surfdyn/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "json.hpp"
#include "surfdyn/calibration_data.hpp"
#include "surfdyn/curve_engine.hpp"
#include "surfdyn/errors.hpp"
#include "surfdyn/reparametrization.hpp"

namespace surfdyn {

namespace {

using nlohmann::json;

std::string order_key(double s) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", s);
    return buf;
}

double lookup(const std::map<double, double>& table, double x, const char* what) {
    if (table.empty()) throw Error(std::string("calibration table has no ") + what + " entries");
    double best = 0.0;
    for (const auto& [k, v] : table) {
        if (std::abs(k - x) < 1e-9) return v;
        best = std::max(best, v);
    }
    return best;
}

std::map<double, double> read_table(const json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_object())
        throw SchemaError(std::string("calibration: missing object '") + key + "'");
    std::map<double, double> out;
    for (const auto& [k, v] : j.at(key).items()) {
        if (!v.is_number()) throw SchemaError(std::string("calibration: non-numeric entry in ") + key);
        out[std::stod(k)] = v.get<double>();
    }
    return out;
}

}  // namespace

const CalibrationTable& calibration() {
    static const CalibrationTable table = calibration_from_json(detail::kEmbeddedCalibration);
    return table;
}

double c_lk(double s) {
    if (s <= 1.0 + 1e-12) return 1.0;
    return lookup(calibration().c_cal, s, "C_cal");
}

double c_cover(double r) { return lookup(calibration().c_cover, r, "C_cover"); }

Curve random_polynomial_curve(std::mt19937_64& rng, int max_degree) {
    if (max_degree < 1) throw DomainError("random polynomials need degree >= 1");
    std::uniform_int_distribution<int> deg_dist(1, max_degree);
    std::normal_distribution<double> normal(0.0, 1.0);
    const int deg = deg_dist(rng);
    std::vector<Vec2> c(static_cast<std::size_t>(deg) + 1);
    for (auto& v : c) {
        v.x = normal(rng);
        v.y = normal(rng);
    }
    // sum_k c_k (2t - 1)^k in monomials of t.
    std::vector<Vec2> mono(c.size());
    for (int k = 0; k <= deg; ++k) {
        double binom = 1.0;
        for (int j = 0; j <= k; ++j) {
            const double f = binom * std::pow(2.0, j) * ((k - j) % 2 == 0 ? 1.0 : -1.0);
            mono[j] = mono[j] + f * c[k];
            binom = binom * (k - j) / (j + 1);
        }
    }
    return polynomial_curve(std::move(mono));
}

double lk_max_ratio(const Curve& g, double s, std::size_t grid) {
    NormGrid ng;
    ng.curve_points = grid;
    const auto check = landau_kolmogorov_check(g, s, std::numeric_limits<double>::infinity(), ng);
    double best = 0.0;
    for (double r : check.ratios) best = std::max(best, r);
    return best;
}

CalibrationTable calibrate(const CalibrationConfig& cfg) {
    CalibrationTable t;
    t.seed = cfg.seed;
    t.lk_corpus = cfg.lk_corpus;
    t.cover_corpus = cfg.cover_corpus;
    t.max_degree = cfg.max_degree;
    t.grid = cfg.grid;
    t.safety = cfg.safety;

    std::mt19937_64 rng(cfg.seed);
    std::map<double, double> lk_max;
    for (std::size_t i = 0; i < cfg.lk_corpus; ++i) {
        const Curve g = random_polynomial_curve(rng, cfg.max_degree);
        for (double s : cfg.orders) lk_max[s] = std::max(lk_max[s], lk_max_ratio(g, s, cfg.grid));
    }
    for (double s : cfg.orders) t.c_cal[s] = cfg.safety * lk_max[s];

    NormGrid ng;
    ng.curve_points = cfg.grid;
    for (double r : cfg.orders) {
        std::size_t worst = 0;
        for (std::size_t i = 0; i < cfg.cover_corpus; ++i) {
            const Curve g = random_polynomial_curve(rng, cfg.max_degree);
            const double top = holder_norm_estimate(g, r - 1.0, ng).value;
            if (!(top > 0.0)) continue;
            const JetSource src = [g, top](double u, int order) {
                return (1.0 / top) * g.expand(u, 1.0, order);
            };
            SublevelOptions so;
            so.grid = cfg.grid;
            so.budget = std::numeric_limits<std::size_t>::max() / 4;
            worst = std::max(worst, sublevel_charts(src, 1.0, r, so).size());
        }
        t.c_cover[r] = std::ceil(cfg.safety * static_cast<double>(worst));
    }
    return t;
}

std::string calibration_to_json(const CalibrationTable& t) {
    json j;
    j["schema"] = t.schema;
    j["seed"] = t.seed;
    j["lk_corpus"] = t.lk_corpus;
    j["cover_corpus"] = t.cover_corpus;
    j["max_degree"] = t.max_degree;
    j["grid"] = t.grid;
    j["safety"] = t.safety;
    json cal = json::object(), cov = json::object();
    for (const auto& [k, v] : t.c_cal) cal[order_key(k)] = v;
    for (const auto& [k, v] : t.c_cover) cov[order_key(k)] = v;
    j["c_cal"] = cal;
    j["c_cover"] = cov;
    return j.dump(2) + "\n";
}

CalibrationTable calibration_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw SchemaError(std::string("calibration: ") + e.what());
    }
    CalibrationTable t;
    try {
        t.schema = j.at("schema").get<std::string>();
        if (t.schema != "surfdyn-calibration-v1")
            throw SchemaError("calibration: unsupported schema " + t.schema);
        t.seed = j.at("seed").get<std::uint64_t>();
        t.lk_corpus = j.at("lk_corpus").get<std::size_t>();
        t.cover_corpus = j.at("cover_corpus").get<std::size_t>();
        t.max_degree = j.at("max_degree").get<int>();
        t.grid = j.at("grid").get<std::size_t>();
        t.safety = j.at("safety").get<double>();
    } catch (const json::exception& e) {
        throw SchemaError(std::string("calibration: ") + e.what());
    }
    t.c_cal = read_table(j, "c_cal");
    t.c_cover = read_table(j, "c_cover");
    return t;
}

}  // namespace surfdyn
