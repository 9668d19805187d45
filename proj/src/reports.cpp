#include "surfdyn/reports.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "surfdyn/combinatorics.hpp"
#include "surfdyn/curve_engine.hpp"
#include "surfdyn/errors.hpp"
#include "surfdyn/lyapunov.hpp"
#include "surfdyn/reparametrization.hpp"

namespace surfdyn {

using nlohmann::json;

namespace {

// ---------------------------------------------------------------- schema

enum class Kind {
    Number,
    PositiveNumber,
    PositiveInt,
    NonNegInt,
    Bool,
    String,
    Point,
    IntArray,
    NumberArray,
    System,
    Curve,
    Pool,
};

struct Field {
    Kind kind;
    std::vector<std::string> choices = {};
};

using FieldTable = std::map<std::string, Field>;

const std::map<std::string, FieldTable>& pipeline_fields() {
    static const std::map<std::string, FieldTable> table = {
        {"entropy",
         {{"system", {Kind::System}},
          {"mode", {Kind::String, {"topological", "tail"}}},
          {"n_range", {Kind::IntArray}},
          {"delta", {Kind::PositiveNumber}},
          {"pool", {Kind::Pool}},
          {"eps_ladder", {Kind::NumberArray}},
          {"delta_ladder", {Kind::NumberArray}},
          {"centers_per_axis", {Kind::PositiveInt}},
          {"local_points", {Kind::PositiveInt}}}},
        {"lyapunov",
         {{"system", {Kind::System}},
          {"point", {Kind::Point}},
          {"n", {Kind::PositiveInt}},
          {"growth_n", {Kind::PositiveInt}},
          {"growth_grid", {Kind::PositiveInt}}}},
        {"volume",
         {{"system", {Kind::System}},
          {"point", {Kind::Point}},
          {"curve", {Kind::Curve}},
          {"chi", {Kind::PositiveNumber}},
          {"gamma", {Kind::PositiveNumber}},
          {"C", {Kind::PositiveNumber}},
          {"n", {Kind::PositiveInt}},
          {"eps", {Kind::PositiveNumber}},
          {"cells", {Kind::PositiveInt}}}},
        {"reparam",
         {{"system", {Kind::System}},
          {"point", {Kind::Point}},
          {"curve", {Kind::Curve}},
          {"chi", {Kind::PositiveNumber}},
          {"gamma", {Kind::PositiveNumber}},
          {"C", {Kind::PositiveNumber}},
          {"n", {Kind::PositiveInt}},
          {"eps", {Kind::PositiveNumber}},
          {"r", {Kind::PositiveNumber}}}},
        {"bounds",
         {{"system", {Kind::System}},
          {"r", {Kind::PositiveNumber}},
          {"n_range", {Kind::IntArray}},
          {"delta", {Kind::PositiveNumber}},
          {"pool", {Kind::Pool}},
          {"growth_n", {Kind::PositiveInt}},
          {"growth_grid", {Kind::PositiveInt}},
          {"local_diffeo", {Kind::Bool}},
          {"point", {Kind::Point}}}},
        {"oscille",
         {{"count", {Kind::PositiveInt}},
          {"grid", {Kind::PositiveInt}},
          {"max_attempts", {Kind::PositiveInt}}}},
        {"combi", {{"n", {Kind::PositiveInt}}, {"S", {Kind::PositiveInt}}}},
    };
    return table;
}

[[noreturn]] void schema_fail(const std::string& path, const std::string& what) {
    throw SchemaError(path + ": " + what);
}

bool is_int(const json& v) { return v.is_number_integer() || v.is_number_unsigned(); }

void check_point(const json& v, const std::string& path) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
        schema_fail(path, "expected an array of two numbers");
}

void check_field(const json& v, const Field& f, const std::string& path) {
    switch (f.kind) {
        case Kind::Number:
            if (!v.is_number()) schema_fail(path, "expected a number");
            break;
        case Kind::PositiveNumber:
            if (!v.is_number() || !(v.get<double>() > 0.0)) schema_fail(path, "expected a positive number");
            break;
        case Kind::PositiveInt:
            if (!is_int(v) || v.get<long long>() < 1) schema_fail(path, "expected a positive integer");
            break;
        case Kind::NonNegInt:
            if (!is_int(v) || v.get<long long>() < 0) schema_fail(path, "expected a nonnegative integer");
            break;
        case Kind::Bool:
            if (!v.is_boolean()) schema_fail(path, "expected true or false");
            break;
        case Kind::String:
            if (!v.is_string()) schema_fail(path, "expected a string");
            if (!f.choices.empty() &&
                std::find(f.choices.begin(), f.choices.end(), v.get<std::string>()) == f.choices.end())
                schema_fail(path, "unknown value '" + v.get<std::string>() + "'");
            break;
        case Kind::Point:
            check_point(v, path);
            break;
        case Kind::IntArray:
            if (!v.is_array() || v.empty()) schema_fail(path, "expected a nonempty array of integers");
            for (std::size_t i = 0; i < v.size(); ++i)
                if (!is_int(v[i]) || v[i].get<long long>() < 1)
                    schema_fail(path + "[" + std::to_string(i) + "]", "expected a positive integer");
            break;
        case Kind::NumberArray:
            if (!v.is_array() || v.empty()) schema_fail(path, "expected a nonempty array of numbers");
            for (std::size_t i = 0; i < v.size(); ++i)
                if (!v[i].is_number() || !(v[i].get<double>() > 0.0))
                    schema_fail(path + "[" + std::to_string(i) + "]", "expected a positive number");
            break;
        case Kind::System: {
            if (!v.is_object()) schema_fail(path, "expected an object {name, params}");
            for (const auto& [k, _] : v.items())
                if (k != "name" && k != "params") schema_fail(path + "." + k, "unknown field");
            if (!v.contains("name") || !v.at("name").is_string()) schema_fail(path + ".name", "required string");
            const auto& names = builtin_system_names();
            if (std::find(names.begin(), names.end(), v.at("name").get<std::string>()) == names.end())
                schema_fail(path + ".name", "unknown system '" + v.at("name").get<std::string>() + "'");
            if (v.contains("params")) {
                const auto& p = v.at("params");
                if (!p.is_object()) schema_fail(path + ".params", "expected an object");
                for (const auto& [k, pv] : p.items())
                    if (!pv.is_number() && !pv.is_string())
                        schema_fail(path + ".params." + k, "expected a number or a string");
            }
            break;
        }
        case Kind::Curve: {
            if (!v.is_object() || !v.contains("kind") || !v.at("kind").is_string())
                schema_fail(path, "expected an object with a string 'kind'");
            const std::string kind = v.at("kind").get<std::string>();
            std::set<std::string> allowed;
            if (kind == "unstable_segment") {
                allowed = {"kind", "length"};
                if (v.contains("length") && (!v.at("length").is_number() || !(v.at("length").get<double>() > 0.0)))
                    schema_fail(path + ".length", "expected a positive number");
            } else if (kind == "segment") {
                allowed = {"kind", "a", "b"};
                check_point(v.value("a", json()), path + ".a");
                check_point(v.value("b", json()), path + ".b");
            } else if (kind == "polynomial") {
                allowed = {"kind", "coeffs"};
                const json c = v.value("coeffs", json());
                if (!c.is_array() || c.empty()) schema_fail(path + ".coeffs", "expected a nonempty array of points");
                for (std::size_t i = 0; i < c.size(); ++i) check_point(c[i], path + ".coeffs[" + std::to_string(i) + "]");
            } else if (kind == "circle") {
                allowed = {"kind", "center", "radius"};
                check_point(v.value("center", json()), path + ".center");
                if (!v.contains("radius") || !v.at("radius").is_number() || !(v.at("radius").get<double>() > 0.0))
                    schema_fail(path + ".radius", "expected a positive number");
            } else {
                schema_fail(path + ".kind", "unknown curve kind '" + kind + "'");
            }
            for (const auto& [k, _] : v.items())
                if (!allowed.count(k)) schema_fail(path + "." + k, "unknown field");
            break;
        }
        case Kind::Pool: {
            if (!v.is_object()) schema_fail(path, "expected an object {kind, size}");
            for (const auto& [k, pv] : v.items()) {
                if (k == "kind") {
                    if (!pv.is_string() || (pv != "random" && pv != "grid"))
                        schema_fail(path + ".kind", "expected 'random' or 'grid'");
                } else if (k == "size") {
                    if (!is_int(pv) || pv.get<long long>() < 1) schema_fail(path + ".size", "expected a positive integer");
                } else {
                    schema_fail(path + "." + k, "unknown field");
                }
            }
            break;
        }
    }
}

// ------------------------------------------------------------- utilities

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

class Csv {
  public:
    explicit Csv(std::vector<std::string> header) : cols_(header.size()) { add(header); }
    void row(const std::vector<std::string>& cells) {
        if (cells.size() != cols_) throw Error("csv row width mismatch");
        add(cells);
    }
    std::string str() const { return out_.str(); }

  private:
    void add(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
        out_ << "\n";
    }
    std::size_t cols_;
    std::ostringstream out_;
};

Params read_params(const json& sys) {
    Params p;
    if (sys.contains("params"))
        for (const auto& [k, v] : sys.at("params").items()) {
            if (v.is_string())
                p[k] = v.get<std::string>();
            else
                p[k] = v.get<double>();
        }
    return p;
}

json params_json(const Params& p) {
    json j = json::object();
    for (const auto& [k, v] : p) {
        if (std::holds_alternative<double>(v))
            j[k] = std::get<double>(v);
        else
            j[k] = std::get<std::string>(v);
    }
    return j;
}

Vec2 read_point(const json& spec, const char* key, Vec2 fallback) {
    if (!spec.contains(key)) return fallback;
    return {spec.at(key)[0].get<double>(), spec.at(key)[1].get<double>()};
}

std::vector<std::size_t> read_sizes(const json& spec, const char* key, std::vector<std::size_t> fallback) {
    if (!spec.contains(key)) return fallback;
    std::vector<std::size_t> out;
    for (const auto& v : spec.at(key)) out.push_back(v.get<std::size_t>());
    return out;
}

std::vector<double> read_reals(const json& spec, const char* key, std::vector<double> fallback) {
    if (!spec.contains(key)) return fallback;
    std::vector<double> out;
    for (const auto& v : spec.at(key)) out.push_back(v.get<double>());
    return out;
}

PoolSpec read_pool(const json& spec, std::size_t default_size, std::uint64_t seed) {
    PoolSpec p{PoolSpec::Kind::Random, default_size, seed};
    if (spec.contains("pool")) {
        const auto& j = spec.at("pool");
        if (j.value("kind", std::string("random")) == "grid") p.kind = PoolSpec::Kind::Grid;
        p.size = j.value("size", default_size);
    }
    return p;
}

json pool_json(const PoolSpec& p) {
    return {{"kind", p.kind == PoolSpec::Kind::Grid ? "grid" : "random"}, {"size", p.size}, {"seed", p.seed}};
}

json vec_json(Vec2 v) { return json::array({v.x, v.y}); }

struct SystemSpec {
    std::string name;
    Params params;
};

SystemSpec read_system(const json& spec, const std::string& fallback) {
    if (!spec.contains("system")) return {fallback, {}};
    return {spec.at("system").at("name").get<std::string>(), read_params(spec.at("system"))};
}

/// Unit eigenvector of the Jacobian for the eigenvalue of largest modulus (real
/// spectrum), else the top right singular vector.
Vec2 unstable_direction(const Mat2& J) {
    const double tr = J.a + J.d;
    const double det = J.a * J.d - J.b * J.c;
    const double disc = tr * tr / 4.0 - det;
    if (disc >= 0.0) {
        const double s = std::sqrt(disc);
        const double lam = std::abs(tr / 2.0 + s) >= std::abs(tr / 2.0 - s) ? tr / 2.0 + s : tr / 2.0 - s;
        Vec2 v = std::abs(J.b) > 1e-14 ? Vec2{J.b, lam - J.a}
                 : std::abs(J.c) > 1e-14 ? Vec2{lam - J.d, J.c}
                 : (std::abs(J.a) >= std::abs(J.d) ? Vec2{1.0, 0.0} : Vec2{0.0, 1.0});
        return v / norm(v);
    }
    const Mat2 JtJ{J.a * J.a + J.c * J.c, J.a * J.b + J.c * J.d, J.a * J.b + J.c * J.d,
                   J.b * J.b + J.d * J.d};
    return unstable_direction(JtJ);
}

Curve read_curve(const json& spec, const SmoothMap& map, Vec2 x) {
    const json c = spec.value("curve", json{{"kind", "unstable_segment"}});
    const std::string kind = c.at("kind").get<std::string>();
    if (kind == "unstable_segment") {
        const double len = c.value("length", 1.0);
        const Vec2 u = unstable_direction(map.jacobian(x));
        return segment(-0.5 * len * u, 0.5 * len * u);
    }
    if (kind == "segment") return segment(read_point(c, "a", {}), read_point(c, "b", {}));
    if (kind == "circle") return circle(read_point(c, "center", {}), c.at("radius").get<double>());
    std::vector<Vec2> coeffs;
    for (const auto& p : c.at("coeffs")) coeffs.push_back({p[0].get<double>(), p[1].get<double>()});
    return polynomial_curve(std::move(coeffs));
}

struct Context {
    std::size_t index = 0;
    std::uint64_t seed = 0;
    std::optional<std::size_t> grid;
    std::string prefix;
};

using Tables = std::map<std::string, std::string>;

// --------------------------------------------------------------- pipelines

json run_entropy(const json& spec, const Context& ctx, Tables& tables) {
    const SystemSpec sys = read_system(spec, "cat");
    const SmoothMap map = builtin_system(sys.name, sys.params);
    const std::string mode = spec.value("mode", std::string("topological"));
    json out{{"system", {{"name", sys.name}, {"params", params_json(sys.params)}}}, {"mode", mode}};
    if (mode == "topological") {
        const PoolSpec pool = read_pool(spec, 20000, ctx.seed);
        const auto n_range = read_sizes(spec, "n_range", {1, 2, 3, 4, 5, 6});
        const double delta = spec.value("delta", 0.2);
        const EntropyEstimate est = topological_entropy_estimate(map, pool, n_range, delta);
        out["value"] = est.value;
        out["slope"] = est.slope;
        out["slope_stderr"] = est.slope_stderr;
        out["degenerate"] = est.degenerate;
        out["counts"] = est.counts;
        out["provenance"] = {{"estimator", "nested greedy (n, delta)-separated sets"},
                             {"pool", pool_json(pool)},
                             {"pool_dropped", est.pool_dropped},
                             {"n_range", n_range},
                             {"delta", delta}};
        Csv csv({"n", "count", "log_count"});
        for (std::size_t i = 0; i < est.counts.size(); ++i)
            csv.row({std::to_string(est.n_range[i]), std::to_string(est.counts[i]),
                     fmt(std::log(static_cast<double>(std::max<std::size_t>(est.counts[i], 1))))});
        tables[ctx.prefix + "_counts.csv"] = csv.str();
    } else {
        const auto eps = read_reals(spec, "eps_ladder", {0.1, 0.05, 0.02});
        const auto n_range = read_sizes(spec, "n_range", {1, 2, 3, 4});
        const auto deltas = read_reals(spec, "delta_ladder", {0.05, 0.02, 0.01, 0.005});
        TailPoolSpec pool;
        pool.centers_per_axis = spec.value("centers_per_axis", std::size_t{2});
        pool.local_points = spec.value("local_points", std::size_t{20000});
        pool.seed = ctx.seed;
        const auto tails = tail_entropy_estimate(map, eps, n_range, deltas, pool);
        json rows = json::array();
        Csv csv({"eps", "value", "stderr", "flags"});
        for (const auto& t : tails) {
            rows.push_back({{"eps", t.eps}, {"value", t.value}, {"stderr", t.value_stderr}, {"flags", t.flags}});
            std::string flags;
            for (const auto& f : t.flags) flags += (flags.empty() ? "" : ";") + f;
            csv.row({fmt(t.eps), fmt(t.value), fmt(t.value_stderr), flags});
        }
        out["tail"] = rows;
        out["provenance"] = {{"estimator", "greedy spanning counts in Bowen balls"},
                             {"eps_ladder", eps},
                             {"delta_ladder", deltas},
                             {"n_range", n_range},
                             {"centers_per_axis", pool.centers_per_axis},
                             {"local_points", pool.local_points},
                             {"seed", pool.seed}};
        tables[ctx.prefix + "_tail.csv"] = csv.str();
    }
    return out;
}

json run_lyapunov(const json& spec, const Context& ctx, Tables& tables) {
    const SystemSpec sys = read_system(spec, "cat");
    const SmoothMap map = builtin_system(sys.name, sys.params);
    const Vec2 x = read_point(spec, "point", {0.1, 0.2});
    const std::size_t n = spec.value("n", std::size_t{200});
    const std::size_t gn = spec.value("growth_n", std::size_t{64});
    const std::size_t gg = spec.value("growth_grid", ctx.grid.value_or(32));
    const LyapunovReport rep = lyapunov_spectrum(map, x, n);
    const auto grid = sample_grid(map.domain(), gg);
    const ExteriorGrowth r1 = exterior_growth(map, 1, gn, grid);
    const ExteriorGrowth r2 = exterior_growth(map, 2, gn, grid);
    Csv csv({"step", "chi1_estimate"});
    for (std::size_t i = 0; i < rep.convergence_trace.size(); ++i)
        csv.row({std::to_string(i + 1), fmt(rep.convergence_trace[i])});
    tables[ctx.prefix + "_trace.csv"] = csv.str();
    return {{"system", {{"name", sys.name}, {"params", params_json(sys.params)}}},
            {"point", vec_json(x)},
            {"exponents", {rep.exponents[0], rep.exponents[1]}},
            {"n_used", rep.n_used},
            {"singular", rep.singular},
            {"R_e", {r1.value, r2.value}},
            {"provenance",
             {{"estimator", rep.method},
              {"growth", {{"n", gn}, {"grid_per_axis", gg}, {"points_used", r1.points_used},
                          {"points_skipped", r1.points_skipped}}}}}};
}

json run_volume(const json& spec, const Context& ctx, Tables& tables) {
    const SystemSpec sys = read_system(spec, "cat");
    const SmoothMap map = builtin_system(sys.name, sys.params);
    const Vec2 x = read_point(spec, "point", {0.1, 0.2});
    const Curve sigma = read_curve(spec, map, x);
    HyperbolicParams hp;
    hp.chi = spec.value("chi", 0.9624);
    hp.gamma = spec.value("gamma", 0.1);
    hp.C = spec.value("C", 2.0);
    const std::size_t n = spec.value("n", std::size_t{8});
    const double eps = spec.value("eps", 0.1);
    const std::size_t cells = spec.value("cells", ctx.grid.value_or(10000));
    Csv csv({"n", "raw_length", "inner_length", "outer_length", "log_inner_over_n"});
    json rows = json::array();
    for (std::size_t m = 1; m <= n; ++m) {
        hp.n = m;
        const VolumeGrowthReport v = local_volume_growth(map, x, sigma, hp, eps, cells);
        const double rate = v.inner_length > 0.0 ? std::log(v.inner_length) / static_cast<double>(m) : 0.0;
        csv.row({std::to_string(m), fmt(v.raw_length), fmt(v.inner_length), fmt(v.outer_length), fmt(rate)});
        rows.push_back({{"n", m}, {"raw_length", v.raw_length}, {"inner_length", v.inner_length},
                        {"outer_length", v.outer_length}});
    }
    tables[ctx.prefix + "_growth.csv"] = csv.str();
    return {{"system", {{"name", sys.name}, {"params", params_json(sys.params)}}},
            {"point", vec_json(x)},
            {"curve", sigma.name()},
            {"chi", hp.chi},
            {"gamma", hp.gamma},
            {"C", hp.C},
            {"eps", eps},
            {"levels", rows},
            {"provenance", {{"estimator", "Gauss-Kronrod length over grid hyperbolic-time cells"}, {"cells", cells}}}};
}

json run_reparam(const json& spec, const Context& ctx, Tables& tables) {
    const SystemSpec sys = read_system(spec, "cat");
    const SmoothMap map = builtin_system(sys.name, sys.params);
    const Vec2 x = read_point(spec, "point", {0.1, 0.2});
    const Curve sigma = read_curve(spec, map, x);
    const double chi = spec.value("chi", 0.9624);
    const double gamma = spec.value("gamma", 0.1);
    const double C = spec.value("C", 2.0);
    const std::size_t n = spec.value("n", std::size_t{8});
    const double r = spec.value("r", 2.0);
    const double eps = spec.contains("eps") ? spec.at("eps").get<double>() : precondition_epsilon(map, r);
    BuildOptions opt;
    if (ctx.grid) opt.targets.grid = *ctx.grid + 1;
    const BowenReparamReport rep = reparametrize_bowen_ball(map, x, sigma, chi, gamma, C, n, eps, r, opt);

    Csv levels({"n", "classes", "count", "log_count", "lambda_plus", "lyapunov_term"});
    json lv = json::array();
    for (const auto& l : rep.levels) {
        levels.row({std::to_string(l.n), std::to_string(l.classes), std::to_string(l.count),
                    fmt(l.log_count), fmt(l.lambda_plus), fmt(l.lyapunov_term)});
        lv.push_back({{"n", l.n}, {"classes", l.classes}, {"count", l.count}, {"log_count", l.log_count},
                      {"lambda_plus", l.lambda_plus}, {"lyapunov_term", l.lyapunov_term}});
    }
    tables[ctx.prefix + "_levels.csv"] = levels.str();
    Csv charts({"lo", "hi", "parent", "step", "theta", "halvings", "xi", "eta", "trim_a", "trim_b", "fin"});
    for (const auto& c : rep.charts) {
        const auto& l = c.lineage;
        charts.row({fmt(c.lo), fmt(c.hi), std::to_string(l.parent), std::to_string(l.step),
                    std::to_string(l.theta), std::to_string(l.halvings), std::to_string(l.xi),
                    std::to_string(l.eta), fmt(l.trim_a), fmt(l.trim_b), std::to_string(l.fin)});
    }
    tables[ctx.prefix + "_charts.csv"] = charts.str();
    json classes = json::array();
    for (const auto& K : rep.classes) classes.push_back(K);
    return {{"system", {{"name", sys.name}, {"params", params_json(sys.params)}}},
            {"point", vec_json(x)},
            {"curve", sigma.name()},
            {"chi", chi},
            {"gamma", gamma},
            {"C", C},
            {"n", n},
            {"r", r},
            {"eps", eps},
            {"count", rep.charts.size()},
            {"classes", classes},
            {"lambda_plus", rep.lambda_plus},
            {"lyapunov_term", rep.lyapunov_term},
            {"A_fit", rep.A_fit},
            {"B_fit", rep.B_fit},
            {"bound", rep.bound},
            {"bound_holds", rep.bound_holds},
            {"derivative_normalized", rep.derivative_normalized},
            {"max_derivative", rep.max_derivative},
            {"hyperbolic_targets", rep.hyperbolic_targets},
            {"cover_misses", rep.cover_misses},
            {"class_bound", {{"observed", rep.class_bound.observed},
                             {"log_bound", rep.class_bound.log_bound},
                             {"threshold", rep.class_bound.threshold},
                             {"empty", rep.class_bound.empty}}},
            {"levels", lv},
            {"provenance", {{"A_prec", precondition_constant(r)},
                            {"target_grid", opt.targets.grid},
                            {"per_interval", opt.targets.per_interval},
                            {"pipeline_grid", opt.pipeline_grid},
                            {"sublevel_grid", opt.sublevel_grid},
                            {"margin", opt.margin},
                            {"slack", kCertificateSlack}}}};
}

json run_bounds(const json& spec, const Context& ctx, Tables& tables) {
    const SystemSpec sys = read_system(spec, "cat");
    const double r = spec.value("r", 2.0);
    BoundsConfig cfg;
    cfg.pool = read_pool(spec, 100000, ctx.seed);
    cfg.n_range = read_sizes(spec, "n_range", cfg.n_range);
    cfg.delta = spec.value("delta", cfg.delta);
    cfg.growth_n = spec.value("growth_n", cfg.growth_n);
    cfg.growth_grid = spec.value("growth_grid", ctx.grid.value_or(cfg.growth_grid));
    if (spec.contains("local_diffeo")) cfg.local_diffeo = spec.at("local_diffeo").get<bool>();
    const BoundsReport b = compute_bounds(sys.name, sys.params, r, cfg);
    json out = to_json(b);

    // Measure-level bounds from the Lyapunov exponents at one point.
    Params p = sys.params;
    if (!p.count("r")) p["r"] = r;
    const SmoothMap map = builtin_system(sys.name, p);
    const Vec2 x = read_point(spec, "point", {0.1, 0.2});
    const LyapunovReport ly = lyapunov_spectrum(map, x, 200);
    const double chi1 = std::max(ly.exponents[0], 0.0);
    const double sum = chi1 + std::max(ly.exponents[1], 0.0);
    out["measure_level"] = {{"point", vec_json(x)},
                            {"chi1_plus", chi1},
                            {"sum_chi_plus", sum},
                            {"diffeo", measure_level_bound(chi1, sum, r, BoundMode::Diffeo)},
                            {"general", measure_level_bound(chi1, sum, r, BoundMode::General)}};
    Csv csv({"quantity", "value"});
    csv.row({"h_top_estimate", fmt(b.h_top_estimate)});
    csv.row({"R_estimate", fmt(b.R_estimate)});
    csv.row({"sexent_bound_general", fmt(b.sexent_bound_general)});
    csv.row({"sexent_bound_localdiffeo", fmt(b.sexent_bound_localdiffeo)});
    csv.row({"tail_bound", fmt(b.tail_bound)});
    csv.row({"buzzi_bound", fmt(b.buzzi_bound)});
    tables[ctx.prefix + "_bounds.csv"] = csv.str();
    return out;
}

json run_oscille(const json& spec, const Context& ctx, Tables& tables) {
    const std::size_t count = spec.value("count", std::size_t{500});
    const std::size_t grid = spec.value("grid", ctx.grid.value_or(10000));
    const std::size_t max_attempts = spec.value("max_attempts", std::size_t{100000});
    std::mt19937_64 rng(ctx.seed);
    Csv csv({"index", "attempts", "a", "b", "length_product", "covers_unit_ball", "inside_ball",
             "length_ok", "speed_ok"});
    std::size_t failures = 0, attempts = 0;
    double worst = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        const OscilleSample s = sample_oscille_curve(rng, 10001, max_attempts);
        attempts += s.attempts;
        const TrimResult tr = oscillation_trim(s.curve);
        const TrimCertificate cert = verify_trim(s.curve, tr, grid);
        if (!cert.passed()) ++failures;
        worst = std::max(worst, tr.length_product());
        csv.row({std::to_string(i), std::to_string(s.attempts), fmt(tr.a), fmt(tr.b), fmt(tr.length_product()),
                 cert.covers_unit_ball ? "1" : "0", cert.inside_ball ? "1" : "0", cert.length_ok ? "1" : "0",
                 cert.speed_ok ? "1" : "0"});
    }
    tables[ctx.prefix + "_curves.csv"] = csv.str();
    return {{"count", count},
            {"failures", failures},
            {"attempts", attempts},
            {"max_length_product", worst},
            {"length_bound", trim_length_bound()},
            {"provenance", {{"sampler", "rejection-sampled cubic curves"}, {"verify_samples", grid},
                            {"trim_grid", 10001}, {"seed", ctx.seed}}}};
}

json run_combi(const json& spec, const Context& ctx, Tables& tables) {
    const std::size_t n = spec.value("n", std::size_t{2});
    const std::size_t S = spec.value("S", std::size_t{2});
    const BigInt count = count_admitting(n, S);
    const CombiBound b = combinatorial_bound_check(n, S);
    json out{{"n", n}, {"S", S}, {"count", count.str()}, {"log_count", b.log_count},
             {"bound", b.bound}, {"holds", b.holds}};
    if (n <= 8 && S <= 5 && count <= kEnumerationLimit) {
        const auto all = enumerate_admitting(n, S);
        out["enumerated"] = all.size();
        out["enumeration_matches"] = BigInt(all.size()) == count;
    }
    Csv csv({"n", "S", "count", "log_count", "bound", "holds"});
    csv.row({std::to_string(n), std::to_string(S), count.str(), fmt(b.log_count), fmt(b.bound),
             b.holds ? "1" : "0"});
    tables[ctx.prefix + "_bound.csv"] = csv.str();
    return out;
}

}  // namespace

ExitCode exit_code_for(const std::exception& e) {
    if (dynamic_cast<const SchemaError*>(&e)) return ExitCode::Schema;
    if (dynamic_cast<const BudgetError*>(&e) || dynamic_cast<const EscapeError*>(&e))
        return ExitCode::Budget;
    return ExitCode::Precondition;
}

BoundsReport bounds_from_inputs(double h_top, double R, double r, int d) {
    if (!(r > 1.0))
        throw PreconditionError("the symbolic-extension bounds need T of class C^r with r > 1 (got r = " +
                                std::to_string(r) + ")");
    BoundsReport b;
    b.r = r;
    b.d = d;
    b.h_top_estimate = h_top;
    b.R_estimate = R;
    b.sexent_bound_general = h_top + 4.0 * R / (r - 1.0);
    b.sexent_bound_localdiffeo = h_top + R / (r - 1.0);
    b.tail_bound = R / r;
    b.buzzi_bound = d * R / r;
    return b;
}

BoundsReport compute_bounds(const std::string& system, const Params& params, double r,
                            const BoundsConfig& cfg) {
    if (!(r > 1.0))
        throw PreconditionError("the symbolic-extension bounds need T of class C^r with r > 1 (got r = " +
                                std::to_string(r) + ")");
    Params p = params;
    if (!p.count("r")) p["r"] = r;
    const SmoothMap map = builtin_system(system, p);
    const EntropyEstimate h = topological_entropy_estimate(map, cfg.pool, cfg.n_range, cfg.delta);
    const auto grid = sample_grid(map.domain(), cfg.growth_grid);
    const ExteriorGrowth r1 = exterior_growth(map, 1, cfg.growth_n, grid);
    const ExteriorGrowth r2 = exterior_growth(map, 2, cfg.growth_n, grid);

    BoundsReport b = bounds_from_inputs(h.value, r1.value, r, kDim);
    b.system = system;
    b.R_e_estimates = {r1.value, r2.value};
    if (cfg.local_diffeo) {
        b.local_diffeo = *cfg.local_diffeo;
        b.local_diffeo_source = "assertion";
    } else {
        b.local_diffeo = true;
        for (const Vec2& q : sample_grid(map.domain(), cfg.det_grid))
            if (!(std::abs(map.jacobian(q).det()) > 1e-12)) b.local_diffeo = false;
        b.local_diffeo_source = "det_grid_check";
    }
    b.provenance = {
        {"h_top", {{"estimator", "nested greedy (n, delta)-separated sets"},
                   {"pool", pool_json(cfg.pool)},
                   {"pool_dropped", h.pool_dropped},
                   {"n_range", cfg.n_range},
                   {"delta", cfg.delta},
                   {"counts", h.counts},
                   {"degenerate", h.degenerate}}},
        {"R", {{"estimator", "exterior growth (1/n) max log+ |Lambda^e D T^n| over a lattice"},
               {"n", cfg.growth_n},
               {"grid_per_axis", cfg.growth_grid},
               {"points_used", r1.points_used},
               {"points_skipped", r1.points_skipped}}},
        {"local_diffeo", {{"source", b.local_diffeo_source}, {"det_grid_per_axis", cfg.det_grid}}},
        {"system_params", params_json(p)}};
    return b;
}

double measure_level_bound(double chi1_plus, double sum_chi_plus, double r, BoundMode mode) {
    if (!(r > 1.0)) throw PreconditionError("measure-level bounds need r > 1");
    if (chi1_plus < 0.0 || sum_chi_plus < 0.0) throw DomainError("positive parts must be nonnegative");
    return mode == BoundMode::Diffeo ? chi1_plus / (r - 1.0) : 2.0 * sum_chi_plus / (r - 1.0);
}

json to_json(const BoundsReport& b) {
    return {{"system", b.system},
            {"r", b.r},
            {"d", b.d},
            {"h_top_estimate", b.h_top_estimate},
            {"R_estimate", b.R_estimate},
            {"R_e_estimates", b.R_e_estimates},
            {"sexent_bound_general", b.sexent_bound_general},
            {"sexent_bound_localdiffeo", b.sexent_bound_localdiffeo},
            {"tail_bound", b.tail_bound},
            {"buzzi_bound", b.buzzi_bound},
            {"local_diffeo", b.local_diffeo},
            {"local_diffeo_source", b.local_diffeo_source},
            {"provenance", b.provenance}};
}

void validate_config(const json& config) {
    if (!config.is_object()) schema_fail("$", "config must be a JSON object");
    for (const auto& [k, _] : config.items())
        if (k != "schema" && k != "seed" && k != "grid" && k != "pipelines" && k != "description")
            schema_fail("$." + k, "unknown field");
    if (!config.contains("schema") || !config.at("schema").is_string())
        schema_fail("$.schema", "required string");
    if (config.at("schema") != kConfigSchema)
        schema_fail("$.schema", "unsupported schema '" + config.at("schema").get<std::string>() +
                                    "', expected '" + kConfigSchema + "'");
    if (!config.contains("seed")) schema_fail("$.seed", "required (seeds are mandatory)");
    if (!is_int(config.at("seed")) || (config.at("seed").is_number_integer() && config.at("seed").get<long long>() < 0))
        schema_fail("$.seed", "expected a nonnegative integer");
    if (config.contains("grid")) check_field(config.at("grid"), {Kind::PositiveInt}, "$.grid");
    if (config.contains("description") && !config.at("description").is_string())
        schema_fail("$.description", "expected a string");
    if (!config.contains("pipelines") || !config.at("pipelines").is_array())
        schema_fail("$.pipelines", "required array");
    const auto& pipes = config.at("pipelines");
    if (pipes.empty()) schema_fail("$.pipelines", "must list at least one pipeline");
    for (std::size_t i = 0; i < pipes.size(); ++i) {
        const std::string path = "$.pipelines[" + std::to_string(i) + "]";
        const auto& p = pipes[i];
        if (!p.is_object()) schema_fail(path, "expected an object");
        if (!p.contains("name") || !p.at("name").is_string()) schema_fail(path + ".name", "required string");
        const std::string name = p.at("name").get<std::string>();
        const auto it = pipeline_fields().find(name);
        if (it == pipeline_fields().end()) schema_fail(path + ".name", "unknown pipeline '" + name + "'");
        for (const auto& [k, v] : p.items()) {
            if (k == "name") continue;
            const auto f = it->second.find(k);
            if (f == it->second.end()) schema_fail(path + "." + k, "unknown field for pipeline '" + name + "'");
            check_field(v, f->second, path + "." + k);
        }
    }
}

json load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError(path.string() + ": cannot open config file");
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw SchemaError(path.string() + ":" + std::to_string(line) + ":" + std::to_string(col) +
                          ": invalid JSON (" + e.what() + ")");
    }
}

ReportBundle run_experiment(const json& config) {
    validate_config(config);
    ReportBundle bundle;
    const std::uint64_t seed = config.at("seed").get<std::uint64_t>();
    std::optional<std::size_t> grid;
    if (config.contains("grid")) grid = config.at("grid").get<std::size_t>();

    const auto& pipes = config.at("pipelines");
    std::map<std::string, int> uses;
    for (const auto& p : pipes) ++uses[p.at("name").get<std::string>()];

    json results = json::array();
    for (std::size_t i = 0; i < pipes.size(); ++i) {
        const json& spec = pipes[i];
        const std::string name = spec.at("name").get<std::string>();
        Context ctx;
        ctx.index = i;
        ctx.seed = splitmix64(seed + i);
        ctx.grid = grid;
        ctx.prefix = uses[name] > 1 ? name + "_" + std::to_string(i) : name;
        Tables tables;
        json out;
        if (name == "entropy") out = run_entropy(spec, ctx, tables);
        else if (name == "lyapunov") out = run_lyapunov(spec, ctx, tables);
        else if (name == "volume") out = run_volume(spec, ctx, tables);
        else if (name == "reparam") out = run_reparam(spec, ctx, tables);
        else if (name == "bounds") out = run_bounds(spec, ctx, tables);
        else if (name == "oscille") out = run_oscille(spec, ctx, tables);
        else out = run_combi(spec, ctx, tables);
        json files = json::array();
        for (auto& [file, content] : tables) {
            files.push_back(file);
            bundle.tables[file] = std::move(content);
        }
        results.push_back({{"pipeline", name}, {"index", i}, {"seed", ctx.seed}, {"spec", spec},
                           {"result", out}, {"tables", files}});
    }
    bundle.report = {{"schema", kReportSchema},
                     {"config_schema", kConfigSchema},
                     {"seed", seed},
                     {"grid", grid ? json(*grid) : json(nullptr)},
                     {"results", results}};
    return bundle;
}

std::string dump_report(const json& report) { return report.dump(2) + "\n"; }

void write_bundle(const ReportBundle& bundle, const std::filesystem::path& dir, const json& metadata) {
    std::filesystem::create_directories(dir);
    auto write = [&](const std::string& name, const std::string& content) {
        std::ofstream out(dir / name, std::ios::binary);
        if (!out) throw Error("cannot write " + (dir / name).string());
        out << content;
    };
    write("report.json", dump_report(bundle.report));
    for (const auto& [name, content] : bundle.tables) write(name, content);
    write("metadata.json", metadata.dump(2) + "\n");
}

}  // namespace surfdyn
