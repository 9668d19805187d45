// surfdyn: command-line front end. Every subcommand builds a one-pipeline
// config and goes through the same runner as `run <config>`.

#include <chrono>
#include <ctime>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "surfdyn/errors.hpp"
#include "surfdyn/reports.hpp"

using nlohmann::json;
using namespace surfdyn;

namespace {

struct Globals {
    std::string out = "surfdyn_out";
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> grid;
};

struct SystemArgs {
    std::string name = "cat";
    std::vector<std::string> params;
};

void add_system(CLI::App* app, SystemArgs& s) {
    app->add_option("--system", s.name, "Built-in system name")->capture_default_str();
    app->add_option("--param", s.params, "System parameter key=value (repeatable)");
}

json system_json(const SystemArgs& s) {
    json p = json::object();
    for (const auto& kv : s.params) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw SchemaError("--param " + kv + ": expected key=value");
        const std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
        try {
            std::size_t used = 0;
            const double d = std::stod(val, &used);
            if (used == val.size()) {
                p[key] = d;
                continue;
            }
        } catch (const std::exception&) {
        }
        p[key] = val;
    }
    return {{"name", s.name}, {"params", p}};
}

/// Copies the options the user actually passed into the pipeline spec.
template <class T>
void put(json& spec, CLI::App* app, const std::string& flag, const std::string& key, const T& value) {
    if (app->count(flag) > 0) spec[key] = value;
}

json metadata(const std::string& command) {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return {{"command", command}, {"started_utc", buf}};
}

int execute(json config, const Globals& g, const std::string& command) {
    if (g.seed) config["seed"] = *g.seed;
    if (g.grid) config["grid"] = *g.grid;
    const ReportBundle bundle = run_experiment(config);
    write_bundle(bundle, g.out, metadata(command));
    std::cout << dump_report(bundle.report);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"surfdyn: numerical laboratory for C^r surface dynamics"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--out", g.out, "Output directory for report.json and CSV tables")->capture_default_str();
    app.add_option("--seed", g.seed, "Random seed (u64); overrides the config seed");
    app.add_option("--grid", g.grid, "Grid resolution override");

    std::string config_path;

    // entropy
    SystemArgs ent_sys;
    std::string ent_mode = "topological";
    std::vector<std::size_t> ent_n;
    double ent_delta = 0.2;
    std::size_t ent_pool = 0;
    std::vector<double> ent_eps, ent_deltas;
    auto* ent = app.add_subcommand("entropy", "Topological or tail entropy estimate");
    add_system(ent, ent_sys);
    ent->add_option("--mode", ent_mode)->check(CLI::IsMember({"topological", "tail"}));
    ent->add_option("--n-range", ent_n, "Iterates n used by the fit");
    ent->add_option("--delta", ent_delta, "Separation scale");
    ent->add_option("--pool-size", ent_pool, "Random pool size");
    ent->add_option("--eps", ent_eps, "Tail: Bowen-ball radii");
    ent->add_option("--delta-ladder", ent_deltas, "Tail: separation ladder");

    // lyapunov
    SystemArgs ly_sys;
    std::vector<double> ly_point;
    std::size_t ly_n = 200;
    auto* ly = app.add_subcommand("lyapunov", "Lyapunov spectrum and exterior growth rates");
    add_system(ly, ly_sys);
    ly->add_option("--point", ly_point)->expected(2);
    ly->add_option("--n", ly_n);

    // volume and reparam share the curve setup
    SystemArgs vol_sys, rep_sys;
    std::vector<double> vol_point, rep_point;
    std::size_t vol_n = 8, rep_n = 8;
    double vol_chi = 0, vol_gamma = 0, vol_C = 0, vol_eps = 0;
    double rep_chi = 0, rep_gamma = 0, rep_C = 0, rep_eps = 0, rep_r = 2;
    auto* vol = app.add_subcommand("volume", "Curve volume growth on hyperbolic times");
    add_system(vol, vol_sys);
    vol->add_option("--point", vol_point)->expected(2);
    vol->add_option("--n", vol_n);
    vol->add_option("--chi", vol_chi);
    vol->add_option("--gamma", vol_gamma);
    vol->add_option("--C", vol_C);
    vol->add_option("--eps", vol_eps);
    auto* rep = app.add_subcommand("reparam", "Bowen-ball reparametrization along the unstable direction");
    add_system(rep, rep_sys);
    rep->add_option("--point", rep_point)->expected(2);
    rep->add_option("--n", rep_n);
    rep->add_option("--chi", rep_chi);
    rep->add_option("--gamma", rep_gamma);
    rep->add_option("--C", rep_C);
    rep->add_option("--eps", rep_eps);
    rep->add_option("--r", rep_r);

    // bounds
    SystemArgs b_sys;
    double b_r = 2.0;
    std::size_t b_pool = 0;
    bool b_diffeo = false;
    auto* bounds = app.add_subcommand("bounds", "Symbolic-extension and tail-entropy bounds");
    add_system(bounds, b_sys);
    bounds->add_option("--r", b_r, "Smoothness r > 1")->capture_default_str();
    bounds->add_option("--pool-size", b_pool);
    bounds->add_flag("--local-diffeo,!--no-local-diffeo", b_diffeo, "Assert (or deny) local diffeomorphism");

    // oscille
    std::size_t os_count = 500;
    auto* os = app.add_subcommand("oscille", "Random-curve check of the trimming lemma");
    os->add_option("--count", os_count)->capture_default_str();

    // combi
    std::size_t cb_n = 2, cb_S = 2;
    auto* cb = app.add_subcommand("combi", "Count of sequences admitting S");
    cb->add_option("--n", cb_n)->capture_default_str();
    cb->add_option("--S", cb_S)->capture_default_str();

    auto* run = app.add_subcommand("run", "Run every pipeline of a config file");
    run->add_option("config", config_path, "Config JSON (schema " + std::string(kConfigSchema) + ")")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : static_cast<int>(ExitCode::Schema);
    }

    try {
        json config;
        std::string command;
        auto* sub = app.get_subcommands().front();
        command = sub->get_name();
        if (sub == run) {
            config = load_config(config_path);
        } else {
            json p{{"name", command}};
            if (sub == ent) {
                if (ent->count("--system") || ent->count("--param")) p["system"] = system_json(ent_sys);
                put(p, ent, "--mode", "mode", ent_mode);
                put(p, ent, "--n-range", "n_range", ent_n);
                put(p, ent, "--delta", "delta", ent_delta);
                if (ent->count("--pool-size")) p["pool"] = {{"kind", "random"}, {"size", ent_pool}};
                put(p, ent, "--eps", "eps_ladder", ent_eps);
                put(p, ent, "--delta-ladder", "delta_ladder", ent_deltas);
            } else if (sub == ly) {
                p["system"] = system_json(ly_sys);
                put(p, ly, "--point", "point", ly_point);
                put(p, ly, "--n", "n", ly_n);
            } else if (sub == vol) {
                p["system"] = system_json(vol_sys);
                put(p, vol, "--point", "point", vol_point);
                put(p, vol, "--n", "n", vol_n);
                put(p, vol, "--chi", "chi", vol_chi);
                put(p, vol, "--gamma", "gamma", vol_gamma);
                put(p, vol, "--C", "C", vol_C);
                put(p, vol, "--eps", "eps", vol_eps);
            } else if (sub == rep) {
                p["system"] = system_json(rep_sys);
                put(p, rep, "--point", "point", rep_point);
                put(p, rep, "--n", "n", rep_n);
                put(p, rep, "--chi", "chi", rep_chi);
                put(p, rep, "--gamma", "gamma", rep_gamma);
                put(p, rep, "--C", "C", rep_C);
                put(p, rep, "--eps", "eps", rep_eps);
                put(p, rep, "--r", "r", rep_r);
            } else if (sub == bounds) {
                p["system"] = system_json(b_sys);
                p["r"] = b_r;
                if (bounds->count("--pool-size")) p["pool"] = {{"kind", "random"}, {"size", b_pool}};
                if (bounds->count("--local-diffeo") || bounds->count("--no-local-diffeo"))
                    p["local_diffeo"] = b_diffeo;
            } else if (sub == os) {
                p["count"] = os_count;
            } else {
                p["n"] = cb_n;
                p["S"] = cb_S;
            }
            if (!g.seed) throw SchemaError("--seed: required (seeds are mandatory)");
            config = {{"schema", kConfigSchema}, {"seed", *g.seed}, {"pipelines", json::array({p})}};
        }
        return execute(std::move(config), g, command);
    } catch (const std::exception& e) {
        const ExitCode code = exit_code_for(e);
        const char* label = code == ExitCode::Schema ? "schema error"
                            : code == ExitCode::Budget ? "budget/escape error"
                                                       : "precondition error";
        std::cerr << "surfdyn: " << label << ": " << e.what() << "\n";
        return static_cast<int>(code);
    }
}
