#pragma once

// Headline bounds, experiment configs and machine-readable report bundles.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "surfdyn/dynamics.hpp"
#include "surfdyn/entropy.hpp"

namespace surfdyn {

inline constexpr const char* kConfigSchema = "surfdyn-config-v1";
inline constexpr const char* kReportSchema = "surfdyn-report-v1";

enum class ExitCode : int { Ok = 0, Schema = 1, Precondition = 2, Budget = 3 };

/// Exit code for an exception escaping a pipeline.
ExitCode exit_code_for(const std::exception& e);

struct BoundsConfig {
    PoolSpec pool{PoolSpec::Kind::Random, 100000, 0};
    std::vector<std::size_t> n_range = {1, 2, 3, 4, 5, 6};
    double delta = 0.2;
    /// Iterate and per-axis lattice of the derivative-growth estimate.
    std::size_t growth_n = 64;
    std::size_t growth_grid = 32;
    /// User assertion of local-diffeomorphism; otherwise a det grid check.
    std::optional<bool> local_diffeo;
    std::size_t det_grid = 64;
};

struct BoundsReport {
    std::string system;
    double r = 2.0;
    int d = 2;
    double h_top_estimate = 0.0;
    double R_estimate = 0.0;
    /// R_e for e = 1, 2.
    std::vector<double> R_e_estimates;
    double sexent_bound_general = 0.0;
    double sexent_bound_localdiffeo = 0.0;
    double tail_bound = 0.0;
    double buzzi_bound = 0.0;
    bool local_diffeo = false;
    std::string local_diffeo_source;
    nlohmann::json provenance;
};

/// The four bounds from their inputs: h + 4R/(r-1), h + R/(r-1), R/r, dR/r.
BoundsReport bounds_from_inputs(double h_top, double R, double r, int d = 2);

/// Runs the entropy and growth estimators on a built-in system. r <= 1 is
/// rejected: the theorems need T of class C^r with r > 1.
BoundsReport compute_bounds(const std::string& system, const Params& params, double r,
                            const BoundsConfig& cfg);

enum class BoundMode { Diffeo, General };

/// chi1+/(r-1) (diffeo) or 2 sum chi+/(r-1) (general).
double measure_level_bound(double chi1_plus, double sum_chi_plus, double r, BoundMode mode);

nlohmann::json to_json(const BoundsReport& b);

/// Checks a config against the versioned schema; throws SchemaError naming the field.
void validate_config(const nlohmann::json& config);

/// Parses a config file; JSON syntax errors become SchemaError with line and column.
nlohmann::json load_config(const std::filesystem::path& path);

struct ReportBundle {
    nlohmann::json report;
    /// file name -> CSV content.
    std::map<std::string, std::string> tables;
};

/// Validates and runs every pipeline of the config in order.
ReportBundle run_experiment(const nlohmann::json& config);

/// Writes report.json, the CSV tables and metadata.json (the only file with
/// timestamps) into `dir`.
void write_bundle(const ReportBundle& bundle, const std::filesystem::path& dir,
                  const nlohmann::json& metadata = nlohmann::json::object());

/// Deterministic serialization used for report.json.
std::string dump_report(const nlohmann::json& report);

}  // namespace surfdyn
