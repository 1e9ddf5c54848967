#pragma once

// Batch front-end: configuration parsing, CSV/JSON reports and subcommand dispatch.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "affine/fields.hpp"
#include "affine/integrator.hpp"
#include "affine/moments.hpp"

namespace affine::cli {

inline constexpr std::string_view kVersion = "0.1.0";

struct Config {
  struct Model {
    double gamma = 2.0;
    double mu = 0.0;
    double l = 0.0;
  } model;

  struct Initial {
    bool matrix = false;
    double g1_0 = 1.0;
    double alpha0 = 0.0;
    double beta0 = 0.0;
    double ep0 = 1.0;
    double a0 = 0.0, b0 = 0.0, c0 = 0.0, d0 = 0.0;
    double gx0 = 0.5, gy0 = 0.5, gxy0 = 0.0;
  } initial;

  struct Integration {
    double t_end = 50.0;
    double rtol = 1e-10;
    double atol = 1e-12;
    double min_step = 1e-12;
    double max_step = 0.0;  // 0: unbounded
    double blowup_norm_threshold = 1e12;
    int output_points = 0;  // 0: one row per accepted step
  } integration;

  struct ClosedForm {
    int samples = 501;
  } closed_form;

  struct Asymptotics {
    double t_end = 1e5;
    double t_lo = 1e3;
    double t_hi = 1e5;
    int samples = 200;
  } asymptotics;

  struct Fields {
    double a_exp = 4.0;
    int radial = 48;
    int angular = 32;
    double truncation_tol = 1e-12;
    std::vector<double> audit_times = {0.0, 1.0, 2.0, 3.0, 4.0, 5.0};
    double residual_time = 1.0;
    std::vector<double> h_levels = {0.1, 0.05, 0.025};
    int grid_points = 9;
    double grid_half_width = 1.5;
  } fields;

  struct Interior {
    std::string preset = "auto";
    std::string path = "trajectory";
    double delta = 1.0;
    double horizon = 1e7;
    int nodes = 400;
  } interior;

  struct Output {
    std::string directory = "out";
    bool csv = true;
    bool json = true;
  } output;

  ModelParams params() const { return {model.gamma, model.mu, model.l}; }
  IntegrationConfig integration_config(double t_end) const;
};

/// Parses "key = value" lines grouped by [section] headers; '#' starts a comment.
/// Keys before the first header belong to [model].
/// Throws ParseError (with line number) or a validation error code.
Config parse_config(std::string_view text);

Config load_config(const std::filesystem::path& path);

/// Re-validates every field; called by parse_config.
void validate(const Config& cfg);

nlohmann::json to_json(const Config& cfg);

/// Config file text that parses back to cfg exactly.
std::string to_text(const Config& cfg);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

/// Shortest round-trip decimal form, '.' separator.
std::string format_double(double v);

std::string format_csv(const CsvTable& table);
CsvTable parse_csv(std::string_view text);

/// Throws IoError.
void write_csv(const std::filesystem::path& path, const CsvTable& table);
CsvTable read_csv(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

/// t, g1, alpha, beta, E, Ek, Ep, inv_beta_residual, bound_residual.
CsvTable scalar_trajectory_table(const ModelParams& params, const ScalarInvariants& inv, const Trajectory<3>& traj,
                                 const std::vector<double>& times);

/// t, a, b, c, d, g1m, g2m, g3m, delta, d1.
CsvTable matrix_trajectory_table(const ModelParams& params, const Trajectory<7>& traj,
                                 const std::vector<double>& times);

/// t, m, E, J, G, F1, F2.
CsvTable audit_table(const std::vector<Functionals>& series);

struct ResidualRow {
  double h = 0.0;
  double dt = 0.0;
  PdeResidual res;
};
/// h, dt, res_mass, res_momx, res_momy, res_entropy, res_pressure.
CsvTable residual_table(const std::vector<ResidualRow>& rows);

/// Invariant defect written in the inv_beta_residual column: beta - C G1 - l/2 for mu = 0,
/// beta e^(mu t) / G1 - C for l = 0, NaN when neither integral exists.
double inv_beta_residual(const ModelParams& params, const ScalarInvariants& inv, double t,
                         const ScalarMomentState<>& s);

/// E(0) G1 - E_p(0) G1(0)^(1 - gamma) G1^gamma - (alpha^2 + beta^2), non-negative on trajectories.
double bound_residual(const ModelParams& params, const ScalarInvariants& inv, const ScalarMomentState<>& s);

enum ExitCode : int { kOk = 0, kConfigError = 1, kNumericalFailure = 2, kIoError = 3 };

/// Exit code for an error raised by the library.
int exit_code_for(Errc code);

/// argv[0] is the program name. Diagnostics go to standard error.
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);

}  // namespace affine::cli
