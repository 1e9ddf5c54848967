#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <limits>
#include <memory>
#include <optional>

#include <CLI11.hpp>

#include "affine/asymptotics.hpp"
#include "affine/cli.hpp"
#include "affine/closedform.hpp"
#include "affine/interiorcheck.hpp"

namespace affine::cli {

int exit_code_for(Errc code) {
  switch (code) {
    case Errc::ParseError:
    case Errc::ValidationError:
    case Errc::GammaOutOfRange:
    case Errc::NegativeFriction:
    case Errc::NonFinite:
    case Errc::NonPositiveG1:
    case Errc::InvalidState:
    case Errc::ExponentTooSmall:
    case Errc::BadDelta:
    case Errc::RegimeMismatch:
    case Errc::NotAxisymmetric:
    case Errc::NonZeroCoriolis:
      return kConfigError;
    case Errc::IoError:
      return kIoError;
    default:
      return kNumericalFailure;
  }
}

namespace {

constexpr double kAuditTol = 1e-8;

using nlohmann::json;

struct Context {
  Config cfg;
  std::filesystem::path out;
  json outputs = json::array();
  std::vector<std::string> diagnostics;

  void note(const std::string& msg) {
    std::cerr << msg << '\n';
    diagnostics.push_back(msg);
  }

  void csv(const std::string& name, const CsvTable& table) {
    if (!cfg.output.csv) return;
    write_csv(out / name, table);
    outputs.push_back(name);
  }

  void report(const std::string& name, const json& doc) {
    if (!cfg.output.json) return;
    write_json(out / name, doc);
    outputs.push_back(name);
  }
};

ScalarMomentState<> scalar_initial(const Config& cfg) {
  return {cfg.initial.g1_0, cfg.initial.alpha0, cfg.initial.beta0};
}

MatrixMomentState<> matrix_initial(const Config& cfg) {
  const auto& in = cfg.initial;
  return matrix_state(cfg.params(), in.a0, in.b0, in.c0, in.d0, in.gx0, in.gy0, in.gxy0);
}

Trajectory<3> run_scalar(const ModelParams& p, const ScalarInvariants& inv, const ScalarMomentState<>& s0,
                         const IntegrationConfig& ic) {
  return integrate<3>(
      [&](double, const Eigen::Vector3d& y) { return scalar_rhs(p, inv, ScalarMomentState<>::from_vector(y)); },
      s0.to_vector(), 0.0, ic);
}

Trajectory<7> run_matrix(const ModelParams& p, double k1, const MatrixMomentState<>& s0,
                         const IntegrationConfig& ic) {
  return integrate<7>(
      [&](double, const Eigen::Matrix<double, 7, 1>& y) {
        return matrix_rhs(p, k1, MatrixMomentState<>::from_vector(y));
      },
      s0.to_vector(), 0.0, ic);
}

double matrix_k1_of(const Config& cfg, const MatrixMomentState<>& s0) {
  return matrix_k1(cfg.params(), cfg.initial.ep0, delta_of(cfg.params(), s0));
}

/// Long runs decay towards zero, so the absolute tolerance is switched off and rtol tightened.
IntegrationConfig long_run_config(const Config& cfg, double t_end) {
  IntegrationConfig ic = cfg.integration_config(t_end);
  ic.atol = 1e-30;
  ic.rtol = std::min(ic.rtol, 1e-11);
  return ic;
}

template <int N>
std::vector<double> output_times(const Config& cfg, const Trajectory<N>& traj) {
  const int n = cfg.integration.output_points;
  if (n == 0) return traj.times();
  std::vector<double> t(static_cast<std::size_t>(n));
  const double t0 = traj.t0(), t1 = traj.t_final();
  for (int i = 0; i < n; ++i) t[static_cast<std::size_t>(i)] = n == 1 ? t0 : t0 + (t1 - t0) * i / (n - 1);
  t.back() = t1;
  return t;
}

template <int N>
json trajectory_summary(const Trajectory<N>& traj) {
  json j = {{"termination", to_string(traj.termination())},
            {"t_final", traj.t_final()},
            {"steps", traj.step_count()}};
  json events = json::array();
  for (const Event& e : traj.events()) {
    events.push_back({{"kind", to_string(e.kind)},
                      {"time", e.time},
                      {"escape_estimate", e.escape_estimate},
                      {"detail", e.detail}});
  }
  j["events"] = events;
  return j;
}

/// Writes the blow-up report and returns the exit code for the run.
template <int N>
int check_termination(Context& ctx, const Trajectory<N>& traj, const std::string& stage) {
  if (traj.termination() == Termination::ReachedHorizon) return kOk;
  const Event& e = traj.events().back();
  // The extrapolated escape time is allowed an error as large as the extrapolation distance.
  const double upper = e.escape_estimate + std::max(e.escape_estimate - e.time, 0.0);
  std::vector<double> last(traj.states().back().data(), traj.states().back().data() + N);
  ctx.report("blowup_report.json", {{"stage", stage},
                                    {"termination", to_string(traj.termination())},
                                    {"kind", to_string(e.kind)},
                                    {"detail", e.detail},
                                    {"last_finite_time", e.time},
                                    {"escape_estimate", e.escape_estimate},
                                    {"bracket", {e.time, upper}},
                                    {"last_state", last}});
  ctx.note(stage + ": " + to_string(traj.termination()) + " near t in [" + format_double(e.time) + ", " +
           format_double(upper) + "] (" + e.detail + ")");
  return kNumericalFailure;
}

int cmd_simulate(Context& ctx) {
  const Config& cfg = ctx.cfg;
  const ModelParams p = cfg.params();
  const IntegrationConfig ic = cfg.integration_config(cfg.integration.t_end);
  if (cfg.initial.matrix) {
    const auto s0 = matrix_initial(cfg);
    const double k1 = matrix_k1_of(cfg, s0);
    const auto traj = run_matrix(p, k1, s0, ic);
    ctx.csv("matrix_trajectory.csv", matrix_trajectory_table(p, traj, output_times(cfg, traj)));
    ctx.report("simulate.json", {{"mode", "matrix"}, {"k1", k1}, {"trajectory", trajectory_summary(traj)}});
    return check_termination(ctx, traj, "simulate");
  }
  const auto s0 = scalar_initial(cfg);
  const auto inv = scalar_invariants(p, s0, cfg.initial.ep0);
  const auto traj = run_scalar(p, inv, s0, ic);
  ctx.csv("trajectory.csv", scalar_trajectory_table(p, inv, traj, output_times(cfg, traj)));
  ctx.report("simulate.json", {{"mode", "scalar"},
                               {"invariants",
                                {{"c_rot", inv.c_rot},
                                 {"k_quad", inv.k_quad},
                                 {"k_force", inv.k_force},
                                 {"e_total", inv.e_total}}},
                               {"trajectory", trajectory_summary(traj)}});
  return check_termination(ctx, traj, "simulate");
}

int cmd_closed_form(Context& ctx) {
  const Config& cfg = ctx.cfg;
  const ModelParams p = cfg.params();
  if (cfg.initial.matrix) throw Error(Errc::ValidationError, "closed-form needs scalar initial data");
  if (p.mu != 0.0) throw Error(Errc::ValidationError, "closed-form needs mu = 0");
  const auto s0 = scalar_initial(cfg);
  const auto inv = scalar_invariants(p, s0, cfg.initial.ep0);
  const auto traj = run_scalar(p, inv, s0, cfg.integration_config(cfg.integration.t_end));
  const int code = check_termination(ctx, traj, "closed-form");
  const int n = cfg.closed_form.samples;
  std::vector<double> grid(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) grid[static_cast<std::size_t>(i)] = traj.t_final() * i / (n - 1);
  const auto exact = trajectory_mu0(inv, p, s0, grid);

  CsvTable table{{"t", "g1", "alpha", "beta", "diff_rk"}, {}};
  double sup = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double diff = (exact[i].to_vector() - traj.sample(grid[i])).cwiseAbs().maxCoeff();
    sup = std::max(sup, diff);
    table.rows.push_back({grid[i], exact[i].g1, exact[i].alpha, exact[i].beta, diff});
  }
  ctx.csv("closed_form.csv", table);

  const OrbitBounds b = orbit_bounds(inv, p, s0.g1);
  json eq = json::array();
  for (const Equilibrium& e : equilibria(inv, p).equilibria) {
    eq.push_back({{"plane", e.plane == PhasePlane::G1Alpha ? "g1_alpha" : "alpha_beta"},
                  {"point", {e.point(0), e.point(1)}},
                  {"kind", to_string(e.kind)},
                  {"eigenvalues_re", {e.eigenvalues(0).real(), e.eigenvalues(1).real()}},
                  {"eigenvalues_im", {e.eigenvalues(0).imag(), e.eigenvalues(1).imag()}},
                  {"rhs_residual", e.rhs_residual}});
  }
  ctx.report("closed_form.json", {{"sup_diff_rk", sup},
                                  {"orbit_lower", b.lower},
                                  {"orbit_upper", b.upper},
                                  {"period", orbit_period(inv, p)},
                                  {"equilibria", eq},
                                  {"trajectory", trajectory_summary(traj)}});
  return code;
}

json fit_json(const PowerLawFit& f) {
  return {{"exponent", f.exponent}, {"coefficient", f.coefficient}, {"residual", f.residual}, {"samples", f.samples}};
}

int cmd_asymptotics(Context& ctx) {
  const Config& cfg = ctx.cfg;
  const auto& as = cfg.asymptotics;
  const ModelParams p = cfg.params();
  const auto grid = log_grid(as.t_lo, as.t_hi, as.samples);
  const IntegrationConfig ic = long_run_config(cfg, as.t_end);

  if (cfg.initial.matrix) {
    const auto s0 = matrix_initial(cfg);
    const auto traj = run_matrix(p, matrix_k1_of(cfg, s0), s0, ic);
    if (const int code = check_termination(ctx, traj, "asymptotics")) return code;
    const MatrixAsymptote m = matrix_asymptote(p, traj, as.t_lo, as.t_hi, as.samples);
    ctx.csv("asymptotics_matrix.csv", matrix_trajectory_table(p, traj, grid));
    ctx.report("asymptotics.json", {{"mode", "matrix"},
                                    {"l4_estimate", m.l4_estimate},
                                    {"d1_exponent", m.d1_exponent},
                                    {"isotropy_defect", m.isotropy_defect},
                                    {"isotropy_defect_start", m.isotropy_defect_start},
                                    {"isotropy_defect_end", m.isotropy_defect_end},
                                    {"delta_exponent", m.delta_exponent},
                                    {"determinant_defect", m.determinant_defect}});
    return kOk;
  }

  const Regime regime = regime_of(p);
  const auto s0 = scalar_initial(cfg);
  const auto inv = scalar_invariants(p, s0, cfg.initial.ep0);
  const auto traj = run_scalar(p, inv, s0, ic);
  if (const int code = check_termination(ctx, traj, "asymptotics")) return code;

  CsvTable table{{"t", "g1", "alpha", "beta", "g1_lead", "alpha_lead", "beta_lead"}, {}};
  std::vector<double> g1, alpha, beta, g1_lead, alpha_lead, beta_lead;
  for (double t : grid) {
    const auto s = ScalarMomentState<>::from_vector(traj.sample(t));
    const LeadingTerm lt = leading_term(p, inv, regime, t);
    g1.push_back(s.g1);
    alpha.push_back(s.alpha);
    beta.push_back(s.beta);
    g1_lead.push_back(lt.g1);
    alpha_lead.push_back(lt.alpha);
    beta_lead.push_back(lt.beta);
    table.rows.push_back({t, s.g1, s.alpha, s.beta, lt.g1, lt.alpha, lt.beta});
  }
  ctx.csv("asymptotics.csv", table);

  json fits;
  const auto fit_pair = [&](const std::string& name, const std::vector<double>& v, const std::vector<double>& lead) {
    const auto nonzero = [](const std::vector<double>& x) {
      return std::all_of(x.begin(), x.end(), [](double y) { return y != 0.0 && std::isfinite(y); });
    };
    if (!nonzero(v) || !nonzero(lead)) {
      fits[name] = nullptr;
      return;
    }
    const PowerLawFit got = fit_power_law(grid, v, as.t_lo, as.t_hi);
    const PowerLawFit want = fit_power_law(grid, lead, as.t_lo, as.t_hi);
    fits[name] = {{"fitted", fit_json(got)},
                  {"predicted", fit_json(want)},
                  {"exponent_error", got.exponent - want.exponent},
                  {"coefficient_rel_error", got.coefficient / want.coefficient - 1.0}};
  };
  fit_pair("alpha", alpha, alpha_lead);
  fit_pair("g1", g1, g1_lead);
  // Beta decays exponentially when l = 0 and mu > 0, so no power law is fitted there.
  if (regime != Regime::MuPosLZero) fit_pair("beta", beta, beta_lead);
  ctx.report("asymptotics.json", {{"mode", "scalar"}, {"regime", to_string(regime)}, {"fits", fits}});
  return kOk;
}

int cmd_fields(Context& ctx) {
  const Config& cfg = ctx.cfg;
  const auto& f = cfg.fields;
  const ModelParams p = cfg.params();
  if (cfg.initial.matrix) throw Error(Errc::ValidationError, "fields needs scalar initial data");
  const InitialProfile profile = canonical_profile(p, f.a_exp, cfg.initial.g1_0);
  const auto s0 = scalar_initial(cfg);
  // The profile fixes E_p(0); the configured ep0 is not used here.
  const auto inv = scalar_invariants(p, s0, profile.ep0);
  const double h_max = *std::max_element(f.h_levels.begin(), f.h_levels.end());
  const double t_end = std::max(f.audit_times.back(), f.residual_time + h_max) + 1.0;
  const auto traj = run_scalar(p, inv, s0, cfg.integration_config(t_end));
  if (const int code = check_termination(ctx, traj, "fields")) return code;
  const ScalarSolution sol(p, profile, traj);

  QuadratureSpec spec;
  spec.radial_panels = f.radial;
  spec.angular_points = f.angular;
  spec.truncation_tol = f.truncation_tol;
  const auto series = conserved_quantities(sol, f.audit_times, spec);
  ctx.csv("audit.csv", audit_table(series));

  const Functionals& first = series.front();
  double mass_drift = 0.0, energy_drift = 0.0, j_drift = 0.0, g1_err = 0.0, f1_err = 0.0, f2_err = 0.0;
  const auto rel = [](double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); };
  for (const Functionals& q : series) {
    const auto s = ScalarMomentState<>::from_vector(traj.sample(q.time));
    mass_drift = std::max(mass_drift, rel(q.m, first.m));
    energy_drift = std::max(energy_drift, rel(q.energy, first.energy));
    if (first.j != 0.0) j_drift = std::max(j_drift, rel(q.j, first.j));
    g1_err = std::max(g1_err, rel(1.0 / q.g, s.g1));
    const double g = 1.0 / s.g1;
    if (s.alpha != 0.0) f1_err = std::max(f1_err, rel(q.f1, 2.0 * s.alpha * g));
    if (s.beta != 0.0) f2_err = std::max(f2_err, rel(q.f2, 2.0 * s.beta * g));
  }

  const GridSpec grid{f.grid_points, f.grid_half_width};
  std::vector<ResidualRow> rows;
  json control = json::array();
  for (double h : f.h_levels) {
    rows.push_back({h, h, pde_residual(sol, f.residual_time, grid, h, h)});
    const PdeResidual c = pde_residual(sol, f.residual_time, grid, h, h, 0.1);
    control.push_back({{"h", h}, {"max", std::max({c.mass, c.momentum_x, c.momentum_y, c.entropy, c.pressure})}});
  }
  ctx.csv("residual.csv", residual_table(rows));
  const auto max_of = [](const PdeResidual& r) {
    return std::max({r.mass, r.momentum_x, r.momentum_y, r.entropy, r.pressure});
  };
  json orders = json::array();
  for (std::size_t i = 1; i < rows.size(); ++i) {
    orders.push_back(std::log(max_of(rows[i - 1].res) / max_of(rows[i].res)) / std::log(rows[i - 1].h / rows[i].h));
  }

  ctx.report("fields.json",
             {{"a_exp", f.a_exp},
              {"ep0_profile", profile.ep0},
              {"ep0_quadrature", first.potential},
              {"entropy_coefficient", entropy_coefficient(p, f.a_exp)},
              {"compatibility_residual", compatibility_residual(profile, p, cfg.initial.g1_0, profile.ep0)},
              {"mass_drift", mass_drift},
              {"energy_drift", energy_drift},
              {"energy_conserved", p.mu == 0.0},
              {"j_drift", j_drift},
              {"g1_rel_error", g1_err},
              {"f1_rel_error", f1_err},
              {"f2_rel_error", f2_err},
              {"residual_orders", orders},
              {"perturbed_control", control}});
  return kOk;
}

std::string resolve_preset(const Config& cfg) {
  const std::string& preset = cfg.interior.preset;
  if (preset != "auto") return preset;
  if (cfg.interior.path == "expanding") return "serre";
  return cfg.model.mu > 0.0 ? "adapted" : "power";
}

json integral_json(const ConditionIntegral& c) {
  return {{"partial", c.partial},
          {"tail", c.tail},
          {"total", c.total},
          {"decay_exponent", c.decay_exponent},
          {"status", to_string(c.status)}};
}

int cmd_interior(Context& ctx) {
  const Config& cfg = ctx.cfg;
  const auto& it = cfg.interior;
  const ModelParams p = cfg.params();
  const std::string preset = resolve_preset(cfg);
  double horizon = it.horizon;
  // lambda^-1 grows like e^(mu t) for the friction gauges and overflows far out.
  if ((preset == "adapted" || preset == "friction") && p.mu > 0.0 && horizon > 200.0 / p.mu) {
    horizon = 200.0 / p.mu;
    ctx.note("interior: horizon reduced to 200/mu = " + format_double(horizon));
  }

  std::optional<Trajectory<3>> scalar_traj;
  std::optional<Trajectory<7>> matrix_traj;
  VelocityPath path;
  if (it.path == "expanding") {
    path = expanding_path(horizon);
  } else if (cfg.initial.matrix) {
    const auto s0 = matrix_initial(cfg);
    const double k1 = matrix_k1_of(cfg, s0);
    matrix_traj = run_matrix(p, k1, s0, long_run_config(cfg, horizon));
    if (const int code = check_termination(ctx, *matrix_traj, "interior")) return code;
    path = matrix_path(p, k1, *matrix_traj);
  } else {
    const auto s0 = scalar_initial(cfg);
    const auto inv = scalar_invariants(p, s0, cfg.initial.ep0);
    scalar_traj = run_scalar(p, inv, s0, long_run_config(cfg, horizon));
    if (const int code = check_termination(ctx, *scalar_traj, "interior")) return code;
    path = scalar_path(p, inv, *scalar_traj);
  }

  GaugeChoice gauge;
  if (preset == "serre") {
    gauge = gauge_preset(p, GaugeKind::Serre);
  } else if (preset == "power") {
    gauge = gauge_preset(p, GaugeKind::PowerDecay, it.delta);
  } else if (preset == "friction") {
    gauge = gauge_preset(p, GaugeKind::FrictionDecay, it.delta);
  } else {
    gauge = adapted_gauge(p, path);
  }

  const InteriorReport rep = boundedness_scan(gauge, path, p, horizon, it.nodes);
  json failed = json::array(), inconclusive = json::array();
  for (Condition c : rep.failed) failed.push_back(to_string(c));
  for (Condition c : rep.inconclusive) inconclusive.push_back(to_string(c));
  ctx.report("interior_report.json", {{"preset", preset},
                                      {"path", it.path},
                                      {"delta", it.delta},
                                      {"q", gauge.q},
                                      {"horizon", horizon},
                                      {"nodes", rep.nodes},
                                      {"verdict", to_string(rep.verdict)},
                                      {"failed", failed},
                                      {"inconclusive", inconclusive},
                                      {"xi_positive", rep.xi_positive},
                                      {"lambda_integral", integral_json(rep.integrals.lambda)},
                                      {"weighted_integral", integral_json(rep.integrals.weighted)},
                                      {"sup_q1r", rep.sup_q1r},
                                      {"sup_balance", rep.sup_balance},
                                      {"sup_dln_r", rep.sup_dln_r},
                                      {"decade_q1r", rep.decade_q1r},
                                      {"decade_balance", rep.decade_balance},
                                      {"decade_dln_r", rep.decade_dln_r}});
  if (rep.verdict == Verdict::ConditionFailed) {
    ctx.note("interior: condition failed");
    return kNumericalFailure;
  }
  if (rep.verdict == Verdict::Inconclusive) ctx.note("interior: verdict inconclusive on the scanned horizon");
  return kOk;
}

int cmd_audit(Context& ctx) {
  const Config& cfg = ctx.cfg;
  const ModelParams p = cfg.params();
  const IntegrationConfig ic = cfg.integration_config(cfg.integration.t_end);
  json checks = json::array();
  bool ok = true;
  const auto check = [&](const std::string& name, double value, double limit, bool applies = true) {
    if (!applies) {
      checks.push_back({{"name", name}, {"applies", false}});
      return;
    }
    const bool pass = value <= limit;
    ok &= pass;
    checks.push_back({{"name", name}, {"applies", true}, {"value", value}, {"limit", limit}, {"pass", pass}});
  };

  if (cfg.initial.matrix) {
    const auto s0 = matrix_initial(cfg);
    const auto traj = run_matrix(p, matrix_k1_of(cfg, s0), s0, ic);
    if (const int code = check_termination(ctx, traj, "audit")) return code;
    double positivity = 0.0;
    for (const auto& y : traj.states()) {
      const auto s = MatrixMomentState<>::from_vector(y);
      if (!(s.g1m > 0.0 && s.g2m > 0.0 && s.moment_determinant() > 0.0)) positivity = 1.0;
    }
    check("moment_positivity", positivity, 0.0);
    const double t_hi = traj.t_final();
    const MatrixAsymptote m = matrix_asymptote(p, traj, t_hi / 100.0, t_hi, 50);
    check("determinant_defect", m.determinant_defect, kAuditTol);
  } else {
    const auto s0 = scalar_initial(cfg);
    const auto inv = scalar_invariants(p, s0, cfg.initial.ep0);
    const auto traj = run_scalar(p, inv, s0, ic);
    if (const int code = check_termination(ctx, traj, "audit")) return code;
    const double e0 = inv.e_total;
    const double e_scale = std::max(std::abs(e0), 1e-300);
    double drift = 0.0, rise = 0.0, inv_res = 0.0, bound = 0.0, prev_e = e0;
    for (std::size_t k = 0; k < traj.size(); ++k) {
      const double t = traj.times()[k];
      const auto s = ScalarMomentState<>::from_vector(traj.states()[k]);
      const double e = scalar_energy(p, inv, s).total;
      drift = std::max(drift, std::abs(e - e0) / e_scale);
      rise = std::max(rise, (e - prev_e) / e_scale);
      prev_e = e;
      const double r = inv_beta_residual(p, inv, t, s);
      if (std::isfinite(r)) inv_res = std::max(inv_res, std::abs(r));
      bound = std::max(bound, -bound_residual(p, inv, s) / std::max(e_scale * s.g1, 1e-300));
    }
    check("energy_drift", drift, kAuditTol, p.mu == 0.0);
    check("energy_increase", rise, kAuditTol, p.mu > 0.0);
    const bool relative = p.mu > 0.0 && inv.c_rot != 0.0;
    check(relative ? "inv_beta_relative" : "inv_beta_absolute", relative ? inv_res / std::abs(inv.c_rot) : inv_res,
          kAuditTol, p.mu == 0.0 || p.l == 0.0);
    check("bound_violation", bound, kAuditTol);
  }
  ctx.report("audit.json", {{"pass", ok}, {"checks", checks}});
  if (!ok) ctx.note("audit: invariant check failed");
  return ok ? kOk : kNumericalFailure;
}

int cmd_all(Context& ctx) {
  int code = cmd_simulate(ctx);
  if (code != kOk) return code;
  const ModelParams p = ctx.cfg.params();
  if (ctx.cfg.initial.matrix || !(p.mu == 0.0 && p.l != 0.0)) {
    code = std::max(code, cmd_asymptotics(ctx));
  } else {
    ctx.note("all: asymptotics skipped (mu = 0 with l != 0 is periodic)");
  }
  if (!ctx.cfg.initial.matrix) {
    code = std::max(code, cmd_fields(ctx));
  } else {
    ctx.note("all: fields skipped (matrix initial data)");
  }
  code = std::max(code, cmd_interior(ctx));
  return code;
}

using Command = int (*)(Context&);

struct Entry {
  const char* name;
  const char* help;
  Command fn;
};

constexpr Entry kCommands[] = {
    {"simulate", "Integrate the moment system and write the trajectory", cmd_simulate},
    {"closed-form", "Compare the explicit mu = 0 solution with the integrator", cmd_closed_form},
    {"asymptotics", "Fit large-time power laws against the leading terms", cmd_asymptotics},
    {"fields", "Audit conserved functionals and PDE residuals of the canonical profile", cmd_fields},
    {"interior", "Check the interior-solution gauge conditions", cmd_interior},
    {"audit", "Check trajectory invariants", cmd_audit},
    {"all", "simulate, asymptotics, fields and interior in sequence", cmd_all},
};

std::filesystem::path resolve_out(const std::string& flag, const Config& cfg) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("OUT_DIR"); env && *env) return env;
  return cfg.output.directory;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Affine solutions of the rotating, damped 2-D Euler equations", "affine"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  std::string config_path, out_flag;
  for (const Entry& e : kCommands) {
    auto* sub = app.add_subcommand(e.name, e.help);
    sub->add_option("--config", config_path, "Configuration file")->required();
    sub->add_option("--out", out_flag, "Output directory (overrides OUT_DIR and output.directory)");
    sub->add_flag("--seedless", "Deterministic mode (the only mode)");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kConfigError;
  }
  const Entry* entry = nullptr;
  for (const Entry& e : kCommands) {
    if (app.got_subcommand(e.name)) entry = &e;
  }

  Context ctx;
  int code = kOk;
  std::optional<std::string> config_error;
  try {
    ctx.cfg = load_config(config_path);
  } catch (const Error& e) {
    config_error = e.what();
    code = exit_code_for(e.code());
  }
  ctx.out = resolve_out(out_flag, ctx.cfg);
  try {
    std::filesystem::create_directories(ctx.out);
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "cannot create output directory " << ctx.out.string() << ": " << e.what() << '\n';
    return kIoError;
  }

  if (config_error) {
    ctx.note(*config_error);
  } else {
    try {
      code = entry->fn(ctx);
    } catch (const Error& e) {
      ctx.note(std::string(entry->name) + ": " + e.what());
      code = exit_code_for(e.code());
    } catch (const std::exception& e) {
      ctx.note(std::string(entry->name) + ": " + e.what());
      code = kNumericalFailure;
    }
  }

  json manifest = {{"program", "affine"},
                   {"version", std::string(kVersion)},
                   {"subcommand", entry->name},
                   {"config_path", config_path},
                   {"config", config_error ? json(nullptr) : to_json(ctx.cfg)},
                   {"output_directory", ctx.out.string()},
                   {"outputs", ctx.outputs},
                   {"exit_code", code},
                   {"diagnostics", ctx.diagnostics}};
  try {
    write_json(ctx.out / "manifest.json", manifest);
  } catch (const Error& e) {
    std::cerr << e.what() << '\n';
    return kIoError;
  }
  return code;
}

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace affine::cli
