#include "affine/interiorcheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <type_traits>

#include "affine/numerics.hpp"

namespace affine {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

template <typename F>
auto derivative(const F& f, double t, double t0) -> std::decay_t<decltype(f(t))> {
  using Value = std::decay_t<decltype(f(t))>;
  const double h = 1e-3 * (1.0 + std::abs(t));
  if (t - 2.0 * h >= t0) {
    const Value v = ((f(t - 2.0 * h) - f(t + 2.0 * h)) + 8.0 * (f(t + h) - f(t - h))) / (12.0 * h);
    return v;
  }
  // One-sided fourth-order stencil at the start of the range.
  const Value v =
      (-25.0 * f(t) + 48.0 * f(t + h) - 36.0 * f(t + 2.0 * h) + 16.0 * f(t + 3.0 * h) - 3.0 * f(t + 4.0 * h)) /
      (12.0 * h);
  return v;
}

Eigen::Matrix2d path_a(const VelocityPath& path, double t) { return path.a(t); }

Eigen::Matrix2d path_da(const VelocityPath& path, double t) {
  if (path.da) return path.da(t);
  return derivative([&](double s) { return path.a(s); }, t, path.t0);
}

double gauge_dln(const GaugeChoice& g, double t) {
  if (g.dln_lambda) return g.dln_lambda(t);
  return derivative(g.ln_lambda, t, g.t0);
}

Eigen::Matrix2d gauge_u(const GaugeChoice& g, double t) {
  return g.u_phi ? g.u_phi(t) : Eigen::Matrix2d::Zero().eval();
}

Eigen::Matrix2d skew(const Eigen::Matrix2d& m) {
  Eigen::Matrix2d s;
  s(0, 0) = 0.0;
  s(1, 1) = 0.0;
  s(0, 1) = 0.5 * (m(0, 1) - m(1, 0));
  s(1, 0) = -s(0, 1);
  return s;
}

// -A' A^-1 + A - A L A^-1, the lambda-independent part of the balance expression.
struct BalanceParts {
  Eigen::Matrix2d da_ainv, a, ala;
  Eigen::Matrix2d sum() const { return -da_ainv + a - ala; }
};

BalanceParts balance_parts(const Eigen::Matrix2d& a, const Eigen::Matrix2d& da, const Eigen::Matrix2d& ainv,
                           const Eigen::Matrix2d& force) {
  return {da * ainv, a, a * force * ainv};
}

std::vector<double> scan_grid(double t0, double horizon, int nodes) {
  std::vector<double> g(static_cast<std::size_t>(nodes));
  const double span = std::log1p(horizon - t0);
  for (int i = 0; i < nodes; ++i) g[static_cast<std::size_t>(i)] = t0 + std::expm1(span * i / (nodes - 1));
  g.back() = horizon;
  return g;
}

ConditionIntegral integrate_condition(const std::function<double(double)>& f, double t0, double horizon) {
  ConditionIntegral out;
  numerics::CompensatedSum partial;
  // Panels doubling in 1 + t - t0.
  double lo = t0, width = 1.0;
  while (lo < horizon) {
    const double hi = std::min(horizon, lo + width);
    partial.add(numerics::integrate_adaptive(f, lo, hi, 1e-300, 1e-12).value);
    lo = hi;
    width *= 2.0;
  }
  out.partial = partial.value();

  // Least-squares power exponent of f against 1 + t - t0 on the last half of the range.
  const double u_end = 1.0 + horizon - t0;
  constexpr int samples = 17;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int used = 0;
  bool underflow = false;
  for (int i = 0; i < samples; ++i) {
    const double u = u_end * std::exp2(-1.0 + static_cast<double>(i) / (samples - 1));
    const double v = f(t0 + u - 1.0);
    if (!(v > 0.0)) {
      underflow = true;
      break;
    }
    const double x = std::log(u), y = std::log(v);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++used;
  }
  if (underflow) {
    out.decay_exponent = -std::numeric_limits<double>::infinity();
    out.tail = 0.0;
  } else {
    out.decay_exponent = (used * sxy - sx * sy) / (used * sxx - sx * sx);
    if (out.decay_exponent >= -1.0) {
      out.tail = std::numeric_limits<double>::infinity();
      out.total = std::numeric_limits<double>::infinity();
      out.status = IntegralStatus::DivergenceSuspected;
      return out;
    }
    out.tail = f(horizon) * u_end / (-out.decay_exponent - 1.0);
  }
  out.total = out.partial + out.tail;
  out.status = out.tail < 1e-6 * std::abs(out.partial) ? IntegralStatus::Converged : IntegralStatus::NotConverged;
  return out;
}

struct DecadeCheck {
  double sup = 0.0;
  std::vector<double> decades;
  bool finite = true;
  bool growing = false;
};

DecadeCheck check_decades(const std::vector<double>& u, const std::vector<double>& values) {
  DecadeCheck out;
  const double u_end = u.back();
  const int count = static_cast<int>(std::ceil(std::log10(u_end))) + 1;
  out.decades.assign(static_cast<std::size_t>(std::max(count, 1)), 0.0);
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!std::isfinite(values[i])) out.finite = false;
    out.sup = std::max(out.sup, values[i]);
    // Decade k (counted back from the end) holds u in (u_end 10^-(k+1), u_end 10^-k].
    const int k = std::min(count - 1, static_cast<int>(std::floor(std::log10(u_end / u[i]))));
    auto& slot = out.decades[static_cast<std::size_t>(count - 1 - std::max(k, 0))];
    slot = std::max(slot, values[i]);
  }
  if (out.decades.size() >= 2) {
    const double last = out.decades.back(), prev = out.decades[out.decades.size() - 2];
    out.growing = last > 1.1 * prev;
  }
  return out;
}

}  // namespace

VelocityPath expanding_path(double t_end) {
  VelocityPath p;
  p.a = [](double t) { return (Eigen::Matrix2d::Identity() / (1.0 + t)).eval(); };
  p.da = [](double t) { return (-Eigen::Matrix2d::Identity() / ((1.0 + t) * (1.0 + t))).eval(); };
  p.trace_integral = [](double t) { return 2.0 * std::log1p(t); };
  p.t0 = 0.0;
  p.t_end = t_end;
  return p;
}

VelocityPath scalar_path(const ModelParams& params, const ScalarInvariants& inv, const Trajectory<3>& traj) {
  auto alpha_integral = std::make_shared<ComponentIntegral<3>>(traj, 1);
  const Trajectory<3>* tr = &traj;
  VelocityPath p;
  p.a = [tr](double t) { return ScalarMomentState<>::from_vector(tr->sample(t)).velocity_matrix(); };
  p.da = [tr, params, inv](double t) {
    const Eigen::Vector3d d = scalar_rhs(params, inv, ScalarMomentState<>::from_vector(tr->sample(t)));
    return ScalarMomentState<>{0.0, d(1), d(2)}.velocity_matrix();
  };
  p.trace_integral = [alpha_integral](double t) { return 2.0 * (*alpha_integral)(t); };
  p.t0 = traj.times().front();
  p.t_end = traj.times().back();
  return p;
}

VelocityPath matrix_path(const ModelParams& params, double k1, const Trajectory<7>& traj) {
  auto a_integral = std::make_shared<ComponentIntegral<7>>(traj, 0);
  auto d_integral = std::make_shared<ComponentIntegral<7>>(traj, 3);
  const Trajectory<7>* tr = &traj;
  VelocityPath p;
  p.a = [tr](double t) { return MatrixMomentState<>::from_vector(tr->sample(t)).velocity_matrix(); };
  p.da = [tr, params, k1](double t) {
    const auto d = MatrixMomentState<>::from_vector(matrix_rhs(params, k1, MatrixMomentState<>::from_vector(tr->sample(t))));
    return d.velocity_matrix();
  };
  p.trace_integral = [a_integral, d_integral](double t) { return (*a_integral)(t) + (*d_integral)(t); };
  p.t0 = traj.times().front();
  p.t_end = traj.times().back();
  return p;
}

std::string_view to_string(GaugeKind kind) {
  switch (kind) {
    case GaugeKind::Serre: return "serre";
    case GaugeKind::PowerDecay: return "power";
    case GaugeKind::FrictionDecay: return "friction";
  }
  return "unknown";
}

GaugeChoice gauge_preset(const ModelParams& params, GaugeKind kind, double delta) {
  constexpr double n = 2.0;
  GaugeChoice g;
  g.force = params.force_matrix();
  g.t0 = 0.0;
  g.u_phi = [](double) { return Eigen::Matrix2d::Zero().eval(); };
  if (kind == GaugeKind::Serre) {
    g.ln_lambda = [](double t) { return -2.0 * std::log1p(t); };
    g.dln_lambda = [](double t) { return -2.0 / (1.0 + t); };
    g.q = n * (params.gamma - 1.0) / 4.0;
    return g;
  }
  if (!(delta > 0.0) || !std::isfinite(delta)) throw Error(Errc::BadDelta, "delta must be positive");
  const double p = delta + 1.0;
  if (kind == GaugeKind::PowerDecay) {
    g.ln_lambda = [p](double t) { return -p * std::log1p(t); };
    g.dln_lambda = [p](double t) { return -p / (1.0 + t); };
    g.q = std::max(1.5 - (n + 1.0) / (2.0 * p), 0.0);
    return g;
  }
  const double mu = params.mu, l = params.l;
  if (!(mu > 0.0) && l != 0.0) throw Error(Errc::ValidationError, "friction gauge with l != 0 needs mu > 0");
  g.ln_lambda = [p, mu](double t) { return -p * std::log1p(t) - mu * t; };
  g.dln_lambda = [p, mu](double t) { return -p / (1.0 + t) - mu; };
  g.q = 1.5;
  const double u2 = l == 0.0 ? 0.0 : l / (2.0 * params.gamma * mu);
  g.u_phi = [l, u2](double t) { return ((l - u2 / (1.0 + t)) * rotation_generator()).eval(); };
  return g;
}

GaugeChoice adapted_gauge(const ModelParams& params, const VelocityPath& path) {
  if (!path.trace_integral) throw Error(Errc::ValidationError, "adapted gauge needs the trace integral of A");
  const Eigen::Matrix2d force = params.force_matrix();
  const double half_tr_l = 0.5 * force.trace();
  const double t0 = path.t0;
  const double ln_xi0 = std::log(path.a(t0).determinant());
  if (!std::isfinite(ln_xi0)) throw Error(Errc::SingularA, "det A(t0) must be positive");
  GaugeChoice g;
  g.t0 = t0;
  g.force = force;
  g.q = 1.5;
  g.ln_lambda = [path, ln_xi0, half_tr_l, t0](double t) {
    return 0.5 * (std::log(path.a(t).determinant()) - ln_xi0) - 0.5 * path.trace_integral(t) + half_tr_l * (t - t0);
  };
  g.dln_lambda = [path, half_tr_l](double t) {
    const Eigen::Matrix2d a = path_a(path, t);
    return 0.5 * (a.inverse() * path_da(path, t)).trace() - 0.5 * a.trace() + half_tr_l;
  };
  g.u_phi = [path, force](double t) {
    const Eigen::Matrix2d a = path_a(path, t);
    return (-skew(balance_parts(a, path_da(path, t), a.inverse(), force).sum())).eval();
  };
  return g;
}

GaugeChoice scaled_gauge(const GaugeChoice& gauge, double factor) {
  if (!(factor > 0.0)) throw Error(Errc::ValidationError, "gauge factor must be positive");
  GaugeChoice g = gauge;
  const double shift = std::log(factor);
  g.ln_lambda = [inner = gauge.ln_lambda, shift](double t) { return inner(t) + shift; };
  return g;
}

QFunctions q_functions(const GaugeChoice& gauge, const VelocityPath& path, const ModelParams& params, double t) {
  const Eigen::Matrix2d a = path_a(path, t);
  const double xi = a.determinant();
  if (!(xi > 0.0)) throw Error(Errc::SingularA, "det A = " + std::to_string(xi) + " at t = " + std::to_string(t));
  const Eigen::Matrix2d da = path_da(path, t);
  const Eigen::Matrix2d ainv = a.inverse();
  const double ln_lambda = gauge.ln_lambda(t);
  const double dln = gauge_dln(gauge, t);
  const double inv_lambda = std::exp(-ln_lambda);
  const double q = gauge.q;
  const double ln_xi = std::log(xi);

  QFunctions out;
  out.xi = xi;
  out.lambda = std::exp(ln_lambda);
  const double q1_bracket = 0.5 * (params.gamma - 1.0) * a.trace() + q * dln;
  out.q1 = inv_lambda * q1_bracket;
  out.q2 = inv_lambda * (dln * Eigen::Matrix2d::Identity() - da * ainv + a);
  out.r = std::exp((2.0 * q - 2.0) * ln_lambda + ln_xi);
  out.b = a * a.transpose() / xi;
  const double tr_log = (ainv * da).trace();
  out.dln_r = (2.0 * q - 2.0) * dln + tr_log;

  // Q1 R = lambda^(2q - 3) xi (bracket), formed in logs so large lambda^-1 does not overflow early.
  const double q1r_scale = std::exp((2.0 * q - 3.0) * ln_lambda + ln_xi);
  out.q1r = q1r_scale * q1_bracket;

  const Eigen::Matrix2d u = gauge_u(gauge, t);
  const BalanceParts parts = balance_parts(a, da, ainv, gauge.force);
  const Eigen::Matrix2d bracket = (dln * Eigen::Matrix2d::Identity() + parts.sum()) + u;
  out.balance = inv_lambda * bracket;

  out.q1r_noise = 8.0 * kEps * q1r_scale * (std::abs(0.5 * (params.gamma - 1.0) * a.trace()) + std::abs(q * dln));
  out.balance_noise = 8.0 * kEps * inv_lambda *
                      (2.0 * std::abs(dln) + parts.da_ainv.norm() + parts.a.norm() + parts.ala.norm() + u.norm());
  out.dln_r_noise = 8.0 * kEps * (std::abs((2.0 * q - 2.0) * dln) + (ainv.cwiseAbs() * da.cwiseAbs()).trace());
  return out;
}

std::string_view to_string(IntegralStatus s) {
  switch (s) {
    case IntegralStatus::Converged: return "Converged";
    case IntegralStatus::NotConverged: return "NotConverged";
    case IntegralStatus::DivergenceSuspected: return "DivergenceSuspected";
  }
  return "Unknown";
}

ConditionIntegrals condition_integrals(const GaugeChoice& gauge, const VelocityPath& path, double horizon) {
  if (!(horizon > gauge.t0)) throw Error(Errc::ValidationError, "horizon must exceed t0");
  ConditionIntegrals out;
  out.lambda = integrate_condition([&](double t) { return std::exp(gauge.ln_lambda(t)); }, gauge.t0, horizon);
  // lambda^q xi^(1/n), n = 2.
  out.weighted = integrate_condition(
      [&](double t) {
        const double xi = path.a(t).determinant();
        if (!(xi > 0.0)) throw Error(Errc::SingularA, "det A must stay positive");
        return std::exp(gauge.q * gauge.ln_lambda(t) + 0.5 * std::log(xi));
      },
      gauge.t0, horizon);
  return out;
}

std::string_view to_string(Condition c) {
  switch (c) {
    case Condition::XiPositive: return "xi_positive";
    case Condition::LambdaIntegral: return "lambda_integral";
    case Condition::WeightedIntegral: return "weighted_integral";
    case Condition::Q1R: return "q1r_bounded";
    case Condition::Balance: return "balance_bounded";
    case Condition::LogRRate: return "dlnr_bounded";
  }
  return "unknown";
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::CertifiedInterior: return "CertifiedInterior";
    case Verdict::ConditionFailed: return "ConditionFailed";
    case Verdict::Inconclusive: return "Inconclusive";
  }
  return "Unknown";
}

InteriorReport boundedness_scan(const GaugeChoice& gauge, const VelocityPath& path, const ModelParams& params,
                                double horizon, int nodes) {
  if (nodes < 200) throw Error(Errc::ValidationError, "boundedness scan needs at least 200 nodes");
  if (!(horizon > gauge.t0)) throw Error(Errc::ValidationError, "horizon must exceed t0");
  InteriorReport rep;
  rep.nodes = nodes;
  const std::vector<double> grid = scan_grid(gauge.t0, horizon, nodes);
  std::vector<double> u(grid.size()), v27(grid.size()), v28(grid.size()), v29(grid.size());
  rep.xi_positive = true;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    u[i] = 1.0 + grid[i] - gauge.t0;
    QFunctions qf;
    try {
      qf = q_functions(gauge, path, params, grid[i]);
    } catch (const Error& e) {
      if (e.code() != Errc::SingularA) throw;
      rep.xi_positive = false;
      break;
    }
    const double n27 = std::abs(qf.q1r), n28 = qf.balance.norm(), n29 = std::abs(qf.dln_r);
    v27[i] = n27 <= qf.q1r_noise ? 0.0 : n27;
    v28[i] = n28 <= qf.balance_noise ? 0.0 : n28;
    v29[i] = n29 <= qf.dln_r_noise ? 0.0 : n29;
  }
  if (!rep.xi_positive) {
    rep.failed.push_back(Condition::XiPositive);
    rep.verdict = Verdict::ConditionFailed;
    return rep;
  }

  rep.integrals = condition_integrals(gauge, path, horizon);
  auto classify = [&](const ConditionIntegral& ci, Condition c) {
    if (ci.status == IntegralStatus::DivergenceSuspected) rep.failed.push_back(c);
    if (ci.status == IntegralStatus::NotConverged) rep.inconclusive.push_back(c);
  };
  classify(rep.integrals.lambda, Condition::LambdaIntegral);
  classify(rep.integrals.weighted, Condition::WeightedIntegral);

  auto bounded = [&](const std::vector<double>& vals, Condition c, double& sup, std::vector<double>& decades) {
    const DecadeCheck d = check_decades(u, vals);
    sup = d.finite ? d.sup : std::numeric_limits<double>::infinity();
    decades = d.decades;
    if (!d.finite || d.growing) rep.failed.push_back(c);
  };
  bounded(v27, Condition::Q1R, rep.sup_q1r, rep.decade_q1r);
  bounded(v28, Condition::Balance, rep.sup_balance, rep.decade_balance);
  bounded(v29, Condition::LogRRate, rep.sup_dln_r, rep.decade_dln_r);

  if (!rep.failed.empty()) {
    rep.verdict = Verdict::ConditionFailed;
  } else if (!rep.inconclusive.empty()) {
    rep.verdict = Verdict::Inconclusive;
  } else {
    rep.verdict = Verdict::CertifiedInterior;
  }
  return rep;
}

}  // namespace affine
