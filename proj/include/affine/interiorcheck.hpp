#pragma once

// Numerical check of the sufficient conditions for a smooth affine solution to
// be interior (stable under small smooth perturbations of the data): det A > 0,
// convergent gauge integrals and bounded gauge expressions, for n = 2.
//
// Given a gauge (lambda, q, U_phi) and the force matrix L:
//   Q1 = lambda^-1 ((gamma - 1)/2 tr A + q (ln lambda)')
//   Q2 = lambda^-1 ((ln lambda)' E + A((A^-1)' + E))
//   R  = lambda^(2q - 2) xi,   B = A A^T / xi,   xi = det A
// and the three expressions that must stay bounded are
//   Q1 R,   Q2 - lambda^-1 (A L A^-1 - U_phi),   (ln R)'.

#include <Eigen/Dense>

#include <functional>
#include <string_view>
#include <vector>

#include "affine/integrator.hpp"
#include "affine/moments.hpp"

namespace affine {

/// Velocity matrix A(t) with its derivative and, when known, int_t0^t tr A.
struct VelocityPath {
  std::function<Eigen::Matrix2d(double)> a;
  /// Empty: fourth-order central differences of a.
  std::function<Eigen::Matrix2d(double)> da;
  /// Empty when unavailable; required by the adapted gauge.
  std::function<double(double)> trace_integral;
  double t0 = 0.0;
  double t_end = 0.0;
};

/// A(t) = E / (1 + t) on [0, t_end].
VelocityPath expanding_path(double t_end);

/// A = alpha E + beta J along a scalar trajectory; the trajectory must outlive the path.
VelocityPath scalar_path(const ModelParams& params, const ScalarInvariants& inv, const Trajectory<3>& traj);

/// A = [[a, b], [c, d]] along a matrix trajectory; the trajectory must outlive the path.
VelocityPath matrix_path(const ModelParams& params, double k1, const Trajectory<7>& traj);

struct GaugeChoice {
  std::function<double(double)> ln_lambda;
  /// Empty: fourth-order central differences of ln_lambda.
  std::function<double(double)> dln_lambda;
  double q = 0.0;
  std::function<Eigen::Matrix2d(double)> u_phi;
  double t0 = 0.0;
  Eigen::Matrix2d force = Eigen::Matrix2d::Zero();
};

enum class GaugeKind {
  /// lambda = (1 + t)^-2, q = n (gamma - 1) / 4, U_phi = 0.
  Serre,
  /// lambda = (1 + t)^-(delta + 1), q = max(3/2 - (n + 1) / (2 (delta + 1)), 0), U_phi = 0.
  PowerDecay,
  /// lambda = (1 + t)^-(delta + 1) e^(-mu t), q = 3/2, U_phi = l J - l / (2 gamma mu) J / (1 + t).
  FrictionDecay,
};

std::string_view to_string(GaugeKind kind);

/// Closed-form gauges; delta is ignored for Serre. Throws BadDelta for delta <= 0.
GaugeChoice gauge_preset(const ModelParams& params, GaugeKind kind, double delta = 1.0);

/// Gauge fitted to a given path: ln lambda = (ln xi - int tr A + t tr L) / 2 (normalised to 0 at t0),
/// q = 3/2, U_phi = -skew(-A' A^-1 + A - A L A^-1). The second expression then vanishes
/// whenever A commutes with L and has scalar symmetric part; for the friction
/// family lambda behaves like t^-(1 + 1/(2 gamma)) e^(-mu t).
GaugeChoice adapted_gauge(const ModelParams& params, const VelocityPath& path);

/// Multiplies lambda by a constant factor.
GaugeChoice scaled_gauge(const GaugeChoice& gauge, double factor);

struct QFunctions {
  double q1 = 0.0;
  Eigen::Matrix2d q2 = Eigen::Matrix2d::Zero();
  double r = 0.0;
  Eigen::Matrix2d b = Eigen::Matrix2d::Zero();
  double xi = 0.0;
  double dln_r = 0.0;
  double lambda = 0.0;
  double q1r = 0.0;
  Eigen::Matrix2d balance = Eigen::Matrix2d::Zero();
  /// Rounding-level bounds of the three expressions; anything smaller is indistinguishable from 0.
  double q1r_noise = 0.0;
  double balance_noise = 0.0;
  double dln_r_noise = 0.0;
};

/// Throws SingularA if det A(t) <= 0.
QFunctions q_functions(const GaugeChoice& gauge, const VelocityPath& path, const ModelParams& params, double t);

enum class IntegralStatus { Converged, NotConverged, DivergenceSuspected };

std::string_view to_string(IntegralStatus s);

struct ConditionIntegral {
  double partial = 0.0;
  double tail = 0.0;
  double total = 0.0;
  /// Local power exponent of the integrand fitted on [horizon / 2, horizon].
  double decay_exponent = 0.0;
  IntegralStatus status = IntegralStatus::NotConverged;
};

struct ConditionIntegrals {
  /// int lambda
  ConditionIntegral lambda;
  /// int lambda^q xi^(1/n)
  ConditionIntegral weighted;
};

/// Quadrature on [t0, horizon] plus a power-law tail; converged when tail < 1e-6 partial.
ConditionIntegrals condition_integrals(const GaugeChoice& gauge, const VelocityPath& path, double horizon);

enum class Condition { XiPositive, LambdaIntegral, WeightedIntegral, Q1R, Balance, LogRRate };

std::string_view to_string(Condition c);

enum class Verdict { CertifiedInterior, ConditionFailed, Inconclusive };

std::string_view to_string(Verdict v);

struct InteriorReport {
  bool xi_positive = false;
  ConditionIntegrals integrals;
  double sup_q1r = 0.0;
  double sup_balance = 0.0;
  double sup_dln_r = 0.0;
  /// Suprema over decades of 1 + t - t0, in order.
  std::vector<double> decade_q1r, decade_balance, decade_dln_r;
  Verdict verdict = Verdict::Inconclusive;
  std::vector<Condition> failed;
  std::vector<Condition> inconclusive;
  int nodes = 0;
};

/// Scan of the three expressions on a grid log-uniform in 1 + t - t0 (at least 200 nodes),
/// plus the condition integrals. Boundedness is certified on the scanned horizon only:
/// an expression fails when its last-decade supremum exceeds the previous one by more than 10%.
InteriorReport boundedness_scan(const GaugeChoice& gauge, const VelocityPath& path, const ModelParams& params,
                                double horizon, int nodes = 400);

}  // namespace affine
