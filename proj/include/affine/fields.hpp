#pragma once

// Physical fields (rho, p, S, V) of the axisymmetric solutions: compatible
// initial profiles, pull-back along characteristics, integral functionals by
// polar quadrature and finite-difference residuals of the Euler system.

#include <Eigen/Dense>

#include <functional>
#include <span>
#include <vector>

#include "affine/integrator.hpp"
#include "affine/moments.hpp"

namespace affine {

/// Radially symmetric initial data; every function takes |r|.
struct InitialProfile {
  double a_exp = 0.0;
  double g1_0 = 1.0;
  double ep0 = 0.0;
  double gamma = 2.0;
  std::function<double(double)> rho0;
  std::function<double(double)> drho0;
  std::function<double(double)> p0;
  std::function<double(double)> dp0;
  std::function<double(double)> s0;
  std::function<double(double)> ds0;
};

/// p0 = (1 + r^2)^-a, rho0 = 2a / ((gamma - 1) g1_0 ep0) (1 + r^2)^-(a + 1),
/// ep0 = pi / ((gamma - 1)(a - 1)) and S0 = ln p0 - gamma ln rho0.
InitialProfile canonical_profile(const ModelParams& params, double a_exp, double g1_0);

/// Same family with the density scaled for a prescribed ep0 (p0 is unchanged).
InitialProfile canonical_profile(const ModelParams& params, double a_exp, double g1_0, double ep0);

/// Radial coefficient a(gamma - 1) + gamma of ln(1 + r^2) in S0.
double entropy_coefficient(const ModelParams& params, double a_exp);

/// sup_r |p0'(r) + (gamma - 1) g1_0 ep0 rho0(r) r| / sup_r |p0'(r)| on a radial sample grid.
double compatibility_residual(const InitialProfile& profile, const ModelParams& params, double g1_0, double ep0,
                              int samples = 4000, double r_max = 20.0);

/// Symmetrising variable kappa (p / 2)^((gamma - 1) / (2 gamma)), kappa = 2 sqrt(gamma) / (gamma - 1).
double to_symmetric_vars(double p, const ModelParams& params);

struct PointFields {
  double rho = 0.0;
  double p = 0.0;
  double s = 0.0;
  Eigen::Vector2d v = Eigen::Vector2d::Zero();
};

struct FieldSnapshot {
  double time = 0.0;
  double i_alpha = 0.0;
  double i_beta = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  std::vector<Eigen::Vector2d> points;
  Eigen::VectorXd rho, p, s, vx, vy;
};

/// A scalar moment trajectory together with the profile it transports.
class ScalarSolution {
 public:
  ScalarSolution(const ModelParams& params, InitialProfile profile, const Trajectory<3>& traj);

  const ModelParams& params() const { return params_; }
  const InitialProfile& profile() const { return profile_; }
  const Trajectory<3>& trajectory() const { return *traj_; }

  double i_alpha(double t) const { return int_alpha_(t); }
  double i_beta(double t) const { return int_beta_(t); }

  /// Accumulated phases and rates at one time, shared by every point of a snapshot.
  struct Phase {
    double time = 0.0;
    double i_alpha = 0.0;
    double i_beta = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
  };
  Phase phase(double t) const;

  /// Fields at (t, x); beta_shift perturbs the velocity only (not a solution unless 0).
  PointFields at(double t, const Eigen::Vector2d& x, double beta_shift = 0.0) const;
  PointFields at(const Phase& ph, const Eigen::Vector2d& x, double beta_shift = 0.0) const;

 private:
  ModelParams params_;
  InitialProfile profile_;
  const Trajectory<3>* traj_;
  ComponentIntegral<3> int_alpha_;
  ComponentIntegral<3> int_beta_;
};

FieldSnapshot evaluate(const ScalarSolution& sol, double t, std::span<const Eigen::Vector2d> points);

struct GridSpec {
  /// Points per side of a uniform square grid on [-half_width, half_width]^2.
  int points_per_side = 9;
  double half_width = 1.5;
};

struct PdeResidual {
  double mass = 0.0;
  double momentum_x = 0.0;
  double momentum_y = 0.0;
  double entropy = 0.0;
  double pressure = 0.0;
};

/// Discrete max norms of the balance laws with second-order centred differences.
/// Momentum is taken in conservative form and the entropy equation is weighted by rho.
PdeResidual pde_residual(const ScalarSolution& sol, double t, const GridSpec& grid, double h, double dt,
                         double beta_shift = 0.0);

struct QuadratureSpec {
  int radial_panels = 48;
  int gauss_order = 16;
  int angular_points = 32;
  /// Relative tail bound used to pick the truncation radius.
  double truncation_tol = 1e-12;
  /// Fixed truncation radius in the pulled-back variable; 0 selects it from truncation_tol.
  double radius = 0.0;
};

struct Functionals {
  double time = 0.0;
  double m = 0.0;
  double energy = 0.0;
  double kinetic = 0.0;
  double potential = 0.0;
  double j = 0.0;
  double g = 0.0;
  double f1 = 0.0;
  double f2 = 0.0;
  double gx = 0.0;
  double gy = 0.0;
  double gxy = 0.0;
};

Functionals functionals(const ScalarSolution& sol, double t, const QuadratureSpec& spec = {});

std::vector<Functionals> conserved_quantities(const ScalarSolution& sol, std::span<const double> times,
                                              const QuadratureSpec& spec = {});

/// Centred time derivatives (step dt) of G, F1, F2 and E from quadrature.
struct FunctionalRates {
  double dg = 0.0;
  double df1 = 0.0;
  double df2 = 0.0;
  double denergy = 0.0;
};
FunctionalRates functional_rates(const ScalarSolution& sol, double t, double dt, const QuadratureSpec& spec = {});

}  // namespace affine
