#include "affine/moments.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace affine {

Eigen::Matrix2d ModelParams::force_matrix() const {
  return -mu * Eigen::Matrix2d::Identity() + l * rotation_generator();
}

ModelParams validate_params(double gamma, double mu, double l) {
  if (!std::isfinite(gamma) || !std::isfinite(mu) || !std::isfinite(l)) {
    throw Error(Errc::NonFinite, "model parameters must be finite");
  }
  if (!(gamma > 1.0)) throw Error(Errc::GammaOutOfRange, "gamma must exceed 1, got " + std::to_string(gamma));
  if (mu < 0.0) throw Error(Errc::NegativeFriction, "mu must be nonnegative, got " + std::to_string(mu));
  return {gamma, mu, l};
}

Eigen::Vector2d reduced_rhs_l0(const ModelParams& params, const ScalarInvariants& inv, double t,
                               const Eigen::Vector2d& g1_alpha) {
  if (params.l != 0.0) throw Error(Errc::NonZeroCoriolis, "reduced system requires l = 0");
  const double g1 = g1_alpha(0);
  const double alpha = g1_alpha(1);
  detail::require_positive_g1(g1);
  const double c = inv.c_rot;
  const double damping = std::exp(-2.0 * params.mu * t);
  return {-2.0 * alpha * g1,
          -alpha * alpha - params.mu * alpha + c * c * damping * g1 * g1 + inv.k_force * std::pow(g1, params.gamma)};
}

Energy scalar_energy(const ModelParams& params, const ScalarInvariants& inv, const ScalarMomentState<>& s) {
  detail::require_positive_g1(s.g1);
  Energy e;
  e.kinetic = (s.alpha * s.alpha + s.beta * s.beta) / s.g1;
  e.potential = inv.ep0 * std::pow(s.g1 / inv.g1_0, params.gamma - 1.0);
  e.total = e.kinetic + e.potential;
  return e;
}

ScalarInvariants scalar_invariants(const ModelParams& params, const ScalarMomentState<>& state0, double ep0) {
  detail::require_positive_g1(state0.g1);
  if (!(ep0 >= 0.0)) throw Error(Errc::InvalidState, "E_p(0) must be nonnegative");
  const double g = state0.g1;
  const double l = params.l;

  ScalarInvariants inv;
  inv.ep0 = ep0;
  inv.g1_0 = g;
  inv.k_force = (params.gamma - 1.0) * ep0 * std::pow(g, 1.0 - params.gamma);
  inv.e_total = scalar_energy(params, inv, state0).total;
  inv.c_rot = (2.0 * state0.beta - l) / (2.0 * g);
  const double c = inv.c_rot;
  inv.k_quad = (state0.alpha * state0.alpha + c * c * g * g - (inv.e_total - l * c) * g + 0.25 * l * l) /
               std::pow(g, params.gamma);
  return inv;
}

void validate_matrix_state(const MatrixMomentState<>& s) {
  if (!(s.g1m > 0.0) || !(s.g2m > 0.0)) throw Error(Errc::InvalidState, "scaled moments G1, G2 must be positive");
  if (!(s.moment_determinant() > 0.0)) throw Error(Errc::DegenerateMoments, "G1 G2 - G3^2 must be positive");
}

MatrixAux matrix_aux(const ModelParams& params, double gx, double gy, double gxy) {
  if (!(gx > 0.0) || !(gy > 0.0)) throw Error(Errc::InvalidState, "G_x and G_y must be positive");
  const double delta = gx * gy - gxy * gxy;
  if (!(delta > 0.0)) throw Error(Errc::DegenerateMoments, "G_x G_y - G_xy^2 must be positive");
  const double scale = std::pow(delta, -0.5 * (params.gamma + 1.0));
  return {delta, gx * scale, gy * scale, gxy * scale,
          0.5 * (params.gamma - 1.0) * std::pow(delta, 0.5 * (params.gamma - 1.0))};
}

double matrix_k1(const ModelParams& params, double ep0, double delta0) {
  return 0.5 * (params.gamma - 1.0) * ep0 * std::pow(delta0, 0.5 * (params.gamma - 1.0));
}

double delta_of(const ModelParams& params, const MatrixMomentState<>& s) {
  return std::pow(s.moment_determinant(), -1.0 / params.gamma);
}

MatrixMomentState<> matrix_state(const ModelParams& params, double a, double b, double c, double d, double gx,
                                 double gy, double gxy) {
  const MatrixAux aux = matrix_aux(params, gx, gy, gxy);
  return {a, b, c, d, aux.g1m, aux.g2m, aux.g3m};
}

MatrixMomentState<> embed_scalar(const ModelParams& params, const ScalarMomentState<>& s) {
  detail::require_positive_g1(s.g1);
  const double half_g = 0.5 / s.g1;
  return matrix_state(params, s.alpha, s.beta, -s.beta, s.alpha, half_g, half_g, 0.0);
}

ScalarMomentState<> extract_scalar(const ModelParams& params, const MatrixMomentState<>& s, double symmetry_tol) {
  const double scale = 1.0 + std::max({std::abs(s.a), std::abs(s.b), std::abs(s.g1m)});
  const double defect = std::abs(s.a - s.d) + std::abs(s.b + s.c) + std::abs(s.g1m - s.g2m) + std::abs(s.g3m);
  if (defect > symmetry_tol * scale) {
    throw Error(Errc::NotAxisymmetric, "symmetry defect " + std::to_string(defect));
  }
  // g1m = (2 G1)^gamma on the scalar subclass.
  const double g1m = 0.5 * (s.g1m + s.g2m);
  return {0.5 * std::pow(g1m, 1.0 / params.gamma), 0.5 * (s.a + s.d), 0.5 * (s.b - s.c)};
}

}  // namespace affine
