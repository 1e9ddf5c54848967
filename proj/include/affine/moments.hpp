#pragma once

// Moment closures for affine velocity fields V = A(t) r in two dimensions.
//
// The scalar (axisymmetric) family V = alpha r + beta r_perp, r_perp = (y, -x),
// reduces the Euler system with force f = L V to three ODEs for (G1, alpha, beta)
// with G1 = 1/G the inverse moment of inertia. The general matrix case carries
// the velocity matrix [[a, b], [c, d]] together with three scaled second moments.

#include <Eigen/Dense>

#include <cmath>

#include "affine/error.hpp"

namespace affine {

struct ModelParams {
  double gamma = 2.0;
  double mu = 0.0;
  double l = 0.0;

  /// L = -mu I + l J with J r = r_perp, i.e. [[-mu, l], [-l, -mu]].
  Eigen::Matrix2d force_matrix() const;
};

/// Checks gamma > 1, mu >= 0 and finiteness.
ModelParams validate_params(double gamma, double mu, double l);

/// J with J (x, y) = (y, -x).
inline Eigen::Matrix2d rotation_generator() {
  Eigen::Matrix2d j;
  j << 0.0, 1.0, -1.0, 0.0;
  return j;
}

template <typename Scalar = double>
struct ScalarMomentState {
  using Vector = Eigen::Matrix<Scalar, 3, 1>;

  Scalar g1{1};
  Scalar alpha{0};
  Scalar beta{0};

  Vector to_vector() const { return Vector(g1, alpha, beta); }
  static ScalarMomentState from_vector(const Vector& v) { return {v(0), v(1), v(2)}; }

  /// Velocity matrix alpha I + beta J.
  Eigen::Matrix<Scalar, 2, 2> velocity_matrix() const {
    Eigen::Matrix<Scalar, 2, 2> m;
    m << alpha, beta, -beta, alpha;
    return m;
  }
};

/// Constants carried along a scalar trajectory.
///
/// c_rot and k_quad are the constants of the explicit mu = 0 integral,
/// k_force = (gamma - 1) E_p(0) G1(0)^(1 - gamma) is the pressure coefficient
/// in the alpha equation.
struct ScalarInvariants {
  double c_rot = 0.0;
  double k_quad = 0.0;
  double k_force = 0.0;
  double e_total = 0.0;
  double ep0 = 0.0;
  double g1_0 = 1.0;
};

struct Energy {
  double total = 0.0;
  double kinetic = 0.0;
  double potential = 0.0;
};

template <typename Scalar = double>
struct MatrixMomentState {
  using Vector = Eigen::Matrix<Scalar, 7, 1>;

  Scalar a{0}, b{0}, c{0}, d{0};
  Scalar g1m{1}, g2m{1}, g3m{0};

  Vector to_vector() const {
    Vector v;
    v << a, b, c, d, g1m, g2m, g3m;
    return v;
  }
  static MatrixMomentState from_vector(const Vector& v) {
    return {v(0), v(1), v(2), v(3), v(4), v(5), v(6)};
  }

  Eigen::Matrix<Scalar, 2, 2> velocity_matrix() const {
    Eigen::Matrix<Scalar, 2, 2> m;
    m << a, b, c, d;
    return m;
  }

  /// g1m g2m - g3m^2, which equals Delta^(-gamma).
  Scalar moment_determinant() const { return g1m * g2m - g3m * g3m; }
};

struct MatrixAux {
  double delta = 0.0;
  double g1m = 0.0;
  double g2m = 0.0;
  double g3m = 0.0;
  /// (gamma - 1)/2 * Delta^((gamma - 1)/2); K1 = E_p(0) * k1_factor at t = 0.
  double k1_factor = 0.0;
};

namespace detail {

inline void require_positive_g1(double g1) {
  if (!(g1 > 0.0)) throw Error(Errc::NonPositiveG1, "G1 must be positive, got " + std::to_string(g1));
}
inline void require_positive_g1(long double g1) { require_positive_g1(static_cast<double>(g1)); }

}  // namespace detail

/// Right-hand side of the scalar moment system, ordered (dG1, dalpha, dbeta).
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 1> scalar_rhs(const ModelParams& params, const ScalarInvariants& inv,
                                       const ScalarMomentState<Scalar>& s) {
  using std::pow;
  detail::require_positive_g1(s.g1);
  const Scalar gamma(params.gamma), mu(params.mu), l(params.l), kf(inv.k_force);
  return {-2 * s.alpha * s.g1,
          -s.alpha * s.alpha + s.beta * s.beta - l * s.beta - mu * s.alpha + kf * pow(s.g1, gamma),
          s.alpha * (l - 2 * s.beta) - mu * s.beta};
}

/// Two-equation system for l = 0, with beta eliminated through beta = C G1 e^(-mu t).
Eigen::Vector2d reduced_rhs_l0(const ModelParams& params, const ScalarInvariants& inv, double t,
                               const Eigen::Vector2d& g1_alpha);

ScalarInvariants scalar_invariants(const ModelParams& params, const ScalarMomentState<>& state0, double ep0);

Energy scalar_energy(const ModelParams& params, const ScalarInvariants& inv, const ScalarMomentState<>& s);

void validate_matrix_state(const MatrixMomentState<>& s);

/// Derivative of the matrix state, in the same (a, b, c, d, g1m, g2m, g3m) layout.
template <typename Scalar>
Eigen::Matrix<Scalar, 7, 1> matrix_rhs(const ModelParams& params, double k1, const MatrixMomentState<Scalar>& s) {
  if (!(s.g1m > 0) || !(s.g2m > 0) || !(s.moment_determinant() > 0)) {
    throw Error(Errc::InvalidState, "matrix moments lost positivity");
  }
  const Scalar gamma(params.gamma), mu(params.mu), l(params.l), k(k1);
  const Scalar trace = s.a + s.d;
  Eigen::Matrix<Scalar, 7, 1> out;
  out(0) = -s.a * s.a - s.b * s.c + l * s.c - mu * s.a + k * s.g2m;
  out(1) = -s.b * trace + l * s.d - mu * s.b - k * s.g3m;
  out(2) = -s.c * trace - l * s.a - mu * s.c - k * s.g3m;
  out(3) = -s.d * s.d - s.b * s.c - l * s.b - mu * s.d + k * s.g1m;
  out(4) = ((1 - gamma) * s.a - (1 + gamma) * s.d) * s.g1m + 2 * s.b * s.g3m;
  out(5) = ((1 - gamma) * s.d - (1 + gamma) * s.a) * s.g2m + 2 * s.c * s.g3m;
  out(6) = s.c * s.g1m + s.b * s.g2m - gamma * trace * s.g3m;
  return out;
}

MatrixAux matrix_aux(const ModelParams& params, double gx, double gy, double gxy);

/// Pressure coefficient K1 = (gamma - 1)/2 * E_p(0) * Delta(0)^((gamma - 1)/2).
double matrix_k1(const ModelParams& params, double ep0, double delta0);

/// Delta recovered from the scaled moments, (g1m g2m - g3m^2)^(-1/gamma).
double delta_of(const ModelParams& params, const MatrixMomentState<>& s);

MatrixMomentState<> matrix_state(const ModelParams& params, double a, double b, double c, double d, double gx,
                                 double gy, double gxy);

/// a = d = alpha, b = -c = beta, G_x = G_y = 1/(2 G1), G_xy = 0.
MatrixMomentState<> embed_scalar(const ModelParams& params, const ScalarMomentState<>& s);

/// Inverse of embed_scalar; throws NotAxisymmetric when the state is not in the scalar subclass.
ScalarMomentState<> extract_scalar(const ModelParams& params, const MatrixMomentState<>& s,
                                   double symmetry_tol = 1e-7);

}  // namespace affine
