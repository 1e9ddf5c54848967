#pragma once

// Leading-order large-time behaviour of the moment systems and the tools used
// to measure it on numerical trajectories.

#include <Eigen/Dense>

#include <span>
#include <string_view>
#include <vector>

#include "affine/integrator.hpp"
#include "affine/moments.hpp"

namespace affine {

enum class Regime { MuPosLPos, MuPosLZero, MuZeroLZero };

std::string_view to_string(Regime r);

/// Regime implied by (mu, l); mu = 0 with l != 0 has periodic orbits and no decay regime.
Regime regime_of(const ModelParams& params);

struct LeadingTerm {
  double alpha = 0.0;
  double beta = 0.0;
  double g1 = 0.0;
};

LeadingTerm leading_term(const ModelParams& params, const ScalarInvariants& inv, Regime regime, double t);

struct PowerLawFit {
  double exponent = 0.0;
  double coefficient = 0.0;
  /// max |value / (coefficient t^exponent) - 1| over the fitted samples.
  double residual = 0.0;
  int samples = 0;
};

/// Least-squares line through (ln t, ln |v|) for samples with t in [t_lo, t_hi].
PowerLawFit fit_power_law(std::span<const double> t, std::span<const double> v, double t_lo, double t_hi);

/// Coefficient-only fit with the exponent held fixed.
PowerLawFit fit_power_law_fixed(std::span<const double> t, std::span<const double> v, double t_lo, double t_hi,
                                double exponent);

/// a1 = a - d, b1 = b + c, c1 = b - c, d1 = a + d, g3, g4 = g1m + g2m, g5 = g1m - g2m.
template <typename Scalar = double>
struct SymmetrizedMatrixState {
  using Vector = Eigen::Matrix<Scalar, 7, 1>;

  Scalar a1{0}, b1{0}, c1{0}, d1{0};
  Scalar g3{0}, g4{0}, g5{0};

  Vector to_vector() const {
    Vector v;
    v << a1, b1, c1, d1, g3, g4, g5;
    return v;
  }
  static SymmetrizedMatrixState from_vector(const Vector& v) { return {v(0), v(1), v(2), v(3), v(4), v(5), v(6)}; }
};

template <typename Scalar>
SymmetrizedMatrixState<Scalar> symmetrize(const MatrixMomentState<Scalar>& s) {
  return {s.a - s.d, s.b + s.c, s.b - s.c, s.a + s.d, s.g3m, s.g1m + s.g2m, s.g1m - s.g2m};
}

template <typename Scalar>
MatrixMomentState<Scalar> desymmetrize(const SymmetrizedMatrixState<Scalar>& s) {
  const Scalar half(0.5);
  return {half * (s.d1 + s.a1), half * (s.b1 + s.c1), half * (s.b1 - s.c1), half * (s.d1 - s.a1),
          half * (s.g4 + s.g5), half * (s.g4 - s.g5), s.g3};
}

/// Matrix system written in the symmetrized variables, ordered as in to_vector().
template <typename Scalar>
Eigen::Matrix<Scalar, 7, 1> symmetrized_rhs(const ModelParams& params, double k1,
                                            const SymmetrizedMatrixState<Scalar>& s) {
  const Scalar gamma(params.gamma), mu(params.mu), l(params.l), k(k1), half(0.5);
  Eigen::Matrix<Scalar, 7, 1> out;
  out(0) = -s.a1 * s.d1 - k * s.g5 + l * s.b1 - mu * s.a1;
  out(1) = -s.b1 * s.d1 - 2 * k * s.g3 - l * s.a1 - mu * s.b1;
  out(2) = -s.c1 * s.d1 + l * s.d1 - mu * s.c1;
  out(3) = -half * (s.a1 * s.a1 + s.d1 * s.d1) - half * (s.b1 * s.b1 - s.c1 * s.c1) - l * s.c1 - mu * s.d1 +
           k * s.g4;
  out(4) = -gamma * s.d1 * s.g3 + half * s.b1 * s.g4 - half * s.c1 * s.g5;
  out(5) = -gamma * s.d1 * s.g4 + s.a1 * s.g5 + 2 * s.b1 * s.g3;
  out(6) = -gamma * s.d1 * s.g5 + s.a1 * s.g4 + 2 * s.c1 * s.g3;
  return out;
}

struct MatrixAsymptote {
  /// d1 t averaged in log space (d1 ~ L4 / t).
  double l4_estimate = 0.0;
  /// Free power-law exponent of d1.
  double d1_exponent = 0.0;
  /// sup over the window of (|a1| + |b1| + |c1|) / |d1|.
  double isotropy_defect = 0.0;
  /// The same ratio at the first and last window sample.
  double isotropy_defect_start = 0.0;
  double isotropy_defect_end = 0.0;
  double delta_exponent = 0.0;
  /// max over the window of |(g1m g2m - g3m^2) Delta^gamma - 1|, Delta tracked through d1.
  double determinant_defect = 0.0;
};

/// Tail diagnostics of a matrix trajectory on [t_lo, t_hi] (log-uniform samples).
MatrixAsymptote matrix_asymptote(const ModelParams& params, const Trajectory<7>& traj, double t_lo, double t_hi,
                                 int samples = 200);

/// Log-uniform grid with n points on [t_lo, t_hi].
std::vector<double> log_grid(double t_lo, double t_hi, int n);

}  // namespace affine
