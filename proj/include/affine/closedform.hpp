#pragma once

// Explicit solution of the scalar moment system without friction (mu = 0).
//
// With beta = C G1 + l/2 the orbit lies on the level set
//   alpha^2 = K G1^gamma - C^2 G1^2 + (E - l C) G1 - l^2/4,
// and time along a monotone branch is the quadrature
//   t = -int dG1 / (2 G1 alpha(G1)).

#include <Eigen/Dense>

#include <complex>
#include <span>
#include <string>
#include <vector>

#include "affine/moments.hpp"

namespace affine {

enum class EquilibriumKind { Center, EllipticSaddle, Knot, Focus, Saddle };

std::string_view to_string(EquilibriumKind kind);

enum class PhasePlane { G1Alpha, AlphaBeta };

struct Equilibrium {
  Eigen::Vector2d point;
  PhasePlane plane = PhasePlane::G1Alpha;
  EquilibriumKind kind = EquilibriumKind::Center;
  Eigen::Vector2cd eigenvalues;
  /// Max-norm of the planar right-hand side at the point.
  double rhs_residual = 0.0;
};

struct PhasePortrait {
  std::vector<Equilibrium> equilibria;
  ModelParams params;
};

/// Expression under the root, summed with compensation.
double radicand(const ScalarInvariants& inv, const ModelParams& params, double g1);

/// branch * sqrt(radicand); values within 1e-14 of zero are clamped to a turning point.
double alpha_of_g1(const ScalarInvariants& inv, const ModelParams& params, double g1, int branch);

/// Time to travel from g1_from to g1_to along the branch with sign(alpha) = branch.
double time_of_g1(const ScalarInvariants& inv, const ModelParams& params, double g1_from, double g1_to,
                  int branch);

/// Turning points bracketing g1 on its orbit; lower is 0 when the orbit tends to
/// the origin and upper is +inf when G1 is unbounded on the orbit.
struct OrbitBounds {
  double lower = 0.0;
  double upper = 0.0;
};
OrbitBounds orbit_bounds(const ScalarInvariants& inv, const ModelParams& params, double g1);

/// States of the explicit solution at each time of t_grid (t >= 0).
std::vector<ScalarMomentState<>> trajectory_mu0(const ScalarInvariants& inv, const ModelParams& params,
                                                const ScalarMomentState<>& state0, std::span<const double> t_grid);

/// Period of a closed (l != 0) orbit; +inf for open orbits.
double orbit_period(const ScalarInvariants& inv, const ModelParams& params);

EquilibriumKind classify_linearization(const Eigen::Matrix2d& jacobian, double zero_tol = 1e-10);

PhasePortrait equilibria(const ScalarInvariants& inv, const ModelParams& params);

}  // namespace affine
