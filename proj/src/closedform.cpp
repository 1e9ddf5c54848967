#include "affine/closedform.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

#include "affine/numerics.hpp"

namespace affine {

namespace {

constexpr double kTurningTol = 1e-14;
constexpr double kInf = std::numeric_limits<double>::infinity();

void require_frictionless(const ModelParams& params) {
  if (params.mu != 0.0) throw Error(Errc::ValidationError, "explicit solution requires mu = 0");
}

double radicand_slope(const ScalarInvariants& inv, const ModelParams& params, double g1) {
  const double c = inv.c_rot;
  return params.gamma * inv.k_quad * std::pow(g1, params.gamma - 1.0) - 2.0 * c * c * g1 +
         (inv.e_total - params.l * c);
}

// Lower root on (0, g1): with l = 0 the radicand is G1 times a decreasing function
// that equals E at the origin, so the orbit reaches down to G1 = 0 when E > 0.
double lower_root(const ScalarInvariants& inv, const ModelParams& params, double g1) {
  if (params.l == 0.0) {
    const auto reduced = [&](double g) { return radicand(inv, params, g) / g; };
    if (inv.e_total > 0.0) return 0.0;
    double lo = g1 * 0.5;
    while (reduced(lo) > 0.0) {
      lo *= 0.5;
      if (lo < 1e-300) return 0.0;
    }
    return numerics::find_root(reduced, lo, g1);
  }
  const auto rad = [&](double g) { return radicand(inv, params, g); };
  if (rad(g1) <= 0.0) return g1;
  return numerics::find_root(rad, 0.0, g1);
}

double upper_root(const ScalarInvariants& inv, const ModelParams& params, double g1) {
  const auto rad = [&](double g) { return radicand(inv, params, g); };
  if (rad(g1) <= 0.0) return g1;
  double hi = 2.0 * g1;
  while (rad(hi) > 0.0) {
    hi *= 2.0;
    if (hi > 1e300) return kInf;
  }
  return numerics::find_root(rad, g1, hi);
}

}  // namespace

std::string_view to_string(EquilibriumKind kind) {
  switch (kind) {
    case EquilibriumKind::Center: return "Center";
    case EquilibriumKind::EllipticSaddle: return "EllipticSaddle";
    case EquilibriumKind::Knot: return "Knot";
    case EquilibriumKind::Focus: return "Focus";
    case EquilibriumKind::Saddle: return "Saddle";
  }
  return "Unknown";
}

double radicand(const ScalarInvariants& inv, const ModelParams& params, double g1) {
  const double c = inv.c_rot;
  const double l = params.l;
  return numerics::compensated_sum({inv.k_quad * std::pow(g1, params.gamma), -c * c * g1 * g1,
                                    (inv.e_total - l * c) * g1, -0.25 * l * l});
}

double alpha_of_g1(const ScalarInvariants& inv, const ModelParams& params, double g1, int branch) {
  require_frictionless(params);
  detail::require_positive_g1(g1);
  const double r = radicand(inv, params, g1);
  if (r < -kTurningTol) throw Error(Errc::NegativeRadicand, "G1 = " + std::to_string(g1) + " lies outside the orbit");
  if (r <= kTurningTol) return 0.0;
  return (branch >= 0 ? 1.0 : -1.0) * std::sqrt(r);
}

double time_of_g1(const ScalarInvariants& inv, const ModelParams& params, double g1_from, double g1_to,
                  int branch) {
  require_frictionless(params);
  if (g1_from == g1_to) return 0.0;
  detail::require_positive_g1(std::min(g1_from, g1_to));
  const double lo = std::min(g1_from, g1_to);
  const double hi = std::max(g1_from, g1_to);
  const auto rad = [&](double g) { return radicand(inv, params, g); };
  if (radicand(inv, params, lo) < -kTurningTol || radicand(inv, params, hi) < -kTurningTol) {
    throw Error(Errc::NegativeRadicand, "interval endpoint outside the orbit");
  }
  constexpr int kProbe = 64;
  for (int i = 1; i < kProbe; ++i) {
    const double g = lo + (hi - lo) * i / kProbe;
    if (rad(g) <= 0.0) throw Error(Errc::BranchCrossing, "radicand vanishes inside the interval");
  }

  // End pieces use G1 = e +- s^2, which removes the inverse square root at a
  // turning point; the interior uses u = ln G1, smooth for orbits tending to 0.
  const double quarter = 0.25 * (hi - lo);
  const double w_lo = std::min(quarter, 0.5 * lo);
  const double w_hi = std::min(quarter, 0.25 * hi);
  const double slope_lo = std::abs(radicand_slope(inv, params, lo));
  const double slope_hi = std::abs(radicand_slope(inv, params, hi));
  // A turning-point endpoint carries a rounding residue in the radicand; it is
  // removed so that the root sits exactly at the endpoint.
  const double rad_lo = rad(lo);
  const double rad_hi = rad(hi);
  const double shift_lo = std::abs(rad_lo) <= kTurningTol ? rad_lo : 0.0;
  const double shift_hi = std::abs(rad_hi) <= kTurningTol ? rad_hi : 0.0;
  const auto safe_root = [&](double g, double dist, double slope, double shift) {
    double r = rad(g) - shift;
    if (r <= 0.0) r = slope * dist;
    return std::sqrt(r);
  };
  const auto near_lo = [&](double s) {
    if (s == 0.0) return 0.0;
    const double g = lo + s * s;
    const double root = safe_root(g, s * s, slope_lo, shift_lo);
    return root > 0.0 ? s / (g * root) : 0.0;
  };
  const auto near_hi = [&](double s) {
    if (s == 0.0) return 0.0;
    const double g = hi - s * s;
    const double root = safe_root(g, s * s, slope_hi, shift_hi);
    return root > 0.0 ? s / (g * root) : 0.0;
  };
  const auto middle = [&](double u) { return 0.5 / std::sqrt(rad(std::exp(u))); };
  const double abs_tol = 1e-12;
  const double rel_tol = 1e-12;
  numerics::CompensatedSum acc;
  acc.add(numerics::integrate_adaptive(near_lo, 0.0, std::sqrt(w_lo), abs_tol, rel_tol).value);
  acc.add(numerics::integrate_adaptive(middle, std::log(lo + w_lo), std::log(hi - w_hi), abs_tol, rel_tol).value);
  acc.add(numerics::integrate_adaptive(near_hi, 0.0, std::sqrt(w_hi), abs_tol, rel_tol).value);
  const double value = acc.value();
  const double direction = g1_to > g1_from ? 1.0 : -1.0;
  const double sign = branch >= 0 ? 1.0 : -1.0;
  return -direction * value / sign;
}

OrbitBounds orbit_bounds(const ScalarInvariants& inv, const ModelParams& params, double g1) {
  detail::require_positive_g1(g1);
  const double r = radicand(inv, params, g1);
  if (r < -kTurningTol) throw Error(Errc::NegativeRadicand, "G1 lies outside its orbit");
  if (r > kTurningTol) return {lower_root(inv, params, g1), upper_root(inv, params, g1)};
  const double slope = radicand_slope(inv, params, g1);
  if (std::abs(slope) <= 1e-12) return {g1, g1};
  if (slope < 0.0) {
    // g1 is the upper turning point; probe just below it.
    return {lower_root(inv, params, g1 * (1.0 - 1e-9)), g1};
  }
  return {g1, upper_root(inv, params, g1 * (1.0 + 1e-9))};
}

double orbit_period(const ScalarInvariants& inv, const ModelParams& params) {
  require_frictionless(params);
  const OrbitBounds b = orbit_bounds(inv, params, inv.g1_0);
  if (!(b.lower > 0.0) || !std::isfinite(b.upper) || b.lower == b.upper) return kInf;
  return 2.0 * time_of_g1(inv, params, b.upper, b.lower, +1);
}

std::vector<ScalarMomentState<>> trajectory_mu0(const ScalarInvariants& inv, const ModelParams& params,
                                                const ScalarMomentState<>& state0, std::span<const double> t_grid) {
  require_frictionless(params);
  detail::require_positive_g1(state0.g1);
  const double g0 = state0.g1;
  const OrbitBounds bounds = orbit_bounds(inv, params, g0);
  const auto beta_of = [&](double g) { return inv.c_rot * g + 0.5 * params.l; };

  int branch0;
  if (radicand(inv, params, g0) > kTurningTol && state0.alpha != 0.0) {
    branch0 = state0.alpha > 0.0 ? 1 : -1;
  } else {
    // Turning point: alpha' = -G1 * d(radicand)/dG1 decides the direction.
    branch0 = radicand_slope(inv, params, g0) < 0.0 ? 1 : -1;
  }

  const bool stationary = bounds.lower == bounds.upper;
  const bool closed = bounds.lower > 0.0 && std::isfinite(bounds.upper);
  const double half_period = closed && !stationary ? time_of_g1(inv, params, bounds.upper, bounds.lower, +1) : kInf;

  const auto state_on_branch = [&](double g_start, int branch, double elapsed) -> ScalarMomentState<> {
    const double target = branch > 0 ? bounds.lower : bounds.upper;
    const auto residual = [&](double g) { return time_of_g1(inv, params, g_start, g, branch) - elapsed; };
    double bracket_end = target;
    if (target == 0.0) {
      bracket_end = 0.5 * g_start;
      while (residual(bracket_end) < 0.0) {
        bracket_end *= 0.5;
        if (bracket_end < 1e-300) throw Error(Errc::OutOfRange, "time beyond representable orbit");
      }
    } else if (!std::isfinite(target)) {
      bracket_end = 2.0 * g_start;
      while (residual(bracket_end) < 0.0) {
        bracket_end *= 2.0;
        if (bracket_end > 1e300) throw Error(Errc::OutOfRange, "orbit escapes before the requested time");
      }
    }
    const double g = numerics::find_root(residual, std::min(g_start, bracket_end), std::max(g_start, bracket_end));
    return {g, alpha_of_g1(inv, params, g, branch), beta_of(g)};
  };

  std::vector<ScalarMomentState<>> out;
  out.reserve(t_grid.size());
  for (double t : t_grid) {
    if (t < 0.0) throw Error(Errc::OutOfRange, "explicit solution is evaluated for t >= 0");
    if (t == 0.0 || stationary) {
      out.push_back(state0);
      continue;
    }
    double g_start = g0;
    int branch = branch0;
    double remaining = t;
    const double target0 = branch0 > 0 ? bounds.lower : bounds.upper;
    const double first_leg =
        (target0 > 0.0 && std::isfinite(target0)) ? time_of_g1(inv, params, g0, target0, branch0) : kInf;
    if (remaining > first_leg) {
      remaining -= first_leg;
      g_start = target0;
      branch = -branch;
      if (std::isfinite(half_period)) {
        const double legs = std::floor(remaining / half_period);
        remaining -= legs * half_period;
        if (static_cast<long long>(legs) % 2 == 1) {
          g_start = branch > 0 ? bounds.lower : bounds.upper;
          branch = -branch;
        }
      }
    }
    out.push_back(state_on_branch(g_start, branch, remaining));
  }
  return out;
}

EquilibriumKind classify_linearization(const Eigen::Matrix2d& jacobian, double zero_tol) {
  Eigen::EigenSolver<Eigen::Matrix2d> solver(jacobian, false);
  const Eigen::Vector2cd ev = solver.eigenvalues();
  if (std::abs(ev(0)) <= zero_tol && std::abs(ev(1)) <= zero_tol) return EquilibriumKind::EllipticSaddle;
  if (std::abs(ev(0).imag()) > zero_tol) {
    return std::abs(ev(0).real()) <= zero_tol ? EquilibriumKind::Center : EquilibriumKind::Focus;
  }
  return (ev(0).real() > 0.0) == (ev(1).real() > 0.0) ? EquilibriumKind::Knot : EquilibriumKind::Saddle;
}

PhasePortrait equilibria(const ScalarInvariants& inv, const ModelParams& params) {
  PhasePortrait portrait;
  portrait.params = params;
  const double gamma = params.gamma;
  const double c = inv.c_rot;
  const double kf = inv.k_force;

  const auto make = [&](const Eigen::Vector2d& point, PhasePlane plane, const Eigen::Matrix2d& jac,
                        const Eigen::Vector2d& rhs) {
    Equilibrium e;
    e.point = point;
    e.plane = plane;
    e.kind = classify_linearization(jac);
    e.eigenvalues = Eigen::EigenSolver<Eigen::Matrix2d>(jac, false).eigenvalues();
    e.rhs_residual = rhs.cwiseAbs().maxCoeff();
    return e;
  };

  if (params.mu > 0.0) {
    // Stable rest point alpha = beta = 0 (with G1 -> 0) of the (alpha, beta) dynamics.
    Eigen::Matrix2d jac;
    jac << -params.mu, -params.l, params.l, -params.mu;
    portrait.equilibria.push_back(make(Eigen::Vector2d::Zero(), PhasePlane::AlphaBeta, jac, Eigen::Vector2d::Zero()));
    return portrait;
  }

  // Planar (G1, alpha) system with beta = C G1 + l/2:
  //   G1' = -2 alpha G1,  alpha' = -alpha^2 + C^2 G1^2 - l^2/4 + K' G1^gamma.
  const auto planar_rhs = [&](double g, double a) {
    return Eigen::Vector2d(-2.0 * a * g, -a * a + c * c * g * g - 0.25 * params.l * params.l + kf * std::pow(g, gamma));
  };
  const auto planar_jac = [&](double g, double a) {
    Eigen::Matrix2d jac;
    jac << -2.0 * a, -2.0 * g, 2.0 * c * c * g + (g > 0.0 ? gamma * kf * std::pow(g, gamma - 1.0) : 0.0), -2.0 * a;
    return jac;
  };

  if (params.l == 0.0) {
    portrait.equilibria.push_back(
        make(Eigen::Vector2d::Zero(), PhasePlane::G1Alpha, planar_jac(0.0, 0.0), planar_rhs(0.0, 0.0)));
    return portrait;
  }

  // C^2 G^2 + K' G^gamma = l^2/4 has a single positive root when C != 0 or K' > 0.
  if (c == 0.0 && kf <= 0.0) return portrait;
  const auto f = [&](double g) { return c * c * g * g + kf * std::pow(g, gamma) - 0.25 * params.l * params.l; };
  double hi = 1.0;
  while (f(hi) < 0.0) hi *= 2.0;
  const double g_star = numerics::find_root(f, 0.0, hi);
  portrait.equilibria.push_back(
      make(Eigen::Vector2d(g_star, 0.0), PhasePlane::G1Alpha, planar_jac(g_star, 0.0), planar_rhs(g_star, 0.0)));
  return portrait;
}

}  // namespace affine
