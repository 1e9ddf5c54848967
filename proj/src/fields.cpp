#include "affine/fields.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "affine/numerics.hpp"

namespace affine {

namespace {

double canonical_ep0(double gamma, double a_exp) { return std::numbers::pi / ((gamma - 1.0) * (a_exp - 1.0)); }

// Local decay exponent k of f ~ r^-k near r, and the tail integral f(r) r / (k - 1).
double power_tail(const std::function<double(double)>& f, double r) {
  const double f0 = f(r), f1 = f(1.01 * r);
  if (f0 == 0.0) return 0.0;
  if (!(f0 > 0.0) || !(f1 > 0.0)) return std::numeric_limits<double>::infinity();
  const double k = -std::log(f1 / f0) / std::log(1.01);
  if (!(k > 1.0)) return std::numeric_limits<double>::infinity();
  return f0 * r / (k - 1.0);
}

}  // namespace

double entropy_coefficient(const ModelParams& params, double a_exp) {
  return a_exp * (params.gamma - 1.0) + params.gamma;
}

InitialProfile canonical_profile(const ModelParams& params, double a_exp, double g1_0) {
  if (!(a_exp > 3.0)) throw Error(Errc::ExponentTooSmall, "profile exponent must exceed 3");
  return canonical_profile(params, a_exp, g1_0, canonical_ep0(params.gamma, a_exp));
}

InitialProfile canonical_profile(const ModelParams& params, double a_exp, double g1_0, double ep0) {
  if (!(a_exp > 3.0)) throw Error(Errc::ExponentTooSmall, "profile exponent must exceed 3");
  if (!(g1_0 > 0.0)) throw Error(Errc::NonPositiveG1, "g1_0 must be positive");
  if (!(ep0 > 0.0)) throw Error(Errc::ValidationError, "ep0 must be positive");
  const double gamma = params.gamma;
  const double coef = 2.0 * a_exp / ((gamma - 1.0) * g1_0 * ep0);
  const double s_coef = entropy_coefficient(params, a_exp);
  const double s_shift = -gamma * std::log(coef);

  InitialProfile pr;
  pr.a_exp = a_exp;
  pr.g1_0 = g1_0;
  pr.ep0 = ep0;
  pr.gamma = gamma;
  pr.p0 = [a_exp](double r) { return std::pow(1.0 + r * r, -a_exp); };
  pr.dp0 = [a_exp](double r) { return -2.0 * a_exp * r * std::pow(1.0 + r * r, -a_exp - 1.0); };
  pr.rho0 = [a_exp, coef](double r) { return coef * std::pow(1.0 + r * r, -a_exp - 1.0); };
  pr.drho0 = [a_exp, coef](double r) {
    return -2.0 * (a_exp + 1.0) * coef * r * std::pow(1.0 + r * r, -a_exp - 2.0);
  };
  pr.s0 = [s_coef, s_shift](double r) { return s_coef * std::log1p(r * r) + s_shift; };
  pr.ds0 = [s_coef](double r) { return s_coef * 2.0 * r / (1.0 + r * r); };
  return pr;
}

double compatibility_residual(const InitialProfile& profile, const ModelParams& params, double g1_0, double ep0,
                              int samples, double r_max) {
  const double k = (params.gamma - 1.0) * g1_0 * ep0;
  double worst = 0.0, scale = 0.0;
  for (int i = 0; i <= samples; ++i) {
    const double r = r_max * i / samples;
    const double dp = profile.dp0(r);
    worst = std::max(worst, std::abs(dp + k * profile.rho0(r) * r));
    scale = std::max(scale, std::abs(dp));
  }
  return scale > 0.0 ? worst / scale : worst;
}

double to_symmetric_vars(double p, const ModelParams& params) {
  if (p < 0.0) throw Error(Errc::NegativePressure, "pressure must be non-negative");
  const double gamma = params.gamma;
  const double kappa = 2.0 * std::sqrt(gamma) / (gamma - 1.0);
  return kappa * std::pow(0.5 * p, (gamma - 1.0) / (2.0 * gamma));
}

ScalarSolution::ScalarSolution(const ModelParams& params, InitialProfile profile, const Trajectory<3>& traj)
    : params_(params), profile_(std::move(profile)), traj_(&traj), int_alpha_(traj, 1), int_beta_(traj, 2) {
  if (!profile_.rho0 || !profile_.p0 || !profile_.s0) {
    throw Error(Errc::ValidationError, "profile is missing radial functions");
  }
}

ScalarSolution::Phase ScalarSolution::phase(double t) const {
  const auto y = traj_->sample(t);
  return {t, int_alpha_(t), int_beta_(t), y(1), y(2)};
}

PointFields ScalarSolution::at(double t, const Eigen::Vector2d& x, double beta_shift) const {
  return at(phase(t), x, beta_shift);
}

PointFields ScalarSolution::at(const Phase& ph, const Eigen::Vector2d& x, double beta_shift) const {
  // The profile is radial, so the angular shift by I_beta drops out.
  const double s = x.norm() * std::exp(-ph.i_alpha);
  PointFields f;
  f.rho = std::exp(-2.0 * ph.i_alpha) * profile_.rho0(s);
  f.p = std::exp(-2.0 * params_.gamma * ph.i_alpha) * profile_.p0(s);
  f.s = profile_.s0(s);
  const double beta = ph.beta + beta_shift;
  f.v = ph.alpha * x + beta * Eigen::Vector2d(x.y(), -x.x());
  return f;
}

FieldSnapshot evaluate(const ScalarSolution& sol, double t, std::span<const Eigen::Vector2d> points) {
  const auto ph = sol.phase(t);
  FieldSnapshot snap;
  snap.time = t;
  snap.i_alpha = ph.i_alpha;
  snap.i_beta = ph.i_beta;
  snap.alpha = ph.alpha;
  snap.beta = ph.beta;
  snap.points.assign(points.begin(), points.end());
  const auto n = static_cast<Eigen::Index>(points.size());
  snap.rho.resize(n);
  snap.p.resize(n);
  snap.s.resize(n);
  snap.vx.resize(n);
  snap.vy.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const PointFields f = sol.at(ph, points[static_cast<std::size_t>(i)]);
    snap.rho(i) = f.rho;
    snap.p(i) = f.p;
    snap.s(i) = f.s;
    snap.vx(i) = f.v.x();
    snap.vy(i) = f.v.y();
  }
  return snap;
}

PdeResidual pde_residual(const ScalarSolution& sol, double t, const GridSpec& grid, double h, double dt,
                         double beta_shift) {
  if (!(h > 0.0) || !(dt > 0.0)) throw Error(Errc::ValidationError, "steps must be positive");
  if (t - dt < sol.trajectory().times().front()) throw Error(Errc::OutOfRange, "t - dt precedes the trajectory");
  if (grid.points_per_side < 1) throw Error(Errc::ValidationError, "empty residual grid");
  const double gamma = sol.params().gamma;
  const Eigen::Matrix2d lmat = sol.params().force_matrix();
  const auto before = sol.phase(t - dt), now = sol.phase(t), after = sol.phase(t + dt);

  // Conserved densities (rho, rho V) plus the fields needed for the fluxes.
  struct Local {
    double rho, p, s;
    Eigen::Vector2d v, mom;
  };
  auto local = [&](const ScalarSolution::Phase& ph, const Eigen::Vector2d& x) {
    const PointFields f = sol.at(ph, x, beta_shift);
    return Local{f.rho, f.p, f.s, f.v, f.rho * f.v};
  };

  PdeResidual out;
  const int n = grid.points_per_side;
  const Eigen::Vector2d ex(h, 0.0), ey(0.0, h);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double px = n == 1 ? 0.0 : -grid.half_width + 2.0 * grid.half_width * i / (n - 1);
      const double py = n == 1 ? 0.0 : -grid.half_width + 2.0 * grid.half_width * j / (n - 1);
      const Eigen::Vector2d x(px, py);
      const Local c = local(now, x);
      const Local tm = local(before, x), tp = local(after, x);
      const Local xm = local(now, x - ex), xp = local(now, x + ex);
      const Local ym = local(now, x - ey), yp = local(now, x + ey);
      const double i2h = 0.5 / h, i2t = 0.5 / dt;

      const double rho_t = (tp.rho - tm.rho) * i2t;
      const double div_mass = (xp.mom.x() - xm.mom.x()) * i2h + (yp.mom.y() - ym.mom.y()) * i2h;
      out.mass = std::max(out.mass, std::abs(rho_t + div_mass));

      const Eigen::Vector2d mom_t = (tp.mom - tm.mom) * i2t;
      const Eigen::Vector2d flux_x = (xp.mom * xp.v.x() - xm.mom * xm.v.x()) * i2h;
      const Eigen::Vector2d flux_y = (yp.mom * yp.v.y() - ym.mom * ym.v.y()) * i2h;
      const Eigen::Vector2d grad_p((xp.p - xm.p) * i2h, (yp.p - ym.p) * i2h);
      const Eigen::Vector2d mom = mom_t + flux_x + flux_y + grad_p - c.rho * (lmat * c.v);
      out.momentum_x = std::max(out.momentum_x, std::abs(mom.x()));
      out.momentum_y = std::max(out.momentum_y, std::abs(mom.y()));

      const double s_t = (tp.s - tm.s) * i2t;
      const Eigen::Vector2d grad_s((xp.s - xm.s) * i2h, (yp.s - ym.s) * i2h);
      out.entropy = std::max(out.entropy, std::abs(c.rho * (s_t + c.v.dot(grad_s))));

      const double p_t = (tp.p - tm.p) * i2t;
      const double div_v = (xp.v.x() - xm.v.x()) * i2h + (yp.v.y() - ym.v.y()) * i2h;
      out.pressure = std::max(out.pressure, std::abs(p_t + c.v.dot(grad_p) + gamma * c.p * div_v));
    }
  }
  return out;
}

Functionals functionals(const ScalarSolution& sol, double t, const QuadratureSpec& spec) {
  if (spec.radial_panels < 2 || spec.gauss_order < 1 || spec.angular_points < 4) {
    throw Error(Errc::ValidationError, "quadrature grid too coarse");
  }
  const InitialProfile& pr = sol.profile();
  const double gamma = sol.params().gamma, l = sol.params().l;

  double radius = spec.radius;
  if (radius <= 0.0) {
    if (!(pr.a_exp > 1.0)) throw Error(Errc::ValidationError, "automatic radius needs the profile exponent");
    radius = std::max(10.0, std::pow(pr.a_exp / spec.truncation_tol, 1.0 / (2.0 * pr.a_exp - 2.0)));
  }

  // Tail bounds in the pulled-back radius for the positive integrands m, E_p and G.
  {
    const std::array<std::function<double(double)>, 3> radial = {
        [&](double s) { return pr.rho0(s) * s; },
        [&](double s) { return pr.p0(s) * s; },
        [&](double s) { return pr.rho0(s) * s * s * s; },
    };
    for (const auto& f : radial) {
      const double total =
          numerics::integrate_adaptive([&](double u) { return f(radius * u) * radius; }, 0.0, 1.0, 0.0, 1e-10).value;
      const double tail = power_tail(f, radius);
      if (!(tail <= 1e-8 * total)) {
        throw Error(Errc::TruncationTooTight, "truncation radius " + std::to_string(radius) + " leaves tail " +
                                                  std::to_string(tail / total) + " of the total");
      }
    }
  }

  const auto ph = sol.phase(t);
  const double scale = std::exp(ph.i_alpha);
  const numerics::GaussRule rule = numerics::gauss_legendre(spec.gauss_order);
  const int panels = spec.radial_panels;
  const double s_min = std::min(0.05, radius / panels);
  std::vector<double> edges(static_cast<std::size_t>(panels) + 1, 0.0);
  for (int k = 1; k <= panels; ++k) {
    edges[static_cast<std::size_t>(k)] =
        scale * s_min * std::pow(radius / s_min, static_cast<double>(k - 1) / (panels - 1));
  }

  numerics::CompensatedSum m, ek, ep, j, g, f1, f2, gx, gy, gxy;
  const double dtheta = 2.0 * std::numbers::pi / spec.angular_points;
  for (int k = 0; k < panels; ++k) {
    const double lo = edges[static_cast<std::size_t>(k)], hi = edges[static_cast<std::size_t>(k) + 1];
    const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
    for (Eigen::Index q = 0; q < rule.nodes.size(); ++q) {
      const double r = mid + half * rule.nodes(q);
      const double wr = half * rule.weights(q) * r * dtheta;
      for (int a = 0; a < spec.angular_points; ++a) {
        const double th = dtheta * (a + 0.5);
        const Eigen::Vector2d x(r * std::cos(th), r * std::sin(th));
        const PointFields f = sol.at(ph, x);
        const Eigen::Vector2d x_perp(x.y(), -x.x());
        const Eigen::Vector2d v_perp(f.v.y(), -f.v.x());
        const double rw = f.rho * wr;
        m.add(rw);
        ek.add(0.5 * rw * f.v.squaredNorm());
        ep.add(f.p / (gamma - 1.0) * wr);
        j.add(rw * (v_perp.dot(x) + 0.5 * l * x.squaredNorm()));
        g.add(0.5 * rw * x.squaredNorm());
        f1.add(rw * f.v.dot(x));
        f2.add(rw * f.v.dot(x_perp));
        gx.add(0.5 * rw * x.x() * x.x());
        gy.add(0.5 * rw * x.y() * x.y());
        gxy.add(0.5 * rw * x.x() * x.y());
      }
    }
  }

  Functionals out;
  out.time = t;
  out.m = m.value();
  out.kinetic = ek.value();
  out.potential = ep.value();
  out.energy = out.kinetic + out.potential;
  out.j = j.value();
  out.g = g.value();
  out.f1 = f1.value();
  out.f2 = f2.value();
  out.gx = gx.value();
  out.gy = gy.value();
  out.gxy = gxy.value();
  return out;
}

std::vector<Functionals> conserved_quantities(const ScalarSolution& sol, std::span<const double> times,
                                              const QuadratureSpec& spec) {
  std::vector<Functionals> out;
  out.reserve(times.size());
  for (double t : times) out.push_back(functionals(sol, t, spec));
  return out;
}

FunctionalRates functional_rates(const ScalarSolution& sol, double t, double dt, const QuadratureSpec& spec) {
  if (!(dt > 0.0)) throw Error(Errc::ValidationError, "dt must be positive");
  const Functionals lo = functionals(sol, t - dt, spec), hi = functionals(sol, t + dt, spec);
  const double inv = 0.5 / dt;
  return {(hi.g - lo.g) * inv, (hi.f1 - lo.f1) * inv, (hi.f2 - lo.f2) * inv, (hi.energy - lo.energy) * inv};
}

}  // namespace affine
