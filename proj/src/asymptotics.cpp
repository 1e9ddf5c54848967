#include "affine/asymptotics.hpp"

#include <algorithm>
#include <cmath>

namespace affine {

namespace {

struct Window {
  std::vector<double> x;
  std::vector<double> y;
  double sign = 1.0;
};

Window log_window(std::span<const double> t, std::span<const double> v, double t_lo, double t_hi) {
  if (t.size() != v.size()) throw Error(Errc::ValidationError, "sample arrays differ in length");
  Window w;
  int positive = 0, negative = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t_lo || t[i] > t_hi) continue;
    if (!(t[i] > 0.0)) throw Error(Errc::ValidationError, "power-law fit needs t > 0");
    if (v[i] > 0.0) {
      ++positive;
    } else if (v[i] < 0.0) {
      ++negative;
    } else {
      throw Error(Errc::SignChange, "zero sample at t = " + std::to_string(t[i]));
    }
    w.x.push_back(std::log(t[i]));
    w.y.push_back(std::log(std::abs(v[i])));
  }
  if (positive > 0 && negative > 0) throw Error(Errc::SignChange, "samples change sign inside the window");
  if (w.x.size() < 8) throw Error(Errc::TooFewSamples, "need at least 8 samples, got " + std::to_string(w.x.size()));
  w.sign = negative > 0 ? -1.0 : 1.0;
  return w;
}

void fill_residual(PowerLawFit& fit, const Window& w) {
  fit.residual = 0.0;
  const double ln_c = std::log(std::abs(fit.coefficient));
  for (std::size_t i = 0; i < w.x.size(); ++i) {
    const double model = ln_c + fit.exponent * w.x[i];
    fit.residual = std::max(fit.residual, std::abs(std::expm1(w.y[i] - model)));
  }
  fit.samples = static_cast<int>(w.x.size());
}

}  // namespace

std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::MuPosLPos: return "MuPosLPos";
    case Regime::MuPosLZero: return "MuPosLZero";
    case Regime::MuZeroLZero: return "MuZeroLZero";
  }
  return "Unknown";
}

Regime regime_of(const ModelParams& params) {
  if (params.mu > 0.0) return params.l != 0.0 ? Regime::MuPosLPos : Regime::MuPosLZero;
  if (params.l == 0.0) return Regime::MuZeroLZero;
  throw Error(Errc::RegimeMismatch, "mu = 0 with l != 0 is periodic");
}

LeadingTerm leading_term(const ModelParams& params, const ScalarInvariants& inv, Regime regime, double t) {
  if (!(t > 0.0)) throw Error(Errc::OutOfRange, "leading term needs t > 0");
  if (regime_of(params) != regime) throw Error(Errc::RegimeMismatch, "regime does not match (mu, l)");
  const double gamma = params.gamma, mu = params.mu, l = params.l;
  LeadingTerm out;
  switch (regime) {
    case Regime::MuPosLPos: {
      if (!(inv.k_force > 0.0)) throw Error(Errc::RegimeMismatch, "decay law needs E_p(0) > 0");
      out.alpha = 1.0 / (2.0 * gamma * t);
      out.beta = l / (2.0 * gamma * mu * t);
      out.g1 = std::pow((mu * mu + l * l) / (2.0 * inv.k_force * gamma * mu), 1.0 / gamma) * std::pow(t, -1.0 / gamma);
      break;
    }
    case Regime::MuPosLZero: {
      if (!(inv.k_force > 0.0)) throw Error(Errc::RegimeMismatch, "decay law needs E_p(0) > 0");
      out.alpha = 1.0 / (2.0 * gamma * t);
      out.g1 = std::pow(mu / (2.0 * inv.k_force * gamma), 1.0 / gamma) * std::pow(t, -1.0 / gamma);
      out.beta = inv.c_rot * out.g1 * std::exp(-mu * t);
      break;
    }
    case Regime::MuZeroLZero: {
      if (!(inv.e_total > 0.0)) throw Error(Errc::RegimeMismatch, "decay law needs E > 0");
      out.alpha = 1.0 / (std::sqrt(inv.g1_0 / inv.e_total) + t);
      out.g1 = out.alpha * out.alpha / inv.e_total;
      out.beta = inv.c_rot * out.g1;
      break;
    }
  }
  return out;
}

PowerLawFit fit_power_law(std::span<const double> t, std::span<const double> v, double t_lo, double t_hi) {
  const Window w = log_window(t, v, t_lo, t_hi);
  const auto n = static_cast<Eigen::Index>(w.x.size());
  Eigen::MatrixXd design(n, 2);
  Eigen::VectorXd rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    design(i, 0) = 1.0;
    design(i, 1) = w.x[static_cast<std::size_t>(i)];
    rhs(i) = w.y[static_cast<std::size_t>(i)];
  }
  const Eigen::Vector2d beta = design.colPivHouseholderQr().solve(rhs);
  PowerLawFit fit;
  fit.exponent = beta(1);
  fit.coefficient = w.sign * std::exp(beta(0));
  fill_residual(fit, w);
  return fit;
}

PowerLawFit fit_power_law_fixed(std::span<const double> t, std::span<const double> v, double t_lo, double t_hi,
                                double exponent) {
  const Window w = log_window(t, v, t_lo, t_hi);
  double mean = 0.0;
  for (std::size_t i = 0; i < w.x.size(); ++i) mean += w.y[i] - exponent * w.x[i];
  mean /= static_cast<double>(w.x.size());
  PowerLawFit fit;
  fit.exponent = exponent;
  fit.coefficient = w.sign * std::exp(mean);
  fill_residual(fit, w);
  return fit;
}

std::vector<double> log_grid(double t_lo, double t_hi, int n) {
  if (!(t_lo > 0.0) || !(t_hi > t_lo) || n < 2) throw Error(Errc::ValidationError, "bad log grid");
  std::vector<double> g(static_cast<std::size_t>(n));
  const double a = std::log(t_lo), b = std::log(t_hi);
  for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * i / (n - 1));
  g.front() = t_lo;
  g.back() = t_hi;
  return g;
}

MatrixAsymptote matrix_asymptote(const ModelParams& params, const Trajectory<7>& traj, double t_lo, double t_hi,
                                 int samples) {
  if (traj.termination() != Termination::ReachedHorizon) {
    throw Error(Errc::RegimeMismatch, "trajectory did not reach its horizon");
  }
  const std::vector<double> grid = log_grid(t_lo, t_hi, samples);
  const ComponentIntegral<7> trace_integral(traj, 0);
  const ComponentIntegral<7> trace_integral_d(traj, 3);
  const MatrixMomentState<> s0 = MatrixMomentState<>::from_vector(traj.states().front());
  const double ln_delta0 = std::log(delta_of(params, s0));

  std::vector<double> d1(grid.size()), delta(grid.size());
  MatrixAsymptote out;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto s = MatrixMomentState<>::from_vector(traj.sample(grid[i]));
    const auto sym = symmetrize(s);
    d1[i] = sym.d1;
    delta[i] = delta_of(params, s);
    const double ratio = (std::abs(sym.a1) + std::abs(sym.b1) + std::abs(sym.c1)) / std::abs(sym.d1);
    out.isotropy_defect = std::max(out.isotropy_defect, ratio);
    if (i == 0) out.isotropy_defect_start = ratio;
    if (i + 1 == grid.size()) out.isotropy_defect_end = ratio;
    // Delta = Delta0 exp(2 int (a + d)); compare with the moment determinant.
    const double ln_delta = ln_delta0 + 2.0 * (trace_integral(grid[i]) + trace_integral_d(grid[i]));
    const double predicted = std::exp(-params.gamma * ln_delta);
    out.determinant_defect = std::max(out.determinant_defect, std::abs(s.moment_determinant() / predicted - 1.0));
  }
  const PowerLawFit fixed = fit_power_law_fixed(grid, d1, t_lo, t_hi, -1.0);
  out.l4_estimate = fixed.coefficient;
  out.d1_exponent = fit_power_law(grid, d1, t_lo, t_hi).exponent;
  out.delta_exponent = fit_power_law(grid, delta, t_lo, t_hi).exponent;
  return out;
}

}  // namespace affine
