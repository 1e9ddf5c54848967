#pragma once

// Explicit Dormand-Prince 5(4) integration with adaptive step control,
// fourth-order continuous extension and blow-up / invariant events.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "affine/error.hpp"

namespace affine {

struct IntegrationConfig {
  double rtol = 1e-10;
  double atol = 1e-12;
  double max_step = std::numeric_limits<double>::infinity();
  double min_step = 1e-12;
  double t_end = 1.0;
  double blowup_norm_threshold = 1e12;
  /// 0 selects the starting step automatically.
  double initial_step = 0.0;
  std::size_t max_steps = 20'000'000;

  void validate() const {
    if (!(rtol > 0.0) || !(atol > 0.0)) throw Error(Errc::ValidationError, "rtol and atol must be positive");
    if (!(min_step > 0.0)) throw Error(Errc::ValidationError, "min_step must be positive");
    if (!(max_step > 0.0)) throw Error(Errc::ValidationError, "max_step must be positive");
    if (!(t_end > 0.0)) throw Error(Errc::ValidationError, "t_end must be positive");
    if (!(blowup_norm_threshold > 0.0)) throw Error(Errc::ValidationError, "blowup threshold must be positive");
  }
};

enum class Termination { ReachedHorizon, BlowUp, InvariantViolation };

enum class EventKind { StepUnderflow, NormEscape, InvariantViolation };

struct Event {
  double time = 0.0;
  EventKind kind = EventKind::StepUnderflow;
  /// Extrapolated escape time for blow-up events (time itself otherwise).
  double escape_estimate = 0.0;
  std::string detail;
};

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::ReachedHorizon: return "ReachedHorizon";
    case Termination::BlowUp: return "BlowUp";
    case Termination::InvariantViolation: return "InvariantViolation";
  }
  return "Unknown";
}

inline const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::StepUnderflow: return "StepUnderflow";
    case EventKind::NormEscape: return "NormEscape";
    case EventKind::InvariantViolation: return "InvariantViolation";
  }
  return "Unknown";
}

namespace detail {
struct TrajectoryAccess;
}

template <int N>
class Trajectory {
 public:
  using State = Eigen::Matrix<double, N, 1>;

  const std::vector<double>& times() const { return times_; }
  const std::vector<State>& states() const { return states_; }
  const std::vector<Event>& events() const { return events_; }
  Termination termination() const { return termination_; }
  std::size_t size() const { return times_.size(); }
  double t0() const { return times_.front(); }
  double t_final() const { return times_.back(); }

  /// Dense-output state at t in [t0, t_final]; stored nodes are returned exactly.
  State sample(double t) const {
    if (!(t >= times_.front() && t <= times_.back())) {
      throw Error(Errc::OutOfRange, "sample time " + std::to_string(t) + " outside trajectory");
    }
    const auto it = std::upper_bound(times_.begin(), times_.end(), t);
    if (it == times_.end()) return states_.back();
    const auto k = static_cast<std::size_t>(it - times_.begin()) - 1;
    if (t == times_[k]) return states_[k];
    return interpolate(k, (t - times_[k]) / (times_[k + 1] - times_[k]));
  }

  /// Continuous extension inside step k at fraction theta in [0, 1].
  State interpolate(std::size_t k, double theta) const {
    const auto& r = dense_[k];
    const double eta = 1.0 - theta;
    return r[0] + theta * (r[1] + eta * (r[2] + theta * (r[3] + eta * r[4])));
  }

  std::size_t step_count() const { return dense_.size(); }

 private:
  friend struct detail::TrajectoryAccess;

  std::vector<double> times_;
  std::vector<State> states_;
  std::vector<std::array<State, 5>> dense_;
  std::vector<Event> events_;
  Termination termination_ = Termination::ReachedHorizon;
};

namespace detail {

struct TrajectoryAccess {
  template <int N>
  static auto& times(Trajectory<N>& t) { return t.times_; }
  template <int N>
  static auto& states(Trajectory<N>& t) { return t.states_; }
  template <int N>
  static auto& dense(Trajectory<N>& t) { return t.dense_; }
  template <int N>
  static auto& events(Trajectory<N>& t) { return t.events_; }
  template <int N>
  static auto& termination(Trajectory<N>& t) { return t.termination_; }
};

}  // namespace detail

/// Running integral of one state component along a trajectory. The continuous
/// extension is a degree-4 polynomial per step, so three-point Gauss is exact.
template <int N>
class ComponentIntegral {
 public:
  ComponentIntegral(const Trajectory<N>& traj, int component) : traj_(&traj), component_(component) {
    cumulative_.reserve(traj.size());
    cumulative_.push_back(0.0);
    double sum = 0.0, comp = 0.0;
    for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
      const double x = step_part(k, 1.0);
      const double t = sum + x;
      comp += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
      sum = t;
      cumulative_.push_back(sum + comp);
    }
  }

  /// Integral from t0 to t.
  double operator()(double t) const {
    const auto& times = traj_->times();
    if (!(t >= times.front() && t <= times.back())) {
      throw Error(Errc::OutOfRange, "integral time " + std::to_string(t) + " outside trajectory");
    }
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    if (it == times.end()) return cumulative_.back();
    const auto k = static_cast<std::size_t>(it - times.begin()) - 1;
    if (t == times[k]) return cumulative_[k];
    return cumulative_[k] + step_part(k, (t - times[k]) / (times[k + 1] - times[k]));
  }

 private:
  double step_part(std::size_t k, double theta) const {
    static constexpr double x[3] = {0.11270166537925831148, 0.5, 0.88729833462074168852};
    static constexpr double w[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
    const double h = traj_->times()[k + 1] - traj_->times()[k];
    double acc = 0.0;
    for (int j = 0; j < 3; ++j) acc += w[j] * traj_->interpolate(k, theta * x[j])(component_);
    return h * theta * acc;
  }

  const Trajectory<N>* traj_;
  int component_;
  std::vector<double> cumulative_;
};

namespace dopri {

inline constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
inline constexpr double a21 = 1.0 / 5.0;
inline constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
inline constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
inline constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                        a54 = -212.0 / 729.0;
inline constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                        a65 = -5103.0 / 18656.0;
inline constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0, a75 = -2187.0 / 6784.0,
                        a76 = 11.0 / 84.0;
inline constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0, e5 = -17253.0 / 339200.0,
                        e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
inline constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                        d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                        d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

}  // namespace dopri

struct NoGuard {
  template <typename State>
  std::optional<std::string> operator()(double, const State&) const {
    return std::nullopt;
  }
};

/// Integrates y' = rhs(t, y) from t0 to config.t_end.
///
/// The run stops early with a BlowUp event when the controller needs a step
/// below min_step or the state max-norm exceeds blowup_norm_threshold, and with
/// an InvariantViolation event when guard(t, y) reports a problem on an
/// accepted step (the offending state is not stored). An rhs that throws
/// affine::Error on a trial stage causes the step to be retried with h / 4.
template <int N, typename Rhs, typename Guard = NoGuard>
Trajectory<N> integrate(Rhs&& rhs, const typename Trajectory<N>::State& y0, double t0,
                        const IntegrationConfig& config, Guard&& guard = Guard{}) {
  using State = typename Trajectory<N>::State;
  using namespace dopri;
  using Access = detail::TrajectoryAccess;
  config.validate();
  if (!(config.t_end > t0)) throw Error(Errc::ValidationError, "t_end must exceed t0");
  if (auto bad = guard(t0, y0)) throw Error(Errc::InvalidState, "initial state: " + *bad);

  Trajectory<N> traj;
  Access::times(traj).push_back(t0);
  Access::states(traj).push_back(y0);

  const auto scale = [&](const State& a, const State& b) {
    return (config.atol + config.rtol * a.cwiseAbs().cwiseMax(b.cwiseAbs()).array()).matrix().eval();
  };

  double t = t0;
  State y = y0;
  State k1 = rhs(t, y);

  double h = config.initial_step;
  if (h <= 0.0) {
    const State sc = scale(y, y);
    const double d0 = y.cwiseQuotient(sc).cwiseAbs().maxCoeff();
    const double dd1 = k1.cwiseQuotient(sc).cwiseAbs().maxCoeff();
    double h0 = (d0 < 1e-5 || dd1 < 1e-5) ? 1e-6 : 0.01 * d0 / dd1;
    h0 = std::min(h0, config.t_end - t0);
    double h1 = h0;
    try {
      const State y1 = y + h0 * k1;
      const State f1 = rhs(t + h0, y1);
      const double d2 = (f1 - k1).cwiseQuotient(sc).cwiseAbs().maxCoeff() / h0;
      const double dm = std::max(dd1, d2);
      h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
    } catch (const Error&) {
      h1 = h0 * 1e-3;
    }
    h = std::min(100.0 * h0, h1);
  }
  h = std::min(h, config.max_step);

  double fac_max = 5.0;
  std::size_t steps = 0;
  // Ratio |y| / |y|' at the previous accepted step, for escape extrapolation.
  double prev_phi = std::numeric_limits<double>::quiet_NaN();
  double prev_t = t;

  const auto escape_estimate = [&](double t_now, const State& y_now, const State& f_now) {
    Eigen::Index i = 0;
    y_now.cwiseAbs().maxCoeff(&i);
    const double dn = std::copysign(1.0, y_now(i)) * f_now(i);
    const double phi = std::abs(y_now(i)) / dn;
    if (!std::isfinite(prev_phi) || !(dn > 0.0)) return t_now;
    const double power = -(t_now - prev_t) / (phi - prev_phi);
    const double est = t_now + power * phi;
    return (std::isfinite(est) && power > 0.0 && est >= t_now) ? est : t_now;
  };

  const auto blow_up = [&](EventKind kind, const std::string& detail, const State& f_now) {
    Access::termination(traj) = Termination::BlowUp;
    Access::events(traj).push_back({t, kind, escape_estimate(t, y, f_now), detail});
  };

  while (t < config.t_end) {
    if (++steps > config.max_steps) throw Error(Errc::StepBudgetExceeded, "integration step budget exhausted");
    const double remaining = config.t_end - t;
    bool last = false;
    if (h >= remaining) {
      h = remaining;
      last = true;
    }

    State y_new, k2, k3, k4, k5, k6, k7;
    double err = std::numeric_limits<double>::infinity();
    try {
      k2 = rhs(t + c2 * h, (y + h * a21 * k1).eval());
      k3 = rhs(t + c3 * h, (y + h * (a31 * k1 + a32 * k2)).eval());
      k4 = rhs(t + c4 * h, (y + h * (a41 * k1 + a42 * k2 + a43 * k3)).eval());
      k5 = rhs(t + c5 * h, (y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4)).eval());
      k6 = rhs(t + h, (y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5)).eval());
      y_new = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
      k7 = rhs(t + h, y_new);
      const State e = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
      err = e.cwiseQuotient(scale(y, y_new)).cwiseAbs().maxCoeff();
    } catch (const Error&) {
      err = std::numeric_limits<double>::infinity();
    }

    if (!(err <= 1.0)) {
      const double shrink = std::isfinite(err) ? std::max(0.2, 0.9 * std::pow(err, -0.2)) : 0.25;
      h *= shrink;
      fac_max = 1.0;
      if (h < config.min_step) {
        blow_up(EventKind::StepUnderflow, "step size fell below min_step", k1);
        return traj;
      }
      continue;
    }

    const double t_new = last ? config.t_end : t + h;
    if (auto bad = guard(t_new, y_new)) {
      Access::termination(traj) = Termination::InvariantViolation;
      Access::events(traj).push_back({t_new, EventKind::InvariantViolation, t_new, *bad});
      return traj;
    }

    std::array<State, 5> dense;
    dense[0] = y;
    dense[1] = y_new - y;
    dense[2] = h * k1 - dense[1];
    dense[3] = dense[1] - h * k7 - dense[2];
    dense[4] = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);

    {
      Eigen::Index i = 0;
      y.cwiseAbs().maxCoeff(&i);
      const double dn = std::copysign(1.0, y(i)) * k1(i);
      prev_phi = dn > 0.0 ? std::abs(y(i)) / dn : std::numeric_limits<double>::quiet_NaN();
      prev_t = t;
    }

    t = t_new;
    y = y_new;
    k1 = k7;
    Access::times(traj).push_back(t);
    Access::states(traj).push_back(y);
    Access::dense(traj).push_back(dense);

    if (y.cwiseAbs().maxCoeff() > config.blowup_norm_threshold) {
      blow_up(EventKind::NormEscape, "state norm exceeded threshold", k1);
      return traj;
    }

    const double fac = std::min(fac_max, std::max(0.2, 0.9 * std::pow(std::max(err, 1e-12), -0.2)));
    h = std::min(h * fac, config.max_step);
    fac_max = 5.0;
  }
  Access::termination(traj) = Termination::ReachedHorizon;
  return traj;
}

}  // namespace affine
