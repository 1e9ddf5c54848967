#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "affine/asymptotics.hpp"
#include "affine/interiorcheck.hpp"

using namespace affine;

namespace {

Trajectory<3> scalar_run(const ModelParams& p, const ScalarInvariants& inv, const ScalarMomentState<>& s0,
                         double t_end) {
  IntegrationConfig cfg;
  cfg.rtol = 1e-11;
  cfg.atol = 1e-30;
  cfg.t_end = t_end;
  return integrate<3>(
      [&](double, const Eigen::Vector3d& y) { return scalar_rhs(p, inv, ScalarMomentState<>::from_vector(y)); },
      s0.to_vector(), 0.0, cfg);
}

bool contains(const std::vector<Condition>& v, Condition c) { return std::find(v.begin(), v.end(), c) != v.end(); }

}  // namespace

TEST(QFunctions, ExpandingSolutionWithSerreGauge) {
  const ModelParams p{2.0, 0.0, 0.0};
  const GaugeChoice g = gauge_preset(p, GaugeKind::Serre);
  EXPECT_DOUBLE_EQ(g.q, 0.5);
  const VelocityPath path = expanding_path(1e6);
  for (double t : {0.0, 0.37, 5.0, 1e3, 1e6}) {
    const QFunctions q = q_functions(g, path, p, t);
    EXPECT_LE(std::abs(q.q1), 1e-12) << t;
    EXPECT_NEAR(q.r, 1.0, 1e-12) << t;
    EXPECT_LE(std::abs(q.dln_r), 1e-12 / (1.0 + t)) << t;
    EXPECT_LE(q.q2.cwiseAbs().maxCoeff(), 1e-12 * (1.0 + t)) << t;
    EXPECT_NEAR(q.b.determinant(), 1.0, 1e-12);
  }
}

TEST(QFunctions, DifferenceFallbackAgreesWithAnalytic) {
  const ModelParams p{2.0, 0.0, 0.0};
  const GaugeChoice g = gauge_preset(p, GaugeKind::PowerDecay, 0.5);
  GaugeChoice g_fd = g;
  g_fd.dln_lambda = nullptr;
  VelocityPath path = expanding_path(100.0);
  VelocityPath path_fd = path;
  path_fd.da = nullptr;
  for (double t : {0.0, 0.5, 10.0, 80.0}) {
    const QFunctions a = q_functions(g, path, p, t);
    const QFunctions b = q_functions(g_fd, path_fd, p, t);
    EXPECT_NEAR(a.q1, b.q1, 1e-8 * (1.0 + std::abs(a.q1)));
    EXPECT_NEAR(a.dln_r, b.dln_r, 1e-9);
    EXPECT_LE((a.q2 - b.q2).norm(), 1e-8 * (1.0 + a.q2.norm()));
  }
}

TEST(QFunctions, SingularA) {
  const ModelParams p{2.0, 0.0, 0.0};
  VelocityPath path;
  path.a = [](double t) {
    Eigen::Matrix2d m;
    m << 1.0, 0.0, 0.0, 1.0 - t;
    return m;
  };
  path.t_end = 10.0;
  const GaugeChoice g = gauge_preset(p, GaugeKind::Serre);
  EXPECT_NO_THROW(q_functions(g, path, p, 0.5));
  try {
    q_functions(g, path, p, 2.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::SingularA);
  }
  const InteriorReport rep = boundedness_scan(g, path, p, 10.0);
  EXPECT_FALSE(rep.xi_positive);
  EXPECT_EQ(rep.verdict, Verdict::ConditionFailed);
  EXPECT_TRUE(contains(rep.failed, Condition::XiPositive));
}

TEST(GaugePreset, Parameters) {
  const ModelParams p{2.0, 1.0, 0.0};
  const GaugeChoice power = gauge_preset(p, GaugeKind::PowerDecay, 1.0);
  const GaugeChoice serre = gauge_preset(p, GaugeKind::Serre);
  for (double t : {0.0, 1.0, 50.0}) EXPECT_DOUBLE_EQ(power.ln_lambda(t), serre.ln_lambda(t));
  EXPECT_DOUBLE_EQ(power.q, 0.75);
  EXPECT_NEAR(gauge_preset(p, GaugeKind::PowerDecay, 0.1).q, 1.5 - 1.5 / 1.1, 1e-15);

  const GaugeChoice fr = gauge_preset(p, GaugeKind::FrictionDecay, 0.25);
  EXPECT_DOUBLE_EQ(fr.q, 1.5);
  for (double t : {0.0, 2.0, 30.0}) EXPECT_NEAR(fr.ln_lambda(t), -1.25 * std::log1p(t) - t, 1e-13);
  EXPECT_DOUBLE_EQ(gauge_preset(ModelParams{1.4, 0.0, 0.0}, GaugeKind::Serre).q, 0.2);
}

TEST(GaugePreset, BadDelta) {
  const ModelParams p{2.0, 1.0, 0.0};
  for (double d : {0.0, -0.5}) {
    try {
      gauge_preset(p, GaugeKind::PowerDecay, d);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::BadDelta);
    }
  }
  EXPECT_THROW(gauge_preset(p, GaugeKind::FrictionDecay, -1.0), Error);
}

TEST(GaugePreset, ExactAntisymmetry) {
  const ModelParams p{1.4, 0.6, 0.9};
  const auto inv = scalar_invariants(p, {1.0, 0.1, 0.2}, 1.0);
  const auto traj = scalar_run(p, inv, {1.0, 0.1, 0.2}, 50.0);
  const VelocityPath path = scalar_path(p, inv, traj);
  for (const GaugeChoice& g : {gauge_preset(p, GaugeKind::Serre), gauge_preset(p, GaugeKind::PowerDecay, 0.7),
                               gauge_preset(p, GaugeKind::FrictionDecay, 0.3), adapted_gauge(p, path)}) {
    for (double t : {0.0, 0.3, 7.0, 49.0}) {
      const Eigen::Matrix2d u = g.u_phi(t);
      EXPECT_EQ(u + u.transpose(), Eigen::Matrix2d::Zero());
    }
  }
}

TEST(QFunctions, UnimodularB) {
  const ModelParams p{2.0, 0.0, 0.0};
  const MatrixMomentState<> m0 = matrix_state(p, 0.3, 0.2, -0.1, 0.5, 1.0, 0.6, 0.2);
  const double k1 = matrix_k1(p, 1.0, delta_of(p, m0));
  IntegrationConfig cfg;
  cfg.t_end = 100.0;
  const auto traj = integrate<7>(
      [&](double, const Eigen::Matrix<double, 7, 1>& y) {
        return matrix_rhs(p, k1, MatrixMomentState<>::from_vector(y));
      },
      m0.to_vector(), 0.0, cfg);
  const VelocityPath path = matrix_path(p, k1, traj);
  const GaugeChoice g = gauge_preset(p, GaugeKind::PowerDecay, 1.0);
  for (double t : {0.0, 1.0, 10.0, 100.0}) {
    EXPECT_NEAR(q_functions(g, path, p, t).b.determinant(), 1.0, 1e-10);
  }
}

TEST(ConditionIntegrals, SerreValues) {
  const ModelParams p{2.0, 0.0, 0.0};
  const ConditionIntegrals ci = condition_integrals(gauge_preset(p, GaugeKind::Serre), expanding_path(1e7), 1e7);
  EXPECT_EQ(ci.lambda.status, IntegralStatus::Converged);
  EXPECT_EQ(ci.weighted.status, IntegralStatus::Converged);
  EXPECT_NEAR(ci.lambda.total, 1.0, 1e-8);
  EXPECT_NEAR(ci.weighted.total, 1.0, 1e-8);
  EXPECT_NEAR(ci.lambda.decay_exponent, -2.0, 1e-6);
}

TEST(ConditionIntegrals, HarmonicGaugeDiverges) {
  const ModelParams p{2.0, 0.0, 0.0};
  GaugeChoice g = gauge_preset(p, GaugeKind::Serre);
  g.ln_lambda = [](double t) { return -std::log1p(t); };
  g.dln_lambda = nullptr;
  const ConditionIntegrals ci = condition_integrals(g, expanding_path(1e6), 1e6);
  EXPECT_EQ(ci.lambda.status, IntegralStatus::DivergenceSuspected);
}

TEST(ConditionIntegrals, ShortHorizonIsNotConverged) {
  const ModelParams p{2.0, 0.0, 0.0};
  const ConditionIntegrals ci = condition_integrals(gauge_preset(p, GaugeKind::Serre), expanding_path(1e3), 1e3);
  EXPECT_EQ(ci.lambda.status, IntegralStatus::NotConverged);
  EXPECT_NEAR(ci.lambda.total, 1.0, 1e-5);
}

TEST(BoundednessScan, SerreCertified) {
  const ModelParams p{2.0, 0.0, 0.0};
  const InteriorReport rep = boundedness_scan(gauge_preset(p, GaugeKind::Serre), expanding_path(1e7), p, 1e7);
  EXPECT_EQ(rep.verdict, Verdict::CertifiedInterior);
  EXPECT_TRUE(rep.xi_positive);
  EXPECT_EQ(rep.sup_q1r, 0.0);
  EXPECT_EQ(rep.sup_dln_r, 0.0);
  EXPECT_TRUE(std::isfinite(rep.sup_balance));
  EXPECT_TRUE(rep.failed.empty());
}

TEST(BoundednessScan, ConstantGaugeFailsLambdaIntegral) {
  const ModelParams p{2.0, 0.0, 0.0};
  GaugeChoice g = gauge_preset(p, GaugeKind::Serre);
  g.ln_lambda = [](double) { return 0.0; };
  g.dln_lambda = [](double) { return 0.0; };
  const InteriorReport rep = boundedness_scan(g, expanding_path(1e6), p, 1e6);
  EXPECT_EQ(rep.verdict, Verdict::ConditionFailed);
  EXPECT_TRUE(contains(rep.failed, Condition::LambdaIntegral));
}

TEST(BoundednessScan, TooFewNodes) {
  const ModelParams p{2.0, 0.0, 0.0};
  EXPECT_THROW(boundedness_scan(gauge_preset(p, GaugeKind::Serre), expanding_path(10.0), p, 10.0, 199), Error);
}

TEST(BoundednessScan, ScaleInvariantIntegralVerdicts) {
  const ModelParams p{2.0, 0.0, 0.0};
  for (const GaugeChoice& base : {gauge_preset(p, GaugeKind::Serre), gauge_preset(p, GaugeKind::PowerDecay, 0.3)}) {
    const ConditionIntegrals ref = condition_integrals(base, expanding_path(1e7), 1e7);
    for (double c : {0.2, 3.0}) {
      const ConditionIntegrals s = condition_integrals(scaled_gauge(base, c), expanding_path(1e7), 1e7);
      EXPECT_EQ(s.lambda.status, ref.lambda.status);
      EXPECT_EQ(s.weighted.status, ref.weighted.status);
      EXPECT_NEAR(s.lambda.total, c * ref.lambda.total, 1e-9 * c * ref.lambda.total);
    }
  }
}

TEST(BoundednessScan, FrictionlessTrajectoryWithPowerGauge) {
  const ModelParams p{2.0, 0.0, 0.0};
  const ScalarMomentState<> s0{1.0, 0.0, 0.3};
  const auto inv = scalar_invariants(p, s0, 1.0);
  const auto traj = scalar_run(p, inv, s0, 1e7);
  const InteriorReport rep =
      boundedness_scan(gauge_preset(p, GaugeKind::PowerDecay, 1.0), scalar_path(p, inv, traj), p, 1e7);
  EXPECT_EQ(rep.verdict, Verdict::CertifiedInterior);
}

TEST(BoundednessScan, FrictionTrajectoryWithAdaptedGauge) {
  for (const ModelParams p : {ModelParams{2.0, 1.0, 0.0}, ModelParams{2.0, 1.0, 1.0}, ModelParams{1.4, 0.5, 0.0}}) {
    const ScalarMomentState<> s0{1.0, 0.2, 0.3};
    const auto inv = scalar_invariants(p, s0, 1.0);
    const double horizon = 200.0 / p.mu;
    const auto traj = scalar_run(p, inv, s0, 1e4);
    const VelocityPath path = scalar_path(p, inv, traj);
    const GaugeChoice g = adapted_gauge(p, path);
    const InteriorReport rep = boundedness_scan(g, path, p, horizon);
    EXPECT_EQ(rep.verdict, Verdict::CertifiedInterior) << p.mu << " " << p.l;
    EXPECT_EQ(rep.sup_balance, 0.0);

    // lambda e^(mu t) decays like t^-(1 + 1/(2 gamma)).
    const auto grid = log_grid(1e3, 1e4, 40);
    std::vector<double> v;
    for (double t : grid) v.push_back(std::exp(g.ln_lambda(t) + p.mu * t));
    EXPECT_NEAR(fit_power_law(grid, v, grid.front(), grid.back()).exponent, -(1.0 + 0.5 / p.gamma), 0.02);
  }
}

TEST(BoundednessScan, ClosedFormFrictionGaugeAmplifiesSubleadingTerms) {
  const ModelParams p{2.0, 1.0, 0.0};
  const ScalarMomentState<> s0{1.0, 0.2, 0.3};
  const auto inv = scalar_invariants(p, s0, 1.0);
  const auto traj = scalar_run(p, inv, s0, 200.0);
  const InteriorReport rep =
      boundedness_scan(gauge_preset(p, GaugeKind::FrictionDecay, 0.25), scalar_path(p, inv, traj), p, 200.0);
  EXPECT_EQ(rep.integrals.lambda.status, IntegralStatus::Converged);
  EXPECT_TRUE(contains(rep.failed, Condition::Balance));
}
