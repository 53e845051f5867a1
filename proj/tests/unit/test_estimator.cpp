#include <doctest.h>

#include <cmath>

#include "nssaddle/estimator.hpp"

using namespace nssaddle;

namespace {

SequenceSpec plain_spec(int T, int d, double mu, double c, double sigma) {
  SequenceSpec s;
  s.horizon = T;
  s.d_x = s.d_y = d;
  s.mu_x = s.mu_y = mu;
  s.coupling = c * Mat::Identity(d, d);
  s.sigma = sigma;
  s.set_x = FeasibleSet::unconstrained(d);
  s.set_y = FeasibleSet::unconstrained(d);
  return s;
}

}  // namespace

TEST_CASE("zeroth-order estimate of a constant function vanishes exactly") {
  // curvature 0, coupling 0: F is constant, finite differences vanish
  QuadraticSaddleInstance flat(Vec::Zero(1), Vec::Zero(1), 0.0, 0.0, Mat::Zero(1, 1), 0.0,
                               FeasibleSet::unconstrained(1), FeasibleSet::unconstrained(1));
  GradEstimate g = zog(flat, PointPair(Vec::Constant(1, 0.3), Vec::Constant(1, -0.2)), 8, 8,
                       1e-3, 1e-3, Rng(5));
  CHECK(g.g_x[0] == 0.0);
  CHECK(g.g_y[0] == 0.0);
  // with shared oracle noise the additive value noise cancels even when
  // sigma > 0
  QuadraticSaddleInstance noisy(Vec::Zero(1), Vec::Zero(1), 0.0, 0.0, Mat::Zero(1, 1), 1.0,
                                FeasibleSet::unconstrained(1), FeasibleSet::unconstrained(1));
  GradEstimate gn = zog(noisy, PointPair(Vec::Zero(1), Vec::Zero(1)), 4, 4, 1e-3, 1e-3, Rng(6));
  CHECK(gn.g_x[0] == 0.0);
  CHECK(gn.samples_consumed == 2 * (4 + 4));
}

TEST_CASE("first-order dynamic estimate equals the exact gradient when noiseless") {
  ProblemSequence seq(plain_spec(4, 2, 1.0, 0.5, 0.0));
  const PointPair z(Vec::Constant(2, 0.7), Vec::Constant(2, -0.4));
  EstimatorConfig cfg;
  cfg.mode = Mode::kDynamic;
  cfg.order = Order::kFirst;
  cfg.m_x = cfg.m_y = 3;
  GradEstimate g = gradest(seq, 2, z, cfg, Rng(9));
  Vec gx(2), gy(2);
  seq.instance(2).grad_noiseless(z, gx, gy);
  CHECK((g.g_x - gx).norm() == 0.0);
  CHECK((g.g_y - gy).norm() == 0.0);
  CHECK(g.samples_consumed == 3);
}

TEST_CASE("zeroth-order estimator is unbiased for the quadratic gradient") {
  // smoothed gradient of a quadratic equals the gradient; Monte Carlo mean
  // of single-sample estimates within 4 standard errors per coordinate
  QuadraticSaddleInstance inst(Vec::Zero(1), Vec::Zero(1), 1.0, 1.0, Mat::Zero(1, 1), 0.0,
                               FeasibleSet::unconstrained(1), FeasibleSet::unconstrained(1));
  const PointPair z(Vec::Constant(1, 1.0), Vec::Constant(1, 0.5));
  const int n = 100000;
  const Rng rng(77);
  double sum = 0, sq = 0;
  for (int i = 0; i < n; ++i) {
    GradEstimate g = zog(inst, z, 1, 1, 1e-3, 1e-3, rng.fork(static_cast<std::uint64_t>(i)));
    sum += g.g_x[0];
    sq += g.g_x[0] * g.g_x[0];
  }
  const double mean = sum / n;
  const double sd = std::sqrt(sq / n - mean * mean);
  CHECK(std::abs(mean - 1.0) < 4.0 * sd / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("sample accounting matches the oracle-call formulas") {
  ProblemSequence seq(plain_spec(8, 2, 1.0, 0.2, 0.3));
  const PointPair z(Vec::Zero(2), Vec::Zero(2));
  const Rng rng(3);
  for (int t : {1, 3, 8}) {
    for (int m_x : {1, 5}) {
      for (int m_y : {2, 7}) {
        EstimatorConfig cfg;
        cfg.order = Order::kZeroth;
        cfg.nu_x = cfg.nu_y = 1e-3;
        cfg.m_x = m_x;
        cfg.m_y = m_y;
        cfg.mode = Mode::kStatic;
        CHECK(gradest(seq, t, z, cfg, rng).samples_consumed == 2LL * t * (m_x + m_y));
        cfg.mode = Mode::kDynamic;
        CHECK(gradest(seq, t, z, cfg, rng).samples_consumed == 2LL * (m_x + m_y));
      }
      EstimatorConfig cfg;
      cfg.order = Order::kFirst;
      cfg.m_x = cfg.m_y = m_x;
      cfg.mode = Mode::kStatic;
      CHECK(gradest(seq, t, z, cfg, rng).samples_consumed == static_cast<std::int64_t>(t) * m_x);
      cfg.mode = Mode::kDynamic;
      CHECK(gradest(seq, t, z, cfg, rng).samples_consumed == m_x);
    }
  }
}

TEST_CASE("identical seed and config give bitwise-identical estimates") {
  ProblemSequence seq(plain_spec(6, 3, 0.8, 0.4, 0.7));
  const PointPair z(Vec::Constant(3, 0.2), Vec::Constant(3, -0.6));
  EstimatorConfig cfg;
  cfg.mode = Mode::kStatic;
  cfg.order = Order::kZeroth;
  cfg.m_x = 4;
  cfg.m_y = 3;
  cfg.nu_x = cfg.nu_y = 1e-2;
  GradEstimate g1 = gradest(seq, 5, z, cfg, Rng(999));
  GradEstimate g2 = gradest(seq, 5, z, cfg, Rng(999));
  CHECK(g1.g_x == g2.g_x);
  CHECK(g1.g_y == g2.g_y);
}

TEST_CASE("static first-order estimate equals the analytic smoothed gradient") {
  SequenceSpec s = plain_spec(16, 2, 1.0, 0.3, 0.0);
  s.drift.kind = DriftKind::kSinusoidal;
  s.drift.amplitude = 0.5;
  s.drift.period = 5;
  ProblemSequence seq(s);
  const PointPair z(Vec::Constant(2, 0.4), Vec::Constant(2, 0.1));
  const int t = 11;
  EstimatorConfig cfg;
  cfg.mode = Mode::kStatic;
  cfg.order = Order::kFirst;
  cfg.m_x = cfg.m_y = 2;
  GradEstimate g = gradest(seq, t, z, cfg, Rng(4));
  Vec ax = Vec::Zero(2), ay = Vec::Zero(2), gx(2), gy(2);
  for (int i = 1; i <= t; ++i) {
    seq.instance(i).grad_noiseless(z, gx, gy);
    ax += gx;
    ay += gy;
  }
  CHECK((g.g_x - ax / t).norm() <= 1e-12);
  CHECK((g.g_y - ay / t).norm() <= 1e-12);
}

TEST_CASE("estimator rejects bad configs") {
  ProblemSequence seq(plain_spec(4, 1, 1.0, 0.0, 0.0));
  const PointPair z(Vec::Zero(1), Vec::Zero(1));
  EstimatorConfig cfg;
  cfg.order = Order::kZeroth;
  cfg.nu_x = 0;  // invalid
  cfg.nu_y = 1e-3;
  CHECK_THROWS_AS(gradest(seq, 1, z, cfg, Rng(1)), Error);
  cfg.nu_x = 1e-3;
  CHECK_THROWS_AS(gradest(seq, 0, z, cfg, Rng(1)), Error);  // t = 0
  CHECK_NOTHROW(gradest(seq, 1, z, cfg, Rng(1)));
}

TEST_CASE("estimator mse obeys the error bound and scales like 1/m") {
  QuadraticSaddleInstance inst(Vec::Zero(2), Vec::Zero(2), 0.05, 0.05, Mat::Zero(2, 2), 0.0,
                               FeasibleSet::unconstrained(2), FeasibleSet::unconstrained(2));
  // linear-dominant region: far from the saddle the gradient is nearly
  // constant at this curvature
  const PointPair z(Vec::Constant(2, 4.0), Vec::Constant(2, -4.0));
  EstimatorConfig cfg;
  cfg.order = Order::kZeroth;
  cfg.m_x = cfg.m_y = 1;
  cfg.nu_x = cfg.nu_y = 1e-8;
  EstimatorMoments m1 = estimator_mse(inst, z, cfg, 10000, Rng(21));
  CHECK(m1.mse_x <= m1.bound_x);
  CHECK(m1.mse_y <= m1.bound_y);

  cfg.m_x = cfg.m_y = 2;
  EstimatorMoments m2 = estimator_mse(inst, z, cfg, 10000, Rng(22));
  const double ratio = m1.mse_x / m2.mse_x;
  CHECK(ratio > 2.0 * 0.8);
  CHECK(ratio < 2.0 * 1.2);

  // constant function: zero error against a zero gradient
  QuadraticSaddleInstance flat(Vec::Zero(1), Vec::Zero(1), 0.0, 0.0, Mat::Zero(1, 1), 0.0,
                               FeasibleSet::unconstrained(1), FeasibleSet::unconstrained(1));
  EstimatorConfig fc;
  fc.order = Order::kZeroth;
  fc.nu_x = fc.nu_y = 1e-3;
  EstimatorMoments mf = estimator_mse(flat, PointPair(Vec::Zero(1), Vec::Zero(1)), fc, 100,
                                      Rng(23));
  CHECK(mf.mse_x == 0.0);
}

TEST_CASE("estimator second moment shrinks like 1/m near the saddle") {
  QuadraticSaddleInstance inst(Vec::Zero(1), Vec::Zero(1), 1.0, 1.0, Mat::Zero(1, 1), 0.0,
                               FeasibleSet::unconstrained(1), FeasibleSet::unconstrained(1));
  const PointPair z(Vec::Zero(1), Vec::Zero(1));  // exactly at the saddle
  EstimatorConfig cfg;
  cfg.order = Order::kZeroth;
  cfg.nu_x = cfg.nu_y = 1e-2;
  cfg.m_x = cfg.m_y = 1;
  EstimatorMoments n1 = estimator_norm2(inst, z, cfg, 10000, Rng(31));
  CHECK(n1.mse_x <= n1.bound_x);  // second-moment bound holds near the saddle
  cfg.m_x = cfg.m_y = 100;
  EstimatorMoments n100 = estimator_norm2(inst, z, cfg, 10000, Rng(32));
  const double ratio = n1.mse_x / n100.mse_x;
  CHECK(ratio > 40.0);
  CHECK(ratio < 260.0);

  QuadraticSaddleInstance flat(Vec::Zero(1), Vec::Zero(1), 0.0, 0.0, Mat::Zero(1, 1), 0.0,
                               FeasibleSet::unconstrained(1), FeasibleSet::unconstrained(1));
  EstimatorMoments nf = estimator_norm2(flat, z, cfg, 100, Rng(33));
  CHECK(nf.mse_x == 0.0);
}

TEST_CASE("independent-noise ablation inflates the two-point variance") {
  QuadraticSaddleInstance inst(Vec::Zero(1), Vec::Zero(1), 1.0, 1.0, Mat::Zero(1, 1), 0.5,
                               FeasibleSet::unconstrained(1), FeasibleSet::unconstrained(1));
  const PointPair z(Vec::Constant(1, 0.5), Vec::Constant(1, 0.2));
  const int n = 2000;
  const Rng rng(55);
  double var_shared = 0, var_indep = 0;
  for (int i = 0; i < n; ++i) {
    const Rng ri = rng.fork(static_cast<std::uint64_t>(i));
    GradEstimate gs = zog(inst, z, 1, 1, 1e-2, 1e-2, ri, /*independent_noise=*/false);
    GradEstimate gi = zog(inst, z, 1, 1, 1e-2, 1e-2, ri, /*independent_noise=*/true);
    var_shared += gs.g_x[0] * gs.g_x[0];
    var_indep += gi.g_x[0] * gi.g_x[0];
  }
  CHECK(var_indep > 10.0 * var_shared);
}
