#include <doctest.h>

#include <cmath>

#include "nssaddle/estimator.hpp"
#include "nssaddle/regret.hpp"
#include "nssaddle/solvers_eg.hpp"

using namespace nssaddle;

namespace {

SequenceSpec unconstrained_spec(int T, int d, double mu_x, double mu_y, double c, double sigma) {
  SequenceSpec s;
  s.horizon = T;
  s.d_x = s.d_y = d;
  s.mu_x = mu_x;
  s.mu_y = mu_y;
  s.coupling = c * Mat::Identity(d, d);
  s.sigma = sigma;
  s.set_x = FeasibleSet::unconstrained(d);
  s.set_y = FeasibleSet::unconstrained(d);
  return s;
}

EGSchedule fixed_eta(double eta, Order order = Order::kFirst, int m = 1) {
  StepParams p;
  p.eta = eta;
  p.m_x = p.m_y = m;
  p.nu_x = p.nu_y = 1e-4;
  return EGSchedule::custom(Mode::kDynamic, order, [p](int, const ProblemSequence&) { return p; });
}

}  // namespace

TEST_CASE("the saddle is a fixed point of the noiseless EG step") {
  ProblemSequence seq(unconstrained_spec(2, 2, 1.1, 0.9, 0.5, 0.0));
  const PointPair star = seq.saddle(1);
  EgStepResult step = eg_step(seq, 1, star, fixed_eta(0.2), Rng(1));
  CHECK(std::sqrt(step.z_half.squared_distance(star)) <= 1e-12);
  CHECK(std::sqrt(step.z_next.squared_distance(star)) <= 1e-12);
}

TEST_CASE("EG on the 1-d bilinear toy reproduces the hand arithmetic") {
  // f = x y with a vanishing curvature for admissibility
  ProblemSequence seq(unconstrained_spec(1, 1, 1e-12, 1e-12, 1.0, 0.0));
  const PointPair z(Vec::Constant(1, 1.0), Vec::Constant(1, 1.0));
  EgStepResult step = eg_step(seq, 1, z, fixed_eta(0.1), Rng(1));
  CHECK(step.z_half.x[0] == doctest::Approx(0.9).epsilon(1e-10));
  CHECK(step.z_half.y[0] == doctest::Approx(1.1).epsilon(1e-10));
  CHECK(step.z_next.x[0] == doctest::Approx(0.89).epsilon(1e-10));
  CHECK(step.z_next.y[0] == doctest::Approx(1.09).epsilon(1e-10));

  // straight-line re-implementation of the two-step recursion
  auto grad = [&](double x, double y) { return std::pair<double, double>{y, x}; };
  auto [gx, gy] = grad(1.0, 1.0);
  const double xh = 1.0 - 0.1 * gx, yh = 1.0 + 0.1 * gy;
  auto [hx, hy] = grad(xh, yh);
  CHECK(step.z_next.x[0] == doctest::Approx(1.0 - 0.1 * hx).epsilon(1e-10));
  CHECK(step.z_next.y[0] == doctest::Approx(1.0 + 0.1 * hy).epsilon(1e-10));
}

TEST_CASE("one noiseless EG step contracts toward the saddle") {
  ProblemSequence seq(unconstrained_spec(1, 2, 1.0, 1.0, 0.4, 0.0));
  const PointPair star = seq.saddle(1);
  const double eta = 1.0 / (4.0 * seq.constants().L_g);
  const Rng rng(2);
  for (int i = 0; i < 20; ++i) {
    PointPair z(star.x + Vec::Constant(2, 1.0 + rng.normal(2 * static_cast<std::uint64_t>(i))),
                star.y + Vec::Constant(2, -1.0 + rng.normal(2 * static_cast<std::uint64_t>(i) + 1)));
    EgStepResult step = eg_step(seq, 1, z, fixed_eta(eta), Rng(3));
    CHECK(step.z_next.squared_distance(star) < z.squared_distance(star));
  }
}

TEST_CASE("EG refuses constrained sequences") {
  SequenceSpec s = unconstrained_spec(2, 1, 1, 1, 0, 0);
  s.set_x = FeasibleSet::box(Vec::Constant(1, -1.0), Vec::Constant(1, 1.0));
  s.set_y = FeasibleSet::box(Vec::Constant(1, -1.0), Vec::Constant(1, 1.0));
  ProblemSequence seq(s);
  CHECK_THROWS_WITH_AS(eg_step(seq, 1, PointPair(Vec::Zero(1), Vec::Zero(1)), fixed_eta(0.1),
                               Rng(1)),
                       doctest::Contains("eg-requires-unconstrained"), Error);
}

TEST_CASE("run_eg produces a full trajectory with exact oracle accounting") {
  ProblemSequence seq(unconstrained_spec(50, 2, 1.0, 1.0, 0.5, 0.5));
  EGSchedule sched = EGSchedule::static_th2b_light();
  Trajectory traj = run_eg(seq, sched, PointPair(Vec::Zero(2), Vec::Zero(2)), Rng(10));
  CHECK(static_cast<int>(traj.rows.size()) == 50);
  std::int64_t expect = 0;
  for (int t = 1; t <= 50; ++t) {
    const StepParams p = sched.at(t, seq);
    expect += 2LL * t * p.m_x;  // two static first-order estimates per round
  }
  CHECK(traj.total_consumed == expect);
  std::int64_t cum = 0;
  for (const auto& row : traj.rows) {
    cum += row.consumed;
    CHECK(row.cumulative_consumed == cum);
  }

  // static sequence with noiseless first order converges near the saddle
  ProblemSequence quiet(unconstrained_spec(2000, 2, 1.0, 1.0, 0.5, 0.0));
  Trajectory tq = run_eg(quiet, sched, PointPair(Vec::Constant(2, 2.0), Vec::Constant(2, -2.0)),
                         Rng(11));
  CHECK(std::sqrt(tq.z_final.squared_distance(quiet.saddle(1))) < 1e-3);
}

TEST_CASE("trajectory of a single round is one eg_step") {
  ProblemSequence seq(unconstrained_spec(1, 1, 1.0, 1.0, 0.0, 0.0));
  Trajectory traj =
      run_eg(seq, fixed_eta(0.1), PointPair(Vec::Constant(1, 1.0), Vec::Constant(1, 1.0)), Rng(4));
  CHECK(traj.rows.size() == 1);
  EgStepResult step = eg_step(seq, 1, traj.rows[0].z, fixed_eta(0.1), Rng(4));
  CHECK(traj.z_final.x[0] == step.z_next.x[0]);
}

TEST_CASE("schedules materialize the stated parameter formulas") {
  SequenceSpec s = unconstrained_spec(256, 2, 2.0, 2.0, 0.3, 0.1);
  s.drift.kind = DriftKind::kSinusoidal;
  s.drift.amplitude = 1.0;
  s.drift.period = 16;
  s.v_budget = 4.0;
  ProblemSequence seq(s);
  const double T = 256, mu = 2.0, d = 2;

  StepParams a = EGSchedule::static_th2a_light().at(7, seq);
  const double eta_a = 4.0 * std::pow(T, -0.25) / mu;
  CHECK(a.eta == doctest::Approx(eta_a).epsilon(1e-14));
  CHECK(a.m_x == static_cast<int>(std::ceil((d + 5) / (eta_a * eta_a) - 1e-12)));
  CHECK(a.nu_x == doctest::Approx(eta_a * eta_a * std::pow(d + 3.0, -1.5)).epsilon(1e-14));

  StepParams h = EGSchedule::static_th2a_heavy().at(7, seq);
  CHECK(h.m_x == static_cast<int>(std::ceil((d + 5) / std::pow(eta_a, 4) - 1e-12)));
  CHECK(h.nu_x == doctest::Approx(std::pow(eta_a, 4) * std::pow(d + 3.0, -1.5)).epsilon(1e-14));

  StepParams b = EGSchedule::static_th2b_light().at(3, seq);
  CHECK(b.m_x == static_cast<int>(std::ceil(1.0 / (eta_a * eta_a) - 1e-12)));

  StepParams dl = EGSchedule::dynamic_th4_light(Order::kZeroth, 0.25, 0.25).at(3, seq);
  const double eta_d = 4.0 * std::pow(T, -0.25) * std::pow(4.0, 0.25) / mu;
  CHECK(dl.eta == doctest::Approx(eta_d).epsilon(1e-12));
  CHECK(dl.m_x == static_cast<int>(std::ceil((d + 5) / (eta_d * eta_d) - 1e-12)));

  GdaSchedule g6 = GdaSchedule::theorem6(Order::kZeroth);
  StepParams g = g6.at(seq);
  CHECK(g.eta == doctest::Approx(std::pow(4.0, 0.25)).epsilon(1e-14));
  CHECK(g.m_x == static_cast<int>((d + 6) * T));
  CHECK(g.nu_x == doctest::Approx(1.0 / (std::pow(d + 6.0, 1.5) * std::sqrt(T))).epsilon(1e-14));
}

TEST_CASE("GDA projects onto the box exactly as the clamp rule") {
  SequenceSpec s = unconstrained_spec(4, 1, 1.0, 1.0, 0.0, 0.0);
  s.set_x = FeasibleSet::box(Vec::Constant(1, -1.0), Vec::Constant(1, 1.0));
  s.set_y = FeasibleSet::box(Vec::Constant(1, -1.0), Vec::Constant(1, 1.0));
  ProblemSequence seq(s);
  // craft the gradient by centering: at z = (0.9, 0), grad_x = mu (x - a);
  // with a = -4.1, grad_x = 5, eta = 0.1 clamps to 0.4
  SequenceSpec s2 = s;
  s2.a0 = Vec::Constant(1, -4.1);
  ProblemSequence seq2(s2);
  EstimatorConfig cfg;
  cfg.order = Order::kFirst;
  GdaStepResult r =
      gda_step(seq2, 1, PointPair(Vec::Constant(1, 0.9), Vec::Zero(1)), 0.1, cfg, Rng(1));
  CHECK(r.z_next.x[0] == doctest::Approx(0.4).epsilon(1e-12));
  SequenceSpec s3 = s;
  s3.a0 = Vec::Constant(1, 5.9);  // grad_x = -5 at x = 0.9
  ProblemSequence seq3(s3);
  GdaStepResult r2 =
      gda_step(seq3, 1, PointPair(Vec::Constant(1, 0.9), Vec::Zero(1)), 0.1, cfg, Rng(1));
  CHECK(r2.z_next.x[0] == doctest::Approx(1.0).epsilon(1e-12));

  // interior saddle is a fixed point
  GdaStepResult fp = gda_step(seq, 1, seq.saddle(1), 0.25, cfg, Rng(2));
  CHECK(std::sqrt(fp.z_next.squared_distance(seq.saddle(1))) <= 1e-14);

  // unbounded sets are rejected
  ProblemSequence ub(unconstrained_spec(2, 1, 1, 1, 0, 0));
  CHECK_THROWS_WITH_AS(gda_step(ub, 1, PointPair(Vec::Zero(1), Vec::Zero(1)), 0.1, cfg, Rng(1)),
                       doctest::Contains("gda-requires-bounded"), Error);
}

TEST_CASE("every run_gda iterate stays feasible") {
  SequenceSpec s = unconstrained_spec(64, 2, 0.5, 0.5, 0.2, 0.4);
  s.set_x = FeasibleSet::box(Vec::Constant(2, -1.0), Vec::Constant(2, 1.0));
  s.set_y = FeasibleSet::ball(Vec::Zero(2), 1.5);
  s.drift.kind = DriftKind::kSinusoidal;
  s.drift.amplitude = 0.1;
  s.drift.period = 8;
  s.v_budget = 0.5;
  ProblemSequence seq(s);
  Trajectory traj = run_gda(seq, GdaSchedule::custom(Order::kZeroth, 0.8, 4, 1e-3),
                            PointPair(Vec::Constant(2, 5.0), Vec::Constant(2, 5.0)), Rng(12));
  for (const auto& row : traj.rows) {
    CHECK(seq.spec().set_x.contains(row.z.x, 1e-12));
    CHECK(seq.spec().set_y.contains(row.z.y, 1e-12));
  }
}

TEST_CASE("prox step: fixed point, residual, and exact contraction rate") {
  const Rng rng(40);
  for (int i = 0; i < 100; ++i) {
    const Rng ri = rng.fork(static_cast<std::uint64_t>(i));
    const double mu_x = 0.4 + ri.uniform(0), mu_y = 0.4 + ri.uniform(1);
    const double c = 0.8 * (ri.uniform(2) - 0.5);
    QuadraticSaddleInstance inst(Vec::Constant(1, ri.uniform(3) - 0.5),
                                 Vec::Constant(1, ri.uniform(4) - 0.5), mu_x, mu_y,
                                 Mat::Constant(1, 1, c), 0.0, FeasibleSet::unconstrained(1),
                                 FeasibleSet::unconstrained(1));
    const PointPair& star = inst.saddle_point();
    const double eta = 0.05 + ri.uniform(5);
    const PointPair z(Vec::Constant(1, 2 * ri.normal(12)), Vec::Constant(1, 2 * ri.normal(13)));
    const PointPair zh = prox_step_quadratic(inst, z, eta);

    // implicit residual: zh = z - eta J grad f(zh)
    Vec gx(1), gy(1);
    inst.grad_noiseless(zh, gx, gy);
    CHECK(std::abs(zh.x[0] - (z.x[0] - eta * gx[0])) <= 1e-10);
    CHECK(std::abs(zh.y[0] - (z.y[0] + eta * gy[0])) <= 1e-10);

    const double rho = 1.0 / (1.0 + eta * std::min(mu_x, mu_y));
    CHECK(zh.squared_distance(star) <= rho * z.squared_distance(star) * (1 + 1e-12));

    // the saddle is a fixed point
    const PointPair fixed = prox_step_quadratic(inst, star, eta);
    CHECK(std::sqrt(fixed.squared_distance(star)) <= 1e-12);
  }
}

TEST_CASE("EG approaches the prox update at second order in eta") {
  ProblemSequence seq(unconstrained_spec(1, 2, 1.2, 0.8, 0.4, 0.0));
  Vec zx(2), zy(2);
  zx << 1.5, -0.7;
  zy << 0.9, 0.4;
  const PointPair z(zx, zy);
  std::vector<double> gaps;
  for (double eta : {0.1, 0.05, 0.025}) {
    EgStepResult step = eg_step(seq, 1, z, fixed_eta(eta), Rng(50));
    const PointPair prox = prox_step_quadratic(seq.instance(1), z, eta);
    gaps.push_back(std::sqrt(step.z_next.squared_distance(prox)));
  }
  // ||z_EG - z_prox|| / eta^2 stays bounded and the log-log slope is >= 1.7
  CHECK(gaps[0] / (0.1 * 0.1) < 10.0);
  const double slope01 = std::log(gaps[0] / gaps[1]) / std::log(2.0);
  const double slope12 = std::log(gaps[1] / gaps[2]) / std::log(2.0);
  CHECK(slope01 >= 1.7);
  CHECK(slope12 >= 1.7);
}

TEST_CASE("zeroth-order EG stays within the prox-closeness envelope") {
  // heavy batch rule m = eta^-4 on a quadratic (L_h = 0): empirical
  // E||z_EG - z_prox||^2 under 4 (eta^2 + L_g^2 eta^4) x (error bound)
  SequenceSpec s = unconstrained_spec(1, 1, 1.0, 1.0, 0.3, 0.25);
  ProblemSequence seq(s);
  const ProblemConstants& c = seq.constants();
  const double eta = 0.1;
  const int m = static_cast<int>(std::ceil(1.0 / std::pow(eta, 4)));
  const double nu = std::pow(eta, 4) * std::pow(c.d_x + 3.0, -1.5);
  const PointPair z(Vec::Constant(1, 0.8), Vec::Constant(1, -0.6));
  const PointPair prox = prox_step_quadratic(seq.instance(1), z, eta);

  StepParams p;
  p.eta = eta;
  p.m_x = p.m_y = m;
  p.nu_x = p.nu_y = nu;
  EGSchedule sched =
      EGSchedule::custom(Mode::kDynamic, Order::kZeroth, [p](int, const ProblemSequence&) { return p; });
  const int trials = 400;
  double acc = 0;
  for (int i = 0; i < trials; ++i) {
    EgStepResult step = eg_step(seq, 1, z, sched, Rng(1000 + static_cast<std::uint64_t>(i)));
    acc += step.z_next.squared_distance(prox);
  }
  const double bound10 = zo_error_bound(c.L, c.L_g, c.sigma, c.d_x, m, nu);
  const double per_block = 4.0 * (eta * eta + c.L_g * c.L_g * std::pow(eta, 4)) * bound10;
  CHECK(acc / trials <= 2.0 * per_block);  // joint distance against both block envelopes
}
