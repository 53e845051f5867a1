#include <doctest.h>

#include <cmath>

#include "nssaddle/solvers_fw.hpp"

using namespace nssaddle;

namespace {

FeasibleSet unit_box(int d) {
  return FeasibleSet::box(Vec::Constant(d, -1.0), Vec::Constant(d, 1.0));
}

QuadraticSaddleInstance boxed_instance(int d, double mu, double c, double sigma,
                                       double halfwidth = 1.0) {
  return QuadraticSaddleInstance(Vec::Zero(d), Vec::Zero(d), mu, mu, c * Mat::Identity(d, d),
                                 sigma,
                                 FeasibleSet::box(Vec::Constant(d, -halfwidth),
                                                  Vec::Constant(d, halfwidth)),
                                 FeasibleSet::box(Vec::Constant(d, -halfwidth),
                                                  Vec::Constant(d, halfwidth)));
}

}  // namespace

TEST_CASE("LMO sign rule, ball rule, and lexicographic tie-break") {
  Vec dir(2);
  dir << 3.0, -2.0;
  Vec s = lmo_solve(unit_box(2), dir);
  CHECK(s[0] == -1.0);
  CHECK(s[1] == 1.0);

  Vec bdir(2);
  bdir << 3.0, 4.0;
  Vec bs = lmo_solve(FeasibleSet::ball(Vec::Zero(2), 2.0), bdir);
  CHECK(bs[0] == doctest::Approx(-1.2));
  CHECK(bs[1] == doctest::Approx(-1.6));

  Vec zero = Vec::Zero(2);
  Vec tie = lmo_solve(unit_box(2), zero);
  CHECK(tie[0] == -1.0);
  CHECK(tie[1] == -1.0);
  CHECK(lmo_solve(FeasibleSet::ball(Vec::Zero(2), 2.0), zero).norm() == 0.0);

  CHECK_THROWS_WITH_AS(lmo_solve(FeasibleSet::unconstrained(2), dir),
                       doctest::Contains("lmo-undefined-unbounded"), Error);
}

TEST_CASE("FW constants: decoupled, arithmetic, and negative-C0 rejection") {
  // C = 0 removes the cross terms, so C0 = 1
  auto decoupled = boxed_instance(1, 1.0, 0.0, 0.0);
  FWConstants f = compute_fw_constants(decoupled.constants(), decoupled.set_x(),
                                       decoupled.set_y(), decoupled.saddle_point(), 1, 1, 1e-3,
                                       1e-3);
  CHECK(f.C0 == doctest::Approx(1.0));
  // D_X = D_Y = 2, L_G = 1 -> C1 = (4+4)/2 = 4
  CHECK(f.D_x == doctest::Approx(2.0));
  CHECK(f.C1 == doctest::Approx(4.0));
  CHECK(f.rho > 0.0);
  CHECK(f.rho < 1.0);

  // strong coupling pushes C0 below zero and the run is rejected
  auto coupled = boxed_instance(1, 1.0, 0.9, 0.0);
  FWConstants fc = compute_fw_constants(coupled.constants(), coupled.set_x(), coupled.set_y(),
                                        coupled.saddle_point(), 1, 1, 1e-3, 1e-3);
  CHECK(fc.C0 < 0.0);
  OfflineFwConfig cfg;
  cfg.iterations = 5;
  CHECK_THROWS_WITH_AS(
      spfw_offline(coupled, cfg, PointPair(Vec::Constant(1, 0.5), Vec::Constant(1, 0.5)), Rng(1)),
      doctest::Contains("theorem1-precondition-violated"), Error);
}

TEST_CASE("fw_gap: zero at the saddle, sign-rule arithmetic, dominates the merit") {
  auto inst = boxed_instance(1, 1.0, 0.2, 0.0);
  const PointPair& star = inst.saddle_point();
  CHECK(fw_gap(inst, star).g == doctest::Approx(0.0).epsilon(1e-12));

  // grad_x = 2 at x = 0 via center a = -2: ghat_x = -<2, (-1 - 0)> = 2
  QuadraticSaddleInstance shifted(Vec::Constant(1, -2.0), Vec::Zero(1), 1.0, 1.0, Mat::Zero(1, 1),
                                  0.0, unit_box(1), unit_box(1));
  FwGap g = fw_gap(shifted, PointPair(Vec::Zero(1), Vec::Zero(1)));
  CHECK(g.g_x == doctest::Approx(2.0));

  const Rng rng(9);
  for (int i = 0; i < 100; ++i) {
    const Rng ri = rng.fork(static_cast<std::uint64_t>(i));
    PointPair z(Vec::Constant(1, 2 * ri.uniform(0) - 1), Vec::Constant(1, 2 * ri.uniform(1) - 1));
    const FwGap gap = fw_gap(inst, z);
    CHECK(gap.g >= -1e-12);
    CHECK(merit(inst, z, star).w <= gap.g + 1e-10);
  }
}

TEST_CASE("fw_online_step: full jump, convex combination, feasibility, bookkeeping") {
  SequenceSpec s;
  s.horizon = 4;
  s.d_x = s.d_y = 1;
  s.mu_x = s.mu_y = 1.0;
  s.coupling = Mat::Zero(1, 1);
  s.sigma = 0;
  s.set_x = unit_box(1);
  s.set_y = unit_box(1);
  ProblemSequence seq(s);
  EstimatorConfig cfg;
  cfg.order = Order::kFirst;
  cfg.mode = Mode::kDynamic;
  cfg.m_x = cfg.m_y = 2;

  const PointPair z(Vec::Zero(1), Vec::Zero(1));
  FwStepResult full = fw_online_step(seq, 1, z, 1.0, cfg, Rng(1));
  // gamma = 1 jumps to the LMO vertex
  CHECK(std::abs(full.z_next.x[0]) == 1.0);
  CHECK(full.consumed == 2);

  // gamma = 0.5 from (0,0) with s = (-1, 1): midpoint by hand
  SequenceSpec s2 = s;
  s2.a0 = Vec::Constant(1, -5.0);  // grad_x = mu(x - a) = +5 at 0 -> s_x = -1
  s2.b0 = Vec::Constant(1, 5.0);   // grad_y = -mu(y - b) = +5 -> ascent vertex +1
  ProblemSequence seq2(s2);
  FwStepResult half = fw_online_step(seq2, 1, z, 0.5, cfg, Rng(2));
  CHECK(half.z_next.x[0] == doctest::Approx(-0.5));
  CHECK(half.z_next.y[0] == doctest::Approx(0.5));

  CHECK_THROWS_AS(fw_online_step(seq, 1, z, 0.0, cfg, Rng(3)), Error);
  CHECK_THROWS_AS(fw_online_step(seq, 1, z, 1.5, cfg, Rng(3)), Error);
}

TEST_CASE("run_fw_online keeps every iterate feasible") {
  SequenceSpec s;
  s.horizon = 300;
  s.d_x = s.d_y = 2;
  s.mu_x = s.mu_y = 1.2;
  s.coupling = 0.1 * Mat::Identity(2, 2);
  s.sigma = 0.4;
  s.set_x = FeasibleSet::box(Vec::Constant(2, -1.0), Vec::Constant(2, 1.0));
  s.set_y = FeasibleSet::ball(Vec::Zero(2), 1.0);
  ProblemSequence seq(s);
  Trajectory traj = run_fw_online(seq, FwOnlineSchedule::static_th3(Order::kZeroth),
                                  PointPair(Vec::Constant(2, 0.9), Vec::Zero(2)), Rng(77));
  CHECK(static_cast<int>(traj.rows.size()) == 300);
  for (const auto& row : traj.rows) {
    CHECK(seq.spec().set_x.contains(row.z.x, 1e-12));
    CHECK(seq.spec().set_y.contains(row.z.y, 1e-12));
  }
}

TEST_CASE("dynamic FW schedule rejects budgets too large for the horizon") {
  SequenceSpec s;
  s.horizon = 4;
  s.d_x = s.d_y = 1;
  s.mu_x = s.mu_y = 1.0;
  s.coupling = Mat::Zero(1, 1);
  s.sigma = 0;
  s.set_x = unit_box(1);
  s.set_y = unit_box(1);
  s.drift.kind = DriftKind::kJumps;
  s.drift.count = 2;
  s.drift.magnitude = 1.5;
  ProblemSequence seq(s);
  CHECK_THROWS_WITH_AS(run_fw_online(seq, FwOnlineSchedule::dynamic_th5(Order::kFirst),
                                     PointPair(Vec::Zero(1), Vec::Zero(1)), Rng(1)),
                       doctest::Contains("gamma-exceeds-one"), Error);
}

TEST_CASE("offline SP-FW from the saddle stays at the noise floor") {
  auto inst = boxed_instance(2, 1.5, 0.2, 0.0);
  OfflineFwConfig cfg;
  cfg.iterations = 10;
  cfg.step_mode = FwStepMode::kAdaptive;
  cfg.order = Order::kFirst;
  cfg.rule = OfflineFwConfig::Rule::kCustom;
  cfg.m_x = cfg.m_y = 1;
  FWRunReport rep = spfw_offline(inst, cfg, inst.saddle_point(), Rng(2));
  CHECK(rep.w0 == doctest::Approx(0.0).epsilon(1e-12));
  for (const auto& it : rep.iters) CHECK(it.w <= 1e-10);
}

TEST_CASE("Gamma product and P_R normalization") {
  // gamma_1 = 1 so Gamma_1 = 1/2
  double gamma1 = 6.0 / (5.0 + 1.0);
  CHECK(gamma1 == 1.0);
  CHECK(1.0 - 0.5 * gamma1 == doctest::Approx(0.5));

  auto inst = boxed_instance(1, 1.5, 0.1, 0.0);
  for (int n : {5, 50, 500}) {
    OfflineFwConfig cfg;
    cfg.iterations = n;
    cfg.step_mode = FwStepMode::kNonAdaptive;
    cfg.order = Order::kFirst;
    cfg.rule = OfflineFwConfig::Rule::kCustom;
    cfg.m_x = cfg.m_y = 1;
    FWRunReport rep =
        spfw_offline(inst, cfg, PointPair(Vec::Constant(1, 0.8), Vec::Constant(1, -0.8)), Rng(3));
    CHECK(std::abs(rep.pr_total - 1.0) <= 1e-12);
    for (double p : rep.p_r) CHECK(p >= 0.0);
    CHECK(rep.R >= 1);
    CHECK(rep.R <= n);
  }
}

TEST_CASE("non-adaptive SP-FW converges at the 1/N family rate") {
  // deterministic gradients: E[w + ghat] at N = 200 at least halves the
  // N = 50 value
  auto inst = boxed_instance(2, 1.5, 0.2, 0.0);
  auto value_at = [&](int n) {
    OfflineFwConfig cfg;
    cfg.iterations = n;
    cfg.step_mode = FwStepMode::kNonAdaptive;
    cfg.order = Order::kFirst;
    cfg.rule = OfflineFwConfig::Rule::kCustom;
    cfg.m_x = cfg.m_y = 1;
    FWRunReport rep = spfw_offline(
        inst, cfg, PointPair(Vec::Constant(2, 0.9), Vec::Constant(2, -0.9)), Rng(4));
    return rep.iters.back().w + rep.expected_g_hat_pr;
  };
  CHECK(value_at(200) <= 0.5 * value_at(50));
}

TEST_CASE("theorem-1 batch rules materialize as stated") {
  auto inst = boxed_instance(2, 2.0, 0.2, 0.5);
  const ProblemConstants& c = inst.constants();
  const double bx = std::max(std::sqrt(c.L_x * c.L_x + c.sigma * c.sigma) / c.L_gx, 1.0);
  OfflineFwConfig cfg;
  cfg.iterations = 7;
  cfg.step_mode = FwStepMode::kNonAdaptive;
  cfg.order = Order::kZeroth;
  cfg.rule = OfflineFwConfig::Rule::kTheorem1N;
  FWRunReport rep =
      spfw_offline(inst, cfg, PointPair(Vec::Constant(2, 0.5), Vec::Constant(2, 0.5)), Rng(5));
  CHECK(rep.batch.m_x == static_cast<int>(std::ceil(bx * (2 + 5) * 49.0 - 1e-12)));
  CHECK(rep.batch.nu_x ==
        doctest::Approx(std::sqrt(bx / (2.0 * 49.0 * std::pow(8.0, 3.0)))).epsilon(1e-13));
  // one invocation consumes 2(m_x + m_y) value calls
  CHECK(rep.iters[0].consumed == 2LL * (rep.batch.m_x + rep.batch.m_y));

  OfflineFwConfig eps;
  eps.iterations = 3;
  eps.step_mode = FwStepMode::kAdaptive;
  eps.order = Order::kZeroth;
  eps.rule = OfflineFwConfig::Rule::kTheorem1Eps;
  eps.epsilon = 0.2;
  FWRunReport rep2 =
      spfw_offline(inst, eps, PointPair(Vec::Constant(2, 0.5), Vec::Constant(2, 0.5)), Rng(6));
  CHECK(rep2.batch.m_x == static_cast<int>(std::ceil(bx * 7.0 / 0.04 - 1e-12)));
}

TEST_CASE("adaptive SP-FW decays geometrically with exact gradients") {
  auto inst = boxed_instance(1, 1.5, 0.05, 0.0);
  OfflineFwConfig cfg;
  cfg.iterations = 150;
  cfg.step_mode = FwStepMode::kAdaptive;
  cfg.order = Order::kFirst;
  cfg.rule = OfflineFwConfig::Rule::kCustom;
  cfg.m_x = cfg.m_y = 1;
  FWRunReport rep =
      spfw_offline(inst, cfg, PointPair(Vec::Constant(1, 0.95), Vec::Constant(1, -0.95)), Rng(7));
  const double rho = rep.constants.rho;
  double envelope = rep.w0;
  for (const auto& it : rep.iters) {
    envelope *= 1.0 - rho;
    CHECK(it.w <= envelope + 1e-9);
  }
  CHECK(rep.gamma_clamp_events == 0);
}
