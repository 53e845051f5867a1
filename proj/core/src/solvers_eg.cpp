#include "nssaddle/solvers_eg.hpp"

#include <chrono>
#include <cmath>

namespace nssaddle {

namespace {

int ceil_batch(double v) {
  if (!(v > 0)) return 1;
  return std::max(1, static_cast<int>(std::ceil(v - 1e-12)));
}

double wall_now_ms() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double, std::milli>(clock::now().time_since_epoch()).count();
}

}  // namespace

EGSchedule EGSchedule::static_th2a_light(double alpha) {
  EGSchedule s;
  s.regime_ = EgRegime::kStaticTh2aLight;
  s.mode_ = Mode::kStatic;
  s.order_ = Order::kZeroth;
  s.alpha_ = alpha;
  return s;
}
EGSchedule EGSchedule::static_th2a_heavy(double alpha) {
  EGSchedule s = static_th2a_light(alpha);
  s.regime_ = EgRegime::kStaticTh2aHeavy;
  return s;
}
EGSchedule EGSchedule::static_th2b_light(double alpha) {
  EGSchedule s;
  s.regime_ = EgRegime::kStaticTh2bLight;
  s.mode_ = Mode::kStatic;
  s.order_ = Order::kFirst;
  s.alpha_ = alpha;
  return s;
}
EGSchedule EGSchedule::static_th2b_heavy(double alpha) {
  EGSchedule s = static_th2b_light(alpha);
  s.regime_ = EgRegime::kStaticTh2bHeavy;
  return s;
}
EGSchedule EGSchedule::dynamic_th4_light(Order order, double alpha, double beta) {
  EGSchedule s;
  s.regime_ = EgRegime::kDynamicTh4Light;
  s.mode_ = Mode::kDynamic;
  s.order_ = order;
  s.alpha_ = alpha;
  s.beta_ = beta;
  return s;
}
EGSchedule EGSchedule::dynamic_th4_heavy(Order order, double alpha, double beta) {
  EGSchedule s = dynamic_th4_light(order, alpha, beta);
  s.regime_ = EgRegime::kDynamicTh4Heavy;
  return s;
}
EGSchedule EGSchedule::custom(Mode mode, Order order,
                              std::function<StepParams(int, const ProblemSequence&)> rule) {
  EGSchedule s;
  s.regime_ = EgRegime::kCustom;
  s.mode_ = mode;
  s.order_ = order;
  s.rule_ = std::move(rule);
  return s;
}

StepParams EGSchedule::at(int t, const ProblemSequence& seq) const {
  if (regime_ == EgRegime::kCustom) return rule_(t, seq);
  const ProblemConstants& c = seq.constants();
  const double T = seq.horizon();
  StepParams p;
  double eta;
  if (regime_ == EgRegime::kDynamicTh4Light || regime_ == EgRegime::kDynamicTh4Heavy) {
    const double vt = seq.exact_vt();
    if (vt <= 0) throw Error("schedule-needs-variation", "dynamic schedule requires V_T > 0");
    eta = 4.0 * std::pow(T, -alpha_) * std::pow(vt, beta_) / c.mu;
  } else {
    eta = 4.0 * std::pow(T, -alpha_) / c.mu;
  }
  p.eta = eta;
  const bool heavy =
      regime_ == EgRegime::kStaticTh2aHeavy || regime_ == EgRegime::kDynamicTh4Heavy ||
      regime_ == EgRegime::kStaticTh2bHeavy;
  const double pow_eta = heavy ? eta * eta * eta * eta : eta * eta;
  if (order_ == Order::kZeroth) {
    p.m_x = ceil_batch((c.d_x + 5.0) / pow_eta);
    p.m_y = ceil_batch((c.d_y + 5.0) / pow_eta);
    p.nu_x = pow_eta * std::pow(c.d_x + 3.0, -1.5);
    p.nu_y = pow_eta * std::pow(c.d_y + 3.0, -1.5);
  } else {
    p.m_x = p.m_y = ceil_batch(1.0 / pow_eta);
  }
  (void)t;  // the named regimes are constant over rounds
  return p;
}

EgStepResult eg_step(const ProblemSequence& seq, int t, const PointPair& z,
                     const EGSchedule& schedule, const Rng& run_rng) {
  if (!seq.unconstrained())
    throw Error("eg-requires-unconstrained", "extragradient handles unconstrained problems only");
  const StepParams p = schedule.at(t, seq);
  EstimatorConfig cfg;
  cfg.mode = schedule.mode();
  cfg.order = schedule.order();
  cfg.m_x = p.m_x;
  cfg.m_y = p.m_y;
  cfg.nu_x = p.nu_x;
  cfg.nu_y = p.nu_y;

  const Rng round = run_rng.fork(rng_tag::kRound).fork(static_cast<std::uint64_t>(t));
  EgStepResult out;
  out.g_probe = gradest(seq, t, z, cfg, round.fork(rng_tag::kProbePhase));
  out.z_half = PointPair(z.x - p.eta * out.g_probe.g_x, z.y + p.eta * out.g_probe.g_y);
  out.g_mid = gradest(seq, t, out.z_half, cfg, round.fork(rng_tag::kProbePhase + 1));
  out.z_next = PointPair(z.x - p.eta * out.g_mid.g_x, z.y + p.eta * out.g_mid.g_y);
  out.consumed = out.g_probe.samples_consumed + out.g_mid.samples_consumed;
  return out;
}

Trajectory run_eg(const ProblemSequence& seq, const EGSchedule& schedule, const PointPair& z0,
                  const Rng& run_rng) {
  Trajectory traj;
  traj.solver = "eg";
  traj.rows.reserve(static_cast<std::size_t>(seq.horizon()));
  const double t0 = wall_now_ms();
  PointPair z = z0;
  std::int64_t cum = 0;
  for (int t = 1; t <= seq.horizon(); ++t) {
    const double r0 = wall_now_ms();
    EgStepResult step = eg_step(seq, t, z, schedule, run_rng);
    TrajectoryRow row;
    row.t = t;
    row.z = z;
    row.z_half = step.z_half;
    row.g_probe = std::move(step.g_probe);
    row.g_update = std::move(step.g_mid);
    row.consumed = step.consumed;
    cum += step.consumed;
    row.cumulative_consumed = cum;
    row.wall_ms = wall_now_ms() - r0;
    traj.rows.push_back(std::move(row));
    z = std::move(step.z_next);
  }
  traj.z_final = std::move(z);
  traj.total_consumed = cum;
  traj.wall_ms = wall_now_ms() - t0;
  return traj;
}

GdaSchedule GdaSchedule::theorem6(Order order) {
  GdaSchedule s;
  s.order = order;
  s.th6 = true;
  return s;
}
GdaSchedule GdaSchedule::custom(Order order, double eta, int m, double nu) {
  GdaSchedule s;
  s.order = order;
  s.th6 = false;
  s.eta = eta;
  s.m = m;
  s.nu = nu;
  return s;
}

StepParams GdaSchedule::at(const ProblemSequence& seq) const {
  StepParams p;
  const ProblemConstants& c = seq.constants();
  const double T = seq.horizon();
  if (th6) {
    const double vt = seq.exact_vt();
    if (vt <= 0) throw Error("schedule-needs-variation", "theorem-6 schedule requires V_T > 0");
    p.eta = std::pow(vt, 0.25);
    if (order == Order::kZeroth) {
      p.m_x = ceil_batch((c.d_x + 6.0) * T);
      p.m_y = ceil_batch((c.d_y + 6.0) * T);
      p.nu_x = 1.0 / (std::pow(c.d_x + 6.0, 1.5) * std::sqrt(T));
      p.nu_y = 1.0 / (std::pow(c.d_y + 6.0, 1.5) * std::sqrt(T));
    } else {
      p.m_x = p.m_y = ceil_batch(T);
    }
  } else {
    p.eta = eta;
    p.m_x = p.m_y = std::max(1, m);
    p.nu_x = p.nu_y = nu;
  }
  return p;
}

GdaStepResult gda_step(const ProblemSequence& seq, int t, const PointPair& z, double eta,
                       const EstimatorConfig& cfg, const Rng& run_rng) {
  if (!seq.bounded())
    throw Error("gda-requires-bounded", "projected GDA requires bounded feasible sets");
  const Rng round = run_rng.fork(rng_tag::kRound).fork(static_cast<std::uint64_t>(t));
  GdaStepResult out;
  out.g = gradest(seq, t, z, cfg, round.fork(rng_tag::kProbePhase));
  out.z_next = PointPair(seq.spec().set_x.project(z.x - eta * out.g.g_x),
                         seq.spec().set_y.project(z.y + eta * out.g.g_y));
  out.consumed = out.g.samples_consumed;
  return out;
}

Trajectory run_gda(const ProblemSequence& seq, const GdaSchedule& schedule, const PointPair& z0,
                   const Rng& run_rng) {
  const StepParams p = schedule.at(seq);
  EstimatorConfig cfg;
  cfg.mode = Mode::kDynamic;
  cfg.order = schedule.order;
  cfg.m_x = p.m_x;
  cfg.m_y = p.m_y;
  cfg.nu_x = p.nu_x;
  cfg.nu_y = p.nu_y;

  Trajectory traj;
  traj.solver = "gda";
  traj.rows.reserve(static_cast<std::size_t>(seq.horizon()));
  const double t0 = wall_now_ms();
  PointPair z(seq.spec().set_x.project(z0.x), seq.spec().set_y.project(z0.y));
  std::int64_t cum = 0;
  for (int t = 1; t <= seq.horizon(); ++t) {
    const double r0 = wall_now_ms();
    GdaStepResult step = gda_step(seq, t, z, p.eta, cfg, run_rng);
    TrajectoryRow row;
    row.t = t;
    row.z = z;
    row.g_probe = std::move(step.g);
    row.consumed = step.consumed;
    cum += step.consumed;
    row.cumulative_consumed = cum;
    row.wall_ms = wall_now_ms() - r0;
    traj.rows.push_back(std::move(row));
    z = std::move(step.z_next);
  }
  traj.z_final = std::move(z);
  traj.total_consumed = cum;
  traj.wall_ms = wall_now_ms() - t0;
  return traj;
}

PointPair prox_step_quadratic(const QuadraticSaddleInstance& inst, const PointPair& z,
                              double eta) {
  if (eta <= 0) throw Error("bad-step", "prox step requires eta > 0");
  const int dx = inst.d_x(), dy = inst.d_y();
  // (1 + eta mu_x) x+ + eta C y+        = x + eta mu_x a
  // -eta C^T x+     + (1 + eta mu_y) y+ = y + eta mu_y b
  Mat A = Mat::Zero(dx + dy, dx + dy);
  A.topLeftCorner(dx, dx) = (1.0 + eta * inst.mu_x()) * Mat::Identity(dx, dx);
  A.topRightCorner(dx, dy) = eta * inst.coupling();
  A.bottomLeftCorner(dy, dx) = -eta * inst.coupling().transpose();
  A.bottomRightCorner(dy, dy) = (1.0 + eta * inst.mu_y()) * Mat::Identity(dy, dy);
  Vec rhs(dx + dy);
  rhs.head(dx) = z.x + eta * inst.mu_x() * inst.a();
  rhs.tail(dy) = z.y + eta * inst.mu_y() * inst.b();
  Vec sol = A.partialPivLu().solve(rhs);
  if (!sol.allFinite()) throw Error("prox-singular", "implicit proximal system is singular");
  return PointPair(sol.head(dx), sol.tail(dy));
}

}  // namespace nssaddle
