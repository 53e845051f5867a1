#include "nssaddle/solvers_fw.hpp"

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

// Zeroth-order two-point inner term per block, shared with the estimator's
// Lemma-1 shape: 4(d+5)(L^2 + sigma^2)/m + (3 nu^2/2) L_G^2 (d+6)^3.
double fw_block_term(double L_block, double L_g_block, double sigma, int d, int m, double nu) {
  const double dd = static_cast<double>(d);
  return 4.0 * (dd + 5.0) * (L_block * L_block + sigma * sigma) / m +
         1.5 * nu * nu * L_g_block * L_g_block * (dd + 6.0) * (dd + 6.0) * (dd + 6.0);
}

}  // namespace

Vec lmo_solve(const FeasibleSet& set, const Vec& direction) {
  if (direction.size() != set.dim())
    throw Error("dimension-mismatch", "LMO direction does not match set dimension");
  switch (set.kind()) {
    case FeasibleSet::Kind::kBox: {
      Vec s(set.dim());
      for (int i = 0; i < set.dim(); ++i)
        s[i] = direction[i] > 0 ? set.lower()[i]
                                : (direction[i] < 0 ? set.upper()[i] : set.lower()[i]);
      return s;
    }
    case FeasibleSet::Kind::kBall: {
      const double n = direction.norm();
      if (n == 0) return set.center();
      return set.center() - set.radius() / n * direction;
    }
    default:
      throw Error("lmo-undefined-unbounded", "LMO needs a bounded feasible set");
  }
}

FWConstants compute_fw_constants(const ProblemConstants& c, const FeasibleSet& set_x,
                                 const FeasibleSet& set_y, const PointPair& saddle, int m_x,
                                 int m_y, double nu_x, double nu_y) {
  FWConstants f;
  f.D_x = set_x.diameter();
  f.D_y = set_y.diameter();
  f.delta_x = set_x.interior_margin(saddle.x);
  f.delta_y = set_y.interior_margin(saddle.y);
  if (f.delta_x <= 0 || f.delta_y <= 0)
    throw Error("saddle-not-interior", "border distance requires a strictly interior saddle");
  f.delta_mu = std::sqrt(std::min(c.mu_x * f.delta_x * f.delta_x, c.mu_y * f.delta_y * f.delta_y));
  f.C0 = 1.0 - std::sqrt(2.0) / f.delta_mu *
                   std::max(f.D_x * c.L_xy / std::sqrt(c.mu_y), f.D_y * c.L_yx / std::sqrt(c.mu_x));
  f.C1 = 0.5 * (c.L_g * f.D_x * f.D_x + c.L_g * f.D_y * f.D_y);
  const double ex = fw_block_term(c.L_x, c.L_gx, c.sigma, c.d_x, m_x, nu_x);
  const double ey = fw_block_term(c.L_y, c.L_gy, c.sigma, c.d_y, m_y, nu_y);
  f.C2 = (f.D_x * f.D_x * ex + f.D_y * f.D_y * ey) / (4.0 * f.C1);
  f.C3 = f.C0 / (2.0 * f.D_x) * std::sqrt(ex) + f.C0 / (2.0 * f.D_y) * std::sqrt(ey);
  f.C4 = ex + ey;
  f.rho = std::min(f.C0 * f.C0 * f.delta_mu * f.delta_mu / (8.0 * f.C1), 0.5 * f.C0);
  f.B_lsigma_x =
      std::max(std::sqrt(c.L_x * c.L_x + c.sigma * c.sigma) / c.L_gx, 1.0);
  f.B_lsigma_y =
      std::max(std::sqrt(c.L_y * c.L_y + c.sigma * c.sigma) / c.L_gy, 1.0);
  return f;
}

FwGap fw_gap(const QuadraticSaddleInstance& inst, const PointPair& z) {
  Vec gx(inst.d_x()), gy(inst.d_y());
  inst.grad_noiseless(z, gx, gy);
  const Vec sx = lmo_solve(inst.set_x(), gx);
  const Vec sy = lmo_solve(inst.set_y(), -gy);
  FwGap out;
  out.g_x = -gx.dot(sx - z.x);
  out.g_y = gy.dot(sy - z.y);
  out.g = out.g_x + out.g_y;
  return out;
}

namespace {

// Mini-batch gradient estimate of one offline instance, either order.
GradEstimate offline_estimate(const QuadraticSaddleInstance& inst, const PointPair& z,
                              Order order, int m_x, int m_y, double nu_x, double nu_y,
                              bool independent_noise, const Rng& rng) {
  if (order == Order::kZeroth) return zog(inst, z, m_x, m_y, nu_x, nu_y, rng, independent_noise);
  GradEstimate out;
  out.t = 1;
  out.mode = Mode::kDynamic;
  out.order = Order::kFirst;
  Vec gx(inst.d_x()), gy(inst.d_y());
  inst.grad_noiseless(z, gx, gy);
  out.g_x = gx;
  out.g_y = gy;
  const int m = m_x;
  if (inst.sigma() > 0) {
    const Rng gs = rng.fork(rng_tag::kGradNoise);
    const double sx = inst.sigma() / std::sqrt(static_cast<double>(inst.d_x()));
    const double sy = inst.sigma() / std::sqrt(static_cast<double>(inst.d_y()));
    Vec nx = Vec::Zero(inst.d_x()), ny = Vec::Zero(inst.d_y());
    std::uint64_t ctr = 0;
    for (int j = 0; j < m; ++j) {
      for (int k = 0; k < inst.d_x(); ++k) nx[k] += sx * gs.normal(ctr++);
      for (int k = 0; k < inst.d_y(); ++k) ny[k] += sy * gs.normal(ctr++);
    }
    out.g_x += nx / m;
    out.g_y += ny / m;
  }
  out.samples_consumed = m;
  return out;
}

}  // namespace

FWRunReport spfw_offline(const QuadraticSaddleInstance& inst, const OfflineFwConfig& cfg,
                         const PointPair& z0, const Rng& run_rng) {
  if (!inst.set_x().bounded() || !inst.set_y().bounded())
    throw Error("lmo-undefined-unbounded", "offline SP-FW needs bounded feasible sets");
  const PointPair& saddle = inst.saddle_point();  // throws saddle-not-interior
  const ProblemConstants& c = inst.constants();
  const int N = cfg.iterations;
  if (N < 1) throw Error("bad-config", "iterations must be >= 1");

  // Materialize batch sizes and smoothing parameters.
  StepParams batch;
  const double bx = std::max(std::sqrt(c.L_x * c.L_x + c.sigma * c.sigma) / c.L_gx, 1.0);
  const double by = std::max(std::sqrt(c.L_y * c.L_y + c.sigma * c.sigma) / c.L_gy, 1.0);
  switch (cfg.rule) {
    case OfflineFwConfig::Rule::kTheorem1N: {
      const double nn = static_cast<double>(N) * N;
      batch.m_x = ceil_batch(bx * (c.d_x + 5.0) * nn);
      batch.m_y = ceil_batch(by * (c.d_y + 5.0) * nn);
      batch.nu_x = std::sqrt(bx / (2.0 * nn * std::pow(c.d_x + 6.0, 3.0)));
      batch.nu_y = std::sqrt(by / (2.0 * nn * std::pow(c.d_y + 6.0, 3.0)));
      break;
    }
    case OfflineFwConfig::Rule::kTheorem1Eps: {
      if (cfg.epsilon <= 0) throw Error("bad-config", "epsilon rule requires epsilon > 0");
      const double e2 = cfg.epsilon * cfg.epsilon;
      batch.m_x = ceil_batch(bx * (c.d_x + 5.0) / e2);
      batch.m_y = ceil_batch(by * (c.d_y + 5.0) / e2);
      batch.nu_x = std::sqrt(bx * e2 / (2.0 * std::pow(c.d_x + 6.0, 3.0)));
      batch.nu_y = std::sqrt(by * e2 / (2.0 * std::pow(c.d_y + 6.0, 3.0)));
      break;
    }
    case OfflineFwConfig::Rule::kCustom:
      batch.m_x = cfg.m_x;
      batch.m_y = cfg.m_y;
      batch.nu_x = cfg.nu_x;
      batch.nu_y = cfg.nu_y;
      break;
  }
  if (cfg.order == Order::kFirst) batch.m_y = batch.m_x;

  FWRunReport rep;
  rep.batch = batch;
  rep.constants =
      compute_fw_constants(c, inst.set_x(), inst.set_y(), saddle, batch.m_x, batch.m_y,
                           batch.nu_x, batch.nu_y);
  if (rep.constants.C0 <= 0)
    throw Error("theorem1-precondition-violated", "C0 must be positive for SP-FW guarantees");

  PointPair z(inst.set_x().project(z0.x), inst.set_y().project(z0.y));
  rep.w0 = merit(inst, z, saddle).w;
  rep.g_hat0 = fw_gap(inst, z).g;
  rep.iters.reserve(static_cast<std::size_t>(N));

  std::vector<double> gamma_seq(static_cast<std::size_t>(N), 0.0);
  std::vector<PointPair> iterates;
  iterates.reserve(static_cast<std::size_t>(N));
  std::int64_t cum = 0;
  for (int k = 1; k <= N; ++k) {
    const Rng rk = run_rng.fork(rng_tag::kRound).fork(static_cast<std::uint64_t>(k));
    GradEstimate g = offline_estimate(inst, z, cfg.order, batch.m_x, batch.m_y, batch.nu_x,
                                      batch.nu_y, cfg.independent_noise, rk);
    const Vec sx = lmo_solve(inst.set_x(), g.g_x);
    const Vec sy = lmo_solve(inst.set_y(), -g.g_y);
    // g_{k-1} = <-r, s - z> with r = (g_x; -g_y); nonnegative by LMO
    // optimality up to floating-point residue.
    const double g_est = -(g.g_x.dot(sx - z.x)) + g.g_y.dot(sy - z.y);

    double gamma;
    if (cfg.step_mode == FwStepMode::kNonAdaptive) {
      gamma = 6.0 / (5.0 + k);
    } else {
      gamma = std::min(rep.constants.C0 * g_est / (4.0 * rep.constants.C1), 1.0);
      if (gamma < 0) {
        gamma = 0.0;
        ++rep.gamma_clamp_events;
      }
    }
    gamma_seq[static_cast<std::size_t>(k - 1)] = gamma;

    z.x = (1.0 - gamma) * z.x + gamma * sx;
    z.y = (1.0 - gamma) * z.y + gamma * sy;
    iterates.push_back(z);

    FwOfflineIter it;
    it.gamma = gamma;
    it.g_est = g_est;
    it.w = merit(inst, z, saddle).w;
    it.g_hat = fw_gap(inst, z).g;
    it.consumed = g.samples_consumed;
    cum += g.samples_consumed;
    rep.iters.push_back(it);
  }
  rep.total_consumed = cum;
  rep.z_final = z;

  if (cfg.step_mode == FwStepMode::kNonAdaptive) {
    // P_R(k) = gamma_k Gamma_N / (2 Gamma_k (1 - Gamma_N)), Gamma_0 = 1.
    std::vector<double> big_gamma(static_cast<std::size_t>(N));
    double g_run = 1.0;
    for (int k = 1; k <= N; ++k) {
      g_run *= 1.0 - 0.5 * gamma_seq[static_cast<std::size_t>(k - 1)];
      big_gamma[static_cast<std::size_t>(k - 1)] = g_run;
    }
    const double g_n = big_gamma.back();
    rep.p_r.resize(static_cast<std::size_t>(N));
    double total = 0;
    for (int k = 1; k <= N; ++k) {
      rep.p_r[static_cast<std::size_t>(k - 1)] =
          gamma_seq[static_cast<std::size_t>(k - 1)] * g_n /
          (2.0 * big_gamma[static_cast<std::size_t>(k - 1)] * (1.0 - g_n));
      total += rep.p_r[static_cast<std::size_t>(k - 1)];
    }
    rep.pr_total = total;
    double expected = 0;
    for (int k = 1; k <= N; ++k)
      expected += rep.p_r[static_cast<std::size_t>(k - 1)] *
                  rep.iters[static_cast<std::size_t>(k - 1)].g_hat;
    rep.expected_g_hat_pr = expected;

    const double u = run_rng.fork(rng_tag::kOutputDraw).uniform(0);
    double acc = 0;
    int r = N;
    for (int k = 1; k <= N; ++k) {
      acc += rep.p_r[static_cast<std::size_t>(k - 1)] / total;
      if (u <= acc) {
        r = k;
        break;
      }
    }
    rep.R = r;
    rep.g_hat_at_R = rep.iters[static_cast<std::size_t>(r - 1)].g_hat;
    rep.z_R = iterates[static_cast<std::size_t>(r - 1)];
  }
  return rep;
}

FwOnlineSchedule FwOnlineSchedule::static_th3(Order order) {
  FwOnlineSchedule s;
  s.kind = Kind::kStaticTh3;
  s.order = order;
  return s;
}
FwOnlineSchedule FwOnlineSchedule::dynamic_th5(Order order) {
  FwOnlineSchedule s;
  s.kind = Kind::kDynamicTh5;
  s.order = order;
  return s;
}
FwOnlineSchedule FwOnlineSchedule::custom(Order order, Mode mode, std::function<double(int)> gamma,
                                          std::function<StepParams(int)> params) {
  FwOnlineSchedule s;
  s.kind = Kind::kCustom;
  s.order = order;
  s.custom_mode = mode;
  s.gamma_rule = std::move(gamma);
  s.param_rule = std::move(params);
  return s;
}

FwStepResult fw_online_step(const ProblemSequence& seq, int t, const PointPair& z, double gamma,
                            const EstimatorConfig& cfg, const Rng& run_rng) {
  if (!seq.bounded())
    throw Error("lmo-undefined-unbounded", "online FW needs bounded feasible sets");
  if (!(gamma > 0.0 && gamma <= 1.0))
    throw Error("gamma-out-of-range", "gamma must lie in (0, 1]");
  const Rng round = run_rng.fork(rng_tag::kRound).fork(static_cast<std::uint64_t>(t));
  FwStepResult out;
  out.g = gradest(seq, t, z, cfg, round.fork(rng_tag::kProbePhase));
  const Vec sx = lmo_solve(seq.spec().set_x, out.g.g_x);
  const Vec sy = lmo_solve(seq.spec().set_y, -out.g.g_y);
  out.z_next = PointPair((1.0 - gamma) * z.x + gamma * sx, (1.0 - gamma) * z.y + gamma * sy);
  out.consumed = out.g.samples_consumed;
  return out;
}

Trajectory run_fw_online(const ProblemSequence& seq, const FwOnlineSchedule& schedule,
                         const PointPair& z0, const Rng& run_rng) {
  const ProblemConstants& c = seq.constants();
  const double T = seq.horizon();

  double fixed_gamma = 0;
  if (schedule.kind == FwOnlineSchedule::Kind::kDynamicTh5) {
    const double budget = std::max(2.0 * seq.measure_wt(), seq.exact_vt());
    if (budget <= 0)
      throw Error("schedule-needs-variation", "dynamic FW schedule requires positive variation");
    fixed_gamma = std::sqrt(budget / T);
    if (fixed_gamma > 1.0)
      throw Error("gamma-exceeds-one", "variation budget too large for this horizon");
  }

  Trajectory traj;
  traj.solver = "fw-online";
  traj.rows.reserve(static_cast<std::size_t>(seq.horizon()));
  const double t0 = wall_now_ms();
  PointPair z(seq.spec().set_x.project(z0.x), seq.spec().set_y.project(z0.y));
  std::int64_t cum = 0;
  for (int t = 1; t <= seq.horizon(); ++t) {
    EstimatorConfig cfg;
    cfg.order = schedule.order;
    double gamma;
    switch (schedule.kind) {
      case FwOnlineSchedule::Kind::kStaticTh3:
        cfg.mode = Mode::kStatic;
        gamma = 1.0 / std::sqrt(static_cast<double>(t));
        if (schedule.order == Order::kZeroth) {
          cfg.m_x = ceil_batch(2.0 * (c.d_x + 5.0) * t);
          cfg.m_y = ceil_batch(2.0 * (c.d_y + 5.0) * t);
          cfg.nu_x = std::sqrt(2.0) / (std::pow(c.d_x + 3.0, 1.5) * std::sqrt(t));
          cfg.nu_y = std::sqrt(2.0) / (std::pow(c.d_y + 3.0, 1.5) * std::sqrt(t));
        } else {
          cfg.m_x = cfg.m_y = t;
        }
        break;
      case FwOnlineSchedule::Kind::kDynamicTh5:
        cfg.mode = Mode::kDynamic;
        gamma = fixed_gamma;
        if (schedule.order == Order::kZeroth) {
          cfg.m_x = ceil_batch(T * (c.d_x + 5.0));
          cfg.m_y = ceil_batch(T * (c.d_y + 5.0));
          cfg.nu_x = 1.0 / std::sqrt(T * std::pow(c.d_x + 3.0, 3.0));
          cfg.nu_y = 1.0 / std::sqrt(T * std::pow(c.d_y + 3.0, 3.0));
        } else {
          cfg.m_x = cfg.m_y = ceil_batch(T);
        }
        break;
      case FwOnlineSchedule::Kind::kCustom:
      default: {
        cfg.mode = schedule.custom_mode;
        gamma = schedule.gamma_rule(t);
        const StepParams p = schedule.param_rule(t);
        cfg.m_x = p.m_x;
        cfg.m_y = p.m_y;
        cfg.nu_x = p.nu_x;
        cfg.nu_y = p.nu_y;
        break;
      }
    }
    const double r0 = wall_now_ms();
    FwStepResult step = fw_online_step(seq, t, z, gamma, cfg, run_rng);
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

}  // namespace nssaddle
