#pragma once

#include "nssaddle/trajectory.hpp"

namespace nssaddle {

// Exact minimizer of <v, direction> over the set. Boxes break ties toward
// the lexicographically smallest vertex; balls return the center for a zero
// direction.
Vec lmo_solve(const FeasibleSet& set, const Vec& direction);

// Constants of the offline saddle-point Frank-Wolfe analysis, computed from
// the instance constants, feasible-set geometry and the estimator batch
// parameters. rho is the per-iteration merit contraction amount of the
// adaptive regime: w_k <= (1 - rho) w_{k-1} + noise floor.
struct FWConstants {
  double C0 = 0, C1 = 0, C2 = 0, C3 = 0, C4 = 0;
  double delta_x = 0, delta_y = 0, delta_mu = 0;
  double D_x = 0, D_y = 0;
  double rho = 0;
  double B_lsigma_x = 0, B_lsigma_y = 0;
};

FWConstants compute_fw_constants(const ProblemConstants& c, const FeasibleSet& set_x,
                                 const FeasibleSet& set_y, const PointPair& saddle, int m_x,
                                 int m_y, double nu_x, double nu_y);

// True Frank-Wolfe gap at z from exact gradients (test instrumentation).
struct FwGap {
  double g_x = 0, g_y = 0, g = 0;
};
FwGap fw_gap(const QuadraticSaddleInstance& inst, const PointPair& z);

enum class FwStepMode { kNonAdaptive, kAdaptive };

struct OfflineFwConfig {
  int iterations = 100;  // N
  FwStepMode step_mode = FwStepMode::kNonAdaptive;
  Order order = Order::kZeroth;
  enum class Rule {
    kTheorem1N,    // m_k = B(d+5) N^2, nu = sqrt(B / (2 N^2 (d+6)^3))
    kTheorem1Eps,  // m_k = B(d+5) / eps^2, nu = sqrt(B eps^2 / (2 (d+6)^3))
    kCustom,
  } rule = Rule::kTheorem1N;
  double epsilon = 0;
  int m_x = 1, m_y = 1;
  double nu_x = 0, nu_y = 0;
  bool independent_noise = false;
};

struct FwOfflineIter {
  double gamma = 0;
  double g_est = 0;    // estimated gap at z_{k-1} used to pick gamma
  double w = 0;        // merit at z_k
  double g_hat = 0;    // true gap at z_k
  std::int64_t consumed = 0;
};

struct FWRunReport {
  double w0 = 0;
  double g_hat0 = 0;
  std::vector<FwOfflineIter> iters;  // k = 1..N
  PointPair z_final;                 // z_N
  int R = 0;                         // sampled output index (non-adaptive)
  PointPair z_R;
  double g_hat_at_R = 0;
  double expected_g_hat_pr = 0;      // sum_k P_R(k) ghat_k
  double pr_total = 0;               // sum_k P_R(k); 1 up to rounding
  std::vector<double> p_r;           // the output distribution (non-adaptive)
  int gamma_clamp_events = 0;        // adaptive steps clamped at gamma = 0
  std::int64_t total_consumed = 0;
  FWConstants constants;
  StepParams batch;                // materialized m, nu
};

// Offline zeroth-order (or first-order) stochastic saddle-point Frank-Wolfe.
// Requires C0 > 0 and a strictly interior saddle.
FWRunReport spfw_offline(const QuadraticSaddleInstance& inst, const OfflineFwConfig& cfg,
                         const PointPair& z0, const Rng& run_rng);

// Online Frank-Wolfe over a nonstationary sequence.
struct FwOnlineSchedule {
  enum class Kind { kStaticTh3, kDynamicTh5, kCustom } kind = Kind::kStaticTh3;
  Order order = Order::kZeroth;
  // custom rule: gamma(t), batch and smoothing per round
  std::function<double(int)> gamma_rule;
  std::function<StepParams(int)> param_rule;
  Mode custom_mode = Mode::kDynamic;

  static FwOnlineSchedule static_th3(Order order);
  static FwOnlineSchedule dynamic_th5(Order order);
  static FwOnlineSchedule custom(Order order, Mode mode, std::function<double(int)> gamma,
                                 std::function<StepParams(int)> params);
};

struct FwStepResult {
  PointPair z_next;
  std::int64_t consumed = 0;
  GradEstimate g;
};

FwStepResult fw_online_step(const ProblemSequence& seq, int t, const PointPair& z, double gamma,
                            const EstimatorConfig& cfg, const Rng& run_rng);

Trajectory run_fw_online(const ProblemSequence& seq, const FwOnlineSchedule& schedule,
                         const PointPair& z0, const Rng& run_rng);

}  // namespace nssaddle
