#pragma once

#include <functional>

#include "nssaddle/trajectory.hpp"

namespace nssaddle {

enum class EgRegime {
  kStaticTh2aLight,   // zeroth order, m_t = (d+5)/eta^2
  kStaticTh2aHeavy,   // zeroth order, m_t = (d+5)/eta^4
  kStaticTh2bLight,   // first order,  m_t = 1/eta^2
  kStaticTh2bHeavy,   // first order,  m_t = 1/eta^4
  kDynamicTh4Light,   // m ~ eta^-2
  kDynamicTh4Heavy,   // m ~ eta^-4
  kCustom,
};

// Parameter schedules for the extragradient solver. The named regimes
// materialize eta_t = 4 T^-alpha / mu (static) or 4 T^-alpha V_T^beta / mu
// (dynamic) together with the matching batch sizes and smoothing parameters;
// batch sizes are the ceiling of the real-valued rule. alpha and beta default
// to the stated preset values but stay adjustable.
class EGSchedule {
 public:
  static EGSchedule static_th2a_light(double alpha = 0.25);
  static EGSchedule static_th2a_heavy(double alpha = 0.25);
  static EGSchedule static_th2b_light(double alpha = 0.25);
  static EGSchedule static_th2b_heavy(double alpha = 0.25);
  static EGSchedule dynamic_th4_light(Order order, double alpha = 0.25, double beta = 0.25);
  static EGSchedule dynamic_th4_heavy(Order order, double alpha = 0.25, double beta = 0.25);
  static EGSchedule custom(Mode mode, Order order,
                           std::function<StepParams(int, const ProblemSequence&)> rule);

  EgRegime regime() const { return regime_; }
  Mode mode() const { return mode_; }
  Order order() const { return order_; }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }

  StepParams at(int t, const ProblemSequence& seq) const;

 private:
  EgRegime regime_ = EgRegime::kCustom;
  Mode mode_ = Mode::kDynamic;
  Order order_ = Order::kFirst;
  double alpha_ = 0.25, beta_ = 0.25;
  std::function<StepParams(int, const ProblemSequence&)> rule_;
};

struct EgStepResult {
  PointPair z_half, z_next;
  std::int64_t consumed = 0;
  GradEstimate g_probe, g_mid;
};

// One extragradient round: probe step at z_t, update from the midpoint
// estimate. Unconstrained sequences only.
EgStepResult eg_step(const ProblemSequence& seq, int t, const PointPair& z,
                     const EGSchedule& schedule, const Rng& run_rng);

Trajectory run_eg(const ProblemSequence& seq, const EGSchedule& schedule, const PointPair& z0,
                  const Rng& run_rng);

// Projected gradient descent ascent under bandit or first-order feedback.
struct GdaSchedule {
  Order order = Order::kFirst;
  bool th6 = true;       // eta = V_T^{1/4}, zeroth: m = (d+6)T, nu = ((d+6)^{3/2} sqrt(T))^-1
  double eta = 0;        // custom
  int m = 1;             // custom
  double nu = 0;         // custom (zeroth)

  static GdaSchedule theorem6(Order order);
  static GdaSchedule custom(Order order, double eta, int m, double nu = 0);
  StepParams at(const ProblemSequence& seq) const;
};

struct GdaStepResult {
  PointPair z_next;
  std::int64_t consumed = 0;
  GradEstimate g;
};

GdaStepResult gda_step(const ProblemSequence& seq, int t, const PointPair& z, double eta,
                       const EstimatorConfig& cfg, const Rng& run_rng);

Trajectory run_gda(const ProblemSequence& seq, const GdaSchedule& schedule, const PointPair& z0,
                   const Rng& run_rng);

// Implicit proximal-point update z+ = z - eta J grad f(z+) (J flips the sign
// of the y block), solved exactly for the quadratic family by one linear
// solve. Test oracle; not a production solver.
PointPair prox_step_quadratic(const QuadraticSaddleInstance& inst, const PointPair& z, double eta);

}  // namespace nssaddle
