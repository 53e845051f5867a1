#pragma once

#include <cstdint>

#include "nssaddle/sequence.hpp"

namespace nssaddle {

enum class Mode { kStatic, kDynamic };
enum class Order { kZeroth, kFirst };

// A materialized per-round parameter choice: step size, batch sizes and
// smoothing parameters.
struct StepParams {
  double eta = 0;
  int m_x = 1, m_y = 1;
  double nu_x = 0, nu_y = 0;
};

struct EstimatorConfig {
  Mode mode = Mode::kDynamic;
  Order order = Order::kZeroth;
  int m_x = 1, m_y = 1;          // mini-batch sizes per block; first order needs m_x == m_y
  double nu_x = 0.0, nu_y = 0.0; // smoothing parameters, zeroth order only
  // Ablation switch: draw fresh oracle noise for the second evaluation of
  // each two-point pair instead of reusing the realization. Default off.
  bool independent_noise = false;
};

struct GradEstimate {
  Vec g_x, g_y;
  std::int64_t samples_consumed = 0;  // value calls (zeroth) or gradient calls (first)
  int t = 0;
  Mode mode = Mode::kDynamic;
  Order order = Order::kZeroth;
};

// Mini-batch partial-gradient estimator over the round-t feedback. Static
// mode averages over all past functions i = 1..t; dynamic mode queries only
// f_t. Zeroth order uses the Gaussian two-point quotient
// (F(z + nu u) - F(z)) / nu with the same noise realization at both points;
// first order averages stochastic gradients.
GradEstimate gradest(const ProblemSequence& seq, int t, const PointPair& z,
                     const EstimatorConfig& cfg, const Rng& rng);

// Offline single-instance zeroth-order estimate; the dynamic zeroth mode of
// gradest against one function.
GradEstimate zog(const QuadraticSaddleInstance& inst, const PointPair& z, int m_x, int m_y,
                 double nu_x, double nu_y, const Rng& rng, bool independent_noise = false);

// Empirical estimator error/second-moment against the closed-form gradient,
// with the matching analytic bounds computed from the instance constants.
// Diagnostics only; never consumed by solvers.
struct EstimatorMoments {
  double mse_x = 0, mse_y = 0;
  double bound_x = 0, bound_y = 0;
};
EstimatorMoments estimator_mse(const QuadraticSaddleInstance& inst, const PointPair& z,
                               const EstimatorConfig& cfg, int n_trials, const Rng& rng);
EstimatorMoments estimator_norm2(const QuadraticSaddleInstance& inst, const PointPair& z,
                                 const EstimatorConfig& cfg, int n_trials, const Rng& rng);

// Right-hand sides of the estimator error / norm bounds for one block.
double zo_error_bound(double L, double L_g, double sigma, int d, int m, double nu);
double zo_norm_bound(double L, double sigma, int d, int m, double nu);

}  // namespace nssaddle
