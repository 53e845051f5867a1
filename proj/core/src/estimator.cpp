#include "nssaddle/estimator.hpp"

#include <vector>

namespace nssaddle {

namespace {

// Accumulates the zeroth-order two-point sum for one block of one function.
// For the quadratic family the pair difference is evaluated in closed form:
// with shared oracle noise the additive value noise cancels identically, so
//   (F(z + nu u) - F(z)) / nu = <g0, u> + (nu * curv / 2) ||u||^2,
// where g0 is the block gradient at z and curv the block curvature (+mu_x
// for x, -mu_y for y). Independent-noise mode adds sigma (xi1 - xi2) / nu.
void accumulate_zeroth_block(const Vec& g0, double curv, double nu, int m, double sigma,
                             bool independent_noise, const Rng& u_stream, const Rng& noise_stream,
                             double* acc, double* ubuf) {
  const int d = static_cast<int>(g0.size());
  const double half_curv_nu = 0.5 * curv * nu;
  const double* g = g0.data();
  std::uint64_t ctr = 0;
  for (int j = 0; j < m; ++j) {
    double dot = 0, sq = 0;
    for (int k = 0; k < d; ++k) {
      const double u = u_stream.normal(ctr++);
      ubuf[k] = u;
      dot += g[k] * u;
      sq += u * u;
    }
    double w = dot + half_curv_nu * sq;
    if (independent_noise && sigma > 0) {
      const double xi1 = noise_stream.normal(2 * static_cast<std::uint64_t>(j));
      const double xi2 = noise_stream.normal(2 * static_cast<std::uint64_t>(j) + 1);
      w += sigma * (xi1 - xi2) / nu;
    }
    for (int k = 0; k < d; ++k) acc[k] += w * ubuf[k];
  }
}

GradEstimate estimate_impl(const ProblemSequence* seq, const QuadraticSaddleInstance* single,
                           int t, const PointPair& z, const EstimatorConfig& cfg,
                           const Rng& rng) {
  const QuadraticSaddleInstance& first_inst = seq ? seq->instance(1) : *single;
  const int d_x = first_inst.d_x(), d_y = first_inst.d_y();
  if (z.d_x() != d_x || z.d_y() != d_y)
    throw Error("dimension-mismatch", "point does not match sequence dimensions");
  if (t < 1 || (seq && t > seq->horizon())) throw Error("bad-round", "t must lie in [1, T]");
  if (cfg.order == Order::kZeroth && (cfg.nu_x <= 0 || cfg.nu_y <= 0))
    throw Error("bad-estimator-config", "zeroth order requires nu_x, nu_y > 0");
  if (cfg.m_x < 1 || cfg.m_y < 1)
    throw Error("bad-estimator-config", "batch sizes must be >= 1");
  if (cfg.order == Order::kFirst && cfg.m_x != cfg.m_y)
    throw Error("bad-estimator-config", "first order uses one batch size m = m_x = m_y");

  const int i_lo = (cfg.mode == Mode::kStatic) ? 1 : t;
  const int n_funcs = t - i_lo + 1;

  GradEstimate out;
  out.t = t;
  out.mode = cfg.mode;
  out.order = cfg.order;
  out.g_x = Vec::Zero(d_x);
  out.g_y = Vec::Zero(d_y);

  std::vector<double> ubuf(static_cast<std::size_t>(std::max(d_x, d_y)));
  Vec gx0(d_x), gy0(d_y);

  if (cfg.order == Order::kZeroth) {
    for (int i = i_lo; i <= t; ++i) {
      const QuadraticSaddleInstance& inst = seq ? seq->instance(i) : *single;
      inst.grad_noiseless(z, gx0, gy0);
      const Rng ux = rng.fork(rng_tag::kPerturbX).fork(static_cast<std::uint64_t>(i));
      const Rng uy = rng.fork(rng_tag::kPerturbY).fork(static_cast<std::uint64_t>(i));
      const Rng nx = rng.fork(rng_tag::kValueNoise).fork(2 * static_cast<std::uint64_t>(i));
      const Rng ny = rng.fork(rng_tag::kValueNoise).fork(2 * static_cast<std::uint64_t>(i) + 1);
      accumulate_zeroth_block(gx0, inst.mu_x(), cfg.nu_x, cfg.m_x, inst.sigma(),
                              cfg.independent_noise, ux, nx, out.g_x.data(), ubuf.data());
      accumulate_zeroth_block(gy0, -inst.mu_y(), cfg.nu_y, cfg.m_y, inst.sigma(),
                              cfg.independent_noise, uy, ny, out.g_y.data(), ubuf.data());
    }
    out.g_x /= static_cast<double>(n_funcs) * cfg.m_x;
    out.g_y /= static_cast<double>(n_funcs) * cfg.m_y;
    out.samples_consumed =
        2LL * n_funcs * (static_cast<std::int64_t>(cfg.m_x) + cfg.m_y);
  } else {
    const int m = cfg.m_x;
    for (int i = i_lo; i <= t; ++i) {
      const QuadraticSaddleInstance& inst = seq ? seq->instance(i) : *single;
      inst.grad_noiseless(z, gx0, gy0);
      out.g_x += static_cast<double>(m) * gx0;
      out.g_y += static_cast<double>(m) * gy0;
      const double sigma = inst.sigma();
      if (sigma > 0) {
        const Rng gs = rng.fork(rng_tag::kGradNoise).fork(static_cast<std::uint64_t>(i));
        const double sx = sigma / std::sqrt(static_cast<double>(d_x));
        const double sy = sigma / std::sqrt(static_cast<double>(d_y));
        std::uint64_t ctr = 0;
        for (int j = 0; j < m; ++j) {
          for (int k = 0; k < d_x; ++k) out.g_x[k] += sx * gs.normal(ctr++);
          for (int k = 0; k < d_y; ++k) out.g_y[k] += sy * gs.normal(ctr++);
        }
      }
    }
    out.g_x /= static_cast<double>(n_funcs) * m;
    out.g_y /= static_cast<double>(n_funcs) * m;
    out.samples_consumed = static_cast<std::int64_t>(n_funcs) * m;
  }
  return out;
}

}  // namespace

GradEstimate gradest(const ProblemSequence& seq, int t, const PointPair& z,
                     const EstimatorConfig& cfg, const Rng& rng) {
  return estimate_impl(&seq, nullptr, t, z, cfg, rng);
}

GradEstimate zog(const QuadraticSaddleInstance& inst, const PointPair& z, int m_x, int m_y,
                 double nu_x, double nu_y, const Rng& rng, bool independent_noise) {
  EstimatorConfig cfg;
  cfg.mode = Mode::kDynamic;
  cfg.order = Order::kZeroth;
  cfg.m_x = m_x;
  cfg.m_y = m_y;
  cfg.nu_x = nu_x;
  cfg.nu_y = nu_y;
  cfg.independent_noise = independent_noise;
  return estimate_impl(nullptr, &inst, 1, z, cfg, rng);
}

double zo_error_bound(double L, double L_g, double sigma, int d, int m, double nu) {
  const double dd = static_cast<double>(d);
  return 2.0 * (dd + 5.0) * (L * L + sigma * sigma) / m +
         1.5 * nu * nu * L_g * L_g * (dd + 3.0) * (dd + 3.0) * (dd + 3.0);
}

double zo_norm_bound(double L, double sigma, int d, int m, double nu) {
  const double dd = static_cast<double>(d);
  return nu * nu * L * L * (dd + 6.0) * (dd + 6.0) * (dd + 6.0) / (2.0 * m) +
         2.0 / m * (L * L + sigma * sigma) * (dd + 4.0);
}

namespace {

EstimatorMoments moments_impl(const QuadraticSaddleInstance& inst, const PointPair& z,
                              const EstimatorConfig& cfg, int n_trials, const Rng& rng,
                              bool centered) {
  Vec gx(inst.d_x()), gy(inst.d_y());
  inst.grad_noiseless(z, gx, gy);
  double acc_x = 0, acc_y = 0;
  for (int trial = 0; trial < n_trials; ++trial) {
    const Rng r = rng.fork(rng_tag::kTrial).fork(static_cast<std::uint64_t>(trial));
    GradEstimate est = estimate_impl(nullptr, &inst, 1, z, cfg, r);
    if (centered) {
      acc_x += (est.g_x - gx).squaredNorm();
      acc_y += (est.g_y - gy).squaredNorm();
    } else {
      acc_x += est.g_x.squaredNorm();
      acc_y += est.g_y.squaredNorm();
    }
  }
  const ProblemConstants& c = inst.constants();
  EstimatorMoments out;
  out.mse_x = acc_x / n_trials;
  out.mse_y = acc_y / n_trials;
  if (cfg.order == Order::kZeroth) {
    if (centered) {
      out.bound_x = zo_error_bound(c.L, c.L_g, c.sigma, c.d_x, cfg.m_x, cfg.nu_x);
      out.bound_y = zo_error_bound(c.L, c.L_g, c.sigma, c.d_y, cfg.m_y, cfg.nu_y);
    } else {
      out.bound_x = zo_norm_bound(c.L, c.sigma, c.d_x, cfg.m_x, cfg.nu_x);
      out.bound_y = zo_norm_bound(c.L, c.sigma, c.d_y, cfg.m_y, cfg.nu_y);
    }
  } else {
    // First-order oracle: the mini-batch average has variance sigma^2 / m
    // per block; the uncentered moment adds the mean square.
    out.bound_x = c.sigma * c.sigma / cfg.m_x + (centered ? 0.0 : gx.squaredNorm());
    out.bound_y = c.sigma * c.sigma / cfg.m_y + (centered ? 0.0 : gy.squaredNorm());
  }
  return out;
}

}  // namespace

EstimatorMoments estimator_mse(const QuadraticSaddleInstance& inst, const PointPair& z,
                               const EstimatorConfig& cfg, int n_trials, const Rng& rng) {
  return moments_impl(inst, z, cfg, n_trials, rng, /*centered=*/true);
}

EstimatorMoments estimator_norm2(const QuadraticSaddleInstance& inst, const PointPair& z,
                                 const EstimatorConfig& cfg, int n_trials, const Rng& rng) {
  return moments_impl(inst, z, cfg, n_trials, rng, /*centered=*/false);
}

}  // namespace nssaddle
