#pragma once

#include <cmath>
#include <cstdint>

namespace nssaddle {

namespace detail {
// Acklam's rational approximation of the inverse normal CDF,
// |error| < 1.15e-9 over (0,1). Antisymmetric about u = 0.5.
inline double inverse_normal_cdf(double u) {
  static constexpr double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                  -2.759285104469687e+02, 1.383577518672690e+02,
                                  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                  -1.556989798598866e+02, 6.680131188771972e+01,
                                  -1.328068155288572e+01};
  static constexpr double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                  -2.400758277161838e+00, -2.549732539343734e+00,
                                  4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                  2.445134137142996e+00, 3.754408661907416e+00};
  static constexpr double plow = 0.02425;
  if (u < plow) {
    const double q = std::sqrt(-2.0 * std::log(u));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (u > 1.0 - plow) {
    const double q = std::sqrt(-2.0 * std::log(1.0 - u));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = u - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}
}  // namespace detail

// Counter-based splittable RNG. A stream is an immutable 128-bit key; every
// draw is a pure function of (key, counter), so substreams can be handed to
// threads freely and batch-size changes never shift unrelated draws.
//
// Convention used throughout the library: consumers derive one stream per
// logical entity (round, block, oracle call) via fork() and address variates
// inside it by counter — one counter per normal variate.
class Rng {
 public:
  Rng() : s0_(0), s1_(0) {}
  explicit Rng(std::uint64_t seed)
      : s0_(mix(seed ^ 0x2545f4914f6cdd1dULL)), s1_(mix(seed + 0x9e3779b97f4a7c15ULL)) {}

  // Derives an independent substream keyed by `tag`.
  Rng fork(std::uint64_t tag) const {
    Rng child;
    child.s0_ = mix(s0_ + 0x9e3779b97f4a7c15ULL * (tag + 1));
    child.s1_ = mix(s1_ ^ mix(tag + 0x632be59bd9b4e019ULL));
    return child;
  }

  std::uint64_t word(std::uint64_t counter) const {
    return mix(s0_ + counter * 0x9e3779b97f4a7c15ULL) ^ mix(s1_ + counter);
  }

  // Uniform on the open interval (0, 1).
  double uniform(std::uint64_t counter) const {
    return (static_cast<double>(word(counter) >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal(std::uint64_t counter) const {
    return detail::inverse_normal_cdf(uniform(counter));
  }

  void fill_normals(std::uint64_t base, int n, double* out) const {
    for (int i = 0; i < n; ++i) out[i] = normal(base + i);
  }

  std::uint64_t key_lo() const { return s0_; }
  std::uint64_t key_hi() const { return s1_; }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t s0_, s1_;
};

// Fixed fork tags so independent consumers never collide on a substream.
namespace rng_tag {
inline constexpr std::uint64_t kValueNoise = 0x01;
inline constexpr std::uint64_t kGradNoise = 0x02;
inline constexpr std::uint64_t kPerturbX = 0x03;
inline constexpr std::uint64_t kPerturbY = 0x04;
inline constexpr std::uint64_t kOracle = 0x05;
inline constexpr std::uint64_t kProbePhase = 0x06;
inline constexpr std::uint64_t kOutputDraw = 0x07;
inline constexpr std::uint64_t kDrift = 0x08;
inline constexpr std::uint64_t kIndependentRepeat = 0x09;
inline constexpr std::uint64_t kRound = 0x10;
inline constexpr std::uint64_t kTrial = 0x11;
inline constexpr std::uint64_t kInit = 0x12;
}  // namespace rng_tag

}  // namespace nssaddle
