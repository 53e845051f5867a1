#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

#include "nssaddle/rng.hpp"

namespace nssaddle {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Library errors carry a short stable code (first token of what()) so tests
// and the CLI can match on them.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& detail)
      : std::runtime_error(code + ": " + detail), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

// The joint decision z = (x, y).
struct PointPair {
  Vec x;
  Vec y;

  PointPair() = default;
  PointPair(Vec x_, Vec y_) : x(std::move(x_)), y(std::move(y_)) {}

  int d_x() const { return static_cast<int>(x.size()); }
  int d_y() const { return static_cast<int>(y.size()); }

  bool finite() const { return x.allFinite() && y.allFinite(); }

  double squared_distance(const PointPair& o) const {
    return (x - o.x).squaredNorm() + (y - o.y).squaredNorm();
  }
};

// Regularity constants of one instance (or shared by a whole sequence).
// L_gx/L_gy absorb the cross-block curvature, so L_g = max(L_gx, L_gy) is
// the largest Hessian-block operator norm. L_x/L_y are gradient-norm sups
// over the feasible sets (or the declared reference ball when unconstrained)
// and may be conservative upper bounds for ball-shaped sets.
struct ProblemConstants {
  double mu_x = 0, mu_y = 0, mu = 0;
  double L_x = 0, L_y = 0, L = 0;
  double L_gx = 0, L_gy = 0, L_g = 0;
  double L_xy = 0, L_yx = 0;
  double L_h = 0;
  double sigma = 0;
  int d_x = 0, d_y = 0;
};

class FeasibleSet {
 public:
  enum class Kind { kUnconstrained, kBox, kBall };

  static FeasibleSet unconstrained(int dim) {
    FeasibleSet s;
    s.kind_ = Kind::kUnconstrained;
    s.dim_ = dim;
    return s;
  }
  static FeasibleSet box(Vec lower, Vec upper) {
    if (lower.size() != upper.size() || lower.size() == 0)
      throw Error("bad-set", "box bounds must have equal positive length");
    if (!((lower.array() < upper.array()).all()))
      throw Error("bad-set", "box requires lower < upper coordinatewise");
    FeasibleSet s;
    s.kind_ = Kind::kBox;
    s.dim_ = static_cast<int>(lower.size());
    s.lower_ = std::move(lower);
    s.upper_ = std::move(upper);
    return s;
  }
  static FeasibleSet ball(Vec center, double radius) {
    if (radius <= 0) throw Error("bad-set", "ball requires radius > 0");
    FeasibleSet s;
    s.kind_ = Kind::kBall;
    s.dim_ = static_cast<int>(center.size());
    s.center_ = std::move(center);
    s.radius_ = radius;
    return s;
  }

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  bool bounded() const { return kind_ != Kind::kUnconstrained; }
  const Vec& lower() const { return lower_; }
  const Vec& upper() const { return upper_; }
  const Vec& center() const { return center_; }
  double radius() const { return radius_; }

  double diameter() const {
    switch (kind_) {
      case Kind::kBox:
        return (upper_ - lower_).norm();
      case Kind::kBall:
        return 2.0 * radius_;
      default:
        throw Error("diameter-undefined-unbounded", "unconstrained set has no diameter");
    }
  }

  bool contains(const Vec& v, double slack = 0.0) const {
    switch (kind_) {
      case Kind::kBox:
        return (v.array() >= lower_.array() - slack).all() &&
               (v.array() <= upper_.array() + slack).all();
      case Kind::kBall:
        return (v - center_).norm() <= radius_ + slack;
      default:
        return true;
    }
  }

  // Distance from v to the boundary; positive iff v is strictly interior.
  double interior_margin(const Vec& v) const {
    switch (kind_) {
      case Kind::kBox: {
        double m = std::numeric_limits<double>::infinity();
        for (int i = 0; i < dim_; ++i)
          m = std::min(m, std::min(v[i] - lower_[i], upper_[i] - v[i]));
        return m;
      }
      case Kind::kBall:
        return radius_ - (v - center_).norm();
      default:
        return std::numeric_limits<double>::infinity();
    }
  }

  Vec project(const Vec& v) const {
    switch (kind_) {
      case Kind::kBox:
        return v.cwiseMax(lower_).cwiseMin(upper_);
      case Kind::kBall: {
        Vec d = v - center_;
        double n = d.norm();
        if (n <= radius_) return v;
        return center_ + d * (radius_ / n);
      }
      default:
        return v;
    }
  }

  // sup_{v in set} <p, v>; used by the closed-form W_T measurement.
  double support(const Vec& p) const {
    switch (kind_) {
      case Kind::kBox: {
        double s = 0;
        for (int i = 0; i < dim_; ++i) s += std::max(p[i] * lower_[i], p[i] * upper_[i]);
        return s;
      }
      case Kind::kBall:
        return p.dot(center_) + radius_ * p.norm();
      default:
        throw Error("WT-undefined-unbounded", "support undefined on unconstrained set");
    }
  }

  // Exact sup_{v in set} ||v - ref||.
  double max_distance_to(const Vec& ref) const {
    switch (kind_) {
      case Kind::kBox: {
        double s = 0;
        for (int i = 0; i < dim_; ++i) {
          double d = std::max(std::abs(lower_[i] - ref[i]), std::abs(upper_[i] - ref[i]));
          s += d * d;
        }
        return std::sqrt(s);
      }
      case Kind::kBall:
        return (center_ - ref).norm() + radius_;
      default:
        throw Error("unbounded-sup", "sup distance undefined on unconstrained set");
    }
  }

 private:
  Kind kind_ = Kind::kUnconstrained;
  int dim_ = 0;
  Vec lower_, upper_;
  Vec center_;
  double radius_ = 0;
};

// f(x,y) = (mu_x/2)||x-a||^2 - (mu_y/2)||y-b||^2 + x^T C y, with additive
// Gaussian value noise of scale sigma and per-coordinate gradient noise of
// variance sigma^2/d per block. Immutable after construction.
class QuadraticSaddleInstance {
 public:
  QuadraticSaddleInstance(Vec a, Vec b, double mu_x, double mu_y, Mat coupling, double sigma,
                          FeasibleSet set_x, FeasibleSet set_y,
                          std::optional<double> reference_radius = std::nullopt);

  int d_x() const { return static_cast<int>(a_.size()); }
  int d_y() const { return static_cast<int>(b_.size()); }
  double mu_x() const { return mu_x_; }
  double mu_y() const { return mu_y_; }
  double sigma() const { return sigma_; }
  const Vec& a() const { return a_; }
  const Vec& b() const { return b_; }
  const Mat& coupling() const { return C_; }
  const FeasibleSet& set_x() const { return set_x_; }
  const FeasibleSet& set_y() const { return set_y_; }
  const ProblemConstants& constants() const { return constants_; }

  double value_noiseless(const PointPair& z) const {
    check_dims(z);
    return value_noiseless_ptr(z.x.data(), z.y.data());
  }

  double value_noiseless_ptr(const double* x, const double* y) const {
    const int dx = d_x(), dy = d_y();
    double qx = 0, qy = 0;
    for (int i = 0; i < dx; ++i) {
      const double d = x[i] - a_[i];
      qx += d * d;
    }
    for (int j = 0; j < dy; ++j) {
      const double d = y[j] - b_[j];
      qy += d * d;
    }
    double cross = 0;
    for (int i = 0; i < dx; ++i) {
      const double* row = C_.data() + i;  // column-major stride
      double acc = 0;
      for (int j = 0; j < dy; ++j) acc += row[j * dx] * y[j];
      cross += x[i] * acc;
    }
    return 0.5 * mu_x_ * qx - 0.5 * mu_y_ * qy + cross;
  }

  void grad_noiseless(const PointPair& z, Vec& gx, Vec& gy) const {
    check_dims(z);
    gx = mu_x_ * (z.x - a_) + C_ * z.y;
    gy = -mu_y_ * (z.y - b_) + C_.transpose() * z.x;
  }

  // Stochastic zeroth-order oracle. The rng argument is a per-call
  // substream; the noise variate lives at counter 0, so two calls with the
  // same stream see the same realization.
  double eval_value(const PointPair& z, const Rng& rng) const {
    check_dims(z);
    if (!z.finite()) throw Error("non-finite-input", "eval_value requires finite z");
    double v = value_noiseless_ptr(z.x.data(), z.y.data()) + sigma_ * rng.normal(0);
    if (!std::isfinite(v)) throw Error("non-finite-value", "oracle produced non-finite value");
    return v;
  }

  // Stochastic first-order oracle; per-coordinate noise variance sigma^2/d
  // per block, counters 0..d_x-1 then d_x..d_x+d_y-1.
  void eval_grad(const PointPair& z, const Rng& rng, Vec& gx, Vec& gy) const {
    grad_noiseless(z, gx, gy);
    if (sigma_ > 0) {
      const double sx = sigma_ / std::sqrt(static_cast<double>(d_x()));
      const double sy = sigma_ / std::sqrt(static_cast<double>(d_y()));
      for (int i = 0; i < d_x(); ++i) gx[i] += sx * rng.normal(i);
      for (int j = 0; j < d_y(); ++j) gy[j] += sy * rng.normal(d_x() + j);
    }
  }

  // Exact solution of the 2-block KKT system. Throws "saddle-not-interior"
  // when a constrained instance has its unconstrained saddle outside the
  // strict interior of the feasible sets.
  const PointPair& saddle_point() const;

  bool has_saddle() const { return saddle_.has_value(); }
  double reference_radius() const { return reference_radius_; }

 private:
  void check_dims(const PointPair& z) const {
    if (z.d_x() != d_x() || z.d_y() != d_y())
      throw Error("dimension-mismatch", "point does not match instance dimensions");
  }
  void compute_constants();

  Vec a_, b_;
  double mu_x_, mu_y_, sigma_;
  Mat C_;
  FeasibleSet set_x_, set_y_;
  double reference_radius_ = 0;
  ProblemConstants constants_;
  std::optional<PointPair> saddle_;       // set at construction when solvable
  bool saddle_interior_ = false;
};

// Noiseless merit w = f(x, y*) - f(x*, y) split into its two halves.
struct MeritValue {
  double w_x, w_y, w;
};
MeritValue merit(const QuadraticSaddleInstance& inst, const PointPair& z, const PointPair& saddle);

}  // namespace nssaddle
