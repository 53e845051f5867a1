#include "nssaddle/problem.hpp"

#include <Eigen/Eigenvalues>

namespace nssaddle {

namespace {

double operator_norm(const Mat& C) {
  if (C.size() == 0) return 0.0;
  if (C.rows() == 1 && C.cols() == 1) return std::abs(C(0, 0));
  Eigen::SelfAdjointEigenSolver<Mat> es(C.transpose() * C);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

}  // namespace

QuadraticSaddleInstance::QuadraticSaddleInstance(Vec a, Vec b, double mu_x, double mu_y,
                                                 Mat coupling, double sigma, FeasibleSet set_x,
                                                 FeasibleSet set_y,
                                                 std::optional<double> reference_radius)
    : a_(std::move(a)),
      b_(std::move(b)),
      mu_x_(mu_x),
      mu_y_(mu_y),
      sigma_(sigma),
      C_(std::move(coupling)),
      set_x_(std::move(set_x)),
      set_y_(std::move(set_y)) {
  if (mu_x_ < 0 || mu_y_ < 0 || sigma_ < 0)
    throw Error("bad-instance", "mu_x, mu_y, sigma must be nonnegative");
  if (C_.rows() != d_x() || C_.cols() != d_y())
    throw Error("bad-instance", "coupling must be d_x x d_y");
  if (set_x_.dim() != d_x() || set_y_.dim() != d_y())
    throw Error("bad-instance", "feasible sets must match dimensions");
  reference_radius_ =
      reference_radius.value_or(10.0 * (a_.norm() + b_.norm() + 1.0));

  if (mu_x_ > 0 && mu_y_ > 0) {
    // mu_x (x - a) + C y = 0,  -mu_y (y - b) + C^T x = 0.
    Mat M = mu_x_ * Mat::Identity(d_x(), d_x()) + C_ * C_.transpose() / mu_y_;
    Vec rhs = mu_x_ * a_ - C_ * b_;
    Vec xs = M.llt().solve(rhs);
    Vec ys = b_ + C_.transpose() * xs / mu_y_;
    saddle_ = PointPair(std::move(xs), std::move(ys));
    saddle_interior_ = set_x_.interior_margin(saddle_->x) > 1e-12 &&
                       set_y_.interior_margin(saddle_->y) > 1e-12;
  }
  compute_constants();
}

const PointPair& QuadraticSaddleInstance::saddle_point() const {
  if (!saddle_)
    throw Error("saddle-undefined", "saddle point requires mu_x > 0 and mu_y > 0");
  if (!saddle_interior_)
    throw Error("saddle-not-interior",
                "unconstrained saddle lies outside the strict interior of the feasible sets");
  return *saddle_;
}

void QuadraticSaddleInstance::compute_constants() {
  ProblemConstants& c = constants_;
  c.d_x = d_x();
  c.d_y = d_y();
  c.mu_x = mu_x_;
  c.mu_y = mu_y_;
  c.mu = std::min(mu_x_, mu_y_);
  c.sigma = sigma_;
  c.L_h = 0.0;

  const double cnorm = operator_norm(C_);
  c.L_xy = cnorm;
  c.L_yx = cnorm;
  c.L_gx = std::max(mu_x_, cnorm);
  c.L_gy = std::max(mu_y_, cnorm);
  c.L_g = std::max(c.L_gx, c.L_gy);

  // Gradient-norm sups. Exact per-block max distances for bounded sets,
  // the declared reference ball (centered at the origin) otherwise.
  double rx, ry;       // sup ||x - a||, sup ||y - b||
  double nx, ny;       // sup ||x||, sup ||y||
  if (set_x_.bounded()) {
    rx = set_x_.max_distance_to(a_);
    nx = set_x_.max_distance_to(Vec::Zero(d_x()));
  } else {
    rx = reference_radius_ + a_.norm();
    nx = reference_radius_;
  }
  if (set_y_.bounded()) {
    ry = set_y_.max_distance_to(b_);
    ny = set_y_.max_distance_to(Vec::Zero(d_y()));
  } else {
    ry = reference_radius_ + b_.norm();
    ny = reference_radius_;
  }
  c.L_x = mu_x_ * rx + cnorm * ny;
  c.L_y = mu_y_ * ry + cnorm * nx;
  c.L = std::max(c.L_x, c.L_y);
}

MeritValue merit(const QuadraticSaddleInstance& inst, const PointPair& z,
                 const PointPair& saddle) {
  const double fstar = inst.value_noiseless(saddle);
  const double wx = inst.value_noiseless(PointPair(z.x, saddle.y)) - fstar;
  const double wy = fstar - inst.value_noiseless(PointPair(saddle.x, z.y));
  return {wx, wy, wx + wy};
}

}  // namespace nssaddle
