#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nssaddle/problem.hpp"

namespace nssaddle {

enum class DriftKind { kStatic, kSinusoidal, kRandomWalk, kJumps };

struct DriftSpec {
  DriftKind kind = DriftKind::kStatic;
  double amplitude = 0.0;      // sinusoidal
  double period = 0.0;         // sinusoidal; rounds per cycle
  double step_scale = 0.0;     // random-walk
  std::uint64_t seed = 0;      // random-walk
  int count = 0;               // jumps
  double magnitude = 0.0;      // jumps
};

struct SequenceSpec {
  int horizon = 0;
  int d_x = 0, d_y = 0;
  double mu_x = 1.0, mu_y = 1.0;
  Mat coupling;                // d_x x d_y
  double sigma = 0.0;
  FeasibleSet set_x, set_y;
  Vec a0, b0;                  // base centers; zero if empty
  DriftSpec drift;
  std::optional<double> v_budget;
  std::optional<double> w_budget;
  std::uint64_t seed = 0;      // experiment-level seed recorded in the doc
};

// A horizon-T drift schedule of quadratic saddle instances sharing
// dimensions, curvature, coupling, noise scale and feasible sets. Instances
// exist for t = 1..T+1 (the T+1-th one closes the variation sums).
// Immutable after construction.
class ProblemSequence {
 public:
  explicit ProblemSequence(SequenceSpec spec);

  int horizon() const { return spec_.horizon; }
  const SequenceSpec& spec() const { return spec_; }
  const ProblemConstants& constants() const { return constants_; }

  const QuadraticSaddleInstance& instance(int t) const {
    if (t < 1 || t > spec_.horizon + 1)
      throw Error("bad-round", "instance index out of [1, T+1]");
    return instances_[static_cast<std::size_t>(t - 1)];
  }

  const PointPair& saddle(int t) const {
    if (t < 1 || t > spec_.horizon + 1)
      throw Error("bad-round", "saddle index out of [1, T+1]");
    return saddles_[static_cast<std::size_t>(t - 1)];
  }

  bool unconstrained() const {
    return !spec_.set_x.bounded() && !spec_.set_y.bounded();
  }
  bool bounded() const { return spec_.set_x.bounded() && spec_.set_y.bounded(); }

  // sum_{t=1..T} ||x*_{t+1}-x*_t||^2 + ||y*_{t+1}-y*_t||^2 from closed-form
  // saddle points.
  double exact_vt() const { return exact_vt_; }
  double measure_vt() const { return exact_vt_; }

  // sum_{t=1..T} sup_{X x Y} |f_t - f_{t+1}|, closed form (the difference is
  // affine when only centers drift). Throws "WT-undefined-unbounded".
  double measure_wt() const;

  // Prefix averages of the centers (compensated accumulation), used by the
  // smoothed comparators: mean over i = 1..t.
  Vec mean_a(int t) const;
  Vec mean_b(int t) const;
  double mean_a_sqnorm(int t) const;  // (1/t) sum ||a_i||^2
  double mean_b_sqnorm(int t) const;

  std::string to_json() const;
  static ProblemSequence from_json(const std::string& doc);
  static SequenceSpec spec_from_json(const std::string& doc);

 private:
  void build();

  SequenceSpec spec_;
  std::vector<QuadraticSaddleInstance> instances_;  // t = 1..T+1
  std::vector<PointPair> saddles_;
  std::vector<Vec> prefix_a_, prefix_b_;            // compensated prefix sums
  std::vector<double> prefix_a_sq_, prefix_b_sq_;
  ProblemConstants constants_;
  double exact_vt_ = 0.0;
};

std::string drift_kind_name(DriftKind k);
DriftKind drift_kind_from_name(const std::string& s);

// The "nssaddle-problem-v1" document, stable field order.
std::string sequence_spec_to_json(const SequenceSpec& spec);

}  // namespace nssaddle
