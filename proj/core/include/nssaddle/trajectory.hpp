#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nssaddle/estimator.hpp"

namespace nssaddle {

struct TrajectoryRow {
  int t = 0;
  PointPair z;           // iterate played at round t
  PointPair z_half;      // EG midpoint; empty for other solvers
  GradEstimate g_probe;  // estimate at z (EG) or the single estimate used
  GradEstimate g_update; // EG midpoint estimate; unused otherwise
  std::int64_t consumed = 0;
  std::int64_t cumulative_consumed = 0;
  double wall_ms = 0.0;
};

struct Trajectory {
  std::string solver;
  std::vector<TrajectoryRow> rows;  // t = 1..T
  PointPair z_final;                // iterate after the last update
  std::int64_t total_consumed = 0;
  double wall_ms = 0.0;
};

}  // namespace nssaddle
