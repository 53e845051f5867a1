#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nssaddle/regret.hpp"
#include "nssaddle/sequence.hpp"

namespace nssaddle {

// Optional per-horizon rules: value(T) = coef * T^exponent.
struct PowerRule {
  double coef = 0;
  double exponent = 0;
  double at(int T) const { return coef * std::pow(static_cast<double>(T), exponent); }
};

struct ExperimentConfig {
  SequenceSpec problem;           // horizon field is overridden per grid point
  std::string solver;             // "eg" | "gda" | "fw-online" | "fw-offline"
  std::string schedule;           // named schedule id
  std::string order = "first";    // "zeroth" | "first"
  double alpha = 0.25, beta = 0.25;
  double epsilon = 0;             // spfw-th1b
  double eta = 0;                 // custom schedules
  int m = 1;                      // custom schedules
  double nu = 0;                  // custom schedules
  std::vector<int> horizons;      // T grid (N grid for fw-offline)
  std::vector<std::uint64_t> seeds;
  Vec x0, y0;                     // optional start; zeros when empty
  std::optional<PowerRule> v_budget_rule;
  std::optional<PowerRule> w_budget_rule;
  std::optional<PowerRule> jumps_count_rule;
  std::string out = "results.csv";
  int jobs = 0;                   // 0 = hardware concurrency
  bool timings = false;           // real wall_ms column (breaks byte reproducibility)
};

ExperimentConfig config_from_json(const std::string& text);
std::string config_to_json(const ExperimentConfig& cfg);

// Runs the solver grid and renders the deterministic CSV
// (solver,schedule,T,seed,regret_kind,value,oracle_calls,wall_ms), sorted by
// (T, seed, kind) and printed with 17 significant digits.
std::string run_experiment_csv(const ExperimentConfig& cfg);
void run_experiment(const ExperimentConfig& cfg, const std::string& out_path);

struct SlopePoint {
  int T = 0;
  double mean = 0, stddev = 0;
  int n = 0;
};

struct SlopeFit {
  double exponent = 0, intercept = 0, r2 = 0;
  std::vector<SlopePoint> points;   // per-horizon means/stds over seeds
  int dropped_nonpositive = 0;
};

SlopeFit fit_slope(const std::string& csv_text, const std::string& solver,
                   const std::string& schedule, const std::string& regret_kind);

// Log-log regret curve with the fitted slope annotation, rendered as SVG.
std::string plot_emit_svg(const std::string& csv_text, const std::string& solver,
                          const std::string& schedule, const std::string& regret_kind);

// Deterministic work-sharing helper: body(i) for i in [0, n), with results
// independent of the parallelism degree as long as body(i) only writes to
// slot i.
void parallel_for(int n, int jobs, const std::function<void(int)>& body);

std::uint64_t fnv1a64(const std::string& bytes);

}  // namespace nssaddle
