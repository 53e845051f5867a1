#pragma once

#include "nssaddle/trajectory.hpp"

namespace nssaddle {

// The smoothed comparator at index t: the averaged function J_{t-1} (itself
// a quadratic with averaged centers, represented up to an additive constant
// carried in value_offset) and its saddle (u*_t, v*_t). Index t = 1 falls
// back to J_1.
struct SmoothedComparator {
  int t = 0;
  QuadraticSaddleInstance averaged;
  double value_offset = 0;  // J(z) = averaged.value_noiseless(z) + value_offset
  PointPair saddle;
};

SmoothedComparator smoothed_saddle(const ProblemSequence& seq, int t);

// Saddles of J_{max(t-1,1)} for t = 1..T+2 in one pass (the T+2 entry is the
// comparator of the static regret, the saddle of J_{T+1}).
std::vector<PointPair> smoothed_saddle_path(const ProblemSequence& seq);

struct LedgerRow {
  int t = 0;
  double f_value = 0;         // f_t(z_t), noiseless
  double f_star = 0;          // f_t(x*_t, y*_t)
  double f_at_ssp_comp = 0;   // f_t(u*_{T+1}, v*_{T+1})
  double dist2_star = 0;      // ||z_t - z*_t||^2
  double dist2_smoothed = 0;  // ||z_{t-1} - (u*_t, v*_t)||^2
  double merit_w = 0;         // f_t(x_t, y*_t) - f_t(x*_t, y_t)
};

// Per-step trajectory record from which every regret notion is computed
// post hoc; all values are noiseless, oracle noise only ever reached the
// solver's inputs.
struct RegretLedger {
  std::vector<LedgerRow> rows;
  double L = 0;   // sequence value-Lipschitz constant
  double mu = 0;  // sequence strong convexity modulus
  // True when L bounds the gradients everywhere the iterates can live
  // (bounded feasible sets). The Lipschitz cross-checks only fire then; on
  // unconstrained sequences L is a reference-ball constant and divergent
  // iterates may leave it.
  bool lipschitz_global = false;
};

RegretLedger build_ledger(const ProblemSequence& seq, const Trajectory& traj);

double ssp_regret(const RegretLedger& ledger);
double spp_regret(const RegretLedger& ledger);
double dspp_regret(const RegretLedger& ledger);
double dspf_regret(const RegretLedger& ledger);  // also checks DSPF <= 2L sqrt(T DSPP)
double dspm_regret(const RegretLedger& ledger);  // also checks DSPM <= 2L^2 DSPP
double dsp_regret(const RegretLedger& ledger);   // also checks DSP <= DSPF

// All six notions in CSV emission order.
struct RegretSummary {
  double ssp, spp, dspp, dspf, dspm, dsp;
};
RegretSummary all_regrets(const RegretLedger& ledger);

}  // namespace nssaddle
