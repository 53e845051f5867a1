#include "nssaddle/regret.hpp"

#include <cmath>

namespace nssaddle {

namespace {

// Compensated running sum.
struct Kahan {
  double sum = 0, comp = 0;
  void add(double v) {
    double y = v - comp;
    double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
};

PointPair averaged_saddle(const ProblemSequence& seq, const Eigen::LLT<Mat>& llt, int upto) {
  const SequenceSpec& s = seq.spec();
  Vec ma = seq.mean_a(upto), mb = seq.mean_b(upto);
  Vec xs = llt.solve(s.mu_x * ma - s.coupling * mb);
  Vec ys = mb + s.coupling.transpose() * xs / s.mu_y;
  return PointPair(std::move(xs), std::move(ys));
}

void check_interior(const ProblemSequence& seq, const PointPair& z) {
  if (seq.spec().set_x.interior_margin(z.x) <= 1e-12 ||
      seq.spec().set_y.interior_margin(z.y) <= 1e-12)
    throw Error("saddle-not-interior", "smoothed saddle left the strict interior");
}

}  // namespace

SmoothedComparator smoothed_saddle(const ProblemSequence& seq, int t) {
  if (t < 1 || t > seq.horizon() + 2)
    throw Error("bad-round", "comparator index out of [1, T+2]");
  const SequenceSpec& s = seq.spec();
  const int upto = std::max(1, std::min(t - 1, seq.horizon() + 1));
  Vec ma = seq.mean_a(upto), mb = seq.mean_b(upto);
  // mean_i (mu_x/2)||x - a_i||^2 = (mu_x/2)||x - mean a||^2 + offset_x.
  const double off = 0.5 * s.mu_x * (seq.mean_a_sqnorm(upto) - ma.squaredNorm()) -
                     0.5 * s.mu_y * (seq.mean_b_sqnorm(upto) - mb.squaredNorm());
  SmoothedComparator out{
      t,
      QuadraticSaddleInstance(ma, mb, s.mu_x, s.mu_y, s.coupling, s.sigma, s.set_x, s.set_y),
      off,
      PointPair()};
  out.saddle = out.averaged.saddle_point();  // throws saddle-not-interior
  return out;
}

std::vector<PointPair> smoothed_saddle_path(const ProblemSequence& seq) {
  const SequenceSpec& s = seq.spec();
  Mat M = s.mu_x * Mat::Identity(s.d_x, s.d_x) + s.coupling * s.coupling.transpose() / s.mu_y;
  Eigen::LLT<Mat> llt(M);
  std::vector<PointPair> out;
  out.reserve(static_cast<std::size_t>(seq.horizon()) + 2);
  for (int t = 1; t <= seq.horizon() + 2; ++t) {
    const int upto = std::max(1, std::min(t - 1, seq.horizon() + 1));
    PointPair p = averaged_saddle(seq, llt, upto);
    check_interior(seq, p);
    out.push_back(std::move(p));
  }
  return out;
}

RegretLedger build_ledger(const ProblemSequence& seq, const Trajectory& traj) {
  const int T = seq.horizon();
  if (static_cast<int>(traj.rows.size()) != T)
    throw Error("ledger-mismatch", "trajectory length must equal the sequence horizon");

  std::vector<PointPair> smoothed = smoothed_saddle_path(seq);
  const PointPair& ssp_comp = smoothed[static_cast<std::size_t>(T)];  // saddle of J_T

  RegretLedger ledger;
  ledger.L = seq.constants().L;
  ledger.mu = seq.constants().mu;
  ledger.lipschitz_global = seq.bounded();
  ledger.rows.reserve(static_cast<std::size_t>(T));
  for (int t = 1; t <= T; ++t) {
    const QuadraticSaddleInstance& inst = seq.instance(t);
    const PointPair& z = traj.rows[static_cast<std::size_t>(t - 1)].z;
    const PointPair& z_prev = traj.rows[static_cast<std::size_t>(std::max(t - 2, 0))].z;
    const PointPair& star = seq.saddle(t);
    LedgerRow row;
    row.t = t;
    row.f_value = inst.value_noiseless(z);
    row.f_star = inst.value_noiseless(star);
    row.f_at_ssp_comp = inst.value_noiseless(ssp_comp);
    row.dist2_star = z.squared_distance(star);
    row.dist2_smoothed = z_prev.squared_distance(smoothed[static_cast<std::size_t>(t - 1)]);
    row.merit_w = merit(inst, z, star).w;
    ledger.rows.push_back(row);
  }
  return ledger;
}

double ssp_regret(const RegretLedger& ledger) {
  Kahan acc;
  for (const LedgerRow& r : ledger.rows) acc.add(r.f_value - r.f_at_ssp_comp);
  return std::abs(acc.sum);
}

double spp_regret(const RegretLedger& ledger) {
  Kahan acc;
  for (const LedgerRow& r : ledger.rows) acc.add(r.dist2_smoothed);
  return acc.sum;
}

double dspp_regret(const RegretLedger& ledger) {
  Kahan acc;
  for (const LedgerRow& r : ledger.rows) acc.add(r.dist2_star);
  return acc.sum;
}

double dspf_regret(const RegretLedger& ledger) {
  Kahan acc;
  for (const LedgerRow& r : ledger.rows) acc.add(std::abs(r.f_value - r.f_star));
  const double dspf = acc.sum;
  if (ledger.lipschitz_global) {
    const double chain = 2.0 * ledger.L *
                         std::sqrt(static_cast<double>(ledger.rows.size()) * dspp_regret(ledger));
    if (dspf > chain * (1.0 + 1e-9) + 1e-12)
      throw Error("regret-chain-violated", "DSPF exceeded 2 L sqrt(T DSPP)");
  }
  return dspf;
}

double dspm_regret(const RegretLedger& ledger) {
  Kahan acc;
  for (const LedgerRow& r : ledger.rows) {
    const double g = r.f_value - r.f_star;
    acc.add(g * g);
  }
  const double dspm = acc.sum;
  if (ledger.lipschitz_global) {
    const double chain = 2.0 * ledger.L * ledger.L * dspp_regret(ledger);
    if (dspm > chain * (1.0 + 1e-9) + 1e-12)
      throw Error("regret-chain-violated", "DSPM exceeded 2 L^2 DSPP");
  }
  return dspm;
}

double dsp_regret(const RegretLedger& ledger) {
  Kahan acc;
  for (const LedgerRow& r : ledger.rows) acc.add(r.f_value - r.f_star);
  const double dsp = std::abs(acc.sum);
  Kahan abs_acc;
  for (const LedgerRow& r : ledger.rows) abs_acc.add(std::abs(r.f_value - r.f_star));
  if (dsp > abs_acc.sum * (1.0 + 1e-9) + 1e-12)
    throw Error("regret-chain-violated", "DSP exceeded DSPF");
  return dsp;
}

RegretSummary all_regrets(const RegretLedger& ledger) {
  return RegretSummary{ssp_regret(ledger),  spp_regret(ledger),  dspp_regret(ledger),
                       dspf_regret(ledger), dspm_regret(ledger), dsp_regret(ledger)};
}

}  // namespace nssaddle
