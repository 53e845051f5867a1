#include "nssaddle/sequence.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

namespace nssaddle {

namespace {

using ordered_json = nlohmann::ordered_json;

// Offsets of the drifting centers relative to (a0, b0), before budget
// rescaling. One entry per t = 1..T+1.
struct RawDrift {
  std::vector<Vec> da, db;
};

Vec unit_diagonal(int d) {
  return Vec::Constant(d, 1.0 / std::sqrt(static_cast<double>(d)));
}

RawDrift generate_offsets(const SequenceSpec& spec) {
  const int n = spec.horizon + 1;
  RawDrift out;
  out.da.assign(n, Vec::Zero(spec.d_x));
  out.db.assign(n, Vec::Zero(spec.d_y));
  const DriftSpec& dr = spec.drift;
  switch (dr.kind) {
    case DriftKind::kStatic:
      break;
    case DriftKind::kSinusoidal: {
      const double period = dr.period > 0 ? dr.period : std::max(2, spec.horizon / 4);
      const Vec ua = unit_diagonal(spec.d_x);
      const Vec ub = unit_diagonal(spec.d_y);
      for (int t = 1; t <= n; ++t) {
        const double ph = 2.0 * M_PI * static_cast<double>(t) / period;
        out.da[t - 1] = dr.amplitude * std::sin(ph) * ua;
        out.db[t - 1] = dr.amplitude * std::cos(ph) * ub;
      }
      break;
    }
    case DriftKind::kRandomWalk: {
      Rng walk = Rng(dr.seed).fork(rng_tag::kDrift);
      Vec cur_a = Vec::Zero(spec.d_x), cur_b = Vec::Zero(spec.d_y);
      std::uint64_t ctr = 0;
      for (int t = 1; t <= n; ++t) {
        for (int i = 0; i < spec.d_x; ++i) cur_a[i] += dr.step_scale * walk.normal(ctr++);
        for (int j = 0; j < spec.d_y; ++j) cur_b[j] += dr.step_scale * walk.normal(ctr++);
        out.da[t - 1] = cur_a;
        out.db[t - 1] = cur_b;
      }
      break;
    }
    case DriftKind::kJumps: {
      const int k = std::max(1, dr.count);
      const Vec ua = unit_diagonal(spec.d_x);
      const Vec ub = unit_diagonal(spec.d_y);
      // Jump times spread evenly over (1, n]; segments alternate around the
      // base centers so each jump moves them by `magnitude`.
      std::vector<int> jump_at(static_cast<std::size_t>(k));
      for (int j = 1; j <= k; ++j)
        jump_at[static_cast<std::size_t>(j - 1)] =
            1 + static_cast<int>(std::lround(static_cast<double>(j) * (n - 1) / (k + 1.0)));
      std::size_t next_jump = 0;
      int seg = 0;
      for (int t = 1; t <= n; ++t) {
        while (next_jump < jump_at.size() && t >= jump_at[next_jump]) {
          ++seg;
          ++next_jump;
        }
        const double sgn = (seg % 2 == 0) ? -1.0 : 1.0;
        out.da[t - 1] = 0.5 * dr.magnitude * sgn * ua;
        out.db[t - 1] = 0.5 * dr.magnitude * sgn * ub;
      }
      break;
    }
  }
  return out;
}

}  // namespace

ProblemSequence::ProblemSequence(SequenceSpec spec) : spec_(std::move(spec)) {
  if (spec_.horizon < 1) throw Error("bad-sequence", "horizon must be >= 1");
  if (spec_.d_x < 1 || spec_.d_y < 1) throw Error("bad-sequence", "dimensions must be >= 1");
  if (spec_.a0.size() == 0) spec_.a0 = Vec::Zero(spec_.d_x);
  if (spec_.b0.size() == 0) spec_.b0 = Vec::Zero(spec_.d_y);
  if (spec_.coupling.size() == 0) spec_.coupling = Mat::Zero(spec_.d_x, spec_.d_y);
  if (spec_.coupling.rows() != spec_.d_x || spec_.coupling.cols() != spec_.d_y)
    throw Error("bad-sequence", "coupling must be d_x x d_y");
  if (spec_.set_x.dim() == 0 && spec_.d_x > 0) spec_.set_x = FeasibleSet::unconstrained(spec_.d_x);
  if (spec_.set_y.dim() == 0 && spec_.d_y > 0) spec_.set_y = FeasibleSet::unconstrained(spec_.d_y);
  if (spec_.w_budget && !(spec_.set_x.bounded() && spec_.set_y.bounded()))
    throw Error("WT-undefined-unbounded", "w_budget requires bounded feasible sets");
  build();
}

void ProblemSequence::build() {
  const int n = spec_.horizon + 1;
  RawDrift raw = generate_offsets(spec_);

  // Saddle positions are affine in the centers, so scaling the offsets by s
  // scales the saddle drift by s and V_T by s^2 exactly.
  Mat M = spec_.mu_x * Mat::Identity(spec_.d_x, spec_.d_x) +
          spec_.coupling * spec_.coupling.transpose() / spec_.mu_y;
  Eigen::LLT<Mat> llt(M);

  auto saddle_of = [&](const Vec& a, const Vec& b) {
    Vec xs = llt.solve(spec_.mu_x * a - spec_.coupling * b);
    Vec ys = b + spec_.coupling.transpose() * xs / spec_.mu_y;
    return PointPair(std::move(xs), std::move(ys));
  };

  auto vt_at_scale = [&](double s) {
    double vt = 0;
    PointPair prev = saddle_of(spec_.a0 + s * raw.da[0], spec_.b0 + s * raw.db[0]);
    for (int t = 2; t <= n; ++t) {
      PointPair cur = saddle_of(spec_.a0 + s * raw.da[t - 1], spec_.b0 + s * raw.db[t - 1]);
      vt += cur.squared_distance(prev);
      prev = std::move(cur);
    }
    return vt;
  };

  auto wt_at_scale = [&](double s) {
    double wt = 0;
    for (int t = 1; t < n; ++t) {
      Vec at = spec_.a0 + s * raw.da[t - 1], an = spec_.a0 + s * raw.da[t];
      Vec bt = spec_.b0 + s * raw.db[t - 1], bn = spec_.b0 + s * raw.db[t];
      Vec p = spec_.mu_x * (an - at);
      Vec q = -spec_.mu_y * (bn - bt);
      double c = 0.5 * spec_.mu_x * (at.squaredNorm() - an.squaredNorm()) -
                 0.5 * spec_.mu_y * (bt.squaredNorm() - bn.squaredNorm());
      double hi = c + spec_.set_x.support(p) + spec_.set_y.support(q);
      double lo = -c + spec_.set_x.support(-p) + spec_.set_y.support(-q);
      wt += std::max(hi, lo);
    }
    return wt;
  };

  double scale = 1.0;
  if (spec_.v_budget) {
    double raw_vt = vt_at_scale(1.0);
    if (raw_vt > 0) scale = std::sqrt(*spec_.v_budget / raw_vt);
  }
  if (spec_.w_budget && wt_at_scale(scale) > *spec_.w_budget) {
    double lo = 0.0, hi = scale;
    for (int it = 0; it < 200; ++it) {
      double mid = 0.5 * (lo + hi);
      (wt_at_scale(mid) <= *spec_.w_budget ? lo : hi) = mid;
    }
    scale = lo;
  }

  instances_.clear();
  instances_.reserve(n);
  saddles_.clear();
  saddles_.reserve(n);

  // Sequence-wide reference ball for the Lipschitz constants of
  // unconstrained sequences: radius 10 (max_t(||a_t|| + ||b_t||) + 1).
  double max_center = 0.0;
  for (int t = 1; t <= n; ++t) {
    Vec a = spec_.a0 + scale * raw.da[t - 1];
    Vec b = spec_.b0 + scale * raw.db[t - 1];
    max_center = std::max(max_center, a.norm() + b.norm());
  }
  const double ref_radius = 10.0 * (max_center + 1.0);

  prefix_a_.assign(n, Vec::Zero(spec_.d_x));
  prefix_b_.assign(n, Vec::Zero(spec_.d_y));
  prefix_a_sq_.assign(n, 0.0);
  prefix_b_sq_.assign(n, 0.0);
  Vec sum_a = Vec::Zero(spec_.d_x), comp_a = Vec::Zero(spec_.d_x);
  Vec sum_b = Vec::Zero(spec_.d_y), comp_b = Vec::Zero(spec_.d_y);
  double sum_a_sq = 0, comp_a_sq = 0, sum_b_sq = 0, comp_b_sq = 0;
  auto kahan_add = [](double& sum, double& comp, double v) {
    double y = v - comp;
    double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  };

  exact_vt_ = 0.0;
  for (int t = 1; t <= n; ++t) {
    Vec a = spec_.a0 + scale * raw.da[t - 1];
    Vec b = spec_.b0 + scale * raw.db[t - 1];
    for (int i = 0; i < spec_.d_x; ++i) kahan_add(sum_a[i], comp_a[i], a[i]);
    for (int j = 0; j < spec_.d_y; ++j) kahan_add(sum_b[j], comp_b[j], b[j]);
    kahan_add(sum_a_sq, comp_a_sq, a.squaredNorm());
    kahan_add(sum_b_sq, comp_b_sq, b.squaredNorm());
    prefix_a_[t - 1] = sum_a;
    prefix_b_[t - 1] = sum_b;
    prefix_a_sq_[t - 1] = sum_a_sq;
    prefix_b_sq_[t - 1] = sum_b_sq;

    instances_.emplace_back(a, b, spec_.mu_x, spec_.mu_y, spec_.coupling, spec_.sigma,
                            spec_.set_x, spec_.set_y, ref_radius);
    saddles_.push_back(saddle_of(a, b));
    if (t >= 2) exact_vt_ += saddles_[t - 1].squared_distance(saddles_[t - 2]);
  }

  // Sequence-wide constants: curvature and coupling are shared; take the
  // worst-case Lipschitz constants over the rounds.
  constants_ = instances_.front().constants();
  for (const auto& inst : instances_) {
    const ProblemConstants& c = inst.constants();
    constants_.L_x = std::max(constants_.L_x, c.L_x);
    constants_.L_y = std::max(constants_.L_y, c.L_y);
  }
  constants_.L = std::max(constants_.L_x, constants_.L_y);
}

double ProblemSequence::measure_wt() const {
  if (!(spec_.set_x.bounded() && spec_.set_y.bounded()))
    throw Error("WT-undefined-unbounded", "W_T requires bounded feasible sets");
  double wt = 0;
  for (int t = 1; t <= spec_.horizon; ++t) {
    const auto& cur = instances_[t - 1];
    const auto& nxt = instances_[t];
    Vec p = spec_.mu_x * (nxt.a() - cur.a());
    Vec q = -spec_.mu_y * (nxt.b() - cur.b());
    double c = 0.5 * spec_.mu_x * (cur.a().squaredNorm() - nxt.a().squaredNorm()) -
               0.5 * spec_.mu_y * (cur.b().squaredNorm() - nxt.b().squaredNorm());
    double hi = c + spec_.set_x.support(p) + spec_.set_y.support(q);
    double lo = -c + spec_.set_x.support(-p) + spec_.set_y.support(-q);
    wt += std::max(hi, lo);
  }
  return wt;
}

Vec ProblemSequence::mean_a(int t) const { return prefix_a_.at(t - 1) / static_cast<double>(t); }
Vec ProblemSequence::mean_b(int t) const { return prefix_b_.at(t - 1) / static_cast<double>(t); }
double ProblemSequence::mean_a_sqnorm(int t) const {
  return prefix_a_sq_.at(t - 1) / static_cast<double>(t);
}
double ProblemSequence::mean_b_sqnorm(int t) const {
  return prefix_b_sq_.at(t - 1) / static_cast<double>(t);
}

std::string drift_kind_name(DriftKind k) {
  switch (k) {
    case DriftKind::kStatic: return "static";
    case DriftKind::kSinusoidal: return "sinusoidal";
    case DriftKind::kRandomWalk: return "random-walk";
    case DriftKind::kJumps: return "jumps";
  }
  return "static";
}

DriftKind drift_kind_from_name(const std::string& s) {
  if (s == "static") return DriftKind::kStatic;
  if (s == "sinusoidal") return DriftKind::kSinusoidal;
  if (s == "random-walk") return DriftKind::kRandomWalk;
  if (s == "jumps") return DriftKind::kJumps;
  throw Error("bad-sequence", "unknown drift kind: " + s);
}

namespace {

ordered_json set_to_json(const FeasibleSet& s) {
  ordered_json j;
  switch (s.kind()) {
    case FeasibleSet::Kind::kUnconstrained:
      j["kind"] = "unconstrained";
      j["dim"] = s.dim();
      break;
    case FeasibleSet::Kind::kBox:
      j["kind"] = "box";
      j["lower"] = std::vector<double>(s.lower().data(), s.lower().data() + s.dim());
      j["upper"] = std::vector<double>(s.upper().data(), s.upper().data() + s.dim());
      break;
    case FeasibleSet::Kind::kBall:
      j["kind"] = "ball";
      j["center"] = std::vector<double>(s.center().data(), s.center().data() + s.dim());
      j["radius"] = s.radius();
      break;
  }
  return j;
}

FeasibleSet set_from_json(const ordered_json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "unconstrained") return FeasibleSet::unconstrained(j.at("dim").get<int>());
  if (kind == "box") {
    auto lo = j.at("lower").get<std::vector<double>>();
    auto up = j.at("upper").get<std::vector<double>>();
    return FeasibleSet::box(Eigen::Map<Vec>(lo.data(), static_cast<int>(lo.size())),
                            Eigen::Map<Vec>(up.data(), static_cast<int>(up.size())));
  }
  if (kind == "ball") {
    auto c = j.at("center").get<std::vector<double>>();
    return FeasibleSet::ball(Eigen::Map<Vec>(c.data(), static_cast<int>(c.size())),
                             j.at("radius").get<double>());
  }
  throw Error("bad-sequence", "unknown set kind: " + kind);
}

}  // namespace

std::string sequence_spec_to_json(const SequenceSpec& s) {
  ordered_json j;
  j["version"] = "nssaddle-problem-v1";
  j["horizon"] = s.horizon;
  j["d_x"] = s.d_x;
  j["d_y"] = s.d_y;
  j["mu_x"] = s.mu_x;
  j["mu_y"] = s.mu_y;
  std::vector<double> coupling;
  coupling.reserve(static_cast<std::size_t>(s.d_x) * s.d_y);
  for (int i = 0; i < s.d_x; ++i)
    for (int jj = 0; jj < s.d_y; ++jj) coupling.push_back(s.coupling(i, jj));
  j["coupling"] = coupling;
  ordered_json dj;
  dj["kind"] = drift_kind_name(s.drift.kind);
  dj["amplitude"] = s.drift.amplitude;
  dj["period"] = s.drift.period;
  dj["step_scale"] = s.drift.step_scale;
  dj["seed"] = s.drift.seed;
  dj["count"] = s.drift.count;
  dj["magnitude"] = s.drift.magnitude;
  j["drift"] = dj;
  ordered_json sets;
  sets["x"] = set_to_json(s.set_x);
  sets["y"] = set_to_json(s.set_y);
  j["sets"] = sets;
  j["sigma"] = s.sigma;
  j["seed"] = s.seed;
  if (s.a0.size()) j["a0"] = std::vector<double>(s.a0.data(), s.a0.data() + s.a0.size());
  if (s.b0.size()) j["b0"] = std::vector<double>(s.b0.data(), s.b0.data() + s.b0.size());
  if (s.v_budget) j["v_budget"] = *s.v_budget;
  if (s.w_budget) j["w_budget"] = *s.w_budget;
  return j.dump(2);
}

std::string ProblemSequence::to_json() const { return sequence_spec_to_json(spec_); }

SequenceSpec ProblemSequence::spec_from_json(const std::string& doc) {
  ordered_json j = ordered_json::parse(doc);
  if (j.at("version").get<std::string>() != "nssaddle-problem-v1")
    throw Error("bad-sequence", "unsupported problem document version");
  SequenceSpec s;
  s.horizon = j.at("horizon").get<int>();
  s.d_x = j.at("d_x").get<int>();
  s.d_y = j.at("d_y").get<int>();
  s.mu_x = j.at("mu_x").get<double>();
  s.mu_y = j.at("mu_y").get<double>();
  auto coupling = j.at("coupling").get<std::vector<double>>();
  if (coupling.size() != static_cast<std::size_t>(s.d_x) * s.d_y)
    throw Error("bad-sequence", "coupling length must be d_x*d_y");
  s.coupling = Mat(s.d_x, s.d_y);
  for (int i = 0; i < s.d_x; ++i)
    for (int jj = 0; jj < s.d_y; ++jj)
      s.coupling(i, jj) = coupling[static_cast<std::size_t>(i) * s.d_y + jj];
  const auto& dj = j.at("drift");
  s.drift.kind = drift_kind_from_name(dj.at("kind").get<std::string>());
  s.drift.amplitude = dj.value("amplitude", 0.0);
  s.drift.period = dj.value("period", 0.0);
  s.drift.step_scale = dj.value("step_scale", 0.0);
  s.drift.seed = dj.value("seed", static_cast<std::uint64_t>(0));
  s.drift.count = dj.value("count", 0);
  s.drift.magnitude = dj.value("magnitude", 0.0);
  s.set_x = set_from_json(j.at("sets").at("x"));
  s.set_y = set_from_json(j.at("sets").at("y"));
  s.sigma = j.at("sigma").get<double>();
  s.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("a0")) {
    auto a0 = j.at("a0").get<std::vector<double>>();
    s.a0 = Eigen::Map<Vec>(a0.data(), static_cast<int>(a0.size()));
  }
  if (j.contains("b0")) {
    auto b0 = j.at("b0").get<std::vector<double>>();
    s.b0 = Eigen::Map<Vec>(b0.data(), static_cast<int>(b0.size()));
  }
  if (j.contains("v_budget")) s.v_budget = j.at("v_budget").get<double>();
  if (j.contains("w_budget")) s.w_budget = j.at("w_budget").get<double>();
  return s;
}

ProblemSequence ProblemSequence::from_json(const std::string& doc) {
  return ProblemSequence(spec_from_json(doc));
}

}  // namespace nssaddle
