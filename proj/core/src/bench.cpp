#include "nssaddle/bench.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "nssaddle/solvers_eg.hpp"
#include "nssaddle/solvers_fw.hpp"

namespace nssaddle {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Vec json_vec(const ordered_json& j) {
  auto v = j.get<std::vector<double>>();
  return Eigen::Map<Vec>(v.data(), static_cast<int>(v.size()));
}

}  // namespace

void parallel_for(int n, int jobs, const std::function<void(int)>& body) {
  if (n <= 0) return;
  int workers = jobs > 0 ? jobs : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::max(1, std::min(workers, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex err_mu;
  auto run = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(run);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

ExperimentConfig config_from_json(const std::string& text) {
  ordered_json j = ordered_json::parse(text);
  ExperimentConfig cfg;
  if (j.contains("problem")) {
    const ordered_json& p = j.at("problem");
    if (p.contains("path")) {
      std::ifstream in(p.at("path").get<std::string>());
      if (!in) throw Error("config-error", "cannot open problem file");
      std::stringstream ss;
      ss << in.rdbuf();
      cfg.problem = ProblemSequence::spec_from_json(ss.str());
    } else {
      cfg.problem = ProblemSequence::spec_from_json(p.dump());
    }
  } else {
    throw Error("config-error", "config requires a problem block");
  }
  cfg.solver = j.at("solver").get<std::string>();
  cfg.schedule = j.at("schedule").get<std::string>();
  cfg.order = j.value("order", std::string("first"));
  cfg.alpha = j.value("alpha", 0.25);
  cfg.beta = j.value("beta", 0.25);
  cfg.epsilon = j.value("epsilon", 0.0);
  cfg.eta = j.value("eta", 0.0);
  cfg.m = j.value("m", 1);
  cfg.nu = j.value("nu", 0.0);
  cfg.horizons = j.at("horizons").get<std::vector<int>>();
  if (j.contains("seeds")) cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  else {
    const int n = j.value("runs_per_point", 1);
    const std::uint64_t base = j.value("seed_base", static_cast<std::uint64_t>(1));
    for (int i = 0; i < n; ++i) cfg.seeds.push_back(base + static_cast<std::uint64_t>(i));
  }
  if (j.contains("x0")) cfg.x0 = json_vec(j.at("x0"));
  if (j.contains("y0")) cfg.y0 = json_vec(j.at("y0"));
  auto rule = [&](const char* coef, const char* expo) -> std::optional<PowerRule> {
    if (!j.contains(coef)) return std::nullopt;
    return PowerRule{j.at(coef).get<double>(), j.value(expo, 0.0)};
  };
  cfg.v_budget_rule = rule("v_budget_coef", "v_budget_exp");
  cfg.w_budget_rule = rule("w_budget_coef", "w_budget_exp");
  cfg.jumps_count_rule = rule("jumps_count_coef", "jumps_count_exp");
  cfg.out = j.value("out", std::string("results.csv"));
  cfg.jobs = j.value("jobs", 0);
  cfg.timings = j.value("timings", false);
  return cfg;
}

std::string config_to_json(const ExperimentConfig& cfg) {
  ordered_json j;
  j["problem"] = ordered_json::parse(sequence_spec_to_json(cfg.problem));
  j["solver"] = cfg.solver;
  j["schedule"] = cfg.schedule;
  j["order"] = cfg.order;
  j["alpha"] = cfg.alpha;
  j["beta"] = cfg.beta;
  j["horizons"] = cfg.horizons;
  j["seeds"] = cfg.seeds;
  j["out"] = cfg.out;
  j["jobs"] = cfg.jobs;
  j["timings"] = cfg.timings;
  return j.dump(2);
}

namespace {

struct CellResult {
  int T = 0;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, double>> values;  // regret kind -> value
  std::int64_t oracle_calls = 0;
  double wall_ms = 0;
};

SequenceSpec spec_for_horizon(const ExperimentConfig& cfg, int T) {
  SequenceSpec s = cfg.problem;
  s.horizon = T;
  if (cfg.v_budget_rule) s.v_budget = cfg.v_budget_rule->at(T);
  if (cfg.w_budget_rule) s.w_budget = cfg.w_budget_rule->at(T);
  if (cfg.jumps_count_rule)
    s.drift.count = std::max(1, static_cast<int>(std::lround(cfg.jumps_count_rule->at(T))));
  return s;
}

Order order_from_string(const std::string& s) {
  if (s == "zeroth") return Order::kZeroth;
  if (s == "first") return Order::kFirst;
  throw Error("config-error", "order must be zeroth or first");
}

PointPair start_point(const ExperimentConfig& cfg, const ProblemSequence& seq) {
  Vec x = cfg.x0.size() ? cfg.x0 : Vec::Zero(seq.spec().d_x);
  Vec y = cfg.y0.size() ? cfg.y0 : Vec::Zero(seq.spec().d_y);
  if (x.size() != seq.spec().d_x || y.size() != seq.spec().d_y)
    throw Error("config-error", "x0/y0 dimensions do not match the problem");
  return PointPair(std::move(x), std::move(y));
}

CellResult run_cell(const ExperimentConfig& cfg, const ProblemSequence& seq, int T,
                    std::uint64_t seed) {
  CellResult out;
  out.T = T;
  out.seed = seed;
  const Rng run_rng(seed);
  const Order order = order_from_string(cfg.order);

  if (cfg.solver == "fw-offline") {
    OfflineFwConfig fw;
    fw.iterations = T;
    fw.order = order;
    if (cfg.schedule == "spfw-th1a") {
      fw.step_mode = FwStepMode::kNonAdaptive;
      fw.rule = OfflineFwConfig::Rule::kTheorem1N;
    } else if (cfg.schedule == "spfw-th1a-adaptive") {
      fw.step_mode = FwStepMode::kAdaptive;
      fw.rule = OfflineFwConfig::Rule::kTheorem1N;
    } else if (cfg.schedule == "spfw-th1b-adaptive") {
      fw.step_mode = FwStepMode::kAdaptive;
      fw.rule = OfflineFwConfig::Rule::kTheorem1Eps;
      fw.epsilon = cfg.epsilon;
    } else if (cfg.schedule == "spfw-custom") {
      fw.step_mode = FwStepMode::kNonAdaptive;
      fw.rule = OfflineFwConfig::Rule::kCustom;
      fw.m_x = fw.m_y = cfg.m;
      fw.nu_x = fw.nu_y = cfg.nu;
    } else {
      throw Error("config-error", "unknown fw-offline schedule: " + cfg.schedule);
    }
    const QuadraticSaddleInstance& inst = seq.instance(1);
    FWRunReport rep = spfw_offline(inst, fw, start_point(cfg, seq), run_rng);
    out.oracle_calls = rep.total_consumed;
    out.values = {{"w_final", rep.iters.back().w},
                  {"g_hat_expected", rep.expected_g_hat_pr},
                  {"g_hat_at_r", rep.g_hat_at_R},
                  {"w_plus_g", rep.iters.back().w + rep.expected_g_hat_pr}};
    return out;
  }

  Trajectory traj;
  if (cfg.solver == "eg") {
    EGSchedule sched = [&] {
      if (cfg.schedule == "static-th2a-light") return EGSchedule::static_th2a_light(cfg.alpha);
      if (cfg.schedule == "static-th2a-heavy") return EGSchedule::static_th2a_heavy(cfg.alpha);
      if (cfg.schedule == "static-th2b-light") return EGSchedule::static_th2b_light(cfg.alpha);
      if (cfg.schedule == "static-th2b-heavy") return EGSchedule::static_th2b_heavy(cfg.alpha);
      if (cfg.schedule == "dynamic-th4-light")
        return EGSchedule::dynamic_th4_light(order, cfg.alpha, cfg.beta);
      if (cfg.schedule == "dynamic-th4-heavy")
        return EGSchedule::dynamic_th4_heavy(order, cfg.alpha, cfg.beta);
      if (cfg.schedule == "custom-eg") {
        StepParams p;
        p.eta = cfg.eta;
        p.m_x = p.m_y = cfg.m;
        p.nu_x = p.nu_y = cfg.nu;
        return EGSchedule::custom(Mode::kDynamic, order,
                                  [p](int, const ProblemSequence&) { return p; });
      }
      throw Error("config-error", "unknown eg schedule: " + cfg.schedule);
    }();
    traj = run_eg(seq, sched, start_point(cfg, seq), run_rng);
  } else if (cfg.solver == "gda") {
    GdaSchedule sched = cfg.schedule == "gda-th6"
                            ? GdaSchedule::theorem6(order)
                            : GdaSchedule::custom(order, cfg.eta, cfg.m, cfg.nu);
    if (cfg.schedule != "gda-th6" && cfg.schedule != "gda-custom")
      throw Error("config-error", "unknown gda schedule: " + cfg.schedule);
    traj = run_gda(seq, sched, start_point(cfg, seq), run_rng);
  } else if (cfg.solver == "fw-online") {
    FwOnlineSchedule sched = [&] {
      if (cfg.schedule == "fw-static-th3") return FwOnlineSchedule::static_th3(order);
      if (cfg.schedule == "fw-dynamic-th5") return FwOnlineSchedule::dynamic_th5(order);
      throw Error("config-error", "unknown fw-online schedule: " + cfg.schedule);
    }();
    traj = run_fw_online(seq, sched, start_point(cfg, seq), run_rng);
  } else {
    throw Error("config-error", "unknown solver: " + cfg.solver);
  }

  RegretLedger ledger = build_ledger(seq, traj);
  RegretSummary reg = all_regrets(ledger);
  out.oracle_calls = traj.total_consumed;
  out.wall_ms = traj.wall_ms;
  out.values = {{"ssp", reg.ssp},   {"spp", reg.spp},   {"dspp", reg.dspp},
                {"dspf", reg.dspf}, {"dspm", reg.dspm}, {"dsp", reg.dsp}};
  return out;
}

}  // namespace

std::string run_experiment_csv(const ExperimentConfig& cfg) {
  if (cfg.horizons.empty()) throw Error("config-error", "horizons must be nonempty");
  for (std::size_t i = 1; i < cfg.horizons.size(); ++i)
    if (cfg.horizons[i] <= cfg.horizons[i - 1])
      throw Error("config-error", "horizons must be strictly increasing");
  if (cfg.seeds.empty()) throw Error("config-error", "seeds must be nonempty");
  for (std::size_t i = 0; i < cfg.seeds.size(); ++i)
    for (std::size_t k = i + 1; k < cfg.seeds.size(); ++k)
      if (cfg.seeds[i] == cfg.seeds[k]) throw Error("config-error", "seeds must be distinct");

  // Sequences are shared per horizon; cells only read them.
  std::vector<std::unique_ptr<ProblemSequence>> sequences;
  sequences.reserve(cfg.horizons.size());
  for (int T : cfg.horizons)
    sequences.push_back(std::make_unique<ProblemSequence>(spec_for_horizon(cfg, T)));

  const int n_cells = static_cast<int>(cfg.horizons.size() * cfg.seeds.size());
  std::vector<CellResult> results(static_cast<std::size_t>(n_cells));
  parallel_for(n_cells, cfg.jobs, [&](int i) {
    const std::size_t hi = static_cast<std::size_t>(i) / cfg.seeds.size();
    const std::size_t si = static_cast<std::size_t>(i) % cfg.seeds.size();
    results[static_cast<std::size_t>(i)] =
        run_cell(cfg, *sequences[hi], cfg.horizons[hi], cfg.seeds[si]);
  });

  std::string csv = "solver,schedule,T,seed,regret_kind,value,oracle_calls,wall_ms\n";
  for (const CellResult& r : results) {
    for (const auto& [kind, value] : r.values) {
      csv += cfg.solver;
      csv += ',';
      csv += cfg.schedule;
      csv += ',';
      csv += std::to_string(r.T);
      csv += ',';
      csv += std::to_string(r.seed);
      csv += ',';
      csv += kind;
      csv += ',';
      csv += fmt17(value);
      csv += ',';
      csv += std::to_string(r.oracle_calls);
      csv += ',';
      csv += cfg.timings ? fmt17(r.wall_ms) : "0";
      csv += '\n';
    }
  }
  return csv;
}

void run_experiment(const ExperimentConfig& cfg, const std::string& out_path) {
  const std::string csv = run_experiment_csv(cfg);
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw Error("io-error", "cannot open output file " + out_path);
  out << csv;
}

namespace {

struct CsvRow {
  std::string solver, schedule, kind;
  int T = 0;
  std::uint64_t seed = 0;
  double value = 0;
};

std::vector<CsvRow> parse_csv(const std::string& text) {
  std::vector<CsvRow> rows;
  std::istringstream in(text);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (header) {
      header = false;
      continue;
    }
    if (line.empty()) continue;
    std::array<std::string, 8> cols;
    std::size_t start = 0;
    for (int c = 0; c < 8; ++c) {
      const std::size_t pos = c < 7 ? line.find(',', start) : line.size();
      if (pos == std::string::npos) throw Error("csv-error", "malformed CSV row");
      cols[static_cast<std::size_t>(c)] = line.substr(start, pos - start);
      start = pos + 1;
    }
    CsvRow r;
    r.solver = cols[0];
    r.schedule = cols[1];
    r.T = std::stoi(cols[2]);
    r.seed = std::stoull(cols[3]);
    r.kind = cols[4];
    r.value = std::stod(cols[5]);
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace

SlopeFit fit_slope(const std::string& csv_text, const std::string& solver,
                   const std::string& schedule, const std::string& regret_kind) {
  std::map<int, std::vector<double>> per_t;
  for (const CsvRow& r : parse_csv(csv_text))
    if (r.solver == solver && r.schedule == schedule && r.kind == regret_kind)
      per_t[r.T].push_back(r.value);
  if (per_t.empty()) throw Error("slope-undefined", "no matching rows");

  SlopeFit fit;
  std::vector<double> xs, ys;
  for (const auto& [T, vals] : per_t) {
    double mean = 0;
    for (double v : vals) mean += v;
    mean /= static_cast<double>(vals.size());
    double var = 0;
    for (double v : vals) var += (v - mean) * (v - mean);
    const double stddev =
        vals.size() > 1 ? std::sqrt(var / static_cast<double>(vals.size() - 1)) : 0.0;
    fit.points.push_back(SlopePoint{T, mean, stddev, static_cast<int>(vals.size())});
    if (mean > 0) {
      xs.push_back(std::log(static_cast<double>(T)));
      ys.push_back(std::log(mean));
    } else {
      ++fit.dropped_nonpositive;
    }
  }
  if (xs.size() < 3)
    throw Error("slope-undefined", "need at least 3 horizons with positive mean regret");

  const double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  fit.exponent = sxy / sxx;
  fit.intercept = my - fit.exponent * mx;
  double ss_res = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double e = ys[i] - (fit.intercept + fit.exponent * xs[i]);
    ss_res += e * e;
  }
  fit.r2 = syy > 0 ? 1.0 - ss_res / syy : 1.0;
  return fit;
}

std::string plot_emit_svg(const std::string& csv_text, const std::string& solver,
                          const std::string& schedule, const std::string& regret_kind) {
  SlopeFit fit = fit_slope(csv_text, solver, schedule, regret_kind);
  const double width = 640, height = 480, margin = 60;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const SlopePoint& p : fit.points) {
    if (p.mean <= 0) continue;
    xmin = std::min(xmin, std::log10(static_cast<double>(p.T)));
    xmax = std::max(xmax, std::log10(static_cast<double>(p.T)));
    ymin = std::min(ymin, std::log10(p.mean));
    ymax = std::max(ymax, std::log10(p.mean));
  }
  if (xmax <= xmin) xmax = xmin + 1;
  if (ymax <= ymin) ymax = ymin + 1;
  auto px = [&](double lx) { return margin + (lx - xmin) / (xmax - xmin) * (width - 2 * margin); };
  auto py = [&](double ly) {
    return height - margin - (ly - ymin) / (ymax - ymin) * (height - 2 * margin);
  };
  char buf[256];
  std::string svg;
  std::snprintf(buf, sizeof(buf),
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%g\" height=\"%g\">\n", width,
                height);
  svg += buf;
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof(buf),
                "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\"/>\n", margin,
                height - margin, width - margin, height - margin);
  svg += buf;
  std::snprintf(buf, sizeof(buf),
                "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\"/>\n", margin,
                margin, margin, height - margin);
  svg += buf;
  svg += "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
  for (const SlopePoint& p : fit.points) {
    if (p.mean <= 0) continue;
    std::snprintf(buf, sizeof(buf), "%.6g,%.6g ", px(std::log10(static_cast<double>(p.T))),
                  py(std::log10(p.mean)));
    svg += buf;
  }
  svg += "\"/>\n";
  for (const SlopePoint& p : fit.points) {
    if (p.mean <= 0) continue;
    std::snprintf(buf, sizeof(buf), "<circle cx=\"%.6g\" cy=\"%.6g\" r=\"3\" fill=\"navy\"/>\n",
                  px(std::log10(static_cast<double>(p.T))), py(std::log10(p.mean)));
    svg += buf;
  }
  std::snprintf(buf, sizeof(buf),
                "<text x=\"%g\" y=\"%g\" font-family=\"monospace\" font-size=\"14\">%s/%s %s "
                "slope=%.4f r2=%.4f</text>\n",
                margin, margin - 12, solver.c_str(), schedule.c_str(), regret_kind.c_str(),
                fit.exponent, fit.r2);
  svg += buf;
  svg += "<text x=\"300\" y=\"470\" font-family=\"monospace\" font-size=\"12\">log10 T</text>\n";
  svg += "</svg>\n";
  return svg;
}

}  // namespace nssaddle
