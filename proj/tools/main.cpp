#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "nssaddle/bench.hpp"
#include "nssaddle/verify.hpp"

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw nssaddle::Error("io-error", "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stoi(tok));
  return out;
}

std::vector<std::uint64_t> parse_u64_list(const std::string& s) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stoull(tok));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nonstationary saddle-point solver benchmark harness"};
  app.require_subcommand(1);

  // run: execute a solver grid and write the CSV.
  auto* run = app.add_subcommand("run", "run an experiment grid from a JSON config");
  std::string run_config, run_out, run_seeds, run_horizons, run_solver, run_schedule;
  int run_jobs = -1;
  bool run_plot = false, run_timings = false;
  run->add_option("--config", run_config, "experiment config JSON")->required();
  run->add_option("--out", run_out, "output CSV path (overrides config)");
  run->add_option("--seeds", run_seeds, "comma-separated seed list (overrides config)");
  run->add_option("--horizons", run_horizons, "comma-separated horizons (overrides config)");
  run->add_option("--solver", run_solver, "solver id (overrides config)");
  run->add_option("--schedule", run_schedule, "schedule id (overrides config)");
  run->add_option("--jobs", run_jobs, "worker threads (0 = hardware)");
  run->add_flag("--plot", run_plot, "emit an SVG next to the CSV per regret kind");
  run->add_flag("--timings", run_timings, "record real wall_ms (breaks byte reproducibility)");

  // slope: fit a regret exponent from a CSV.
  auto* slope = app.add_subcommand("slope", "fit a log-log regret exponent from a results CSV");
  std::string slope_csv, slope_solver, slope_schedule, slope_kind;
  slope->add_option("--csv", slope_csv, "results CSV")->required();
  slope->add_option("--solver", slope_solver)->required();
  slope->add_option("--schedule", slope_schedule)->required();
  slope->add_option("--kind", slope_kind, "regret kind column value")->required();

  // plot: render a log-log curve as SVG.
  auto* plot = app.add_subcommand("plot", "render a log-log regret curve as SVG");
  std::string plot_csv, plot_solver, plot_schedule, plot_kind, plot_out = "plot.svg";
  plot->add_option("--csv", plot_csv)->required();
  plot->add_option("--solver", plot_solver)->required();
  plot->add_option("--schedule", plot_schedule)->required();
  plot->add_option("--kind", plot_kind)->required();
  plot->add_option("--out", plot_out, "output SVG path");

  // verify: run the acceptance suite.
  auto* verify = app.add_subcommand("verify", "run the acceptance suite");
  std::string verify_out, verify_criteria;
  int verify_jobs = 0;
  bool verify_quick = false;
  verify->add_option("--out", verify_out, "artifact directory for CSV/SVG/JSON outputs");
  verify->add_option("--criteria", verify_criteria, "comma-separated criterion ids (default all)");
  verify->add_option("--jobs", verify_jobs, "worker threads (0 = hardware)");
  verify->add_flag("--quick", verify_quick, "reduced deterministic grids");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      nssaddle::ExperimentConfig cfg = nssaddle::config_from_json(slurp(run_config));
      if (!run_out.empty()) cfg.out = run_out;
      if (!run_seeds.empty()) cfg.seeds = parse_u64_list(run_seeds);
      if (!run_horizons.empty()) cfg.horizons = parse_int_list(run_horizons);
      if (!run_solver.empty()) cfg.solver = run_solver;
      if (!run_schedule.empty()) cfg.schedule = run_schedule;
      if (run_jobs >= 0) cfg.jobs = run_jobs;
      if (run_timings) cfg.timings = true;
      nssaddle::run_experiment(cfg, cfg.out);
      std::cout << "wrote " << cfg.out << "\n";
      if (run_plot) {
        const std::string csv = slurp(cfg.out);
        const char* kinds[] = {"ssp", "spp", "dspp", "dspf", "dspm", "dsp"};
        for (const char* kind : kinds) {
          try {
            const std::string svg = nssaddle::plot_emit_svg(csv, cfg.solver, cfg.schedule, kind);
            const std::string path = cfg.out + "." + kind + ".svg";
            std::ofstream(path, std::ios::binary) << svg;
            std::cout << "wrote " << path << "\n";
          } catch (const nssaddle::Error&) {
            // kind absent in this CSV (e.g. offline runs); skip
          }
        }
      }
      return 0;
    }
    if (*slope) {
      nssaddle::SlopeFit fit =
          nssaddle::fit_slope(slurp(slope_csv), slope_solver, slope_schedule, slope_kind);
      std::printf("exponent %.6f intercept %.6f r2 %.6f\n", fit.exponent, fit.intercept, fit.r2);
      for (const auto& p : fit.points)
        std::printf("  T=%d mean=%.8g std=%.8g n=%d\n", p.T, p.mean, p.stddev, p.n);
      if (fit.dropped_nonpositive > 0)
        std::fprintf(stderr, "warning: dropped %d horizons with nonpositive mean regret\n",
                     fit.dropped_nonpositive);
      return 0;
    }
    if (*plot) {
      const std::string svg =
          nssaddle::plot_emit_svg(slurp(plot_csv), plot_solver, plot_schedule, plot_kind);
      std::ofstream(plot_out, std::ios::binary) << svg;
      std::cout << "wrote " << plot_out << "\n";
      return 0;
    }
    if (*verify) {
      nssaddle::VerifyOptions opts;
      opts.jobs = verify_jobs;
      opts.quick = verify_quick;
      opts.artifact_dir = verify_out;
      if (!verify_criteria.empty())
        for (int id : parse_int_list(verify_criteria)) opts.criteria.push_back(id);
      nssaddle::VerificationReport rep = nssaddle::run_verification(opts);
      for (const auto& res : rep.results)
        std::printf("[%s] %2d %-36s (%.1fs) %s\n", res.pass ? "PASS" : "FAIL", res.id,
                    res.name.c_str(), res.seconds, res.detail.c_str());
      if (verify_out.empty()) std::cout << rep.to_json() << "\n";
      std::printf("%s\n", rep.all_pass ? "ALL CRITERIA PASSED" : "CRITERIA FAILED");
      return rep.all_pass ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
