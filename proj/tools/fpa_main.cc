// Copyright 2026 The fpa Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// fpa: command-line front end.
//
// Exit codes: 0 success, 1 usage, 2 invalid input, 3 numerical failure,
// 4 timeout. Every run ends with one JSON status line on stderr.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fpa/baseline.h"
#include "fpa/descent.h"
#include "fpa/evaluate.h"
#include "fpa/experiments.h"
#include "fpa/model.h"
#include "fpa/solver.h"

namespace {

using fpa::AuctionInstance;
using fpa::Equilibrium;

enum ExitCode { kOk = 0, kUsage = 1, kInvalid = 2, kNumerical = 3, kTimeout = 4 };

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

// Writes `text` to `path`, or to stdout when path is empty.
void emit(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    std::cout.flush();
  } else {
    fpa::write_file(path, text);
  }
}

fpa::Deadline deadline_from(double seconds) {
  if (seconds > 0.0) {
    return fpa::Deadline(std::chrono::duration<double>(seconds));
  }
  return {};
}

fpa::TieBreak tie_from(const std::string& name) {
  if (name == "vickrey") return fpa::TieBreak::kVickrey;
  if (name == "uniform") return fpa::TieBreak::kUniform;
  throw fpa::ValidationError("unknown tie rule '" + name + "'");
}

struct Common {
  std::string instance;
  std::string equilibrium;
  std::string out;
  double tol = 1e-8;
  double timeout = 0.0;
};

AuctionInstance load_instance(const Common& c) {
  return fpa::parse_instance(fpa::read_file(c.instance));
}

// The equilibrium from --eq if given, else a fresh solve.
Equilibrium load_or_solve(const Common& c, const AuctionInstance& instance) {
  if (!c.equilibrium.empty()) {
    return fpa::parse_equilibrium(fpa::read_file(c.equilibrium),
                                  instance.num_buyers());
  }
  fpa::SolveOptions options;
  options.tol = c.tol;
  options.deadline = deadline_from(c.timeout);
  options.descent.deadline = options.deadline;
  return fpa::solve(instance, options).equilibrium;
}

void add_instance(CLI::App* cmd, Common& c) {
  cmd->add_option("instance", c.instance, "Instance JSON file")
      ->required();
}

void add_solve_flags(CLI::App* cmd, Common& c) {
  cmd->add_option("--tol", c.tol, "Bisection tolerance on the top bid")
      ->capture_default_str();
  cmd->add_option("--timeout", c.timeout,
                  "Wall-clock limit in seconds (0 = none)")
      ->capture_default_str();
}

void add_eq(CLI::App* cmd, Common& c) {
  cmd->add_option("--eq", c.equilibrium,
                  "Equilibrium JSON from `fpa solve` (solved afresh if "
                  "omitted)");
}

void add_out(CLI::App* cmd, Common& c, const std::string& what) {
  cmd->add_option("--out,-o", c.out, what + " (stdout if omitted)");
}

void report_status(const std::string& command,
                   std::chrono::steady_clock::time_point start, int code) {
  nlohmann::ordered_json status;
  status["command"] = command;
  status["elapsed_ms"] = std::chrono::duration<double, std::milli>(
                             std::chrono::steady_clock::now() - start)
                             .count();
  status["exit_code"] = code;
  std::cerr << fpa::dump_json(status) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  const auto start = std::chrono::steady_clock::now();
  std::string command = "fpa";
  int code = kOk;

  CLI::App app{"Bayesian Nash equilibria of first-price auctions with "
               "discrete values"};
  app.require_subcommand(1);
  std::uint64_t seed = 1;
  app.add_option("--seed", seed, "Seed for every random draw")
      ->capture_default_str();

  Common c;

  auto* solve_cmd = app.add_subcommand("solve", "Compute the equilibrium");
  add_instance(solve_cmd, c);
  add_solve_flags(solve_cmd, c);
  add_out(solve_cmd, c, "Equilibrium JSON");
  bool with_report = false;
  solve_cmd->add_flag("--report", with_report,
                      "Wrap the equilibrium with solver statistics");

  auto* descent_cmd =
      app.add_subcommand("descent", "One sweep down from a guessed top bid");
  add_instance(descent_cmd, c);
  double bbar = 0.0;
  descent_cmd->add_option("--bbar", bbar, "Guessed largest winning bid")
      ->required();
  add_out(descent_cmd, c, "Trace JSON");

  auto* verify_cmd =
      app.add_subcommand("verify", "Best-response check of an equilibrium");
  add_instance(verify_cmd, c);
  add_eq(verify_cmd, c);
  add_solve_flags(verify_cmd, c);
  double eps = 1e-4;
  int grid = 2000;
  std::string tie = "vickrey";
  verify_cmd->add_option("--eps", eps, "Largest acceptable regret")
      ->capture_default_str();
  verify_cmd->add_option("--grid", grid, "Uniform deviation grid size")
      ->capture_default_str();
  verify_cmd->add_option("--tie", tie, "Tie rule at the smallest bid")
      ->check(CLI::IsMember({"vickrey", "uniform"}))
      ->capture_default_str();
  add_out(verify_cmd, c, "Report JSON");

  auto* welfare_cmd = app.add_subcommand(
      "welfare", "Welfare and revenue against the second-price benchmark");
  add_instance(welfare_cmd, c);
  add_eq(welfare_cmd, c);
  add_solve_flags(welfare_cmd, c);
  int samples = 0;
  welfare_cmd->add_option("--samples", samples,
                          "Also estimate by simulation with this many draws")
      ->capture_default_str();
  add_out(welfare_cmd, c, "Report JSON");

  auto* cdf_cmd = app.add_subcommand("cdf", "Tabulate the bid CDFs");
  add_instance(cdf_cmd, c);
  add_eq(cdf_cmd, c);
  add_solve_flags(cdf_cmd, c);
  int points = 201;
  std::vector<double> xs;
  cdf_cmd->add_option("--points", points,
                      "Evenly spaced bids over [b_min, b_max]")
      ->capture_default_str();
  cdf_cmd->add_option("--x", xs, "Explicit bids (overrides --points)");
  add_out(cdf_cmd, c, "CSV with columns x, F_1, ..., F_n");

  auto* baseline_cmd = app.add_subcommand(
      "baseline", "Smoothed continuous approximation by backward shooting");
  add_instance(baseline_cmd, c);
  fpa::BaselineOptions bopt;
  double clamp = 0.0;
  std::string trajectory;
  baseline_cmd->add_option("--w", bopt.w, "Triangle half-width")
      ->capture_default_str();
  baseline_cmd->add_option("--eps-mix", bopt.eps_mix, "Uniform floor weight")
      ->capture_default_str();
  baseline_cmd->add_option("--step", bopt.step, "Euler step in bid")
      ->capture_default_str();
  baseline_cmd->add_option("--tol", bopt.tol,
                           "Accepted gap to the smallest winning bid")
      ->capture_default_str();
  baseline_cmd->add_option("--max-iterations", bopt.max_iterations,
                           "Bisection steps on the top bid")
      ->capture_default_str();
  baseline_cmd->add_option("--clamp", clamp,
                           "Cap |dt/db| at this value (0 = off)")
      ->capture_default_str();
  baseline_cmd->add_flag("--fit-width", bopt.fit_width,
                         "Shrink w until the smoothing constraints hold");
  baseline_cmd->add_option("--timeout", c.timeout,
                           "Wall-clock limit in seconds (0 = none)")
      ->capture_default_str();
  baseline_cmd->add_option("--trajectory", trajectory,
                           "Write the final shoot's t(b) as CSV");
  add_out(baseline_cmd, c, "Report JSON");

  auto* bench_cmd = app.add_subcommand(
      "bench", "Runtime of both solvers on random instances");
  fpa::BenchConfig bench;
  std::string cumulative;
  std::string solvers = "both";
  bench_cmd->add_option("--n", bench.n, "Buyers")->capture_default_str();
  bench_cmd->add_option("--d", bench.d, "Values per buyer")
      ->capture_default_str();
  bench_cmd->add_option("--count", bench.count, "Instances")
      ->capture_default_str();
  bench_cmd->add_option("--timeout", bench.timeout_s,
                        "Per-run limit in seconds")
      ->capture_default_str();
  bench_cmd->add_option("--discrete-tol", bench.discrete_tol)
      ->capture_default_str();
  bench_cmd->add_option("--baseline-tol", bench.baseline_tol)
      ->capture_default_str();
  bench_cmd->add_option("--solvers", solvers, "discrete, baseline or both")
      ->check(CLI::IsMember({"discrete", "baseline", "both"}))
      ->capture_default_str();
  bench_cmd->add_option("--cumulative", cumulative,
                        "Write completions over time as CSV");
  add_out(bench_cmd, c, "Per-run CSV");

  auto* poa_cmd =
      app.add_subcommand("poa", "Grid search for the smallest welfare ratio");
  fpa::PoaGrid pgrid;
  std::int64_t max_pairs = 0;
  std::string summary;
  poa_cmd->add_option("--D", pgrid.D, "Values d / D for d = 0..D")
      ->capture_default_str();
  poa_cmd->add_option("--M", pgrid.M, "Masses in multiples of 1 / M")
      ->capture_default_str();
  poa_cmd->add_option("--budget", pgrid.budget, "Largest pair count accepted")
      ->capture_default_str();
  poa_cmd->add_option("--checkpoint", pgrid.checkpoint_path,
                      "Progress file; resumed from when present");
  poa_cmd->add_option("--checkpoint-every", pgrid.checkpoint_every)
      ->capture_default_str();
  poa_cmd->add_option("--max-pairs", max_pairs,
                      "Stop after this many pairs (0 = all)")
      ->capture_default_str();
  poa_cmd->add_option("--out,-o", pgrid.csv_path, "Per-pair CSV");
  poa_cmd->add_option("--summary", summary,
                      "Summary JSON (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (!app.get_subcommands().empty()) {
      command = app.get_subcommands().front()->get_name();
    }
    code = app.exit(e);
    if (code != 0) code = kUsage;
    report_status(command, start, code);
    return code;
  }
  command = app.get_subcommands().front()->get_name();

  try {
    if (*solve_cmd) {
      const AuctionInstance instance = load_instance(c);
      fpa::SolveOptions options;
      options.tol = c.tol;
      options.deadline = deadline_from(c.timeout);
      options.descent.deadline = options.deadline;
      const fpa::SolveReport report = fpa::solve(instance, options);
      nlohmann::ordered_json doc = fpa::equilibrium_to_json(report.equilibrium);
      if (with_report) {
        nlohmann::ordered_json wrapped;
        wrapped["equilibrium"] = doc;
        wrapped["b_bar"] = report.b_bar;
        wrapped["b_min"] = report.b_min;
        wrapped["iterations"] = report.iterations;
        wrapped["bracket_width"] = report.bracket_width;
        wrapped["residual"] = report.residual;
        wrapped["events"] = report.trace.event_count();
        doc = wrapped;
      }
      emit(c.out, fpa::dump_json(doc) + "\n");
    } else if (*descent_cmd) {
      const AuctionInstance instance = load_instance(c);
      const fpa::DescentTrace trace = fpa::run_descent(instance, bbar);
      emit(c.out, fpa::dump_json(fpa::trace_to_json(trace)) + "\n");
    } else if (*verify_cmd) {
      const AuctionInstance instance = load_instance(c);
      const Equilibrium eq = load_or_solve(c, instance);
      const auto report = fpa::verify_bne(eq, instance, eps, grid, tie_from(tie));
      emit(c.out, fpa::dump_json(fpa::verification_to_json(report)) + "\n");
    } else if (*welfare_cmd) {
      const AuctionInstance instance = load_instance(c);
      const Equilibrium eq = load_or_solve(c, instance);
      const fpa::WelfareReport w = fpa::welfare(eq, instance);
      const fpa::RevenueReport r = fpa::revenue(eq, instance);
      nlohmann::ordered_json doc;
      doc["wel_f"] = w.wel_f;
      doc["wel_s"] = w.wel_s;
      doc["ratio"] = w.ratio;
      doc["rev_f"] = r.rev_f;
      doc["rev_s"] = r.rev_s;
      if (samples > 0) {
        const auto sim = fpa::simulate(eq, instance, samples, seed);
        nlohmann::ordered_json s;
        s["samples"] = sim.samples;
        s["seed"] = seed;
        s["welfare_mean"] = sim.welfare_mean;
        s["welfare_se"] = sim.welfare_se;
        s["revenue_mean"] = sim.revenue_mean;
        s["revenue_se"] = sim.revenue_se;
        doc["simulation"] = s;
      }
      emit(c.out, fpa::dump_json(doc) + "\n");
    } else if (*cdf_cmd) {
      const AuctionInstance instance = load_instance(c);
      const Equilibrium eq = load_or_solve(c, instance);
      if (xs.empty()) {
        if (points < 2) throw fpa::ValidationError("--points must be >= 2");
        for (int k = 0; k < points; ++k) {
          xs.push_back(eq.b_min + (eq.b_max - eq.b_min) * k / (points - 1));
        }
      }
      std::ostringstream csv;
      csv << "x";
      for (int i = 0; i < eq.num_buyers(); ++i) csv << ",F_" << i + 1;
      csv << "\n";
      for (double x : xs) {
        csv << num(x);
        for (int i = 0; i < eq.num_buyers(); ++i) {
          csv << ',' << num(fpa::cdf(eq, i, x));
        }
        csv << "\n";
      }
      emit(c.out, csv.str());
    } else if (*baseline_cmd) {
      const AuctionInstance instance = load_instance(c);
      if (clamp > 0.0) bopt.clamp = clamp;
      bopt.deadline = deadline_from(c.timeout);
      const fpa::BaselineReport r = fpa::solve_continuous(instance, bopt);
      nlohmann::ordered_json doc;
      doc["converged"] = r.converged;
      doc["failure"] = r.failure;
      doc["b_bar"] = r.b_bar;
      doc["b_min"] = r.b_min;
      doc["target_b_min"] = r.target_b_min;
      doc["iterations"] = r.iterations;
      doc["total_steps"] = r.total_steps;
      doc["scale"] = r.scale;
      doc["width"] = r.width;
      doc["hit_zero"] = r.last_shoot.hit_zero;
      doc["diagnostics"] = r.last_shoot.diagnostics;
      if (!trajectory.empty()) {
        const auto dists = fpa::smooth(
            fpa::scale_values(instance, r.scale), r.width, bopt.eps_mix);
        fpa::ShootOptions shoot;
        shoot.step = bopt.step;
        shoot.clamp = bopt.clamp;
        shoot.record_trajectory = true;
        const auto replay =
            fpa::backward_shoot(dists, r.b_bar * r.scale, shoot);
        fpa::write_file(trajectory, fpa::trajectory_csv(replay));
      }
      emit(c.out, fpa::dump_json(doc) + "\n");
      if (!r.converged) code = kNumerical;
    } else if (*bench_cmd) {
      bench.seed = seed;
      bench.run_discrete = solvers != "baseline";
      bench.run_baseline = solvers != "discrete";
      const fpa::BenchResult result = fpa::bench(bench);
      emit(c.out, result.csv());
      if (!cumulative.empty()) {
        fpa::write_file(cumulative, result.cumulative_csv());
      }
    } else if (*poa_cmd) {
      if (max_pairs > 0) pgrid.max_pairs = max_pairs;
      const fpa::PoaResult result = fpa::poa_search(pgrid);
      emit(summary, fpa::dump_json(fpa::poa_to_json(result)) + "\n");
    }
  } catch (const fpa::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    code = kInvalid;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: malformed JSON: " << e.what() << "\n";
    code = kInvalid;
  } catch (const fpa::TimeoutError& e) {
    std::cerr << "error: " << e.what() << "\n";
    code = kTimeout;
  } catch (const fpa::NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    code = kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    code = kNumerical;
  }

  report_status(command, start, code);
  return code;
}
