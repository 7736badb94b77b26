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

#include "fpa/experiments.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "fpa/baseline.h"
#include "fpa/evaluate.h"
#include "fpa/solver.h"

namespace fpa {

namespace {

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now() - start)
      .count();
}

}  // namespace

AuctionInstance random_instance(int n, int d, std::uint64_t seed) {
  if (n < 2 || d < 1) throw ValidationError("need n >= 2 and d >= 1");
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::exponential_distribution<double> expo(1.0);
  AuctionInstance out;
  for (int i = 0; i < n; ++i) {
    std::set<double> drawn;
    while (static_cast<int>(drawn.size()) < d) drawn.insert(unit(gen));
    std::vector<double> values(drawn.begin(), drawn.end());
    std::vector<double> masses(d);
    double total = 0.0;
    for (double& m : masses) {
      do {
        m = expo(gen);
      } while (!(m > 0.0));
      total += m;
    }
    for (double& m : masses) m /= total;
    out.buyers.emplace_back(std::move(values), std::move(masses));
  }
  return out;
}

std::uint64_t instance_seed(std::uint64_t base, int k) {
  std::seed_seq seq{static_cast<std::uint32_t>(base),
                    static_cast<std::uint32_t>(base >> 32),
                    static_cast<std::uint32_t>(k)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

int worker_count(int work_items) {
  int workers = static_cast<int>(std::thread::hardware_concurrency());
  if (const char* env = std::getenv("FPA_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) workers = cap;
  }
  return std::clamp(workers, 1, std::max(1, work_items));
}

void BenchConfig::validate() const {
  if (n < 2) throw ValidationError("n must be at least 2");
  if (d < 1) throw ValidationError("d must be positive");
  if (count < 1) throw ValidationError("count must be positive");
  if (!(timeout_s > 0.0)) throw ValidationError("timeout must be positive");
  if (!(discrete_tol > 0.0) || !(baseline_tol > 0.0)) {
    throw ValidationError("tolerances must be positive");
  }
  if (!(w > 0.0) || !(eps_mix > 0.0) || !(step > 0.0)) {
    throw ValidationError("baseline parameters must be positive");
  }
}

int BenchResult::finished(const std::string& solver) const {
  int k = 0;
  for (const auto& row : rows) {
    if (row.solver == solver && row.status == RunStatus::kOk) ++k;
  }
  return k;
}

std::string BenchResult::csv() const {
  std::ostringstream out;
  out << "id,solver,tol,ms,detail\n";
  for (const auto& row : rows) {
    out << row.id << ',' << row.solver << ',' << num(row.tol) << ',';
    switch (row.status) {
      case RunStatus::kOk:
        out << num(row.ms);
        break;
      case RunStatus::kTimeout:
        out << "TIMEOUT";
        break;
      case RunStatus::kFailed:
        out << "FAILED";
        break;
    }
    std::string detail = row.detail;
    std::replace(detail.begin(), detail.end(), ',', ';');
    std::replace(detail.begin(), detail.end(), '\n', ' ');
    out << ',' << detail << '\n';
  }
  return out.str();
}

std::string BenchResult::cumulative_csv() const {
  std::ostringstream out;
  out << "solver,ms,finished\n";
  std::vector<std::string> solvers;
  for (const auto& row : rows) {
    if (std::find(solvers.begin(), solvers.end(), row.solver) ==
        solvers.end()) {
      solvers.push_back(row.solver);
    }
  }
  for (const auto& solver : solvers) {
    std::vector<double> times;
    for (const auto& row : rows) {
      if (row.solver == solver && row.status == RunStatus::kOk) {
        times.push_back(row.ms);
      }
    }
    std::sort(times.begin(), times.end());
    for (size_t k = 0; k < times.size(); ++k) {
      out << solver << ',' << num(times[k]) << ',' << k + 1 << '\n';
    }
  }
  return out.str();
}

namespace {

BenchRow run_discrete(const AuctionInstance& instance, int id,
                      const BenchConfig& config) {
  BenchRow row;
  row.id = id;
  row.solver = "discrete";
  row.tol = config.discrete_tol;
  const auto start = std::chrono::steady_clock::now();
  try {
    SolveOptions options;
    options.tol = config.discrete_tol;
    options.deadline =
        Deadline(std::chrono::duration<double>(config.timeout_s));
    options.descent.deadline = options.deadline;
    const SolveReport report = solve(instance, options);
    row.events = report.trace.event_count();
  } catch (const TimeoutError& e) {
    row.status = RunStatus::kTimeout;
    row.detail = e.what();
  } catch (const Error& e) {
    row.status = RunStatus::kFailed;
    row.detail = e.what();
  }
  row.ms = elapsed_ms(start);
  return row;
}

BenchRow run_baseline(const AuctionInstance& instance, int id,
                      const BenchConfig& config) {
  BenchRow row;
  row.id = id;
  row.solver = "baseline";
  row.tol = config.baseline_tol;
  const auto start = std::chrono::steady_clock::now();
  try {
    BaselineOptions options;
    options.w = config.w;
    options.eps_mix = config.eps_mix;
    options.step = config.step;
    options.tol = config.baseline_tol;
    options.fit_width = true;
    options.deadline =
        Deadline(std::chrono::duration<double>(config.timeout_s));
    const BaselineReport report = solve_continuous(instance, options);
    if (!report.converged) {
      row.status = RunStatus::kFailed;
      row.detail = report.failure;
    }
  } catch (const TimeoutError& e) {
    row.status = RunStatus::kTimeout;
    row.detail = e.what();
  } catch (const Error& e) {
    row.status = RunStatus::kFailed;
    row.detail = e.what();
  }
  row.ms = elapsed_ms(start);
  return row;
}

}  // namespace

BenchResult bench(const BenchConfig& config) {
  config.validate();
  const int per = (config.run_discrete ? 1 : 0) + (config.run_baseline ? 1 : 0);
  std::vector<BenchRow> rows(static_cast<size_t>(config.count) * per);
  std::atomic<int> next{0};
  auto work = [&] {
    for (int k = next++; k < config.count; k = next++) {
      const AuctionInstance instance =
          random_instance(config.n, config.d, instance_seed(config.seed, k));
      int slot = k * per;
      if (config.run_discrete) rows[slot++] = run_discrete(instance, k, config);
      if (config.run_baseline) rows[slot] = run_baseline(instance, k, config);
    }
  };
  const int workers = worker_count(config.count);
  std::vector<std::thread> pool;
  for (int t = 1; t < workers; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  return BenchResult{std::move(rows)};
}

std::int64_t composition_count(int D, int M) {
  // C(M + D, D), computed exactly.
  std::int64_t c = 1;
  for (int k = 1; k <= D; ++k) c = c * (M + k) / k;
  return c;
}

std::int64_t pair_count(int D, int M) {
  const std::int64_t c = composition_count(D, M);
  return c * (c + 1) / 2;
}

std::vector<std::vector<int>> compositions(int D, int M) {
  if (D < 1 || M < 1) throw ValidationError("need D >= 1 and M >= 1");
  std::vector<std::vector<int>> out;
  std::vector<int> cur(D + 1, 0);
  std::function<void(int, int)> rec = [&](int pos, int left) {
    if (pos == D) {
      cur[pos] = left;
      out.push_back(cur);
      return;
    }
    for (int c = 0; c <= left; ++c) {
      cur[pos] = c;
      rec(pos + 1, left - c);
    }
  };
  rec(0, M);
  return out;
}

AuctionInstance poa_instance(const std::vector<int>& a,
                             const std::vector<int>& b, int D, int M) {
  AuctionInstance out;
  for (const auto* counts : {&a, &b}) {
    std::vector<double> values;
    std::vector<double> masses;
    for (int d = 0; d <= D; ++d) {
      if ((*counts)[d] == 0) continue;
      values.push_back(static_cast<double>(d) / D);
      masses.push_back(static_cast<double>((*counts)[d]) / M);
    }
    out.buyers.emplace_back(std::move(values), std::move(masses));
  }
  return out;
}

namespace {

std::string counts_text(const std::vector<int>& c) {
  std::string s;
  for (size_t k = 0; k < c.size(); ++k) {
    if (k) s += ' ';
    s += std::to_string(c[k]);
  }
  return s;
}

nlohmann::ordered_json checkpoint_json(const PoaGrid& grid,
                                       const PoaResult& r,
                                       std::uintmax_t csv_bytes) {
  nlohmann::ordered_json j;
  j["D"] = grid.D;
  j["M"] = grid.M;
  j["done"] = r.done;
  j["skipped"] = r.skipped;
  j["failed"] = r.failed;
  j["min_ratio"] = r.min_ratio;
  j["max_ratio"] = r.max_ratio;
  j["argmin"] = r.argmin;
  j["csv_bytes"] = csv_bytes;
  return j;
}

}  // namespace

PoaResult poa_search(const PoaGrid& grid) {
  if (grid.D < 1 || grid.M < 1) throw ValidationError("need D >= 1, M >= 1");
  PoaResult r;
  r.total = pair_count(grid.D, grid.M);
  if (r.total > grid.budget) {
    throw ValidationError("grid has " + std::to_string(r.total) +
                          " pairs, above the budget of " +
                          std::to_string(grid.budget));
  }
  const auto comps = compositions(grid.D, grid.M);
  const std::int64_t c = static_cast<std::int64_t>(comps.size());

  std::uintmax_t csv_bytes = 0;
  if (grid.checkpoint_path && std::filesystem::exists(*grid.checkpoint_path)) {
    const auto j = nlohmann::json::parse(read_file(*grid.checkpoint_path));
    if (j.at("D").get<int>() != grid.D || j.at("M").get<int>() != grid.M) {
      throw ValidationError("checkpoint was written for a different grid");
    }
    r.done = j.at("done").get<std::int64_t>();
    r.skipped = j.at("skipped").get<std::int64_t>();
    r.failed = j.at("failed").get<std::int64_t>();
    r.min_ratio = j.at("min_ratio").get<double>();
    r.max_ratio = j.at("max_ratio").get<double>();
    r.argmin = j.at("argmin").get<std::int64_t>();
    csv_bytes = j.at("csv_bytes").get<std::uintmax_t>();
  }

  std::ofstream csv;
  if (grid.csv_path) {
    if (r.done > 0 && std::filesystem::exists(*grid.csv_path)) {
      std::filesystem::resize_file(*grid.csv_path, csv_bytes);
      csv.open(*grid.csv_path, std::ios::app);
    } else {
      csv.open(*grid.csv_path, std::ios::trunc);
      csv << "pair,a,b,wel_f,wel_s,ratio,status\n";
    }
    if (!csv) throw ValidationError("cannot write " + *grid.csv_path);
  }
  auto save = [&] {
    if (!grid.checkpoint_path) return;
    if (csv.is_open()) {
      csv.flush();
      csv_bytes = static_cast<std::uintmax_t>(csv.tellp());
    }
    write_file(*grid.checkpoint_path,
               dump_json(checkpoint_json(grid, r, csv_bytes)) + "\n");
  };

  auto fill_argmin = [&] {
    if (r.argmin < 0) return;
    std::int64_t ax = 0, start = 0;
    while (start + (c - ax) <= r.argmin) {
      start += c - ax;
      ++ax;
    }
    r.argmin_a = comps[ax];
    r.argmin_b = comps[ax + (r.argmin - start)];
  };

  // Pair index p enumerates (x, y) with x <= y row by row.
  std::int64_t x = 0;
  std::int64_t row_start = 0;
  while (x < c && row_start + (c - x) <= r.done) {
    row_start += c - x;
    ++x;
  }
  std::int64_t y = x + (r.done - row_start);

  std::int64_t this_run = 0;
  for (; x < c; ++x, y = x) {
    for (; y < c; ++y) {
      if (grid.max_pairs && this_run >= *grid.max_pairs) {
        save();
        fill_argmin();
        return r;
      }
      const std::int64_t p = r.done;
      const AuctionInstance instance =
          poa_instance(comps[x], comps[y], grid.D, grid.M);
      std::string status = "ok";
      double wf = 0.0, ws = expected_max_value(instance), ratio = 0.0;
      if (!(ws > 0.0)) {
        status = "skipped";
        ++r.skipped;
      } else {
        try {
          SolveOptions options;
          options.tol = grid.solve_tol;
          const SolveReport report = solve(instance, options);
          const WelfareReport wr = welfare(report.equilibrium, instance);
          wf = wr.wel_f;
          ws = wr.wel_s;
          ratio = wr.ratio;
          if (ratio < r.min_ratio) {
            r.min_ratio = ratio;
            r.argmin = p;
          }
          r.max_ratio = std::max(r.max_ratio, ratio);
        } catch (const Error& e) {
          status = "failed";
          ++r.failed;
        }
      }
      if (csv.is_open()) {
        csv << p << ',' << counts_text(comps[x]) << ','
            << counts_text(comps[y]) << ',' << num(wf) << ',' << num(ws)
            << ',' << num(ratio) << ',' << status << '\n';
      }
      ++r.done;
      ++this_run;
      if (r.done % grid.checkpoint_every == 0) save();
    }
  }
  r.complete = true;
  save();
  fill_argmin();
  return r;
}

nlohmann::ordered_json poa_to_json(const PoaResult& result) {
  nlohmann::ordered_json j;
  j["total"] = result.total;
  j["done"] = result.done;
  j["skipped"] = result.skipped;
  j["failed"] = result.failed;
  j["complete"] = result.complete;
  j["min_ratio"] = result.min_ratio;
  j["max_ratio"] = result.max_ratio;
  j["argmin"] = result.argmin;
  j["argmin_a"] = result.argmin_a;
  j["argmin_b"] = result.argmin_b;
  return j;
}

}  // namespace fpa
