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

// Batch studies: random-instance runtime benchmarks and the two-buyer
// welfare-ratio grid search.

#ifndef FPA_EXPERIMENTS_H_
#define FPA_EXPERIMENTS_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fpa/common.h"
#include "fpa/model.h"

namespace fpa {

// n buyers, each with d distinct values drawn uniformly from [0, 1) and
// masses drawn uniformly from the simplex. Deterministic in `seed`.
AuctionInstance random_instance(int n, int d, std::uint64_t seed);

// Seed of the k-th instance of a batch.
std::uint64_t instance_seed(std::uint64_t base, int k);

// Worker count: FPA_THREADS if set and positive, else the hardware
// concurrency, never more than `work_items`.
int worker_count(int work_items);

enum class RunStatus { kOk, kTimeout, kFailed };

struct BenchConfig {
  int n = 5;
  int d = 5;
  int count = 100;
  double timeout_s = 30.0;
  std::uint64_t seed = 1;
  double discrete_tol = 1e-8;
  double baseline_tol = 0.01;
  bool run_discrete = true;
  bool run_baseline = true;
  // Baseline discretization.
  double w = 0.01;
  double eps_mix = 1e-3;
  double step = 1e-5;

  // Throws ValidationError unless every field is positive.
  void validate() const;
};

struct BenchRow {
  int id = 0;
  std::string solver;
  double tol = 0.0;
  RunStatus status = RunStatus::kOk;
  double ms = 0.0;
  // Descent events of the final sweep (discrete solver only).
  int events = 0;
  std::string detail;
};

struct BenchResult {
  // Ordered by (id, solver) whatever the scheduling.
  std::vector<BenchRow> rows;

  int finished(const std::string& solver) const;
  // Columns id, solver, tol, ms, detail; ms holds TIMEOUT or FAILED for
  // unfinished runs.
  std::string csv() const;
  // Columns solver, ms, finished: one row per completion, in time order.
  std::string cumulative_csv() const;
};

BenchResult bench(const BenchConfig& config);

struct PoaGrid {
  // Values are d / D for d = 0..D.
  int D = 3;
  // Masses are multiples of 1 / M.
  int M = 5;
  // Bracket tolerance of each solve; welfare ratios inherit its error.
  double solve_tol = 1e-11;
  // Largest number of pairs the search accepts.
  std::int64_t budget = 50000000;
  // Rows are written here when set.
  std::optional<std::string> csv_path;
  // Progress is saved here every `checkpoint_every` pairs and resumed from
  // when the file exists.
  std::optional<std::string> checkpoint_path;
  std::int64_t checkpoint_every = 1000;
  // Stop after this many pairs in this run (the search can be resumed).
  std::optional<std::int64_t> max_pairs;
};

// Number of mass vectors on D + 1 points in multiples of 1 / M.
std::int64_t composition_count(int D, int M);
// Distinct unordered pairs of such vectors.
std::int64_t pair_count(int D, int M);

// All mass vectors (as counts summing to M) in lexicographic order.
std::vector<std::vector<int>> compositions(int D, int M);

// The two-buyer instance of a pair of count vectors. Zero-count values are
// dropped.
AuctionInstance poa_instance(const std::vector<int>& a,
                             const std::vector<int>& b, int D, int M);

struct PoaResult {
  std::int64_t total = 0;
  // Pairs handled so far, including earlier runs.
  std::int64_t done = 0;
  // Pairs whose efficient welfare is 0 (both buyers always value 0).
  std::int64_t skipped = 0;
  std::int64_t failed = 0;
  double min_ratio = 1.0;
  double max_ratio = 0.0;
  std::int64_t argmin = -1;
  std::vector<int> argmin_a;
  std::vector<int> argmin_b;
  bool complete = false;
};

// Throws ValidationError when the pair count exceeds the budget.
PoaResult poa_search(const PoaGrid& grid);

nlohmann::ordered_json poa_to_json(const PoaResult& result);

}  // namespace fpa

#endif  // FPA_EXPERIMENTS_H_
