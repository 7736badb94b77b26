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

// Backward shooting over the largest winning bid.
//
// The smallest winning bid b_min is known in closed form. The sweep in
// descent.h maps a guess b_bar to a stop point that is strictly increasing in
// b_bar, so bisection on b_bar finds the guess whose stop point is b_min.

#ifndef FPA_SOLVER_H_
#define FPA_SOLVER_H_

#include <utility>
#include <vector>

#include "fpa/common.h"
#include "fpa/descent.h"
#include "fpa/model.h"

namespace fpa {

// argmax_b (v* - b) * prod_{i != i*} G_i(b), where buyer i* has the largest
// smallest value v*. Ties go to the largest maximizer.
double smallest_winning_bid(const AuctionInstance& instance);

// Objective maximized by smallest_winning_bid().
double smallest_bid_objective(const AuctionInstance& instance, double bid);

struct SolveOptions {
  double tol = 1e-8;
  int max_iterations = 200;
  // Maximum |stop - b_min| accepted by finalize().
  double finalize_tol = 1e-6;
  DescentOptions descent;
  Deadline deadline;
};

struct SolveReport {
  Equilibrium equilibrium;
  double b_bar = 0.0;
  double b_min = 0.0;
  int iterations = 0;
  double bracket_width = 0.0;
  double residual = 0.0;
  double wall_ms = 0.0;
  // Every (guess, stop point) evaluated, in order.
  std::vector<std::pair<double, double>> probes;
  // The sweep the equilibrium was built from.
  DescentTrace trace;
};

// Throws NumericalError when the bracket collapses without a stop point
// within `tol` of b_min, TimeoutError when the deadline passes.
SolveReport solve(const AuctionInstance& instance,
                  const SolveOptions& options = {});

// Turns a sweep whose stop point matches `b_min` into an equilibrium: every
// buyer's remaining probability becomes an atom at b_min.
Equilibrium finalize(const DescentTrace& trace, const AuctionInstance& instance,
                     double b_min, double tolerance = 1e-6);

struct ReserveReduction {
  // Values shifted down by the reserve; values below it merge into 0.
  AuctionInstance shifted;
  double reserve = 0.0;
  // Per buyer, the probability of a value strictly below the reserve
  // (these types do not bid).
  std::vector<double> no_bid_mass;
};

ReserveReduction apply_reserve(const AuctionInstance& instance, double reserve);

// Maps an equilibrium of the shifted instance back to original bids.
Equilibrium unshift_equilibrium(const Equilibrium& shifted, double reserve);

}  // namespace fpa

#endif  // FPA_SOLVER_H_
