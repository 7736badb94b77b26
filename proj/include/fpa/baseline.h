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

// Continuous comparator. Each discrete value becomes a triangular density of
// half-width w, mixed with a thin uniform floor, and the inverse bid
// functions t_i(b) are integrated backwards from a guessed top bid with
// explicit Euler steps:
//
//   dt_i/db = F_i(t_i)/f_i(t_i) * [ (1/(n-1)) sum_j 1/(t_j - b) - 1/(t_i - b) ]
//
// The integrator is deliberately plain so that its failure modes (early
// termination, oscillation, skipped values) show up as they would in
// practice.

#ifndef FPA_BASELINE_H_
#define FPA_BASELINE_H_

#include <optional>
#include <string>
#include <vector>

#include "fpa/common.h"
#include "fpa/model.h"

namespace fpa {

class SmoothedDistribution {
 public:
  // Throws ValidationError unless 2w < every gap between adjacent values,
  // w < smallest value and largest value < 1 - w, and 0 < eps_mix < 1.
  SmoothedDistribution(ValueDistribution source, double w, double eps_mix);

  const ValueDistribution& source() const { return source_; }
  double width() const { return w_; }
  double eps_mix() const { return eps_; }
  // Height of the uniform floor, 1 / (v_max - v_min + 2w).
  double floor_height() const { return u_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }

  double density(double t) const;
  double cdf(double t) const;

 private:
  ValueDistribution source_;
  double w_;
  double eps_;
  double u_;
  double lo_;
  double hi_;
};

// Factor that maps the instance's values into [0, 1 - 2w] when the largest
// value is at least 1 - w, and 1 otherwise.
double smoothing_scale(const AuctionInstance& instance, double w);

AuctionInstance scale_values(const AuctionInstance& instance, double factor);

// Largest width <= w that satisfies the smoothing constraints for every
// buyer, or nullopt if none does (a value at 0, or >= 1).
std::optional<double> fit_width(const AuctionInstance& instance, double w);

std::vector<SmoothedDistribution> smooth(const AuctionInstance& instance,
                                         double w, double eps_mix);

// dt_i/db for every buyer. Throws NumericalError if some t_j <= b or a
// derivative is not finite.
std::vector<double> ode_rhs(double b, const std::vector<double>& t,
                            const std::vector<SmoothedDistribution>& dists);

struct ShootOptions {
  double step = 1e-5;
  // Caps |dt/db| when set.
  std::optional<double> clamp;
  bool record_trajectory = false;
  Deadline deadline;
};

struct ShootResult {
  // Bid at which the loop exited: the computed smallest winning bid.
  double b_min = 0.0;
  std::vector<double> t;
  int steps = 0;
  // The loop ran out of bids (b <= 0) before any t_i crossed b.
  bool hit_zero = false;
  // Rows (b, t_1, ..., t_n), one per step, starting at the guess.
  std::vector<std::vector<double>> trajectory;
  std::vector<std::string> diagnostics;
};

// One backward sweep from `b_bar` with every t_i starting at 1, the top of
// the value space. Throws NumericalError on a non-finite derivative.
ShootResult backward_shoot(const std::vector<SmoothedDistribution>& dists,
                           double b_bar, const ShootOptions& options = {});

struct BaselineOptions {
  double w = 0.01;
  double eps_mix = 1e-3;
  double step = 1e-5;
  double tol = 0.01;
  int max_iterations = 200;
  std::optional<double> clamp;
  // Shrink w per instance until the smoothing constraints hold.
  bool fit_width = false;
  Deadline deadline;
};

struct BaselineReport {
  bool converged = false;
  // Failure reason when not converged.
  std::string failure;
  // In the instance's own units.
  double b_bar = 0.0;
  double b_min = 0.0;
  double target_b_min = 0.0;
  int iterations = 0;
  int total_steps = 0;
  double wall_ms = 0.0;
  double scale = 1.0;
  double width = 0.0;
  // Shoot for the final guess (scaled units).
  ShootResult last_shoot;
};

// Bisection on the guess until the shoot's exit bid is within tol of the
// smallest winning bid of the discrete instance. Throws TimeoutError when
// the deadline passes.
BaselineReport solve_continuous(const AuctionInstance& instance,
                                const BaselineOptions& options = {});

// Writes the trajectory as CSV with columns b, t_1, ..., t_n.
std::string trajectory_csv(const ShootResult& result);

// Number of sign changes between consecutive nonzero increments of t_i.
int increment_sign_changes(const ShootResult& result, int buyer);

}  // namespace fpa

#endif  // FPA_BASELINE_H_
