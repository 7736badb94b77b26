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

// Downward sweep through bid space for a guessed largest winning bid.
//
// While the set of active bidders (the bidding set) is fixed, every active
// buyer's bid CDF has the closed form
//
//   F(x) = F(hi) * (v - x)/(v - hi) * prod_j ((v_j - hi)/(v_j - x))^(1/(k-1))
//
// where the product runs over the k active values. The sweep therefore only
// has to locate the bids where the bidding set changes: a waiting buyer
// enters once its value reaches the virtual value of the set, and an active
// buyer leaves once the probability mass of its current value is used up.

#ifndef FPA_DESCENT_H_
#define FPA_DESCENT_H_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fpa/common.h"
#include "fpa/model.h"

namespace fpa {

// Smallest admissible gap v - x inside logs and divisions.
inline constexpr double kMinGap = 1e-14;

// d ln F / dx for an active buyer with value `v` when the active values are
// `lambda_values` (which include `v` itself):
//   (1/(k-1)) * sum_j 1/(v_j - x) - 1/(v - x).
// Throws NumericalError if fewer than two values are given or any value is
// not above x.
double reversed_hazard(double x, std::span<const double> lambda_values,
                       double v);

// The value phi with 1/(phi - x) = (1/(k-1)) * sum_j 1/(v_j - x). A waiting
// value enters exactly when it reaches phi. Same preconditions as
// reversed_hazard().
double virtual_value(double x, std::span<const double> lambda_values);

// ln F(x) - ln F(hi) on a fixed-set stretch for value `v`.
double log_cdf_ratio(double v, double hi, double x,
                     std::span<const double> lambda_values);

// Closed-form CDF of `seg` at x in [seg.lo, seg.hi]. Throws NumericalError
// for x outside the segment.
double segment_cdf(const Segment& seg, double x);

// Largest b' <= bid at which a waiting buyer with `value` would be admitted
// into a bidding set with fixed `lambda_values`, or nullopt if that never
// happens at a nonnegative bid or `value` is not above `bid`. Uses bisection
// on the virtual value, which increases with the bid while it stays below
// every value in the set. Multiple sign changes on a sampled grid are
// reported into `diagnostics` when given.
std::optional<double> predict_enter_point(
    double value, double bid, std::span<const double> lambda_values,
    double abs_tol = 1e-12, std::vector<std::string>* diagnostics = nullptr);

// Bid b' < bid where an active buyer with `value` and current CDF level
// `level` = F(bid) drops to `level_below` = G(v^{j-1}). nullopt when
// `level_below` is 0 (lowest value: never consumed) or the mass outlasts the
// stretch down to bid 0.
std::optional<double> predict_leave_point(
    double value, double level_below, double bid, double level,
    std::span<const double> lambda_values, double abs_tol = 1e-12);

struct DescentOptions {
  // Absolute bisection tolerance on bids; 0 bisects to full double
  // resolution.
  double bid_tol = 0.0;
  // Change points closer than this (times max(1, L)) are merged.
  double event_tol = 1e-10;
  // A waiting value enters when value >= virtual value - admit_tol.
  double admit_tol = 1e-9;
  // Waiting values at or below this never enter: such types cannot win
  // profitably above the smallest winning bid. Defaults to the instance's
  // smallest winning bid.
  std::optional<double> entry_floor;
  Deadline deadline;
};

struct BidderState {
  int buyer = 0;
  // Index of the largest unconsumed value.
  int value_index = 0;
  // F at the current bid.
  double level = 1.0;
  bool active = false;
  // Open stretch, valid while active.
  double stretch_hi = 0.0;
  double stretch_level = 1.0;
  std::vector<Member> stretch_lambda;
};

struct DescentEvent {
  double bid = 0.0;
  std::vector<Member> entered;
  std::vector<Member> left;

  bool empty() const { return entered.empty() && left.empty(); }
};

struct DescentTrace {
  double b_bar = 0.0;
  std::vector<DescentEvent> events;
  // All closed segments, in the order they were closed.
  std::vector<Segment> segments;
  // Where the sweep stopped; the b_min implied by the guess.
  double stop = 0.0;
  // True if the sweep ran out of bids (stopped at 0 with >= 2 active).
  bool reached_zero = false;
  // Per-buyer CDF level at the stop point.
  std::vector<double> final_levels;
  // Bidding set at the stop point.
  std::vector<Member> final_lambda;
  std::vector<std::string> diagnostics;

  int event_count() const { return static_cast<int>(events.size()); }
  // Segments of one buyer, ordered by decreasing bid.
  std::vector<Segment> segments_of(int buyer) const;
};

nlohmann::ordered_json trace_to_json(const DescentTrace& trace);

// Mutable state of one sweep. Low-level: most callers want run_descent().
class DescentState {
 public:
  // Starts at `b_bar` with an empty bidding set. Call update_bidding_set()
  // at b_bar to perform the initial admissions.
  DescentState(const AuctionInstance& instance, double b_bar,
               DescentOptions options = {});

  const AuctionInstance& instance() const { return *instance_; }
  const DescentOptions& options() const { return options_; }
  double bid() const { return bid_; }
  double b_bar() const { return b_bar_; }
  double event_tolerance() const { return event_tol_; }
  double entry_floor() const { return entry_floor_; }
  const std::vector<BidderState>& bidders() const { return bidders_; }
  const std::vector<Segment>& closed_segments() const { return segments_; }
  const std::vector<std::string>& diagnostics() const { return diagnostics_; }
  // Predictions may report into the trace from const contexts.
  std::vector<std::string>* diagnostics_sink() const { return &diagnostics_; }

  double current_value(int buyer) const;
  int lambda_size() const;
  std::vector<Member> lambda() const;
  std::vector<double> lambda_values() const;

  // CDF level of `buyer` at x <= bid() under the current stretch.
  double level_at(int buyer, double x) const;

  // Closes every open stretch at x <= bid(), moving the sweep to x.
  void advance_to(double x);

  BidderState& bidder(int buyer) { return bidders_[buyer]; }
  void open_stretches();

 private:
  const AuctionInstance* instance_;
  DescentOptions options_;
  double b_bar_;
  double bid_;
  double event_tol_;
  double entry_floor_;
  std::vector<BidderState> bidders_;
  std::vector<Segment> segments_;
  mutable std::vector<std::string> diagnostics_;
};

struct ChangePoint {
  double bid = 0.0;
  // Buyers whose predicted enter/leave point ties with `bid`.
  std::vector<int> buyers;
  // No further change at a nonnegative bid: the sweep ends at 0.
  bool terminal = false;
};

// Largest predicted change below the current bid. Requires >= 2 active.
ChangePoint next_change_point(const DescentState& state);

// Moves the sweep to `bid`, drops active buyers whose value is consumed
// there, then admits waiting buyers in decreasing order of their largest
// unconsumed value until the first refusal.
DescentEvent update_bidding_set(DescentState& state, double bid);

// Full sweep from `b_bar` down to the stop point. Throws ValidationError if
// b_bar is outside (0, max value).
DescentTrace run_descent(const AuctionInstance& instance, double b_bar,
                         const DescentOptions& options = {});

}  // namespace fpa

#endif  // FPA_DESCENT_H_
