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

// Queries against a computed equilibrium: bid CDFs, interim utilities,
// best-response checks, welfare and revenue.

#ifndef FPA_EVALUATE_H_
#define FPA_EVALUATE_H_

#include <cstdint>
#include <vector>

#include "fpa/model.h"

namespace fpa {

// How ties at the smallest winning bid are broken.
enum class TieBreak {
  // Second-price auction among the tied bidders: the highest value wins,
  // equal values share.
  kVickrey,
  // Uniformly random among the tied bidders.
  kUniform,
};

// Bid CDF of `buyer` at x. Right-continuous; 0 below b_min.
double cdf(const Equilibrium& eq, int buyer, double x);

// Bid density of `buyer` at x, excluding the atom. 0 outside segments.
double density(const Equilibrium& eq, int buyer, double x);

// Smallest bid x with cdf(x) >= u, for u in [0, 1].
double quantile(const Equilibrium& eq, int buyer, double u);

// Probability of each of the buyer's values inside its atom at b_min. Bids
// increase with value, so the atom holds the lowest values.
std::vector<double> atom_value_masses(const Equilibrium& eq,
                                      const AuctionInstance& instance,
                                      int buyer);

// Probability that a bid of exactly b_min by a type with value `v` wins.
double tie_win_probability(const Equilibrium& eq,
                           const AuctionInstance& instance, int buyer,
                           double v, TieBreak tie = TieBreak::kVickrey);

// Interim expected utility of `buyer` with value `v` bidding `b` while the
// others follow `eq`.
double utility(const Equilibrium& eq, const AuctionInstance& instance,
               int buyer, double v, double b,
               TieBreak tie = TieBreak::kVickrey);

struct TypeCheck {
  int buyer = 0;
  double value = 0.0;
  // Smallest utility over the bids this type uses.
  double prescribed_utility = 0.0;
  double best_bid = 0.0;
  double best_utility = 0.0;
  double regret = 0.0;
};

struct VerificationReport {
  std::vector<TypeCheck> types;
  double max_regret = 0.0;
  int grid_size = 0;
  bool passed = false;
};

// Compares every type's equilibrium utility against deviations on a uniform
// grid plus all breakpoints. Throws ValidationError if grid < 100.
VerificationReport verify_bne(const Equilibrium& eq,
                              const AuctionInstance& instance,
                              double eps = 1e-4, int grid = 2000,
                              TieBreak tie = TieBreak::kVickrey);

nlohmann::ordered_json verification_to_json(const VerificationReport& report);

struct WelfareReport {
  // Expected value of the winner in the first-price equilibrium.
  double wel_f = 0.0;
  // Expected highest value.
  double wel_s = 0.0;
  double ratio = 0.0;
};

struct RevenueReport {
  // Expected winning bid in the first-price equilibrium.
  double rev_f = 0.0;
  // Expected second-highest value.
  double rev_s = 0.0;
};

// Largest product support accepted by the enumerations.
inline constexpr std::int64_t kMaxProfiles = 100000000;

WelfareReport welfare(const Equilibrium& eq, const AuctionInstance& instance);
RevenueReport revenue(const Equilibrium& eq, const AuctionInstance& instance);

// E[max value] and E[second-highest value] by enumerating every value
// profile. Throws ValidationError above kMaxProfiles profiles.
double expected_max_value(const AuctionInstance& instance);
double expected_second_value(const AuctionInstance& instance);

struct SimulationReport {
  int samples = 0;
  double welfare_mean = 0.0;
  double welfare_se = 0.0;
  double revenue_mean = 0.0;
  double revenue_se = 0.0;
};

// Monte Carlo estimate of first-price welfare and revenue: every buyer draws
// a quantile, bids quantile(eq, i, u) and has value G_i^{-1}(u).
SimulationReport simulate(const Equilibrium& eq,
                          const AuctionInstance& instance, int samples,
                          std::uint64_t seed);

}  // namespace fpa

#endif  // FPA_EVALUATE_H_
