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

#include "fpa/solver.h"

#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "fpa/evaluate.h"
#include "fpa/experiments.h"
#include "support.h"

namespace fpa {
namespace {

using testing::four_buyer_example;
using testing::symmetric_example;

AuctionInstance point_masses() {
  AuctionInstance in;
  in.buyers.emplace_back(std::vector<double>{5}, std::vector<double>{1});
  in.buyers.emplace_back(std::vector<double>{3}, std::vector<double>{1});
  return in;
}

// Brute force: the objective at every value point and a fine grid.
double brute_smallest_bid(const AuctionInstance& in) {
  double best = -1.0, arg = 0.0;
  std::vector<double> cands;
  for (const auto& d : in.buyers) {
    for (double v : d.values()) cands.push_back(v);
  }
  for (int k = 0; k <= 20000; ++k) cands.push_back(in.max_value() * k / 20000);
  std::sort(cands.begin(), cands.end());
  for (double b : cands) {
    const double f = smallest_bid_objective(in, b);
    if (f >= best) {
      best = f;
      arg = b;
    }
  }
  return arg;
}

TEST(SmallestWinningBid, Examples) {
  EXPECT_DOUBLE_EQ(smallest_winning_bid(four_buyer_example()), 2.0);
  EXPECT_DOUBLE_EQ(smallest_winning_bid(symmetric_example()), 1.0);
  EXPECT_DOUBLE_EQ(smallest_winning_bid(point_masses()), 3.0);
}

TEST(SmallestWinningBid, FourBuyerObjective) {
  const auto in = four_buyer_example();
  // (9 - b) * G1 * G2 * G4 over the value points below 9.
  EXPECT_NEAR(smallest_bid_objective(in, 2.0),
              7.0 * in.buyers[0].cdf_step(0) * in.buyers[1].cdf_step(0) *
                  in.buyers[3].cdf_step(0),
              1e-12);
  EXPECT_LT(smallest_bid_objective(in, 1.0), smallest_bid_objective(in, 2.0));
}

TEST(SmallestWinningBid, MatchesBruteForce) {
  for (int k = 0; k < 40; ++k) {
    const auto in = random_instance(2 + k % 3, 1 + k % 4, instance_seed(11, k));
    EXPECT_NEAR(smallest_winning_bid(in), brute_smallest_bid(in), 1e-12)
        << "instance " << k;
  }
}

TEST(Solve, FourBuyerGolden) {
  const auto in = four_buyer_example();
  const auto r = solve(in);
  EXPECT_NEAR(r.b_min, 2.0, 1e-12);
  EXPECT_NEAR(r.b_bar, 9.0, 1e-7);
  EXPECT_LT(r.residual, 1e-8);
  for (int i = 0; i < 4; ++i) {
    for (double x : {2.5, 4.0, 6.5, 7.5, 8.5}) {
      EXPECT_NEAR(cdf(r.equilibrium, i, x), testing::four_buyer_cdf(i, x),
                  1e-6)
          << "buyer " << i << " x " << x;
    }
  }
}

TEST(Solve, SymmetricClosedForm) {
  const auto r = solve(symmetric_example());
  EXPECT_NEAR(r.b_bar, 1.5, 1e-8);
  for (double x = 1.0; x <= 1.5; x += 0.01) {
    for (int i = 0; i < 2; ++i) {
      EXPECT_NEAR(cdf(r.equilibrium, i, x), 0.5 / (2 - x), 1e-8);
    }
  }
}

TEST(Solve, PointMasses) {
  const auto r = solve(point_masses());
  EXPECT_DOUBLE_EQ(r.equilibrium.b_min, 3.0);
  EXPECT_DOUBLE_EQ(r.equilibrium.b_max, 3.0);
  EXPECT_DOUBLE_EQ(r.equilibrium.atom_mass(0), 1.0);
}

TEST(Solve, IdenticalBuyersBidIdentically) {
  AuctionInstance in;
  for (int i = 0; i < 3; ++i) {
    in.buyers.emplace_back(std::vector<double>{0.2, 0.5, 0.9},
                           std::vector<double>{0.3, 0.3, 0.4});
  }
  const auto r = solve(in);
  for (double x = r.b_min; x <= r.b_bar; x += 0.01) {
    EXPECT_NEAR(cdf(r.equilibrium, 0, x), cdf(r.equilibrium, 1, x), 1e-9);
    EXPECT_NEAR(cdf(r.equilibrium, 0, x), cdf(r.equilibrium, 2, x), 1e-9);
  }
}

TEST(Solve, EarlyTerminationFixture) {
  const auto r = solve(testing::early_termination_example());
  EXPECT_NEAR(r.b_min, 0.08, 1e-12);
  EXPECT_LT(r.residual, 1e-8);
}

TEST(Solve, TimesOut) {
  SolveOptions o;
  o.deadline = Deadline(std::chrono::duration<double>(0.0));
  EXPECT_THROW(solve(four_buyer_example(), o), TimeoutError);
}

TEST(Finalize, RejectsMismatchedStop) {
  const auto in = four_buyer_example();
  const auto trace = run_descent(in, 8.5);
  EXPECT_THROW(finalize(trace, in, 2.0), NumericalError);
}

TEST(Finalize, AtomsAtSmallestBid) {
  const auto in = four_buyer_example();
  const auto eq = solve(in).equilibrium;
  for (const auto& a : eq.atoms) EXPECT_EQ(a.bid, eq.b_min);
  for (int i = 0; i < in.num_buyers(); ++i) {
    EXPECT_NEAR(eq.atom_mass(i), testing::four_buyer_cdf(i, 2.0), 1e-8) << i;
  }
  EXPECT_GT(eq.atom_mass(2), 0.78);
}

TEST(ApplyReserve, ZeroIsIdentity) {
  const auto in = four_buyer_example();
  const auto red = apply_reserve(in, 0.0);
  for (int i = 0; i < in.num_buyers(); ++i) {
    EXPECT_EQ(red.shifted.buyers[i].values(), in.buyers[i].values());
    EXPECT_EQ(red.no_bid_mass[i], 0.0);
  }
}

TEST(ApplyReserve, SymmetricAtOne) {
  const auto in = symmetric_example();
  const auto red = apply_reserve(in, 1.0);
  EXPECT_EQ(red.shifted.buyers[0].values(), (std::vector<double>{0, 1}));
  auto with = in;
  with.reserve = 1.0;
  const auto r = solve(with);
  EXPECT_NEAR(r.equilibrium.b_min, 1.0, 1e-12);
  EXPECT_NEAR(r.equilibrium.b_max, 1.5, 1e-8);
  const auto direct = solve(red.shifted);
  for (double x = 1.0; x <= 1.5; x += 0.05) {
    EXPECT_NEAR(cdf(r.equilibrium, 0, x), cdf(direct.equilibrium, 0, x - 1.0),
                1e-12);
  }
}

TEST(ApplyReserve, RejectsReserveAboveValues) {
  EXPECT_THROW(apply_reserve(symmetric_example(), 10.0), ValidationError);
}

TEST(ApplyReserve, SplitsBelowAndAt) {
  AuctionInstance in;
  in.buyers.emplace_back(std::vector<double>{1, 2, 3},
                         std::vector<double>{0.2, 0.3, 0.5});
  in.buyers.emplace_back(std::vector<double>{3}, std::vector<double>{1});
  const auto red = apply_reserve(in, 2.0);
  EXPECT_EQ(red.shifted.buyers[0].values(), (std::vector<double>{0, 1}));
  EXPECT_NEAR(red.shifted.buyers[0].mass(0), 0.5, 1e-15);
  EXPECT_NEAR(red.no_bid_mass[0], 0.2, 1e-15);
  EXPECT_EQ(red.no_bid_mass[1], 0.0);
}

TEST(Solve, RandomBatchConverges) {
  for (int k = 0; k < 60; ++k) {
    const auto in = random_instance(2 + k % 4, 1 + k % 5, instance_seed(3, k));
    const auto r = solve(in);
    EXPECT_LT(r.residual, 1e-8) << "instance " << k;
  }
}

}  // namespace
}  // namespace fpa
