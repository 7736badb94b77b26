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

#include "fpa/descent.h"

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "fpa/experiments.h"
#include "support.h"

namespace fpa {
namespace {

using testing::four_buyer_example;
using testing::symmetric_example;

TEST(ReversedHazard, DirectArithmetic) {
  const std::vector<double> lam{10, 13, 9};
  const double expect = 0.5 * (1.0 / 6 + 1.0 / 9 + 1.0 / 5) - 1.0 / 5;
  EXPECT_NEAR(reversed_hazard(4, lam, 9), expect, 1e-15);
  EXPECT_NEAR(reversed_hazard(4, lam, 9), 0.0388889, 1e-7);
}

TEST(ReversedHazard, SymmetricPair) {
  const std::vector<double> lam{3, 3};
  EXPECT_NEAR(reversed_hazard(1, lam, 3), 0.5, 1e-15);
}

TEST(ReversedHazard, EntryInequalityAtSix) {
  // The value-9 buyer is admissible against {10, 13} at bid 6.
  const double h =
      1.0 / (10 - 6) + 1.0 / (13 - 6) - 1.0 / (9 - 6);
  EXPECT_NEAR(h, 0.059524, 1e-6);
  EXPECT_GE(h, 0.0);
}

TEST(ReversedHazard, RejectsDegenerateInput) {
  const std::vector<double> one{3};
  EXPECT_THROW(reversed_hazard(1, one, 3), NumericalError);
  const std::vector<double> low{3, 0.5};
  EXPECT_THROW(reversed_hazard(1, low, 3), NumericalError);
}

TEST(VirtualValue, InvertsDefinition) {
  const std::vector<double> lam{10, 13, 9};
  const double phi = virtual_value(4, lam);
  EXPECT_NEAR(phi, 8.18605, 1e-5);
  const double rhs = 0.5 * (1.0 / 6 + 1.0 / 9 + 1.0 / 5);
  EXPECT_NEAR(1.0 / (phi - 4), rhs, 1e-12);
}

TEST(VirtualValue, SymmetricPairIsMidpoint) {
  const std::vector<double> lam{7, 7};
  EXPECT_NEAR(virtual_value(3, lam), 5.0, 1e-12);
}

TEST(VirtualValue, IncreasesWhileBelowEveryValue) {
  const std::vector<double> lam{6, 7, 9};
  double prev = virtual_value(0, lam);
  for (double x = 0.1; x <= 3.0; x += 0.1) {
    const double phi = virtual_value(x, lam);
    ASSERT_LE(phi, 6.0);
    EXPECT_GT(phi, prev);
    prev = phi;
  }
}

TEST(VirtualValue, FallsTowardBidNearSmallValue) {
  // Not a valid set near 2.5: phi exceeds the smallest value there.
  const std::vector<double> lam{2.5, 4, 7, 9};
  EXPECT_GT(virtual_value(0.0, lam), 2.5);
  EXPECT_LT(virtual_value(2.49, lam), virtual_value(0.0, lam));
}

TEST(SegmentCdf, EndpointAndClosedForm) {
  Segment s;
  s.value = 2;
  s.lo = 1;
  s.hi = 1.5;
  s.f_hi = 1;
  s.f_lo = 0.5;
  s.lambda = {{0, 2}, {1, 2}};
  EXPECT_EQ(segment_cdf(s, 1.5), 1.0);
  for (double x = 1.0; x <= 1.5; x += 0.05) {
    EXPECT_NEAR(segment_cdf(s, x), 0.5 / (2 - x), 1e-14);
  }
  EXPECT_THROW(segment_cdf(s, 1.6), NumericalError);
}

TEST(PredictEnterPoint, FourBuyerEntryAtSix) {
  const std::vector<double> lam{10, 13};
  const auto at = predict_enter_point(9, 6, lam);
  ASSERT_TRUE(at.has_value());
  EXPECT_EQ(*at, 6.0);
  EXPECT_LE(1.0 / (9 - 6), 1.0 / (10 - 6) + 1.0 / (13 - 6));
}

TEST(PredictEnterPoint, MatchesRootOfEnterCondition) {
  // 1/(9-x) = 1/(10-x) + 1/(13-x) has its root at x = 7.
  const std::vector<double> lam{10, 13};
  const auto at = predict_enter_point(9, 8, lam, 1e-13);
  ASSERT_TRUE(at.has_value());
  EXPECT_NEAR(*at, 7.0, 1e-10);
  EXPECT_NEAR(1.0 / (9 - 7.0), 1.0 / (10 - 7.0) + 1.0 / (13 - 7.0), 1e-15);
}

TEST(PredictEnterPoint, ValueAtOrBelowBidNeverEnters) {
  const std::vector<double> lam{10, 13};
  EXPECT_FALSE(predict_enter_point(1, 6, lam).has_value());
  EXPECT_FALSE(predict_enter_point(6, 6, lam).has_value());
}

TEST(PredictEnterPoint, SymmetricEntersImmediately) {
  const std::vector<double> lam{3, 3};
  const auto at = predict_enter_point(3, 2, lam);
  ASSERT_TRUE(at.has_value());
  EXPECT_NEAR(*at, 2.0, 1e-12);
}

TEST(PredictLeavePoint, TopValueOfBuyerOne) {
  // Above 8 the set is {20, 20}; below it, {20, 14, 12}.
  const auto in = four_buyer_example();
  const std::vector<double> top{20, 20};
  const double level8 = 11.0 / 12.0;
  EXPECT_NEAR(std::exp(log_cdf_ratio(20, 9, 8, top)), level8, 1e-12);
  const std::vector<double> mid{20, 14, 12};
  const double below = in.buyers[0].level_below(2);
  const auto at = predict_leave_point(20, below, 8, level8, mid);
  ASSERT_TRUE(at.has_value());
  EXPECT_NEAR(*at, 6.0, 1e-9);
  EXPECT_NEAR(1.0 - below, 1.0 - 11.0 / 24.0 * std::sqrt(7.0 / 3.0), 1e-12);
}

TEST(PredictLeavePoint, LowestValueNeverLeaves) {
  const std::vector<double> lam{2, 2};
  EXPECT_FALSE(predict_leave_point(2, 0.0, 1.5, 1.0, lam).has_value());
}

TEST(PredictLeavePoint, SymmetricHalfMass) {
  const std::vector<double> lam{2, 2};
  const auto at = predict_leave_point(2, 0.5, 1.5, 1.0, lam);
  ASSERT_TRUE(at.has_value());
  EXPECT_NEAR(*at, 1.0, 1e-12);
}

TEST(RunDescent, FourBuyerAtTrueTop) {
  const auto in = four_buyer_example();
  const auto trace = run_descent(in, 9.0);
  EXPECT_NEAR(trace.stop, 2.0, 1e-8);
  EXPECT_FALSE(trace.reached_zero);

  auto intervals = [&](int buyer) {
    std::vector<std::pair<double, double>> out;
    for (const auto& s : trace.segments_of(buyer)) out.push_back({s.lo, s.hi});
    return out;
  };
  auto expect_intervals = [&](int buyer,
                              std::vector<std::pair<double, double>> want) {
    const auto got = intervals(buyer);
    ASSERT_EQ(got.size(), want.size()) << "buyer " << buyer;
    for (size_t k = 0; k < want.size(); ++k) {
      EXPECT_NEAR(got[k].first, want[k].first, 1e-8) << "buyer " << buyer;
      EXPECT_NEAR(got[k].second, want[k].second, 1e-8) << "buyer " << buyer;
    }
  };
  expect_intervals(0, {{8, 9}, {6, 8}, {2, 6}});
  expect_intervals(1, {{6, 8}, {2, 6}});
  expect_intervals(2, {{8, 9}, {2, 6}});
  expect_intervals(3, {{6, 8}});
}

TEST(RunDescent, FourBuyerUpdateAtSix) {
  const auto trace = run_descent(four_buyer_example(), 9.0);
  const DescentEvent* at6 = nullptr;
  for (const auto& e : trace.events) {
    if (std::abs(e.bid - 6.0) < 1e-8) at6 = &e;
  }
  ASSERT_NE(at6, nullptr);
  std::vector<int> left;
  for (const auto& m : at6->left) left.push_back(m.buyer);
  std::sort(left.begin(), left.end());
  EXPECT_EQ(left, (std::vector<int>{0, 1, 3}));
  ASSERT_EQ(at6->entered.size(), 3u);
  EXPECT_EQ(at6->entered[0], (Member{1, 13}));
  EXPECT_EQ(at6->entered[1], (Member{0, 10}));
  EXPECT_EQ(at6->entered[2], (Member{2, 9}));
}

TEST(RunDescent, FourBuyerWrongGuesses) {
  const auto in = four_buyer_example();
  EXPECT_NEAR(run_descent(in, 8.5).stop, 0.35, 0.01);
  EXPECT_NEAR(run_descent(in, 9.5).stop, 3.76, 0.01);
}

TEST(RunDescent, SymmetricPair) {
  const auto trace = run_descent(symmetric_example(), 1.5);
  EXPECT_NEAR(trace.stop, 1.0, 1e-12);
  for (int i = 0; i < 2; ++i) {
    const auto segs = trace.segments_of(i);
    ASSERT_EQ(segs.size(), 1u);
    EXPECT_NEAR(segs[0].lo, 1.0, 1e-12);
    EXPECT_EQ(segs[0].hi, 1.5);
  }
}

TEST(RunDescent, EqualTopValuesAdmittedTogether) {
  AuctionInstance in;
  in.buyers.emplace_back(std::vector<double>{1, 3}, std::vector<double>{0.5, 0.5});
  in.buyers.emplace_back(std::vector<double>{2, 3}, std::vector<double>{0.5, 0.5});
  in.buyers.emplace_back(std::vector<double>{3}, std::vector<double>{1.0});
  const auto trace = run_descent(in, 2.5);
  ASSERT_FALSE(trace.events.empty());
  EXPECT_EQ(trace.events.front().entered.size(), 3u);
}

TEST(RunDescent, RejectsGuessOutsideRange) {
  EXPECT_THROW(run_descent(symmetric_example(), 0.0), ValidationError);
  EXPECT_THROW(run_descent(symmetric_example(), 2.0), ValidationError);
}

TEST(RunDescent, EventCountWithinTwiceTheValues) {
  for (int k = 0; k < 50; ++k) {
    const auto in = random_instance(2 + k % 4, 1 + k % 5, instance_seed(7, k));
    for (double f : {0.2, 0.5, 0.8}) {
      const auto trace = run_descent(in, f * in.max_value());
      EXPECT_LE(trace.event_count(), 2 * in.total_values());
    }
  }
}

TEST(RunDescent, StopIsMonotoneAndContinuousInGuess) {
  const auto in = four_buyer_example();
  double prev = -1.0;
  for (double g = 2.5; g < 12.0; g += 0.5) {
    const double stop = run_descent(in, g).stop;
    EXPECT_GE(stop, prev) << "guess " << g;
    prev = stop;
  }
  for (double g : {8.5, 9.0, 9.5}) {
    const double base = run_descent(in, g).stop;
    EXPECT_NEAR(run_descent(in, g + 1e-3).stop, base, 5e-2);
    EXPECT_NEAR(run_descent(in, g + 1e-6).stop, base, 5e-5);
  }
}

TEST(TraceJson, HasStopAndEvents) {
  const auto j = trace_to_json(run_descent(symmetric_example(), 1.5));
  EXPECT_NEAR(j["stop"].get<double>(), 1.0, 1e-12);
  EXPECT_TRUE(j["events"].is_array());
  EXPECT_TRUE(j["segments"].is_array());
}

}  // namespace
}  // namespace fpa
