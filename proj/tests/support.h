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

// Fixtures, closed-form references and structural checks shared by the
// unit tests and the acceptance runner.

#ifndef FPA_TESTS_SUPPORT_H_
#define FPA_TESTS_SUPPORT_H_

#include <string>
#include <vector>

#include "fpa/model.h"

namespace fpa::testing {

// Four buyers with b_min = 2 and b_max = 9.
AuctionInstance four_buyer_example();
// Two buyers with values 1 and 2 at probability 1/2 each.
AuctionInstance symmetric_example();
// Six buyers whose smallest winning bid is 0.08.
AuctionInstance early_termination_example();
// Three buyers on {0.1, 0.2, 0.25}.
AuctionInstance oscillation_example();
// Two buyers: a constant 5/6 against {0, 1/3, 1/2} at (0.6, 0.2, 0.2).
AuctionInstance welfare_ratio_example();

// Hand-derived bid CDF of buyer i (0-based) in four_buyer_example().
double four_buyer_cdf(int buyer, double x);

struct PropertyReport {
  bool ok = true;
  std::vector<std::string> failures;

  void fail(std::string what);
};

// Structural checks on a solved equilibrium:
//   cdf monotone with F(b_max) = 1; atoms only at b_min and no jumps above
//   it; per-value mass conservation (1e-8); constant utility across each
//   segment (1e-7); virtual value increasing on every stretch; finite
//   difference of ln F matching the reversed hazard (1e-6).
PropertyReport check_properties(const Equilibrium& eq,
                                const AuctionInstance& instance);

}  // namespace fpa::testing

#endif  // FPA_TESTS_SUPPORT_H_
