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

#include "support.h"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "fpa/descent.h"
#include "fpa/evaluate.h"

namespace fpa::testing {

namespace {

constexpr double kMassTol = 1e-8;

std::string fmt(const char* pattern, double a, double b = 0.0,
                double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), pattern, a, b, c);
  return buf;
}

std::vector<double> lambda_values(const Segment& s) {
  std::vector<double> v;
  for (const auto& m : s.lambda) v.push_back(m.value);
  return v;
}

}  // namespace

AuctionInstance four_buyer_example() {
  const double g1 = std::sqrt(77.0) / (12.0 * std::sqrt(2.0));
  const double g1b = 11.0 * std::sqrt(7.0) / (24.0 * std::sqrt(3.0));
  const double g2 = 2.0 * std::sqrt(22.0) / (7.0 * std::sqrt(7.0));
  const double g2b = 4.0 / std::sqrt(21.0);
  const double g4 = 3.0 * std::sqrt(3.0) / (2.0 * std::sqrt(7.0));
  AuctionInstance in;
  in.buyers.emplace_back(std::vector<double>{2, 10, 20},
                         std::vector<double>{g1, g1b - g1, 1 - g1b});
  in.buyers.emplace_back(std::vector<double>{1, 13, 14},
                         std::vector<double>{g2, g2b - g2, 1 - g2b});
  in.buyers.emplace_back(std::vector<double>{9, 20},
                         std::vector<double>{11.0 / 12, 1.0 / 12});
  in.buyers.emplace_back(std::vector<double>{1, 12},
                         std::vector<double>{g4, 1 - g4});
  return in;
}

AuctionInstance symmetric_example() {
  AuctionInstance in;
  for (int i = 0; i < 2; ++i) {
    in.buyers.emplace_back(std::vector<double>{1, 2},
                           std::vector<double>{0.5, 0.5});
  }
  return in;
}

AuctionInstance early_termination_example() {
  AuctionInstance in;
  auto add = [&](std::vector<double> v, std::vector<double> p) {
    in.buyers.emplace_back(std::move(v), std::move(p));
  };
  add({0.08, 0.2, 0.8}, {0.2, 0.76, 0.04});
  add({0.09, 0.3, 0.9}, {0.3, 0.36, 0.34});
  add({0.07, 0.12, 0.7}, {0.3, 0.36, 0.34});
  add({0.07, 0.12, 0.7}, {0.3, 0.36, 0.34});
  add({0.07, 0.12, 0.7}, {0.2, 0.15, 0.65});
  add({0.04, 0.12, 0.8}, {0.2, 0.15, 0.65});
  return in;
}

AuctionInstance oscillation_example() {
  AuctionInstance in;
  in.buyers.emplace_back(std::vector<double>{0.1, 0.2, 0.25},
                         std::vector<double>{0.25, 0.25, 0.5});
  for (int i = 0; i < 2; ++i) {
    in.buyers.emplace_back(std::vector<double>{0.1, 0.2, 0.25},
                           std::vector<double>{0.05, 0.45, 0.5});
  }
  return in;
}

AuctionInstance welfare_ratio_example() {
  AuctionInstance in;
  in.buyers.emplace_back(std::vector<double>{5.0 / 6}, std::vector<double>{1});
  in.buyers.emplace_back(std::vector<double>{0, 2.0 / 6, 3.0 / 6},
                         std::vector<double>{0.6, 0.2, 0.2});
  return in;
}

double four_buyer_cdf(int buyer, double x) {
  if (x < 2.0) return 0.0;
  if (x >= 9.0) return 1.0;
  switch (buyer) {
    case 0:
      if (x > 8.0) return 11.0 / (20.0 - x);
      if (x > 6.0) {
        return 11.0 / 12.0 *
               std::sqrt(2.0 * (20.0 - x) / ((14.0 - x) * (12.0 - x)));
      }
      return 77.0 / 48.0 * std::sqrt((10.0 - x) / ((9.0 - x) * (13.0 - x)));
    case 1:
      if (x > 8.0) return 1.0;
      if (x > 6.0) {
        return std::sqrt(8.0 * (14.0 - x) / ((20.0 - x) * (12.0 - x)));
      }
      return 8.0 / 7.0 * std::sqrt((13.0 - x) / ((10.0 - x) * (9.0 - x)));
    case 2:
      if (x >= 8.0) return 11.0 / (20.0 - x);
      if (x > 6.0) return 11.0 / 12.0;
      return 11.0 / 6.0 *
             std::sqrt(7.0 * (9.0 - x) / (3.0 * (10.0 - x) * (13.0 - x)));
    case 3:
      if (x > 8.0) return 1.0;
      if (x >= 6.0) {
        return std::sqrt(18.0 * (12.0 - x) / ((20.0 - x) * (14.0 - x)));
      }
      return 3.0 * std::sqrt(3.0) / (2.0 * std::sqrt(7.0));
  }
  return 0.0;
}

void PropertyReport::fail(std::string what) {
  ok = false;
  if (failures.size() < 20) failures.push_back(std::move(what));
}

PropertyReport check_properties(const Equilibrium& eq,
                                const AuctionInstance& instance) {
  PropertyReport r;
  const int n = eq.num_buyers();
  const double scale = std::max(1.0, eq.b_max);

  // Monotone CDFs that reach 1 at b_max.
  for (int i = 0; i < n; ++i) {
    double prev = 0.0;
    const int steps = 400;
    for (int k = 0; k <= steps; ++k) {
      const double x = eq.b_max * 1.01 * k / steps;
      const double f = cdf(eq, i, x);
      if (f < prev - 1e-12 || f < 0.0 || f > 1.0 + 1e-12) {
        r.fail(fmt("buyer %g: cdf not monotone near %g", i, x));
        break;
      }
      prev = f;
    }
    if (std::abs(cdf(eq, i, eq.b_max) - 1.0) > 1e-12) {
      r.fail(fmt("buyer %g: F(b_max) != 1", i));
    }
  }

  // Atoms only at b_min; no jumps above it.
  for (const auto& a : eq.atoms) {
    if (a.mass > 0.0 && a.bid != eq.b_min) {
      r.fail(fmt("atom of buyer %g at %g above b_min", a.buyer, a.bid));
    }
  }
  for (int i = 0; i < n; ++i) {
    const auto& segs = eq.segments[i];
    if (std::abs(cdf(eq, i, eq.b_min) - eq.atom_mass(i)) > kMassTol) {
      r.fail(fmt("buyer %g: F(b_min) differs from its atom", i));
    }
    if (segs.empty()) continue;
    if (std::abs(segs.front().f_hi - 1.0) > 1e-12) {
      r.fail(fmt("buyer %g: top segment does not start at level 1", i));
    }
    for (size_t k = 0; k + 1 < segs.size(); ++k) {
      if (std::abs(segs[k].f_lo - segs[k + 1].f_hi) > 1e-9) {
        r.fail(fmt("buyer %g: jump at bid %g", i, segs[k].lo));
      }
    }
    if (std::abs(segs.back().f_lo - eq.atom_mass(i)) > kMassTol) {
      r.fail(fmt("buyer %g: bottom level differs from atom", i));
    }
  }

  // Each value's probability is spent on its segments and the atom.
  for (int i = 0; i < n; ++i) {
    const auto& dist = instance.buyers[i];
    const double atom = eq.atom_mass(i);
    for (int j = 0; j < dist.size(); ++j) {
      double spent = std::max(
          0.0, std::min(dist.cdf_step(j), atom) - dist.level_below(j));
      for (const auto& s : eq.segments[i]) {
        if (s.value == dist.value(j)) spent += s.f_hi - s.f_lo;
      }
      if (std::abs(spent - dist.mass(j)) > kMassTol) {
        r.fail(fmt("buyer %g value %g: mass off by %g", i, dist.value(j),
                   spent - dist.mass(j)));
      }
    }
  }

  for (int i = 0; i < n; ++i) {
    for (const auto& s : eq.segments[i]) {
      if (!(s.hi - s.lo > 1e-9 * scale)) continue;
      const auto vals = lambda_values(s);

      // Indifference across the segment.
      const double u_hi = utility(eq, instance, i, s.value, s.hi);
      for (int k = 1; k < 20; ++k) {
        const double x = s.lo + (s.hi - s.lo) * k / 20.0;
        const double u = utility(eq, instance, i, s.value, x);
        if (std::abs(u - u_hi) > 1e-7 * scale) {
          r.fail(fmt("buyer %g: utility varies by %g at %g", i, u - u_hi, x));
          break;
        }
      }

      // Virtual value of the stretch's set increases with the bid.
      double prev = -1.0;
      for (int k = 0; k <= 20; ++k) {
        const double x = s.lo + (s.hi - s.lo) * k / 20.0;
        const double phi = virtual_value(x, vals);
        if (phi < prev - 1e-12 * scale) {
          r.fail(fmt("buyer %g: virtual value decreases at %g", i, x));
          break;
        }
        prev = phi;
      }

      // d ln F / dx by a fourth-order central difference.
      const double h = 1e-3 * (s.hi - s.lo);
      for (int k = 1; k < 10; ++k) {
        const double x = s.lo + (s.hi - s.lo) * k / 10.0;
        auto lnf = [&](double y) { return std::log(segment_cdf(s, y)); };
        const double fd = (-lnf(x + 2 * h) + 8 * lnf(x + h) - 8 * lnf(x - h) +
                           lnf(x - 2 * h)) /
                          (12 * h);
        const double exact = reversed_hazard(x, vals, s.value);
        if (std::abs(fd - exact) > 1e-6 * std::max(1.0, std::abs(exact))) {
          r.fail(fmt("buyer %g: d ln F/dx off by %g at %g", i, fd - exact, x));
          break;
        }
      }
    }
  }
  return r;
}

}  // namespace fpa::testing
