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
#include <chrono>
#include <cmath>
#include <optional>
#include <sstream>

namespace fpa {

namespace {

int strongest_low_type(const AuctionInstance& instance) {
  int best = 0;
  for (int i = 1; i < instance.num_buyers(); ++i) {
    if (instance.buyers[i].min_value() > instance.buyers[best].min_value()) {
      best = i;
    }
  }
  return best;
}

}  // namespace

double smallest_bid_objective(const AuctionInstance& instance, double bid) {
  const int star = strongest_low_type(instance);
  double obj = instance.buyers[star].min_value() - bid;
  for (int i = 0; i < instance.num_buyers(); ++i) {
    if (i != star) obj *= instance.buyers[i].cdf_at(bid);
  }
  return obj;
}

double smallest_winning_bid(const AuctionInstance& instance) {
  const int star = strongest_low_type(instance);
  const double top = instance.buyers[star].min_value();

  // G is a right-continuous step function and (top - b) decreases, so the
  // maximum sits at a support point (or at 0).
  std::vector<double> candidates{0.0};
  for (const auto& dist : instance.buyers) {
    for (double v : dist.values()) {
      if (v <= top) candidates.push_back(v);
    }
  }
  std::sort(candidates.begin(), candidates.end());

  double best_bid = 0.0;
  double best_obj = -1.0;
  for (double b : candidates) {
    const double obj = smallest_bid_objective(instance, b);
    const double slack = 1e-14 * std::max(1.0, std::abs(best_obj));
    if (obj >= best_obj - slack) {
      best_bid = b;
      best_obj = std::max(obj, best_obj);
    }
  }
  return best_bid;
}

Equilibrium finalize(const DescentTrace& trace, const AuctionInstance& instance,
                     double b_min, double tolerance) {
  if (std::abs(trace.stop - b_min) > tolerance) {
    std::ostringstream msg;
    msg << "stop point " << trace.stop << " does not match smallest winning bid "
        << b_min;
    throw NumericalError(msg.str());
  }
  const int n = instance.num_buyers();
  Equilibrium eq;
  eq.b_min = b_min;
  eq.segments.resize(n);

  std::vector<double> atom_level = trace.final_levels;
  for (int i = 0; i < n; ++i) {
    const bool active_at_stop =
        std::any_of(trace.final_lambda.begin(), trace.final_lambda.end(),
                    [i](const Member& m) { return m.buyer == i; });
    for (auto seg : trace.segments_of(i)) {
      if (seg.lo == trace.stop) {
        // Re-anchor the bottom stretch on the exact b_min.
        if (b_min >= seg.hi) {
          if (active_at_stop) atom_level[i] = seg.f_hi;
          continue;
        }
        std::vector<double> vals;
        for (const auto& m : seg.lambda) vals.push_back(m.value);
        seg.lo = b_min;
        seg.f_lo = seg.f_hi * std::exp(log_cdf_ratio(seg.value, seg.hi, b_min,
                                                     vals));
        if (active_at_stop) atom_level[i] = seg.f_lo;
      }
      eq.segments[i].push_back(std::move(seg));
    }
  }

  eq.b_max = b_min;
  for (const auto& per_buyer : eq.segments) {
    for (const auto& s : per_buyer) eq.b_max = std::max(eq.b_max, s.hi);
  }
  for (int i = 0; i < n; ++i) {
    if (atom_level[i] > 0.0) eq.atoms.push_back({i, b_min, atom_level[i]});
  }
  return eq;
}

namespace {

SolveReport solve_unreserved(const AuctionInstance& instance,
                             const SolveOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  SolveReport report;
  report.b_min = smallest_winning_bid(instance);

  double lo = 0.0;
  double hi = instance.max_value();
  std::optional<DescentTrace> at_lo;
  std::optional<DescentTrace> at_hi;
  DescentOptions descent = options.descent;
  descent.deadline = options.deadline;

  auto residual = [&](const std::optional<DescentTrace>& t) {
    return t ? std::abs(t->stop - report.b_min)
             : std::numeric_limits<double>::infinity();
  };

  bool converged = false;
  for (int it = 1; it <= options.max_iterations; ++it) {
    options.deadline.check("solve");
    report.iterations = it;
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    DescentTrace trace = run_descent(instance, mid, descent);
    report.probes.emplace_back(mid, trace.stop);
    if (trace.stop > report.b_min) {
      hi = mid;
      at_hi = std::move(trace);
    } else {
      lo = mid;
      at_lo = std::move(trace);
    }
    if (hi - lo < options.tol &&
        std::min(residual(at_lo), residual(at_hi)) < options.tol) {
      converged = true;
      break;
    }
  }
  report.bracket_width = hi - lo;
  if (!converged) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "no convergence after " << report.iterations
        << " iterations: bracket [" << lo << ", " << hi << "], residuals "
        << residual(at_lo) << " / " << residual(at_hi);
    throw NumericalError(msg.str());
  }

  const bool use_hi = residual(at_hi) <= residual(at_lo);
  report.trace = use_hi ? std::move(*at_hi) : std::move(*at_lo);
  report.b_bar = report.trace.b_bar;
  report.residual = std::abs(report.trace.stop - report.b_min);
  report.equilibrium = finalize(report.trace, instance, report.b_min,
                                std::max(options.finalize_tol, options.tol));
  report.wall_ms = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - start)
                       .count();
  return report;
}

}  // namespace

SolveReport solve(const AuctionInstance& instance, const SolveOptions& options) {
  if (!(options.tol > 0.0)) throw ValidationError("tol must be positive");
  instance.validate();
  if (instance.reserve <= 0.0) return solve_unreserved(instance, options);

  const auto reduction = apply_reserve(instance, instance.reserve);
  SolveReport report = solve_unreserved(reduction.shifted, options);
  report.equilibrium =
      unshift_equilibrium(report.equilibrium, reduction.reserve);
  report.b_min += reduction.reserve;
  report.b_bar += reduction.reserve;
  return report;
}

ReserveReduction apply_reserve(const AuctionInstance& instance,
                               double reserve) {
  if (!(reserve >= 0.0)) throw ValidationError("reserve must be nonnegative");
  if (!(instance.max_value() > reserve)) {
    throw ValidationError("no value exceeds the reserve");
  }
  ReserveReduction out;
  out.reserve = reserve;
  for (const auto& dist : instance.buyers) {
    std::vector<double> values;
    std::vector<double> masses;
    double below = 0.0;
    double at_or_below = 0.0;
    for (int j = 0; j < dist.size(); ++j) {
      const double v = dist.value(j);
      if (v < reserve) {
        below += dist.mass(j);
        at_or_below += dist.mass(j);
      } else if (v == reserve) {
        at_or_below += dist.mass(j);
      } else {
        values.push_back(v - reserve);
        masses.push_back(dist.mass(j));
      }
    }
    if (at_or_below > 0.0) {
      values.insert(values.begin(), 0.0);
      masses.insert(masses.begin(), at_or_below);
    }
    out.shifted.buyers.emplace_back(std::move(values), std::move(masses));
    out.no_bid_mass.push_back(below);
  }
  out.shifted.reserve = 0.0;
  return out;
}

Equilibrium unshift_equilibrium(const Equilibrium& shifted, double reserve) {
  Equilibrium eq = shifted;
  eq.b_min += reserve;
  eq.b_max += reserve;
  for (auto& per_buyer : eq.segments) {
    for (auto& s : per_buyer) {
      s.lo += reserve;
      s.hi += reserve;
      s.value += reserve;
      for (auto& m : s.lambda) m.value += reserve;
    }
  }
  for (auto& a : eq.atoms) a.bid += reserve;
  return eq;
}

}  // namespace fpa
