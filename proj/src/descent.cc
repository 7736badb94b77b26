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

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fpa/root_finding.h"
#include "fpa/solver.h"

namespace fpa {

using nlohmann::ordered_json;

namespace {

void require_set(double x, std::span<const double> lambda_values) {
  if (lambda_values.size() < 2) {
    throw NumericalError("bidding set needs at least two values");
  }
  for (double vj : lambda_values) {
    if (!(vj > x)) {
      std::ostringstream msg;
      msg << "value " << vj << " is not above bid " << x;
      throw NumericalError(msg.str());
    }
  }
}

double gap(double v, double x) { return std::max(v - x, kMinGap); }

// (1/(k-1)) * sum_j 1/(v_j - x)
double mean_inverse_gap(double x, std::span<const double> lambda_values) {
  double sum = 0.0;
  for (double vj : lambda_values) sum += 1.0 / gap(vj, x);
  return sum / static_cast<double>(lambda_values.size() - 1);
}

double virtual_value_unchecked(double x,
                               std::span<const double> lambda_values) {
  return x + 1.0 / mean_inverse_gap(x, lambda_values);
}

std::string describe(double x) {
  std::ostringstream s;
  s.precision(17);
  s << x;
  return s.str();
}

}  // namespace

double reversed_hazard(double x, std::span<const double> lambda_values,
                       double v) {
  require_set(x, lambda_values);
  if (!(v > x)) {
    throw NumericalError("value " + describe(v) + " is not above bid " +
                         describe(x));
  }
  return mean_inverse_gap(x, lambda_values) - 1.0 / (v - x);
}

double virtual_value(double x, std::span<const double> lambda_values) {
  require_set(x, lambda_values);
  return virtual_value_unchecked(x, lambda_values);
}

double log_cdf_ratio(double v, double hi, double x,
                     std::span<const double> lambda_values) {
  const double k1 = static_cast<double>(lambda_values.size() - 1);
  double acc = std::log(gap(v, x)) - std::log(gap(v, hi));
  double set_term = 0.0;
  for (double vj : lambda_values) {
    set_term += std::log(gap(vj, hi)) - std::log(gap(vj, x));
  }
  return acc + set_term / k1;
}

double segment_cdf(const Segment& seg, double x) {
  if (x < seg.lo || x > seg.hi) {
    throw NumericalError("bid " + describe(x) + " outside segment [" +
                         describe(seg.lo) + ", " + describe(seg.hi) + "]");
  }
  if (x == seg.hi) return seg.f_hi;
  std::vector<double> vals;
  vals.reserve(seg.lambda.size());
  for (const auto& m : seg.lambda) vals.push_back(m.value);
  if (vals.size() < 2) return seg.f_hi;
  return seg.f_hi * std::exp(log_cdf_ratio(seg.value, seg.hi, x, vals));
}

namespace {

// Largest b' <= bid with value >= phi(b'). A value below `bid` may still be
// admitted further down.
std::optional<double> admission_point(
    double value, double bid, std::span<const double> lambda_values,
    double abs_tol, std::vector<std::string>* diagnostics) {
  auto excess = [&](double x) {
    return virtual_value_unchecked(x, lambda_values) - value;
  };
  const double top = std::min(bid, value);
  if (top < 0.0) return std::nullopt;
  if (value > bid && excess(bid) <= 0.0) return bid;
  if (excess(0.0) > 0.0) return std::nullopt;
  if (top <= 0.0) return std::nullopt;

  if (diagnostics != nullptr) {
    constexpr int kProbe = 16;
    int changes = 0;
    bool prev = excess(0.0) > 0.0;
    for (int i = 1; i <= kProbe; ++i) {
      const bool cur = excess(top * i / kProbe) > 0.0;
      if (cur != prev) ++changes;
      prev = cur;
    }
    if (changes > 1) {
      diagnostics->push_back("enter condition for value " + describe(value) +
                             " changes sign " + std::to_string(changes) +
                             " times below bid " + describe(bid));
    }
  }

  const Bracket b = bisect_increasing(excess, {0.0, top}, abs_tol);
  return b.lo;
}

}  // namespace

std::optional<double> predict_enter_point(
    double value, double bid, std::span<const double> lambda_values,
    double abs_tol, std::vector<std::string>* diagnostics) {
  require_set(bid, lambda_values);
  if (!(value > bid)) return std::nullopt;
  return admission_point(value, bid, lambda_values, abs_tol, diagnostics);
}

std::optional<double> predict_leave_point(
    double value, double level_below, double bid, double level,
    std::span<const double> lambda_values, double abs_tol) {
  require_set(bid, lambda_values);
  if (!(level_below > 0.0)) return std::nullopt;
  const double target = std::log(level_below);
  const double log_level = std::log(level);
  // ln F(x) - ln G(v^{j-1}); nondecreasing in x for an active buyer.
  auto surplus = [&](double x) {
    return log_level + log_cdf_ratio(value, bid, x, lambda_values) - target;
  };
  if (log_level <= target) return bid;
  if (surplus(0.0) > 0.0) return std::nullopt;
  const Bracket b = bisect_increasing(surplus, {0.0, bid}, abs_tol);
  return b.mid();
}

// ---------------------------------------------------------------------------
// DescentTrace

std::vector<Segment> DescentTrace::segments_of(int buyer) const {
  std::vector<Segment> out;
  for (const auto& s : segments) {
    if (s.buyer == buyer) out.push_back(s);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Segment& a, const Segment& b) {
                     return a.hi > b.hi;
                   });
  return out;
}

namespace {

ordered_json members_json(const std::vector<Member>& ms) {
  ordered_json arr = ordered_json::array();
  for (const auto& m : ms) {
    arr.push_back(ordered_json{{"buyer", m.buyer}, {"value", m.value}});
  }
  return arr;
}

}  // namespace

ordered_json trace_to_json(const DescentTrace& trace) {
  ordered_json doc;
  doc["b_bar"] = trace.b_bar;
  doc["stop"] = trace.stop;
  doc["reached_zero"] = trace.reached_zero;
  doc["event_count"] = trace.event_count();
  doc["events"] = ordered_json::array();
  for (const auto& e : trace.events) {
    doc["events"].push_back(ordered_json{{"bid", e.bid},
                                         {"entered", members_json(e.entered)},
                                         {"left", members_json(e.left)}});
  }
  doc["segments"] = ordered_json::array();
  for (const auto& s : trace.segments) {
    doc["segments"].push_back(ordered_json{{"buyer", s.buyer},
                                           {"value", s.value},
                                           {"lo", s.lo},
                                           {"hi", s.hi},
                                           {"F_lo", s.f_lo},
                                           {"F_hi", s.f_hi},
                                           {"lambda", members_json(s.lambda)}});
  }
  doc["final_levels"] = trace.final_levels;
  doc["diagnostics"] = trace.diagnostics;
  return doc;
}

// ---------------------------------------------------------------------------
// DescentState

DescentState::DescentState(const AuctionInstance& instance, double b_bar,
                           DescentOptions options)
    : instance_(&instance),
      options_(std::move(options)),
      b_bar_(b_bar),
      bid_(b_bar),
      event_tol_(options_.event_tol * std::max(1.0, instance.max_value())),
      entry_floor_(options_.entry_floor ? *options_.entry_floor
                                        : smallest_winning_bid(instance)) {
  bidders_.resize(instance.num_buyers());
  for (int i = 0; i < instance.num_buyers(); ++i) {
    auto& s = bidders_[i];
    s.buyer = i;
    s.value_index = instance.buyers[i].size() - 1;
    s.level = 1.0;
    s.active = false;
  }
}

double DescentState::current_value(int buyer) const {
  const auto& s = bidders_[buyer];
  return instance_->buyers[buyer].value(s.value_index);
}

int DescentState::lambda_size() const {
  return static_cast<int>(std::count_if(
      bidders_.begin(), bidders_.end(),
      [](const BidderState& s) { return s.active; }));
}

std::vector<Member> DescentState::lambda() const {
  std::vector<Member> out;
  for (const auto& s : bidders_) {
    if (s.active) out.push_back({s.buyer, current_value(s.buyer)});
  }
  return out;
}

std::vector<double> DescentState::lambda_values() const {
  std::vector<double> out;
  for (const auto& s : bidders_) {
    if (s.active) out.push_back(current_value(s.buyer));
  }
  return out;
}

double DescentState::level_at(int buyer, double x) const {
  const auto& s = bidders_[buyer];
  if (!s.active || s.stretch_lambda.size() < 2 || x >= s.stretch_hi) {
    return s.level;
  }
  std::vector<double> vals;
  vals.reserve(s.stretch_lambda.size());
  for (const auto& m : s.stretch_lambda) vals.push_back(m.value);
  return s.stretch_level *
         std::exp(log_cdf_ratio(current_value(buyer), s.stretch_hi, x, vals));
}

void DescentState::advance_to(double x) {
  if (x > bid_) throw NumericalError("descent cannot move upward");
  for (auto& s : bidders_) {
    if (!s.active) continue;
    for (const auto& m : s.stretch_lambda) {
      if (m.value - x < kMinGap) {
        diagnostics_.push_back("value " + describe(m.value) +
                               " within guard distance of bid " +
                               describe(x));
      }
    }
    const double new_level = level_at(s.buyer, x);
    if (x < s.stretch_hi && s.stretch_lambda.size() >= 2) {
      Segment seg;
      seg.buyer = s.buyer;
      seg.value = current_value(s.buyer);
      seg.lo = x;
      seg.hi = s.stretch_hi;
      seg.f_lo = new_level;
      seg.f_hi = s.stretch_level;
      seg.lambda = s.stretch_lambda;
      segments_.push_back(std::move(seg));
    }
    s.level = new_level;
    s.stretch_hi = x;
    s.stretch_level = new_level;
  }
  bid_ = x;
}

void DescentState::open_stretches() {
  const auto set = lambda();
  for (auto& s : bidders_) {
    if (!s.active) continue;
    s.stretch_hi = bid_;
    s.stretch_level = s.level;
    s.stretch_lambda = set;
  }
}

// ---------------------------------------------------------------------------

ChangePoint next_change_point(const DescentState& state) {
  if (state.lambda_size() < 2) {
    throw NumericalError("change points need at least two active buyers");
  }
  const auto vals = state.lambda_values();
  const auto& instance = state.instance();
  const double tol = state.options().bid_tol;

  std::vector<std::pair<double, int>> candidates;
  for (const auto& s : state.bidders()) {
    const double v = state.current_value(s.buyer);
    std::optional<double> at;
    if (s.active) {
      at = predict_leave_point(
          v, instance.buyers[s.buyer].level_below(s.value_index), state.bid(),
          s.level, vals, tol);
    } else if (v > state.entry_floor()) {
      require_set(state.bid(), vals);
      at = admission_point(
          v, state.bid(), vals, tol,
          state.diagnostics_sink());
    }
    if (at) candidates.emplace_back(*at, s.buyer);
  }

  ChangePoint cp;
  if (candidates.empty()) {
    cp.terminal = true;
    cp.bid = 0.0;
    return cp;
  }
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& c : candidates) best = std::max(best, c.first);
  cp.bid = std::max(best, 0.0);
  for (const auto& c : candidates) {
    if (c.first >= best - state.event_tolerance()) cp.buyers.push_back(c.second);
  }
  return cp;
}

DescentEvent update_bidding_set(DescentState& state, double bid) {
  if (bid > state.bid()) {
    throw NumericalError("change point " + describe(bid) +
                         " lies above the current bid");
  }
  const auto& instance = state.instance();
  const double tol = state.options().bid_tol;
  DescentEvent event;
  event.bid = bid;

  // Members whose current value runs out at `bid`.
  std::vector<int> consumed;
  if (state.lambda_size() >= 2) {
    const auto vals = state.lambda_values();
    for (const auto& s : state.bidders()) {
      if (!s.active || s.value_index == 0) continue;
      const auto at = predict_leave_point(
          state.current_value(s.buyer),
          instance.buyers[s.buyer].level_below(s.value_index), state.bid(),
          s.level, vals, tol);
      if (at && *at >= bid - state.event_tolerance()) {
        consumed.push_back(s.buyer);
      }
    }
  }

  state.advance_to(bid);

  for (int i : consumed) {
    auto& s = state.bidder(i);
    event.left.push_back({i, state.current_value(i)});
    s.active = false;
    s.value_index -= 1;
    s.level = instance.buyers[i].cdf_step(s.value_index);
  }

  // Admissions, largest unconsumed value first; stop at the first refusal.
  while (true) {
    int pick = -1;
    for (const auto& s : state.bidders()) {
      if (s.active) continue;
      if (pick < 0 ||
          state.current_value(s.buyer) > state.current_value(pick)) {
        pick = s.buyer;
      }
    }
    if (pick < 0) break;
    const double v = state.current_value(pick);
    if (!(v > bid) || !(v > state.entry_floor())) break;
    bool admit = state.lambda_size() <= 1;
    if (!admit) {
      const auto vals = state.lambda_values();
      admit = v >= virtual_value(bid, vals) - state.options().admit_tol;
    }
    if (!admit) break;
    state.bidder(pick).active = true;
    event.entered.push_back({pick, v});
  }

  state.open_stretches();
  return event;
}

DescentTrace run_descent(const AuctionInstance& instance, double b_bar,
                         const DescentOptions& options) {
  const double top = instance.max_value();
  if (!(b_bar > 0.0) || !(b_bar < top)) {
    throw ValidationError("guess " + describe(b_bar) +
                          " must lie in (0, " + describe(top) + ")");
  }
  DescentState state(instance, b_bar, options);
  DescentTrace trace;
  trace.b_bar = b_bar;

  auto record = [&](DescentEvent ev) {
    if (ev.empty()) return false;
    if (!trace.events.empty() && trace.events.back().bid == ev.bid) {
      auto& last = trace.events.back();
      last.entered.insert(last.entered.end(), ev.entered.begin(),
                          ev.entered.end());
      last.left.insert(last.left.end(), ev.left.begin(), ev.left.end());
    } else {
      trace.events.push_back(std::move(ev));
    }
    return true;
  };

  record(update_bidding_set(state, b_bar));

  // Every value enters and leaves at most once.
  const int max_events = 2 * instance.total_values() + 2;
  int steps = 0;
  while (state.lambda_size() >= 2 && state.bid() > 0.0) {
    options.deadline.check("descent");
    if (++steps > max_events) {
      throw NumericalError("descent exceeded " + std::to_string(max_events) +
                           " change points");
    }
    const ChangePoint cp = next_change_point(state);
    if (cp.terminal) {
      state.advance_to(0.0);
      trace.reached_zero = true;
      break;
    }
    if (!record(update_bidding_set(state, cp.bid))) {
      throw NumericalError("descent stalled at bid " + describe(cp.bid));
    }
  }

  trace.stop = state.bid();
  trace.segments = state.closed_segments();
  trace.final_levels.reserve(instance.num_buyers());
  for (int i = 0; i < instance.num_buyers(); ++i) {
    trace.final_levels.push_back(state.level_at(i, state.bid()));
  }
  trace.final_lambda = state.lambda();
  trace.diagnostics = state.diagnostics();
  return trace;
}

}  // namespace fpa
