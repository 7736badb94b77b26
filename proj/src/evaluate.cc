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

#include "fpa/evaluate.h"

#include <gsl/gsl_integration.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>

#include "fpa/common.h"
#include "fpa/descent.h"
#include "fpa/root_finding.h"

namespace fpa {

namespace {

// Bids this close to b_min count as a tie at b_min.
double tie_tolerance(const Equilibrium& eq) {
  return 1e-12 * std::max(1.0, std::abs(eq.b_min));
}

// Atom compositions below this are rounding noise.
constexpr double kMassSnap = 1e-7;

std::vector<double> values_of(const Segment& s) {
  std::vector<double> out;
  out.reserve(s.lambda.size());
  for (const auto& m : s.lambda) out.push_back(m.value);
  return out;
}

double segment_density(const Segment& s, double x) {
  const auto vals = values_of(s);
  if (vals.size() < 2) return 0.0;
  const double level =
      s.f_hi * std::exp(log_cdf_ratio(s.value, s.hi, x, vals));
  return level * reversed_hazard(x, vals, s.value);
}

double level_below_segments(const Equilibrium& eq, int buyer) {
  const auto& segs = eq.segments[buyer];
  return segs.empty() ? 1.0 : segs.back().f_lo;
}

// (v - x) * prod_{j != i} F_j(x), i.e. the utility if no tie occurs.
double utility_no_tie(const Equilibrium& eq, int buyer, double v, double x) {
  double win = 1.0;
  for (int j = 0; j < eq.num_buyers(); ++j) {
    if (j != buyer) win *= cdf(eq, j, x);
  }
  return (v - x) * win;
}

}  // namespace

double cdf(const Equilibrium& eq, int buyer, double x) {
  if (x < eq.b_min) return 0.0;
  double above = 1.0;
  for (const auto& s : eq.segments[buyer]) {
    if (x > s.hi) return above;
    if (x >= s.lo) {
      const auto vals = values_of(s);
      if (x == s.hi || vals.size() < 2) return s.f_hi;
      return s.f_hi * std::exp(log_cdf_ratio(s.value, s.hi, x, vals));
    }
    above = s.f_lo;
  }
  return above;
}

double density(const Equilibrium& eq, int buyer, double x) {
  for (const auto& s : eq.segments[buyer]) {
    if (x >= s.lo && x <= s.hi && s.lo < s.hi) return segment_density(s, x);
  }
  return 0.0;
}

double quantile(const Equilibrium& eq, int buyer, double u) {
  const auto& segs = eq.segments[buyer];
  if (u <= level_below_segments(eq, buyer)) return eq.b_min;
  for (auto it = segs.rbegin(); it != segs.rend(); ++it) {
    const Segment& s = *it;
    if (u <= s.f_lo) return s.lo;
    if (u <= s.f_hi) {
      const auto vals = values_of(s);
      const double log_target = std::log(u / s.f_hi);
      auto excess = [&](double x) {
        return log_cdf_ratio(s.value, s.hi, x, vals) - log_target;
      };
      return bisect_increasing(excess, {s.lo, s.hi}, 0.0).hi;
    }
  }
  return segs.empty() ? eq.b_min : segs.front().hi;
}

std::vector<double> atom_value_masses(const Equilibrium& eq,
                                      const AuctionInstance& instance,
                                      int buyer) {
  const auto& dist = instance.buyers[buyer];
  const double atom = eq.atom_mass(buyer);
  std::vector<double> out(dist.size(), 0.0);
  for (int j = 0; j < dist.size(); ++j) {
    const double below = dist.level_below(j);
    const double part = std::min(dist.cdf_step(j), atom) - below;
    if (part > kMassSnap) out[j] = part;
  }
  return out;
}

double tie_win_probability(const Equilibrium& eq,
                           const AuctionInstance& instance, int buyer,
                           double v, TieBreak tie) {
  const int n = eq.num_buyers();
  if (tie == TieBreak::kUniform) {
    double all = 1.0;
    for (int j = 0; j < n; ++j) {
      if (j != buyer) all *= eq.atom_mass(j);
    }
    return all / n;
  }
  // poly[k]: probability that every opponent so far sits at b_min with a
  // value <= v, exactly k of them equal to v.
  std::vector<double> poly{1.0};
  for (int j = 0; j < n; ++j) {
    if (j == buyer) continue;
    const auto masses = atom_value_masses(eq, instance, j);
    const auto& values = instance.buyers[j].values();
    double lower = 0.0;
    double equal = 0.0;
    for (size_t k = 0; k < masses.size(); ++k) {
      if (values[k] < v) lower += masses[k];
      if (values[k] == v) equal += masses[k];
    }
    std::vector<double> next(poly.size() + 1, 0.0);
    for (size_t k = 0; k < poly.size(); ++k) {
      next[k] += poly[k] * lower;
      next[k + 1] += poly[k] * equal;
    }
    poly = std::move(next);
  }
  double win = 0.0;
  for (size_t k = 0; k < poly.size(); ++k) win += poly[k] / (k + 1.0);
  return win;
}

double utility(const Equilibrium& eq, const AuctionInstance& instance,
               int buyer, double v, double b, TieBreak tie) {
  const double tol = tie_tolerance(eq);
  if (b < eq.b_min - tol) return 0.0;
  if (b <= eq.b_min + tol) {
    return (v - eq.b_min) * tie_win_probability(eq, instance, buyer, v, tie);
  }
  return utility_no_tie(eq, buyer, v, b);
}

VerificationReport verify_bne(const Equilibrium& eq,
                              const AuctionInstance& instance, double eps,
                              int grid, TieBreak tie) {
  if (grid < 100) throw ValidationError("grid must be at least 100");
  VerificationReport report;
  const double L = instance.max_value();
  const double margin = 0.01 * L;

  std::vector<double> structure{eq.b_min};
  for (const auto& per_buyer : eq.segments) {
    for (const auto& s : per_buyer) {
      structure.push_back(s.lo);
      structure.push_back(s.hi);
    }
  }
  for (const auto& a : eq.atoms) structure.push_back(a.bid);

  for (int i = 0; i < instance.num_buyers(); ++i) {
    const auto& dist = instance.buyers[i];
    const auto atom_masses = atom_value_masses(eq, instance, i);
    for (int j = 0; j < dist.size(); ++j) {
      const double v = dist.value(j);
      TypeCheck cell;
      cell.buyer = i;
      cell.value = v;

      std::vector<double> bids;
      double prescribed = std::numeric_limits<double>::infinity();
      if (atom_masses[j] > 0.0) {
        prescribed = utility(eq, instance, i, v, eq.b_min, tie);
        bids.push_back(eq.b_min);
      }
      for (const auto& s : eq.segments[i]) {
        if (std::abs(s.value - v) > 1e-9 * std::max(1.0, v)) continue;
        for (double x : {s.lo, 0.5 * (s.lo + s.hi), s.hi}) {
          // Support points are evaluated as limits from above.
          prescribed = std::min(prescribed, utility_no_tie(eq, i, v, x));
          bids.push_back(x);
        }
      }
      if (!std::isfinite(prescribed)) {
        // A type with no probability left anywhere: nothing to check.
        prescribed = utility(eq, instance, i, v, eq.b_min, tie);
      }

      const double top = std::min(v, eq.b_max + margin);
      if (top > 0.0) {
        for (int k = 0; k < grid; ++k) bids.push_back(top * k / (grid - 1));
      } else {
        bids.push_back(0.0);
      }
      for (double x : structure) {
        for (double d : {-1e-9, 0.0, 1e-9}) {
          const double b = x + d;
          if (b >= 0.0 && b <= v) bids.push_back(b);
        }
      }

      cell.prescribed_utility = prescribed;
      cell.best_utility = -std::numeric_limits<double>::infinity();
      for (double b : bids) {
        const double u = utility(eq, instance, i, v, b, tie);
        if (u > cell.best_utility) {
          cell.best_utility = u;
          cell.best_bid = b;
        }
      }
      cell.regret = cell.best_utility - prescribed;
      report.max_regret = std::max(report.max_regret, cell.regret);
      report.grid_size = std::max(report.grid_size, static_cast<int>(bids.size()));
      report.types.push_back(cell);
    }
  }
  report.passed = report.max_regret <= eps;
  return report;
}

nlohmann::ordered_json verification_to_json(const VerificationReport& report) {
  nlohmann::ordered_json doc;
  doc["passed"] = report.passed;
  doc["max_regret"] = report.max_regret;
  doc["grid_size"] = report.grid_size;
  doc["types"] = nlohmann::ordered_json::array();
  for (const auto& t : report.types) {
    doc["types"].push_back({{"buyer", t.buyer},
                            {"value", t.value},
                            {"prescribed_utility", t.prescribed_utility},
                            {"best_bid", t.best_bid},
                            {"best_utility", t.best_utility},
                            {"regret", t.regret}});
  }
  return doc;
}

// ---------------------------------------------------------------------------
// Welfare and revenue.

namespace {

constexpr int kGaussNodes = 64;
constexpr double kQuadratureTol = 1e-9;
constexpr int kMaxRefinements = 12;

struct GlTable {
  GlTable() : table(gsl_integration_glfixed_table_alloc(kGaussNodes)) {}
  ~GlTable() { gsl_integration_glfixed_table_free(table); }
  GlTable(const GlTable&) = delete;
  GlTable& operator=(const GlTable&) = delete;
  gsl_integration_glfixed_table* table;
};

const gsl_integration_glfixed_table* gl_table() {
  static const GlTable t;
  return t.table;
}

// Integrates f over [a, b] split into `parts` equal pieces.
template <typename F>
double composite_gl(F&& f, double a, double b, int parts) {
  const auto* t = gl_table();
  double total = 0.0;
  const double h = (b - a) / parts;
  for (int p = 0; p < parts; ++p) {
    const double lo = a + p * h;
    const double hi = (p + 1 == parts) ? b : lo + h;
    for (size_t k = 0; k < kGaussNodes; ++k) {
      double x = 0.0;
      double w = 0.0;
      gsl_integration_glfixed_point(lo, hi, k, &x, &w, t);
      total += w * f(x);
    }
  }
  return total;
}

// sum_i sum_segments  int f_i(x) prod_{j != i} F_j(x) weight(s, x) dx, split
// at every segment endpoint, refined by halving until stable.
template <typename W>
double winning_integral(const Equilibrium& eq, W&& weight) {
  std::vector<double> breaks;
  for (const auto& per_buyer : eq.segments) {
    for (const auto& s : per_buyer) {
      breaks.push_back(s.lo);
      breaks.push_back(s.hi);
    }
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  struct Piece {
    int buyer;
    const Segment* seg;
    double lo;
    double hi;
  };
  std::vector<Piece> pieces;
  for (int i = 0; i < eq.num_buyers(); ++i) {
    for (const auto& s : eq.segments[i]) {
      if (!(s.hi > s.lo)) continue;
      double lo = s.lo;
      for (double x : breaks) {
        if (x > lo && x < s.hi) {
          pieces.push_back({i, &s, lo, x});
          lo = x;
        }
      }
      pieces.push_back({i, &s, lo, s.hi});
    }
  }

  auto integrate = [&](int parts) {
    double total = 0.0;
    for (const auto& p : pieces) {
      auto f = [&](double x) {
        double others = 1.0;
        for (int j = 0; j < eq.num_buyers(); ++j) {
          if (j != p.buyer) others *= cdf(eq, j, x);
        }
        return segment_density(*p.seg, x) * others * weight(*p.seg, x);
      };
      total += composite_gl(f, p.lo, p.hi, parts);
    }
    return total;
  };

  double prev = integrate(1);
  for (int level = 1, parts = 2; level <= kMaxRefinements;
       ++level, parts *= 2) {
    const double cur = integrate(parts);
    if (std::abs(cur - prev) < kQuadratureTol) return cur;
    prev = cur;
  }
  return prev;
}

// The event that every buyer bids b_min. expected_max_value already carries
// the event probability as a factor.
struct AtomOutcome {
  double probability = 0.0;
  double expected_max_value = 0.0;
};

AtomOutcome atom_outcome(const Equilibrium& eq,
                         const AuctionInstance& instance) {
  const int n = eq.num_buyers();
  std::vector<std::vector<double>> masses(n);
  std::vector<double> points;
  AtomOutcome out;
  out.probability = 1.0;
  for (int i = 0; i < n; ++i) {
    masses[i] = atom_value_masses(eq, instance, i);
    double total = 0.0;
    for (double m : masses[i]) total += m;
    out.probability *= total;
    for (double v : instance.buyers[i].values()) points.push_back(v);
  }
  if (out.probability == 0.0) return out;
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());

  // Joint probability that all buyers sit at b_min with value <= w.
  auto all_at_most = [&](double w) {
    double p = 1.0;
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      const auto& values = instance.buyers[i].values();
      for (size_t k = 0; k < values.size(); ++k) {
        if (values[k] <= w) s += masses[i][k];
      }
      p *= s;
    }
    return p;
  };
  double prev = 0.0;
  for (double w : points) {
    const double cur = all_at_most(w);
    out.expected_max_value += w * (cur - prev);
    prev = cur;
  }
  return out;
}

// Calls visit(probability, sorted values descending) for every profile.
template <typename Visit>
void enumerate_profiles(const AuctionInstance& instance, Visit&& visit) {
  std::int64_t count = 1;
  for (const auto& d : instance.buyers) {
    count *= d.size();
    if (count > kMaxProfiles) {
      throw ValidationError("more than " + std::to_string(kMaxProfiles) +
                            " value profiles to enumerate");
    }
  }
  const int n = instance.num_buyers();
  std::vector<int> idx(n, 0);
  std::vector<double> vals(n);
  while (true) {
    double p = 1.0;
    for (int i = 0; i < n; ++i) {
      p *= instance.buyers[i].mass(idx[i]);
      vals[i] = instance.buyers[i].value(idx[i]);
    }
    std::sort(vals.begin(), vals.end(), std::greater<>());
    visit(p, vals);
    int i = 0;
    while (i < n && ++idx[i] == instance.buyers[i].size()) idx[i++] = 0;
    if (i == n) break;
  }
}

}  // namespace

double expected_max_value(const AuctionInstance& instance) {
  double total = 0.0;
  enumerate_profiles(instance, [&](double p, const std::vector<double>& v) {
    total += p * v[0];
  });
  return total;
}

double expected_second_value(const AuctionInstance& instance) {
  double total = 0.0;
  enumerate_profiles(instance, [&](double p, const std::vector<double>& v) {
    total += p * (v.size() > 1 ? v[1] : 0.0);
  });
  return total;
}

WelfareReport welfare(const Equilibrium& eq, const AuctionInstance& instance) {
  WelfareReport r;
  r.wel_s = expected_max_value(instance);
  const double continuous = winning_integral(
      eq, [](const Segment& s, double) { return s.value; });
  r.wel_f = continuous + atom_outcome(eq, instance).expected_max_value;
  if (!(r.wel_s > 0.0)) {
    throw ValidationError("expected highest value is 0; ratio undefined");
  }
  r.ratio = r.wel_f / r.wel_s;
  return r;
}

RevenueReport revenue(const Equilibrium& eq, const AuctionInstance& instance) {
  RevenueReport r;
  r.rev_s = expected_second_value(instance);
  const double continuous =
      winning_integral(eq, [](const Segment&, double x) { return x; });
  r.rev_f = continuous + eq.b_min * atom_outcome(eq, instance).probability;
  return r;
}

SimulationReport simulate(const Equilibrium& eq,
                          const AuctionInstance& instance, int samples,
                          std::uint64_t seed) {
  if (samples < 2) throw ValidationError("need at least 2 samples");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const int n = eq.num_buyers();
  std::vector<double> bids(n);
  std::vector<double> vals(n);
  double w_sum = 0.0, w_sq = 0.0, r_sum = 0.0, r_sq = 0.0;
  for (int s = 0; s < samples; ++s) {
    for (int i = 0; i < n; ++i) {
      const double u = 1.0 - unif(rng);
      bids[i] = quantile(eq, i, u);
      const auto& d = instance.buyers[i];
      int j = 0;
      while (j + 1 < d.size() && d.cdf_step(j) < u) ++j;
      vals[i] = d.value(j);
    }
    int winner = 0;
    for (int i = 1; i < n; ++i) {
      if (bids[i] > bids[winner] ||
          (bids[i] == bids[winner] && vals[i] > vals[winner])) {
        winner = i;
      }
    }
    const double w = vals[winner];
    const double r = bids[winner];
    w_sum += w;
    w_sq += w * w;
    r_sum += r;
    r_sq += r * r;
  }
  SimulationReport out;
  out.samples = samples;
  out.welfare_mean = w_sum / samples;
  out.revenue_mean = r_sum / samples;
  auto se = [&](double sum, double sq) {
    const double mean = sum / samples;
    const double var = std::max(0.0, sq / samples - mean * mean);
    return std::sqrt(var * samples / (samples - 1.0) / samples);
  };
  out.welfare_se = se(w_sum, w_sq);
  out.revenue_se = se(r_sum, r_sq);
  return out;
}

}  // namespace fpa
