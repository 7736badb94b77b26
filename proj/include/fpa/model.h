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

// Domain types for sealed-bid first-price auctions with finitely supported
// value distributions, plus the instance and equilibrium file formats.

#ifndef FPA_MODEL_H_
#define FPA_MODEL_H_

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace fpa {

// One buyer's value distribution: a finite ascending support with positive
// masses. Immutable after construction.
class ValueDistribution {
 public:
  // Throws ValidationError unless values are nonnegative and strictly
  // increasing, masses are positive, and the masses sum to 1 within 1e-9.
  // Masses are renormalized to sum to exactly 1 (up to rounding).
  ValueDistribution(std::vector<double> values, std::vector<double> masses);

  int size() const { return static_cast<int>(values_.size()); }
  const std::vector<double>& values() const { return values_; }
  const std::vector<double>& masses() const { return masses_; }
  double value(int j) const { return values_[j]; }
  double mass(int j) const { return masses_[j]; }
  double min_value() const { return values_.front(); }
  double max_value() const { return values_.back(); }

  // G(v^j): probability that the value is at most values()[j].
  double cdf_step(int j) const { return steps_[j]; }
  // G(v^{j-1}), with G(v^{-1}) = 0.
  double level_below(int j) const { return j == 0 ? 0.0 : steps_[j - 1]; }
  // ln G(v^j) - ln G(v^{j-1}) for j >= 1.
  double log_increment(int j) const;

  // Right-continuous step evaluation of G.
  double cdf_at(double v) const;

 private:
  std::vector<double> values_;
  std::vector<double> masses_;
  std::vector<double> steps_;
};

inline double cdf_at(const ValueDistribution& dist, double v) {
  return dist.cdf_at(v);
}

struct AuctionInstance {
  std::vector<ValueDistribution> buyers;
  // Homogeneous reserve price.
  double reserve = 0.0;

  int num_buyers() const { return static_cast<int>(buyers.size()); }
  double max_value() const;
  // Total number of support points over all buyers.
  int total_values() const;

  // Throws ValidationError on n < 2, negative reserve, or a reserve at or
  // above every value.
  void validate() const;
};

// A buyer together with the value it currently bids for.
struct Member {
  int buyer = 0;
  double value = 0.0;

  friend bool operator==(const Member&, const Member&) = default;
};

// One stretch [lo, hi] of one buyer's bid distribution over which the
// bidding set is fixed. The closed-form CDF on the stretch is determined by
// (value, hi, f_hi, lambda); see segment_cdf() in descent.h.
struct Segment {
  int buyer = 0;
  double value = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  double f_lo = 0.0;
  double f_hi = 0.0;
  // Everyone bidding on (lo, hi), the segment's own buyer included.
  std::vector<Member> lambda;
};

struct Atom {
  int buyer = 0;
  double bid = 0.0;
  double mass = 0.0;
};

inline constexpr std::string_view kVickreyTieRule = "vickrey-among-highest";

struct Equilibrium {
  // segments[i] lists buyer i's segments ordered by decreasing bid.
  std::vector<std::vector<Segment>> segments;
  std::vector<Atom> atoms;
  double b_min = 0.0;
  double b_max = 0.0;
  std::string tie_rule{kVickreyTieRule};

  int num_buyers() const { return static_cast<int>(segments.size()); }
  // Atom mass of `buyer` (0 if none).
  double atom_mass(int buyer) const;
};

// ---------------------------------------------------------------------------
// File formats.

// Instance JSON:
//   {"buyers":[{"values":[...],"probs":[...]},...],"reserve":r?}
AuctionInstance parse_instance(std::string_view text);
AuctionInstance instance_from_json(const nlohmann::json& doc);
nlohmann::ordered_json instance_to_json(const AuctionInstance& instance);

// Equilibrium JSON:
//   {"b_min","b_max","segments":[{"buyer","value","lo","hi","F_lo","F_hi",
//    "lambda":[{"buyer","value"},...]},...],"atoms":[{"buyer","bid","mass"}]}
nlohmann::ordered_json equilibrium_to_json(const Equilibrium& eq);
Equilibrium equilibrium_from_json(const nlohmann::json& doc, int num_buyers);
Equilibrium parse_equilibrium(std::string_view text, int num_buyers);

// Serializes with stable key order and every number printed with 17
// significant digits, so identical inputs give byte-identical output.
std::string dump_json(const nlohmann::ordered_json& doc);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace fpa

#endif  // FPA_MODEL_H_
