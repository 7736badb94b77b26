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

#include "fpa/model.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "fpa/common.h"

namespace fpa {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr double kMassSumTolerance = 1e-9;

}  // namespace

ValueDistribution::ValueDistribution(std::vector<double> values,
                                     std::vector<double> masses)
    : values_(std::move(values)), masses_(std::move(masses)) {
  if (values_.empty()) throw ValidationError("empty value support");
  if (values_.size() != masses_.size()) {
    throw ValidationError("values and probs have different lengths");
  }
  for (size_t j = 0; j < values_.size(); ++j) {
    if (!std::isfinite(values_[j]) || values_[j] < 0.0) {
      throw ValidationError("value " + std::to_string(j) +
                            " is negative or not finite");
    }
    if (j > 0 && !(values_[j] > values_[j - 1])) {
      throw ValidationError("values are not strictly increasing");
    }
    if (!std::isfinite(masses_[j]) || !(masses_[j] > 0.0)) {
      throw ValidationError("prob " + std::to_string(j) + " is not positive");
    }
  }
  const double total = std::accumulate(masses_.begin(), masses_.end(), 0.0);
  if (std::abs(total - 1.0) > kMassSumTolerance) {
    throw ValidationError("probs sum to " + std::to_string(total) +
                          ", not 1");
  }
  for (double& m : masses_) m /= total;

  steps_.resize(masses_.size());
  double acc = 0.0;
  for (size_t j = 0; j < masses_.size(); ++j) {
    acc += masses_[j];
    steps_[j] = acc;
  }
  steps_.back() = 1.0;
}

double ValueDistribution::log_increment(int j) const {
  if (j <= 0) return std::numeric_limits<double>::infinity();
  return std::log(steps_[j]) - std::log(steps_[j - 1]);
}

double ValueDistribution::cdf_at(double v) const {
  // Index of the first support point strictly above v.
  const auto it = std::upper_bound(values_.begin(), values_.end(), v);
  if (it == values_.begin()) return 0.0;
  return steps_[static_cast<size_t>(it - values_.begin()) - 1];
}

double AuctionInstance::max_value() const {
  double best = 0.0;
  for (const auto& b : buyers) best = std::max(best, b.max_value());
  return best;
}

int AuctionInstance::total_values() const {
  int m = 0;
  for (const auto& b : buyers) m += b.size();
  return m;
}

void AuctionInstance::validate() const {
  if (num_buyers() < 2) {
    throw ValidationError("an auction needs at least 2 buyers, got " +
                          std::to_string(num_buyers()));
  }
  if (!std::isfinite(reserve) || reserve < 0.0) {
    throw ValidationError("reserve must be a nonnegative number");
  }
  if (!(reserve < max_value())) {
    throw ValidationError("reserve must lie below the largest value");
  }
}

double Equilibrium::atom_mass(int buyer) const {
  double m = 0.0;
  for (const auto& a : atoms) {
    if (a.buyer == buyer) m += a.mass;
  }
  return m;
}

// ---------------------------------------------------------------------------
// JSON.

namespace {

std::vector<double> number_array(const json& node, const std::string& what) {
  if (!node.is_array()) throw ValidationError(what + " must be an array");
  std::vector<double> out;
  out.reserve(node.size());
  for (const auto& x : node) {
    if (!x.is_number()) throw ValidationError(what + " must hold numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

double number_field(const json& node, const char* key) {
  if (!node.is_object() || !node.contains(key) || !node.at(key).is_number()) {
    throw ValidationError(std::string("missing numeric field '") + key + "'");
  }
  return node.at(key).get<double>();
}

int int_field(const json& node, const char* key) {
  if (!node.is_object() || !node.contains(key) ||
      !node.at(key).is_number_integer()) {
    throw ValidationError(std::string("missing integer field '") + key + "'");
  }
  return node.at(key).get<int>();
}

json parse_text(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("malformed JSON: ") + e.what());
  }
}

void dump_number(std::string& out, const ordered_json& v) {
  if (v.is_number_integer()) {
    out += v.dump();
    return;
  }
  const double x = v.get<double>();
  if (!std::isfinite(x)) {
    out += "null";
    return;
  }
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  out += buf;
}

void dump_into(std::string& out, const ordered_json& v) {
  switch (v.type()) {
    case ordered_json::value_t::object: {
      out += '{';
      bool first = true;
      for (const auto& [key, child] : v.items()) {
        if (!first) out += ',';
        first = false;
        out += ordered_json(key).dump();
        out += ':';
        dump_into(out, child);
      }
      out += '}';
      break;
    }
    case ordered_json::value_t::array: {
      out += '[';
      bool first = true;
      for (const auto& child : v) {
        if (!first) out += ',';
        first = false;
        dump_into(out, child);
      }
      out += ']';
      break;
    }
    case ordered_json::value_t::number_float:
    case ordered_json::value_t::number_integer:
    case ordered_json::value_t::number_unsigned:
      dump_number(out, v);
      break;
    default:
      out += v.dump();
  }
}

}  // namespace

AuctionInstance instance_from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("buyers") ||
      !doc.at("buyers").is_array()) {
    throw ValidationError("instance must be an object with a 'buyers' array");
  }
  AuctionInstance instance;
  const auto& buyers = doc.at("buyers");
  for (size_t i = 0; i < buyers.size(); ++i) {
    const auto& b = buyers[i];
    try {
      if (!b.is_object() || !b.contains("values") || !b.contains("probs")) {
        throw ValidationError("needs 'values' and 'probs'");
      }
      instance.buyers.emplace_back(number_array(b.at("values"), "values"),
                                   number_array(b.at("probs"), "probs"));
    } catch (const ValidationError& e) {
      throw ValidationError("buyer " + std::to_string(i) + ": " + e.what());
    }
  }
  if (doc.contains("reserve") && !doc.at("reserve").is_null()) {
    if (!doc.at("reserve").is_number()) {
      throw ValidationError("reserve must be a number");
    }
    instance.reserve = doc.at("reserve").get<double>();
  }
  instance.validate();
  return instance;
}

AuctionInstance parse_instance(std::string_view text) {
  return instance_from_json(parse_text(text));
}

ordered_json instance_to_json(const AuctionInstance& instance) {
  ordered_json doc;
  doc["buyers"] = ordered_json::array();
  for (const auto& b : instance.buyers) {
    ordered_json node;
    node["values"] = b.values();
    node["probs"] = b.masses();
    doc["buyers"].push_back(std::move(node));
  }
  doc["reserve"] = instance.reserve;
  return doc;
}

ordered_json equilibrium_to_json(const Equilibrium& eq) {
  ordered_json doc;
  doc["b_min"] = eq.b_min;
  doc["b_max"] = eq.b_max;
  doc["tie_rule"] = eq.tie_rule;
  doc["segments"] = ordered_json::array();
  for (const auto& per_buyer : eq.segments) {
    for (const auto& s : per_buyer) {
      ordered_json node;
      node["buyer"] = s.buyer;
      node["value"] = s.value;
      node["lo"] = s.lo;
      node["hi"] = s.hi;
      node["F_lo"] = s.f_lo;
      node["F_hi"] = s.f_hi;
      node["lambda"] = ordered_json::array();
      for (const auto& m : s.lambda) {
        node["lambda"].push_back(
            ordered_json{{"buyer", m.buyer}, {"value", m.value}});
      }
      doc["segments"].push_back(std::move(node));
    }
  }
  doc["atoms"] = ordered_json::array();
  for (const auto& a : eq.atoms) {
    doc["atoms"].push_back(
        ordered_json{{"buyer", a.buyer}, {"bid", a.bid}, {"mass", a.mass}});
  }
  return doc;
}

Equilibrium equilibrium_from_json(const json& doc, int num_buyers) {
  if (!doc.is_object() || !doc.contains("segments") || !doc.contains("atoms")) {
    throw ValidationError("equilibrium must have 'segments' and 'atoms'");
  }
  Equilibrium eq;
  eq.b_min = number_field(doc, "b_min");
  eq.b_max = number_field(doc, "b_max");
  if (doc.contains("tie_rule") && doc.at("tie_rule").is_string()) {
    eq.tie_rule = doc.at("tie_rule").get<std::string>();
  }
  eq.segments.resize(num_buyers);
  auto check_buyer = [&](int i) {
    if (i < 0 || i >= num_buyers) {
      throw ValidationError("buyer index " + std::to_string(i) +
                            " out of range");
    }
  };
  for (const auto& node : doc.at("segments")) {
    Segment s;
    s.buyer = int_field(node, "buyer");
    check_buyer(s.buyer);
    s.value = number_field(node, "value");
    s.lo = number_field(node, "lo");
    s.hi = number_field(node, "hi");
    s.f_lo = number_field(node, "F_lo");
    s.f_hi = number_field(node, "F_hi");
    if (!node.contains("lambda") || !node.at("lambda").is_array()) {
      throw ValidationError("segment without 'lambda'");
    }
    for (const auto& m : node.at("lambda")) {
      s.lambda.push_back({int_field(m, "buyer"), number_field(m, "value")});
    }
    eq.segments[s.buyer].push_back(std::move(s));
  }
  for (auto& per_buyer : eq.segments) {
    std::stable_sort(per_buyer.begin(), per_buyer.end(),
                     [](const Segment& a, const Segment& b) {
                       return a.hi > b.hi;
                     });
  }
  for (const auto& node : doc.at("atoms")) {
    Atom a{int_field(node, "buyer"), number_field(node, "bid"),
           number_field(node, "mass")};
    check_buyer(a.buyer);
    eq.atoms.push_back(a);
  }
  return eq;
}

Equilibrium parse_equilibrium(std::string_view text, int num_buyers) {
  return equilibrium_from_json(parse_text(text), num_buyers);
}

std::string dump_json(const ordered_json& doc) {
  std::string out;
  dump_into(out, doc);
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << contents;
}

}  // namespace fpa
