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

#include "fpa/baseline.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "fpa/solver.h"

namespace fpa {

namespace {

// CDF of the unit triangle on [-1, 1].
double triangle_cdf(double z) {
  if (z <= -1.0) return 0.0;
  if (z <= 0.0) return 0.5 * (z + 1.0) * (z + 1.0);
  if (z < 1.0) return 1.0 - 0.5 * (1.0 - z) * (1.0 - z);
  return 1.0;
}

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

SmoothedDistribution::SmoothedDistribution(ValueDistribution source, double w,
                                           double eps_mix)
    : source_(std::move(source)), w_(w), eps_(eps_mix) {
  if (!(w > 0.0)) throw ValidationError("smoothing width must be positive");
  if (!(eps_mix > 0.0 && eps_mix < 1.0)) {
    throw ValidationError("mix weight must lie in (0, 1)");
  }
  const auto& v = source_.values();
  for (size_t d = 1; d < v.size(); ++d) {
    if (!(v[d] - v[d - 1] > 2.0 * w)) {
      throw ValidationError("values " + num(v[d - 1]) + " and " + num(v[d]) +
                            " are closer than 2w = " + num(2.0 * w));
    }
  }
  if (!(w < v.front())) {
    throw ValidationError("smallest value " + num(v.front()) +
                          " is not above w = " + num(w));
  }
  if (!(v.back() < 1.0 - w)) {
    throw ValidationError("largest value " + num(v.back()) +
                          " is not below 1 - w");
  }
  lo_ = v.front() - w;
  hi_ = v.back() + w;
  u_ = 1.0 / (hi_ - lo_);
}

double SmoothedDistribution::density(double t) const {
  if (t < lo_ || t > hi_) return 0.0;
  double tri = 0.0;
  for (int d = 0; d < source_.size(); ++d) {
    const double v = source_.value(d);
    const double p = source_.mass(d);
    if (t >= v - w_ && t <= v) {
      tri = p / (w_ * w_) * (t - v + w_);
      break;
    }
    if (t >= v && t <= v + w_) {
      tri = -p / (w_ * w_) * (t - v - w_);
      break;
    }
  }
  return tri * (1.0 - eps_) + eps_ * u_;
}

double SmoothedDistribution::cdf(double t) const {
  if (t <= lo_) return 0.0;
  if (t >= hi_) return 1.0;
  double tri = 0.0;
  for (int d = 0; d < source_.size(); ++d) {
    tri += source_.mass(d) * triangle_cdf((t - source_.value(d)) / w_);
  }
  return (1.0 - eps_) * tri + eps_ * u_ * (t - lo_);
}

double smoothing_scale(const AuctionInstance& instance, double w) {
  const double top = instance.max_value();
  if (top >= 1.0 - w) return (1.0 - 2.0 * w) / top;
  return 1.0;
}

AuctionInstance scale_values(const AuctionInstance& instance, double factor) {
  AuctionInstance out;
  out.reserve = instance.reserve * factor;
  for (const auto& d : instance.buyers) {
    std::vector<double> values = d.values();
    for (double& v : values) v *= factor;
    out.buyers.emplace_back(std::move(values), d.masses());
  }
  return out;
}

std::optional<double> fit_width(const AuctionInstance& instance, double w) {
  double fit = w;
  for (const auto& d : instance.buyers) {
    const auto& v = d.values();
    for (size_t k = 1; k < v.size(); ++k) {
      fit = std::min(fit, 0.49 * (v[k] - v[k - 1]));
    }
    fit = std::min(fit, 0.99 * v.front());
    fit = std::min(fit, 0.99 * (1.0 - v.back()));
  }
  if (!(fit > 0.0)) return std::nullopt;
  return fit;
}

std::vector<SmoothedDistribution> smooth(const AuctionInstance& instance,
                                         double w, double eps_mix) {
  std::vector<SmoothedDistribution> out;
  for (int i = 0; i < instance.num_buyers(); ++i) {
    try {
      out.emplace_back(instance.buyers[i], w, eps_mix);
    } catch (const ValidationError& e) {
      throw ValidationError("buyer " + std::to_string(i) + ": " + e.what());
    }
  }
  return out;
}

namespace {

double rhs_component(int i, double b, const std::vector<double>& t,
                     const SmoothedDistribution& dist) {
  const int n = static_cast<int>(t.size());
  double sum = 0.0;
  for (double tj : t) sum += 1.0 / (tj - b);
  const double bracket = sum / (n - 1) - 1.0 / (t[i] - b);
  // Outside the support the ratio uses the density at the nearer end, so
  // above the top F/f = 1 / (eps * u) and below the bottom it is 0.
  const double x = std::clamp(t[i], dist.lo(), dist.hi());
  const double level = dist.cdf(t[i]);
  if (level == 0.0) return 0.0;
  return level / dist.density(x) * bracket;
}

}  // namespace

std::vector<double> ode_rhs(double b, const std::vector<double>& t,
                            const std::vector<SmoothedDistribution>& dists) {
  if (t.size() != dists.size() || t.size() < 2) {
    throw ValidationError("need one t per buyer and at least two buyers");
  }
  for (size_t j = 0; j < t.size(); ++j) {
    if (!(t[j] > b)) {
      throw NumericalError("t_" + std::to_string(j) + " = " + num(t[j]) +
                           " is not above b = " + num(b));
    }
  }
  std::vector<double> out(t.size());
  for (size_t i = 0; i < t.size(); ++i) {
    out[i] = rhs_component(static_cast<int>(i), b, t, dists[i]);
    if (!std::isfinite(out[i])) {
      throw NumericalError("derivative of t_" + std::to_string(i) +
                           " is not finite at b = " + num(b));
    }
  }
  return out;
}

ShootResult backward_shoot(const std::vector<SmoothedDistribution>& dists,
                           double b_bar, const ShootOptions& options) {
  if (!(options.step > 0.0)) throw ValidationError("step must be positive");
  if (dists.size() < 2) throw ValidationError("need at least two buyers");
  const int n = static_cast<int>(dists.size());
  const double s = options.step;
  ShootResult r;
  r.t.resize(n);
  for (int i = 0; i < n; ++i) r.t[i] = 1.0;

  double b = b_bar;
  auto record = [&] {
    if (!options.record_trajectory) return;
    std::vector<double> row{b};
    row.insert(row.end(), r.t.begin(), r.t.end());
    r.trajectory.push_back(std::move(row));
  };
  auto all_above = [&] {
    for (double ti : r.t) {
      if (!(ti > b)) return false;
    }
    return true;
  };

  record();
  while (all_above()) {
    if (b <= 0.0) {
      r.hit_zero = true;
      break;
    }
    if ((r.steps & 1023) == 0) options.deadline.check("backward shoot");
    for (int i = 0; i < n; ++i) {
      double d = rhs_component(i, b, r.t, dists[i]);
      if (!std::isfinite(d)) {
        throw NumericalError("derivative of t_" + std::to_string(i) +
                             " is not finite at b = " + num(b));
      }
      if (options.clamp) d = std::clamp(d, -*options.clamp, *options.clamp);
      const double before = r.t[i];
      r.t[i] = before - d * s;
      const auto& src = dists[i].source();
      const double w = dists[i].width();
      for (int k = 0; k < src.size(); ++k) {
        const double v = src.value(k);
        if (before > v + w && r.t[i] < v - w) {
          r.diagnostics.push_back("buyer " + std::to_string(i) +
                                  " skipped value " + num(v) + " at b = " +
                                  num(b));
        }
      }
    }
    b -= s;
    ++r.steps;
    record();
  }
  r.b_min = b;
  return r;
}

BaselineReport solve_continuous(const AuctionInstance& instance,
                                const BaselineOptions& options) {
  if (!(options.tol > 0.0)) throw ValidationError("tol must be positive");
  const auto start = std::chrono::steady_clock::now();
  BaselineReport report;
  auto finish = [&] {
    report.wall_ms = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - start)
                         .count();
    return report;
  };

  report.scale = smoothing_scale(instance, options.w);
  const AuctionInstance scaled = scale_values(instance, report.scale);
  report.width = options.w;
  if (options.fit_width) {
    const auto w = fit_width(scaled, options.w);
    if (!w) {
      report.failure = "no smoothing width satisfies the constraints";
      return finish();
    }
    report.width = *w;
  }
  const auto dists = smooth(scaled, report.width, options.eps_mix);
  const double target = smallest_winning_bid(scaled);
  report.target_b_min = target / report.scale;

  ShootOptions shoot;
  shoot.step = options.step;
  shoot.clamp = options.clamp;
  shoot.deadline = options.deadline;

  double lo = 0.0;
  double hi = scaled.max_value();
  for (int it = 1; it <= options.max_iterations; ++it) {
    options.deadline.check("continuous solve");
    report.iterations = it;
    const double mid = 0.5 * (lo + hi);
    try {
      report.last_shoot = backward_shoot(dists, mid, shoot);
    } catch (const NumericalError& e) {
      report.failure = e.what();
      return finish();
    }
    report.total_steps += report.last_shoot.steps;
    report.b_bar = mid / report.scale;
    report.b_min = report.last_shoot.b_min / report.scale;
    if (std::abs(report.b_min - report.target_b_min) < options.tol) {
      report.converged = true;
      return finish();
    }
    if (report.last_shoot.b_min > target) {
      hi = mid;
    } else {
      lo = mid;
    }
    if (!(hi - lo > 1e-12 * std::max(1.0, hi))) {
      report.failure = "bracket collapsed at guess " + num(mid / report.scale);
      return finish();
    }
  }
  report.failure = "no convergence within " +
                   std::to_string(options.max_iterations) + " iterations";
  return finish();
}

std::string trajectory_csv(const ShootResult& result) {
  std::ostringstream out;
  out << "b";
  const size_t n = result.t.size();
  for (size_t i = 0; i < n; ++i) out << ",t_" << i;
  out << "\n";
  for (const auto& row : result.trajectory) {
    for (size_t k = 0; k < row.size(); ++k) {
      if (k) out << ',';
      out << num(row[k]);
    }
    out << "\n";
  }
  return out.str();
}

int increment_sign_changes(const ShootResult& result, int buyer) {
  int changes = 0;
  int last_sign = 0;
  for (size_t k = 1; k < result.trajectory.size(); ++k) {
    const double inc =
        result.trajectory[k][buyer + 1] - result.trajectory[k - 1][buyer + 1];
    const int sign = (inc > 0.0) - (inc < 0.0);
    if (sign == 0) continue;
    if (last_sign != 0 && sign != last_sign) ++changes;
    last_sign = sign;
  }
  return changes;
}

}  // namespace fpa
