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

#ifndef FPA_ROOT_FINDING_H_
#define FPA_ROOT_FINDING_H_

#include <utility>

namespace fpa {

// Bracket [lo, hi] around the sign change of a nondecreasing function.
// Invariant while bisecting: f(lo) <= 0 < f(hi).
struct Bracket {
  double lo;
  double hi;
  double width() const { return hi - lo; }
  double mid() const { return 0.5 * (lo + hi); }
};

// Shrinks `b` until its width is at most `abs_tol` (or the midpoint stops
// moving in floating point). `f` must be nondecreasing on the bracket with
// f(b.lo) <= 0 < f(b.hi); the caller is responsible for checking this.
template <typename F>
Bracket bisect_increasing(F&& f, Bracket b, double abs_tol,
                          int max_iter = 200) {
  for (int it = 0; it < max_iter && b.width() > abs_tol; ++it) {
    const double m = b.mid();
    if (m <= b.lo || m >= b.hi) break;
    if (f(m) <= 0.0) {
      b.lo = m;
    } else {
      b.hi = m;
    }
  }
  return b;
}

}  // namespace fpa

#endif  // FPA_ROOT_FINDING_H_
