// Copyright 2026 The symrot Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

namespace symrot {

/// Inverse error function on (-1, 1), computed by Newton iterations on
/// std::erf with a bisection safeguard. Converges to |erf(x) - p| <= 1e-12.
template <typename T>
T erf_inv(T p) {
  if (!(p > T(-1) && p < T(1))) {
    throw std::invalid_argument("erf_inv: argument must lie in (-1, 1)");
  }
  if (p == T(0)) return T(0);
  const T sign = p < T(0) ? T(-1) : T(1);
  const T target = std::abs(p);

  // Bracket [lo, hi] with erf(lo) <= target <= erf(hi).
  T lo = T(0), hi = T(1);
  while (std::erf(hi) < target) {
    lo = hi;
    hi *= T(2);
  }

  const T two_over_sqrt_pi = T(1.1283791670955125738961589031215);
  T x = lo + (hi - lo) / T(2);
  for (int it = 0; it < 200; ++it) {
    const T f = std::erf(x) - target;
    if (std::abs(f) <= T(1e-12)) break;
    if (f > T(0)) hi = x; else lo = x;
    const T dfdx = two_over_sqrt_pi * std::exp(-x * x);
    T step = f / dfdx;
    T next = x - step;
    if (!(next > lo && next < hi)) next = lo + (hi - lo) / T(2);
    x = next;
  }
  return sign * x;
}

}  // namespace symrot
