// Copyright 2026 The PACS Authors.
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

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace pacs::numeric {

struct RootResult {
  double x = 0.0;
  double fx = 0.0;
  int evaluations = 0;
};

// Brent's method on a bracket with f(a) and f(b) of opposite sign.
template <typename F>
RootResult brent_root(F&& f, double a, double b, double fa, double fb,
                      double xtol = 4.0 * std::numeric_limits<double>::epsilon(),
                      int max_iter = 200) {
  RootResult res;
  if (fa == 0.0) return {a, fa, 0};
  if (fb == 0.0) return {b, fb, 0};
  double c = a, fc = fa, d = b - a, e = d;
  for (int it = 0; it < max_iter; ++it) {
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      d = e = b - a;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b; b = c; c = a;
      fa = fb; fb = fc; fc = fa;
    }
    const double tol = 2.0 * std::numeric_limits<double>::epsilon() * std::abs(b) + 0.5 * xtol;
    const double m = 0.5 * (c - b);
    if (std::abs(m) <= tol || fb == 0.0) {
      res.x = b;
      res.fx = fb;
      return res;
    }
    if (std::abs(e) >= tol && std::abs(fa) > std::abs(fb)) {
      double p, q, r;
      const double s = fb / fa;
      if (a == c) {
        p = 2.0 * m * s;
        q = 1.0 - s;
      } else {
        q = fa / fc;
        r = fb / fc;
        p = s * (2.0 * m * q * (q - r) - (b - a) * (r - 1.0));
        q = (q - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q; else p = -p;
      if (2.0 * p < std::min(3.0 * m * q - std::abs(tol * q), std::abs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = m;
        e = m;
      }
    } else {
      d = m;
      e = m;
    }
    a = b;
    fa = fb;
    b += std::abs(d) > tol ? d : (m > 0.0 ? tol : -tol);
    fb = f(b);
    ++res.evaluations;
  }
  res.x = b;
  res.fx = fb;
  return res;
}

// Bisection on an increasing function; stops when the bracket is relatively tight.
template <typename F>
double bisect_increasing(F&& f, double lo, double hi, double rtol, int max_iter = 400) {
  for (int it = 0; it < max_iter; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (f(mid) > 0.0) hi = mid; else lo = mid;
    if (hi - lo <= rtol * hi) break;
  }
  return 0.5 * (lo + hi);
}

inline std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> out(static_cast<std::size_t>(std::max(n, 0)));
  if (n == 1) {
    out[0] = a;
    return out;
  }
  for (int k = 0; k < n; ++k) {
    out[static_cast<std::size_t>(k)] = a + (b - a) * static_cast<double>(k) / (n - 1);
  }
  return out;
}

}  // namespace pacs::numeric
