#pragma once

#include <cmath>
#include <utility>

namespace fedbid {

struct GoldenSectionResult {
  double x = 0.0;
  double fx = 0.0;
  int iterations = 0;
};

// Minimizes a unimodal f on [lo, hi] until the bracket is narrower than tol.
template <typename F>
GoldenSectionResult golden_section_minimize(F&& f, double lo, double hi,
                                            double tol, int max_iter = 500) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - inv_phi * (hi - lo);
  double d = lo + inv_phi * (hi - lo);
  double fc = f(c);
  double fd = f(d);
  int it = 0;
  for (; it < max_iter && (hi - lo) > tol; ++it) {
    if (fc < fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - inv_phi * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + inv_phi * (hi - lo);
      fd = f(d);
    }
  }
  const double x = 0.5 * (lo + hi);
  return {x, f(x), it};
}

}  // namespace fedbid
