#pragma once

#include <cmath>
#include <limits>
#include <utility>

namespace malleable {

struct ScalarMinimum {
  double x = 0.0;
  double value = std::numeric_limits<double>::infinity();
};

// Golden-section search for a minimum of `fn` strictly inside (lo, hi); the
// endpoints are never evaluated. Stops when the bracket is narrower than `width`.
template <class Fn>
ScalarMinimum golden_section_minimize(Fn&& fn, double lo, double hi, double width) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = fn(x1);
  double f2 = fn(x2);
  ScalarMinimum best = f1 <= f2 ? ScalarMinimum{x1, f1} : ScalarMinimum{x2, f2};
  for (int it = 0; it < 200 && hi - lo > width; ++it) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = fn(x1);
      if (f1 < best.value) best = {x1, f1};
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = fn(x2);
      if (f2 < best.value) best = {x2, f2};
    }
  }
  return best;
}

// Global uniform grid over (0, hi] with `points` nodes, then golden-section
// refinement on the bracket around the best node. Non-finite values are
// skipped; returns value = +inf when every node is non-finite.
template <class Fn>
ScalarMinimum grid_golden_minimize(Fn&& fn, double hi, int points, double width) {
  const double step = hi / points;
  ScalarMinimum best;
  int best_node = 0;
  for (int g = 1; g <= points; ++g) {
    const double x = g == points ? hi : step * g;
    const double v = fn(x);
    if (std::isfinite(v) && v < best.value) {
      best = {x, v};
      best_node = g;
    }
  }
  if (best_node == 0) return best;

  const double lo = step * (best_node - 1);
  const double up = best_node == points ? hi : step * (best_node + 1);
  const ScalarMinimum refined = golden_section_minimize(
      [&](double x) {
        const double v = fn(x);
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
      },
      lo, up, width);
  return refined.value < best.value ? refined : best;
}

}  // namespace malleable
