#pragma once

// Brute-force optimizers for two and three jobs. They share no code with the
// SmartFill path: only s(theta) is evaluated, schedules are parameterized
// directly by their per-interval rates (SJF order, constant rate per
// interval) and minimized by exhaustive grids plus local golden refinement.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "smartfill/error.hpp"
#include "smartfill/scheduler.hpp"
#include "smartfill/speedup.hpp"

namespace malleable::oracle {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

namespace detail {

// Minimizes fn on [lo, hi] by golden section, keeping the best point seen
// (including `start`, whose value is `start_value`).
template <class Fn>
double refine(Fn&& fn, double lo, double hi, double& x, double width) {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double best_x = x, best = fn(x);
  double x1 = hi - r * (hi - lo), x2 = lo + r * (hi - lo);
  double f1 = fn(x1), f2 = fn(x2);
  for (int it = 0; it < 300 && hi - lo > width; ++it) {
    if (f1 <= f2) {
      if (f1 < best) best = f1, best_x = x1;
      hi = x2, x2 = x1, f2 = f1;
      x1 = hi - r * (hi - lo), f1 = fn(x1);
    } else {
      if (f2 < best) best = f2, best_x = x2;
      lo = x1, x1 = x2, f1 = f2;
      x2 = lo + r * (hi - lo), f2 = fn(x2);
    }
  }
  if (f1 < best) best = f1, best_x = x1;
  if (f2 < best) best = f2, best_x = x2;
  x = best_x;
  return best;
}

}  // namespace detail

struct TwoJobOptimum {
  double objective = kInf;
  double mu = 0.0;  // rate of the short job while both jobs are present
};

// Weighted completion time of the two-job schedule in which the short job
// runs at mu and the long job at B - mu until the short job completes.
inline double two_job_objective(const ProblemInstance& inst, double mu) {
  const double B = inst.bandwidth;
  if (!(mu > 0.0 && mu <= B)) return kInf;
  const auto& f = inst.speedup;
  const double t2 = inst.sizes[1] / evaluate(f, mu);
  const double left = inst.sizes[0] - evaluate(f, std::max(0.0, B - mu)) * t2;
  if (!(left > 0.0)) return kInf;
  const double t1 = t2 + left / evaluate(f, B);
  return inst.weights[0] * t1 + inst.weights[1] * t2;
}

inline TwoJobOptimum oracle_m2(const ProblemInstance& inst) {
  if (inst.size() != 2) throw InvalidInstance("oracle_m2 needs exactly two jobs");
  constexpr int kGrid = 100000;
  const double B = inst.bandwidth;
  TwoJobOptimum best;
  int node = 0;
  for (int g = 1; g <= kGrid; ++g) {
    const double mu = g == kGrid ? B : B * g / kGrid;
    const double v = two_job_objective(inst, mu);
    if (v < best.objective) best = {v, mu}, node = g;
  }
  if (node == 0) return best;
  const double lo = B * (node - 1) / kGrid;
  const double hi = std::min(B, B * (node + 1) / kGrid);
  double mu = best.mu;
  const double v = detail::refine([&](double x) { return two_job_objective(inst, x); }, lo, hi, mu, 1e-10 * B);
  if (v < best.objective) best = {v, mu};
  return best;
}

struct ThreeJobOptimum {
  double objective = kInf;
  // rates while three jobs are present: shortest, middle (the largest job gets the rest)
  double shortest = 0.0;
  double middle = 0.0;
  // rate of the middle job once the shortest has completed
  double middle_after = 0.0;
};

inline double three_job_objective(const ProblemInstance& inst, double shortest, double middle, double middle_after) {
  const double B = inst.bandwidth;
  if (!(shortest > 0.0) || !(middle >= 0.0) || shortest + middle > B) return kInf;
  if (!(middle_after > 0.0 && middle_after <= B)) return kInf;
  const auto& f = inst.speedup;
  const double d3 = inst.sizes[2] / evaluate(f, shortest);
  const double left2 = inst.sizes[1] - evaluate(f, middle) * d3;
  const double left1 = inst.sizes[0] - evaluate(f, std::max(0.0, B - shortest - middle)) * d3;
  if (!(left2 > 0.0) || !(left1 > 0.0)) return kInf;
  const double d2 = left2 / evaluate(f, middle_after);
  const double last = left1 - evaluate(f, std::max(0.0, B - middle_after)) * d2;
  if (!(last > 0.0)) return kInf;
  const double d1 = last / evaluate(f, B);
  const double t3 = d3, t2 = d3 + d2, t1 = t2 + d1;
  return inst.weights[0] * t1 + inst.weights[1] * t2 + inst.weights[2] * t3;
}

// Exhaustive scan over a 300 x 300 grid of the three-job interval and a 10^4
// grid of the two-job interval, then two sweeps of coordinate descent.
// `middle_after_first` changes the coordinate order of the refinement.
inline ThreeJobOptimum oracle_m3(const ProblemInstance& inst, bool middle_after_first = false) {
  if (inst.size() != 3) throw InvalidInstance("oracle_m3 needs exactly three jobs");
  constexpr int kOuter = 300;
  constexpr int kInner = 10000;
  const double B = inst.bandwidth;
  const auto& f = inst.speedup;
  const double w1 = inst.weights[0], w2 = inst.weights[1], w3 = inst.weights[2];
  const double full = evaluate(f, B);

  // For remaining sizes (r1, r2) the two-job interval costs
  //   r2 * q(rho) + w1 * r1 / s(B),  q(rho) = (w1 + w2 - w1 s(B - rho) / s(B)) / s(rho),
  // feasible iff s(B - rho) / s(rho) < r1 / r2. The feasibility ratio falls
  // with rho, so the scan over rho reduces to a suffix minimum of q.
  std::vector<double> rho(kInner), q(kInner), ratio(kInner), suffix_q(kInner);
  std::vector<int> suffix_at(kInner);
  for (int m = 0; m < kInner; ++m) {
    rho[m] = m + 1 == kInner ? B : B * (m + 1) / kInner;
    const double own = evaluate(f, rho[m]);
    const double other = evaluate(f, std::max(0.0, B - rho[m]));
    q[m] = (w1 + w2 - w1 * other / full) / own;
    ratio[m] = other / own;
  }
  for (int m = kInner - 1; m >= 0; --m) {
    if (m + 1 == kInner || q[m] <= suffix_q[m + 1]) {
      suffix_q[m] = q[m];
      suffix_at[m] = m;
    } else {
      suffix_q[m] = suffix_q[m + 1];
      suffix_at[m] = suffix_at[m + 1];
    }
  }

  ThreeJobOptimum best;
  for (int i = 1; i <= kOuter; ++i) {
    const double shortest = i == kOuter ? B : B * i / kOuter;
    const double d3 = inst.sizes[2] / evaluate(f, shortest);
    for (int j = 0; j < kOuter; ++j) {
      const double middle = (B - shortest) * j / (kOuter - 1);
      const double r2 = inst.sizes[1] - evaluate(f, middle) * d3;
      const double r1 = inst.sizes[0] - evaluate(f, std::max(0.0, B - shortest - middle)) * d3;
      if (!(r2 > 0.0) || !(r1 > 0.0)) continue;
      // first rho with ratio < r1 / r2
      const double limit = r1 / r2;
      const auto it = std::partition_point(ratio.begin(), ratio.end(), [&](double v) { return !(v < limit); });
      if (it == ratio.end()) continue;
      const int m = suffix_at[static_cast<std::size_t>(it - ratio.begin())];
      const double value = (w1 + w2 + w3) * d3 + r2 * suffix_q[m] + w1 * r1 / full;
      if (value < best.objective) best = {value, shortest, middle, rho[m]};
    }
  }
  if (!std::isfinite(best.objective)) return best;

  const double step_outer = B / kOuter;
  const double step_inner = B / kInner;
  const double width = 1e-10 * B;
  for (int sweep = 0; sweep < 2; ++sweep) {
    auto refine_shortest = [&] {
      detail::refine([&](double x) { return three_job_objective(inst, x, best.middle, best.middle_after); },
                     std::max(0.0, best.shortest - step_outer), std::min(B, best.shortest + step_outer),
                     best.shortest, width);
    };
    auto refine_middle = [&] {
      detail::refine([&](double x) { return three_job_objective(inst, best.shortest, x, best.middle_after); },
                     std::max(0.0, best.middle - step_outer), std::min(B - best.shortest, best.middle + step_outer),
                     best.middle, width);
    };
    auto refine_after = [&] {
      detail::refine([&](double x) { return three_job_objective(inst, best.shortest, best.middle, x); },
                     std::max(0.0, best.middle_after - step_inner), std::min(B, best.middle_after + step_inner),
                     best.middle_after, width);
    };
    if (middle_after_first) {
      refine_after();
      refine_shortest();
      refine_middle();
    } else {
      refine_shortest();
      refine_middle();
      refine_after();
    }
  }
  best.objective = three_job_objective(inst, best.shortest, best.middle, best.middle_after);
  return best;
}

}  // namespace malleable::oracle
