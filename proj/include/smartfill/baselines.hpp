#pragma once

// Comparison policies: heSRPT (optimal for s = a*theta^p), heSRPT driven by a
// fitted power approximation of a general s, and equal splitting.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "smartfill/error.hpp"
#include "smartfill/golden.hpp"
#include "smartfill/scheduler.hpp"
#include "smartfill/speedup.hpp"

namespace malleable {

struct PowerFit {
  double a = 1.0;
  double p = 0.5;
};

// heSRPT allocation for exponent p: with W_i = w_0 + ... + w_i and
// q = 1/(1-p), job i receives B * ((W_i/W_l)^q - (W_{i-1}/W_l)^q) while
// jobs 0..l are present. The scale a does not affect the allocation.
inline ScheduleMatrix hesrpt_matrix(const ProblemInstance& inst, double p) {
  if (!(p > 0.0 && p < 1.0)) throw FamilyError("heSRPT needs an exponent in (0, 1)");
  const std::size_t M = inst.size();
  const double q = 1.0 / (1.0 - p);
  std::vector<double> cumulative(M);
  double running = 0.0;
  for (std::size_t i = 0; i < M; ++i) cumulative[i] = running += inst.weights[i];

  ScheduleMatrix m(M);
  for (std::size_t l = 0; l < M; ++l) {
    double previous = 0.0;
    for (std::size_t i = 0; i <= l; ++i) {
      const double share = std::pow(cumulative[i] / cumulative[l], q);
      m(i, l) = inst.bandwidth * (share - previous);
      previous = share;
    }
  }
  return m;
}

// heSRPT on a power-law instance.
inline ScheduleResult hesrpt_power(const ProblemInstance& inst) {
  if (inst.speedup.family() != Family::power) throw FamilyError("heSRPT requires a power speedup function");
  ScheduleResult out = realize_schedule(inst, hesrpt_matrix(inst, inst.speedup.p()));
  out.policy = "hesrpt";
  return out;
}

// Least-squares fit of a * theta^p to s(theta) on 1000 points of (B/1000, B].
// For fixed p the best a is sum(t^p s) / sum(t^2p); the profiled residual is
// minimized over p in (0, 1) by a grid followed by golden section.
inline PowerFit fit_power(const SpeedupFunction& f, double bandwidth) {
  constexpr int kPoints = 1000;
  constexpr double kEdge = 1e-9;
  const auto g = f.rebound(bandwidth);
  std::vector<double> theta(kPoints), s(kPoints);
  for (int i = 0; i < kPoints; ++i) {
    theta[i] = bandwidth * (i + 1) / kPoints;
    s[i] = g.value(theta[i]);
    if (!(s[i] > 0.0) || !std::isfinite(s[i])) throw FitFailure("speedup is not positive on the fit grid");
  }
  auto scale_for = [&](double p) {
    double num = 0.0, den = 0.0;
    for (int i = 0; i < kPoints; ++i) {
      const double tp = std::pow(theta[i], p);
      num += tp * s[i];
      den += tp * tp;
    }
    return num / den;
  };
  auto residual = [&](double p) {
    const double a = scale_for(p);
    double r = 0.0;
    for (int i = 0; i < kPoints; ++i) {
      const double e = a * std::pow(theta[i], p) - s[i];
      r += e * e;
    }
    return r;
  };
  const ScalarMinimum best = grid_golden_minimize(residual, 1.0 - kEdge, 200, 1e-12);
  if (!std::isfinite(best.value)) throw FitFailure("power fit residual is not finite");
  const double p = std::clamp(best.x, kEdge, 1.0 - kEdge);
  return PowerFit{scale_for(p), p};
}

// heSRPT allocations computed for s ~ fit.a * theta^fit.p, realized under the
// instance's true speedup function.
inline ScheduleResult hesrpt_approx(const ProblemInstance& inst, const PowerFit& fit) {
  if (!(fit.a > 0.0) || !(fit.p > 0.0 && fit.p < 1.0)) throw FamilyError("power fit needs a > 0 and 0 < p < 1");
  ScheduleResult out = realize_schedule(inst, hesrpt_matrix(inst, fit.p));
  out.policy = "hesrpt";
  return out;
}

inline ScheduleResult equal_split(const ProblemInstance& inst) {
  const std::size_t M = inst.size();
  ScheduleMatrix m(M);
  for (std::size_t l = 0; l < M; ++l)
    for (std::size_t i = 0; i <= l; ++i) m(i, l) = inst.bandwidth / static_cast<double>(l + 1);
  ScheduleResult out = realize_schedule(inst, m);
  out.policy = "equal";
  return out;
}

}  // namespace malleable
