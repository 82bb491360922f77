#pragma once

// Constrained allocation: split a budget b among k jobs so that the ratios of
// speedup derivatives match prescribed constants c_1 >= ... >= c_k > 0, with
// zero allocations governed by s'(theta_j)/s'(0) >= c_j/c_i. Solved as a
// water-filling problem: find the level h where the filled volume equals b.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "smartfill/error.hpp"
#include "smartfill/speedup.hpp"

namespace malleable {

struct CapInstance {
  double budget = 0.0;
  std::vector<double> ratios;  // c_1 >= c_2 >= ... >= c_k > 0

  std::size_t size() const { return ratios.size(); }
};

struct WaterFillSolution {
  // Level of the auxiliary function used by the solving path: alpha*h^gamma
  // on the closed-form path, -h on the bisection path, 0 when k = 1.
  double level = 0.0;
  std::vector<double> allocations;    // non-decreasing in index
  std::vector<std::size_t> zero_set;  // 0-based indices with allocation 0

  double total() const {
    double sum = 0.0;
    for (double t : allocations) sum += t;
    return sum;
  }
};

namespace detail {

// Relative size below which a fill is rounding noise of an empty bottle and
// is reported as an exact zero.
inline constexpr double kZeroSnap = 1e-12;

inline void check_ratios(const std::vector<double>& c) {
  if (c.empty()) throw InvalidInstance("CAP needs at least one job");
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (!(c[i] > 0.0) || !std::isfinite(c[i])) throw InvalidInstance("CAP ratios must be positive and finite");
    if (i > 0 && c[i] > c[i - 1]) throw InvalidInstance("CAP ratios must be non-increasing");
  }
}

inline void check_cap(const CapInstance& cap, double bound) {
  check_ratios(cap.ratios);
  if (!(cap.budget > 0.0) || cap.budget > bound) {
    std::ostringstream msg;
    msg << "CAP budget " << cap.budget << " outside (0, " << bound << "]";
    throw InvalidInstance(msg.str());
  }
}

inline WaterFillSolution finish(double level, std::vector<double> allocations) {
  WaterFillSolution out;
  out.level = level;
  out.allocations = std::move(allocations);
  for (std::size_t i = 0; i < out.allocations.size(); ++i)
    if (out.allocations[i] == 0.0) out.zero_set.push_back(i);
  return out;
}

// Rectangular bottles of a regular function: theta_i(h) = clamp(u_i (h - h_i), 0, b).
struct Bottles {
  std::vector<double> width;
  std::vector<double> bottom;

  Bottles(const RegularDescriptor& desc, const std::vector<double>& c) : width(c.size()), bottom(c.size()) {
    for (std::size_t i = 0; i < c.size(); ++i) {
      width[i] = std::pow(c[i], 1.0 / desc.gamma);
      bottom[i] = desc.orientation * desc.z_shift * std::pow(c[i], -1.0 / desc.gamma);
    }
  }

  // Exact root of the piecewise-linear volume function beta(h) = b.
  double level_for(double b) const {
    const std::size_t k = width.size();
    struct Event {
      double at;
      double delta;
    };
    std::vector<Event> events;
    events.reserve(2 * k);
    for (std::size_t i = 0; i < k; ++i) {
      events.push_back({bottom[i], width[i]});
      events.push_back({bottom[i] + b / width[i], -width[i]});
    }
    std::sort(events.begin(), events.end(), [](const Event& x, const Event& y) { return x.at < y.at; });

    double volume = 0.0, rate = 0.0, here = events.front().at;
    for (const auto& e : events) {
      const double next = volume + rate * (e.at - here);
      if (rate > 0.0 && next >= b) return here + (b - volume) / rate;
      volume = next;
      here = e.at;
      rate += e.delta;
    }
    return here;
  }

  std::vector<double> fill(double level, double b) const {
    std::vector<double> out(width.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (level - bottom[i] <= kZeroSnap * std::abs(bottom[i])) {
        out[i] = 0.0;
      } else {
        out[i] = std::min(width[i] * (level - bottom[i]), b);
      }
    }
    return out;
  }
};

// theta_i(h) under g(h) = -h.
inline double fill_one(const SpeedupFunction& f, double c, double level, double b, double slope_zero,
                       double slope_budget) {
  const double y = -c * level;
  if (y >= slope_zero) return 0.0;
  if (y <= slope_budget) return b;
  const double theta = slope_root(f, y, 0.0, b, 1e-13 * b);
  return std::isfinite(slope_zero) && theta <= kZeroSnap * b ? 0.0 : theta;
}

inline std::vector<double> fill_all(const SpeedupFunction& f, const std::vector<double>& c, double level,
                                    double b, double slope_zero, double slope_budget) {
  std::vector<double> out(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) out[i] = fill_one(f, c[i], level, b, slope_zero, slope_budget);
  return out;
}

inline double sum_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

}  // namespace detail

// Closed-form water filling for regular speedup functions.
inline WaterFillSolution closed_form_waterfill(const RegularDescriptor& desc, const CapInstance& cap) {
  detail::check_ratios(cap.ratios);
  if (!(cap.budget > 0.0)) throw InvalidInstance("CAP budget must be positive");
  const detail::Bottles bottles(desc, cap.ratios);
  const double level = bottles.level_for(cap.budget);
  return detail::finish(level, bottles.fill(level, cap.budget));
}

// Water filling by bisection on the level of g(h) = -h; works for any
// validated speedup function.
inline WaterFillSolution bisect_waterfill(const SpeedupFunction& f, const CapInstance& cap) {
  detail::check_cap(cap, f.bound());
  const auto& c = cap.ratios;
  const double b = cap.budget;
  const double slope_zero = f.slope(0.0);
  const double slope_budget = f.slope(b);
  auto volume = [&](double h) { return detail::sum_of(detail::fill_all(f, c, h, b, slope_zero, slope_budget)); };

  // At h_hi the last bottle is full, so beta(h_hi) >= b.
  double hi = -slope_budget / c.back();
  double lo = hi < 0.0 ? 2.0 * hi : -f.slope(0.5 * b) / c.back();
  int doublings = 0;
  while (volume(lo) >= b) {
    if (++doublings > 128) throw BracketFailure("no finite water level bracket; is s validated?");
    lo *= 2.0;
  }

  double level = hi;
  std::vector<double> theta = detail::fill_all(f, c, hi, b, slope_zero, slope_budget);
  if (std::abs(detail::sum_of(theta) - b) > 1e-10 * b) {
    for (int it = 0; it < 200; ++it) {
      level = 0.5 * (lo + hi);
      theta = detail::fill_all(f, c, level, b, slope_zero, slope_budget);
      const double beta = detail::sum_of(theta);
      if (std::abs(beta - b) <= 1e-10 * b || !(lo < level && level < hi)) break;
      (beta < b ? lo : hi) = level;
    }
  }
  return detail::finish(level, std::move(theta));
}

// Unique solution of the constrained allocation problem.
inline WaterFillSolution gwf_solve(const SpeedupFunction& f, const CapInstance& cap) {
  detail::check_cap(cap, f.bound());
  if (cap.size() == 1) return detail::finish(0.0, {cap.budget});
  if (auto desc = regular_descriptor(f)) return closed_form_waterfill(*desc, cap);
  return bisect_waterfill(f, cap);
}

// Repeated CAP solves for fixed (f, c) and varying budgets; precomputes the
// bottle geometry when f is regular.
class WaterFiller {
 public:
  WaterFiller(const SpeedupFunction& f, std::vector<double> ratios) : f_(&f), ratios_(std::move(ratios)) {
    detail::check_ratios(ratios_);
    if (ratios_.size() > 1) {
      if (auto desc = regular_descriptor(f)) bottles_.emplace(*desc, ratios_);
    }
  }

  // Allocations for budget b in [0, B]; b = 0 yields all zeros.
  std::vector<double> allocate(double b) const {
    if (b <= 0.0) return std::vector<double>(ratios_.size(), 0.0);
    if (ratios_.size() == 1) return {b};
    if (bottles_) return bottles_->fill(bottles_->level_for(b), b);
    return bisect_waterfill(*f_, CapInstance{b, ratios_}).allocations;
  }

  const std::vector<double>& ratios() const { return ratios_; }

 private:
  const SpeedupFunction* f_;
  std::vector<double> ratios_;
  std::optional<detail::Bottles> bottles_;
};

struct CapViolation {
  std::string constraint;  // budget | ordering | ratio | zero_allocation
  std::size_t i = 0;
  std::size_t j = 0;
  double residual = 0.0;
};

struct CapReport {
  std::vector<CapViolation> violations;
  double budget_residual = 0.0;  // |sum theta - b| / b
  double ratio_residual = 0.0;   // max relative ratio error over positive pairs

  bool ok() const { return violations.empty(); }
};

// Checks the four CAP constraints; budget within 1e-9*b, ratios within 1e-6 relative.
inline CapReport verify_cap(const SpeedupFunction& f, const CapInstance& cap, const std::vector<double>& theta) {
  constexpr double kBudgetTol = 1e-9;
  constexpr double kRatioTol = 1e-6;
  CapReport report;
  const auto& c = cap.ratios;
  const double b = cap.budget;
  if (theta.size() != c.size()) {
    report.violations.push_back({"size", theta.size(), c.size(), 1.0});
    return report;
  }
  const std::size_t k = c.size();

  report.budget_residual = std::abs(detail::sum_of(theta) - b) / b;
  if (report.budget_residual > kBudgetTol) report.violations.push_back({"budget", 0, 0, report.budget_residual});

  for (std::size_t i = 0; i + 1 < k; ++i)
    if (theta[i] > theta[i + 1] + 1e-12 * b)
      report.violations.push_back({"ordering", i, i + 1, theta[i] - theta[i + 1]});

  const double slope_zero = f.slope(0.0);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      if (theta[i] > 0.0 && theta[j] >= theta[i]) {
        const double ratio = f.slope(theta[j]) / f.slope(theta[i]);
        const double err = std::abs(ratio / (c[j] / c[i]) - 1.0);
        report.ratio_residual = std::max(report.ratio_residual, err);
        if (err > kRatioTol) report.violations.push_back({"ratio", i, j, err});
      } else if (theta[i] == 0.0 && theta[j] > 0.0) {
        const double lhs = f.slope(theta[j]) / slope_zero;
        const double rhs = c[j] / c[i];
        if (lhs < rhs * (1.0 - kRatioTol)) report.violations.push_back({"zero_allocation", i, j, rhs - lhs});
      }
    }
  }
  return report;
}

}  // namespace malleable
