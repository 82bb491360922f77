#pragma once

// Optimal schedules for M parallelizable jobs sharing bandwidth B under a
// common concave speedup s, minimizing sum_i w_i T_i.
//
// Jobs are indexed by non-increasing size (job 0 is the largest and finishes
// last). Column l of the schedule matrix is the interval during which jobs
// 0..l are still in the system; column M-1 runs first, column 0 last.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "smartfill/error.hpp"
#include "smartfill/golden.hpp"
#include "smartfill/speedup.hpp"
#include "smartfill/waterfill.hpp"

namespace malleable {

struct ProblemInstance {
  double bandwidth = 0.0;
  std::vector<double> sizes;    // non-increasing
  std::vector<double> weights;  // non-decreasing
  SpeedupFunction speedup;
  std::string label;

  std::size_t size() const { return sizes.size(); }

  // Rebinds `speedup` to [0, bandwidth] and checks the ordering invariants.
  static ProblemInstance make(double bandwidth, std::vector<double> sizes, std::vector<double> weights,
                              const SpeedupFunction& speedup, std::string label = {}) {
    ProblemInstance inst{bandwidth, std::move(sizes), std::move(weights), speedup.rebound(bandwidth),
                         std::move(label)};
    inst.check();
    return inst;
  }

  void check() const {
    if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) throw InvalidInstance("bandwidth must be positive");
    if (speedup.bound() != bandwidth) throw InvalidInstance("speedup domain differs from bandwidth");
    if (sizes.empty()) throw InvalidInstance("instance needs at least one job");
    if (sizes.size() != weights.size()) throw InvalidInstance("sizes and weights differ in length");
    for (std::size_t i = 0; i < sizes.size(); ++i) {
      if (!(sizes[i] > 0.0) || !std::isfinite(sizes[i])) throw InvalidInstance("sizes must be positive and finite");
      if (!(weights[i] > 0.0) || !std::isfinite(weights[i]))
        throw InvalidInstance("weights must be positive and finite");
      if (i > 0 && sizes[i] > sizes[i - 1]) throw InvalidInstance("sizes must be non-increasing");
      if (i > 0 && weights[i] < weights[i - 1]) throw InvalidInstance("weights must be non-decreasing");
    }
  }
};

// Jobs after the deterministic pre-sort (size descending, weight ascending,
// input index). Equal sizes are separated by a relative 1e-12 so completion
// times stay strictly ordered; `original_sizes` keeps the unperturbed values.
struct NormalizedJobs {
  ProblemInstance instance;
  std::vector<std::size_t> order;  // order[i] = input index of job i
  std::vector<double> original_sizes;
  bool reordered = false;
  bool perturbed = false;
};

inline constexpr double kTiePerturbation = 1e-12;

inline NormalizedJobs normalize_jobs(double bandwidth, const std::vector<double>& sizes,
                                     const std::vector<double>& weights, const SpeedupFunction& speedup,
                                     std::string label = {}) {
  if (sizes.size() != weights.size()) throw InvalidInstance("sizes and weights differ in length");
  NormalizedJobs out{ProblemInstance{bandwidth, {}, {}, speedup, std::move(label)}, {}, {}, false, false};
  out.order.resize(sizes.size());
  std::iota(out.order.begin(), out.order.end(), std::size_t{0});
  std::stable_sort(out.order.begin(), out.order.end(), [&](std::size_t x, std::size_t y) {
    if (sizes[x] != sizes[y]) return sizes[x] > sizes[y];
    return weights[x] < weights[y];
  });
  for (std::size_t i = 0; i < out.order.size(); ++i) {
    if (out.order[i] != i) out.reordered = true;
    out.original_sizes.push_back(sizes[out.order[i]]);
    out.instance.weights.push_back(weights[out.order[i]]);
    double x = sizes[out.order[i]];
    if (i > 0 && x >= out.instance.sizes.back()) {
      x = out.instance.sizes.back() * (1.0 - kTiePerturbation);
      out.perturbed = true;
    }
    out.instance.sizes.push_back(x);
  }
  for (std::size_t i = 1; i < out.instance.weights.size(); ++i)
    if (out.instance.weights[i] < out.instance.weights[i - 1])
      throw ValidationError("weights must be non-decreasing when jobs are ordered by decreasing size");
  out.instance = ProblemInstance::make(bandwidth, std::move(out.instance.sizes), std::move(out.instance.weights),
                                       speedup, std::move(out.instance.label));
  return out;
}

// M x M matrix of per-interval rates theta(job, column); upper triangular.
class ScheduleMatrix {
 public:
  ScheduleMatrix() = default;
  explicit ScheduleMatrix(std::size_t m) : m_(m), entries_(m * m, 0.0) {}

  std::size_t size() const { return m_; }
  double& operator()(std::size_t job, std::size_t column) { return entries_[job * m_ + column]; }
  double operator()(std::size_t job, std::size_t column) const { return entries_[job * m_ + column]; }

  double column_sum(std::size_t column) const {
    double s = 0.0;
    for (std::size_t i = 0; i < m_; ++i) s += (*this)(i, column);
    return s;
  }

  bool upper_triangular() const {
    for (std::size_t i = 0; i < m_; ++i)
      for (std::size_t j = 0; j < i; ++j)
        if ((*this)(i, j) != 0.0) return false;
    return true;
  }

 private:
  std::size_t m_ = 0;
  std::vector<double> entries_;
};

struct ScheduleResult {
  std::string policy;
  ScheduleMatrix matrix;
  std::vector<double> durations;         // durations[l]: length of column l's interval
  std::vector<double> completion_times;  // strictly decreasing for SJF schedules
  double objective = 0.0;
  std::vector<double> coefficients;   // a_i = dJ/dx_i
  std::vector<double> cdr_constants;  // c_i, c_0 = 1

  double mean_slowdown() const { return objective / static_cast<double>(completion_times.size()); }
};

// Durations, completion times and objective of a fixed matrix by work
// conservation, back to front. Coefficients are the exact sensitivities
// dJ/dx_i of the realized schedule and cdr_constants = a_0 / a_i.
inline ScheduleResult realize_schedule(const ProblemInstance& inst, const ScheduleMatrix& m) {
  const std::size_t M = inst.size();
  const double B = inst.bandwidth;
  const auto& f = inst.speedup;
  if (m.size() != M) throw InfeasibleSchedule("matrix dimension differs from job count");
  if (!m.upper_triangular()) throw InfeasibleSchedule("matrix is not upper triangular");

  std::vector<double> rate(M * M, 0.0);  // s(theta(i, l))
  for (std::size_t l = 0; l < M; ++l) {
    for (std::size_t i = 0; i <= l; ++i) {
      const double theta = m(i, l);
      if (!(theta >= 0.0) || theta > B * (1.0 + 1e-12)) {
        std::ostringstream msg;
        msg << "allocation theta(" << i << "," << l << ")=" << theta << " outside [0, B]";
        throw InfeasibleSchedule(msg.str());
      }
      rate[i * M + l] = f.value(std::min(theta, B));
    }
    if (m.column_sum(l) > B * (1.0 + 1e-9)) throw InfeasibleSchedule("column uses more than B");
  }

  ScheduleResult out;
  out.matrix = m;
  out.durations.assign(M, 0.0);
  for (std::size_t jj = M; jj-- > 0;) {
    double served = 0.0;
    for (std::size_t l = jj + 1; l < M; ++l) served += rate[jj * M + l] * out.durations[l];
    const double remaining = inst.sizes[jj] - served;
    const double own = rate[jj * M + jj];
    if (!(own > 0.0) || !(remaining > 0.0)) {
      std::ostringstream msg;
      msg << "job " << jj << " cannot finish last in its interval (remaining work " << remaining
          << ", own rate " << own << ")";
      throw InfeasibleSchedule(msg.str());
    }
    out.durations[jj] = remaining / own;
  }

  out.completion_times.assign(M, 0.0);
  double t = 0.0;
  for (std::size_t jj = M; jj-- > 0;) {
    t += out.durations[jj];
    out.completion_times[jj] = t;
  }
  out.objective = 0.0;
  for (std::size_t jj = 0; jj < M; ++jj) out.objective += inst.weights[jj] * out.completion_times[jj];

  out.coefficients.assign(M, 0.0);
  double active_weight = 0.0;
  for (std::size_t l = 0; l < M; ++l) {
    active_weight += inst.weights[l];
    double carried = 0.0;
    for (std::size_t i = 0; i < l; ++i) carried += out.coefficients[i] * rate[i * M + l];
    out.coefficients[l] = (active_weight - carried) / rate[l * M + l];
  }
  out.cdr_constants.assign(M, 1.0);
  for (std::size_t l = 1; l < M; ++l) out.cdr_constants[l] = out.coefficients[0] / out.coefficients[l];
  return out;
}

struct SplitChoice {
  double mu = 0.0;                 // bandwidth of the newly added (shortest) job
  double value = 0.0;              // minimal quotient, i.e. a_{k+1}
  std::vector<double> allocations;  // CAP allocations of the k earlier jobs at budget B - mu
};

inline constexpr int kSplitGrid = 1024;

// Bandwidth mu for job k (0-based) minimizing
//   (sum_{i<=k} w_i - sum_{i<k} a_i s(CAP_i(B - mu))) / s(mu)
// over (0, B]: uniform grid of 1024 nodes, then golden section to 1e-10*B.
inline SplitChoice optimal_split(const ProblemInstance& inst, std::size_t k, const std::vector<double>& coefficients,
                                 const WaterFiller& filler) {
  const auto& f = inst.speedup;
  const double B = inst.bandwidth;
  double weight = 0.0;
  for (std::size_t i = 0; i <= k; ++i) weight += inst.weights[i];

  auto quotient = [&](double mu) {
    const auto theta = filler.allocate(B - mu);
    double kept = 0.0;
    for (std::size_t i = 0; i < k; ++i) kept += coefficients[i] * f.value(theta[i]);
    return (weight - kept) / f.value(mu);
  };

  const ScalarMinimum best = grid_golden_minimize(quotient, B, kSplitGrid, 1e-10 * B);
  if (!std::isfinite(best.value)) throw OptimizerFailure("split quotient is non-finite on the whole grid");
  return SplitChoice{best.x, best.value, filler.allocate(B - best.x)};
}

// SmartFill: builds the optimal matrix column by column, from the interval in
// which only the largest job remains to the one where all jobs are present.
inline ScheduleResult smartfill(const ProblemInstance& inst) {
  inst.check();
  const std::size_t M = inst.size();
  const auto& f = inst.speedup;
  const double B = inst.bandwidth;

  ScheduleMatrix matrix(M);
  matrix(0, 0) = B;
  std::vector<double> c{1.0};
  std::vector<double> a{inst.weights[0] / f.value(B)};

  for (std::size_t k = 1; k < M; ++k) {
    const WaterFiller filler(f, c);
    SplitChoice split = optimal_split(inst, k, a, filler);
    for (std::size_t i = 0; i < k; ++i) matrix(i, k) = split.allocations[i];
    matrix(k, k) = split.mu;
    a.push_back(split.value);

    // Allocations are non-decreasing in index, so a zero for job k-1 means
    // job k took all of B; the ratio then follows the optimality condition
    // a_k s'(mu) = a_{k-1} s'(theta_{k-1}) at the boundary.
    double next;
    if (split.allocations[k - 1] > 0.0) {
      next = f.slope(split.mu) / f.slope(split.allocations[k - 1]) * c[k - 1];
    } else {
      next = c[k - 1] * a[k - 1] / a[k];
    }
    c.push_back(std::min(next, c[k - 1]));
  }

  ScheduleResult out = realize_schedule(inst, matrix);
  out.policy = "smartfill";
  out.coefficients = std::move(a);
  out.cdr_constants = std::move(c);
  return out;
}

struct CdrViolation {
  std::string kind;  // constancy | ratio | zero_allocation
  std::size_t i = 0;
  std::size_t j = 0;
  std::size_t column = 0;
  double residual = 0.0;
};

struct CdrReport {
  std::vector<CdrViolation> violations;
  double max_ratio_error = 0.0;

  bool ok() const { return violations.empty(); }
};

// Checks the constant-derivative-ratio structure of a schedule: for every pair
// of unfinished jobs with positive allocations the ratio s'(theta_j)/s'(theta_i)
// is the same in every column and equals c_j/c_i (1e-5 relative); when
// theta_i = 0 < theta_j, s'(theta_j)/s'(0) >= c_j/c_i - 1e-7 (skipped when
// s'(0) is infinite).
inline CdrReport verify_cdr(const ProblemInstance& inst, const ScheduleResult& result) {
  constexpr double kRatioTol = 1e-5;
  constexpr double kZeroTol = 1e-7;
  CdrReport report;
  const std::size_t M = inst.size();
  const auto& f = inst.speedup;
  const auto& m = result.matrix;
  const auto& c = result.cdr_constants;
  const bool have_constants = c.size() == M;
  const double slope_zero = f.slope(0.0);

  for (std::size_t i = 0; i < M; ++i) {
    for (std::size_t j = i + 1; j < M; ++j) {
      double first_ratio = 0.0;
      bool seen = false;
      for (std::size_t l = j; l < M; ++l) {
        const double ti = m(i, l), tj = m(j, l);
        if (ti > 0.0 && tj > 0.0) {
          const double ratio = f.slope(tj) / f.slope(ti);
          if (!seen) {
            first_ratio = ratio;
            seen = true;
          } else {
            const double err = std::abs(ratio / first_ratio - 1.0);
            report.max_ratio_error = std::max(report.max_ratio_error, err);
            if (!(err <= kRatioTol)) report.violations.push_back({"constancy", i, j, l, err});
          }
          if (have_constants) {
            const double err = std::abs(ratio / (c[j] / c[i]) - 1.0);
            report.max_ratio_error = std::max(report.max_ratio_error, err);
            if (!(err <= kRatioTol)) report.violations.push_back({"ratio", i, j, l, err});
          }
        } else if (ti == 0.0 && tj > 0.0 && have_constants && std::isfinite(slope_zero)) {
          const double lhs = f.slope(tj) / slope_zero;
          const double rhs = c[j] / c[i];
          if (lhs < rhs - kZeroTol) report.violations.push_back({"zero_allocation", i, j, l, rhs - lhs});
        }
      }
    }
  }
  return report;
}

struct LinearityCheck {
  double residual = 0.0;  // |J - sum a_i x_i| / J
  std::vector<double> coefficients;
  bool strictly_increasing = false;
};

inline LinearityCheck linearity_check(const ProblemInstance& inst, const ScheduleResult& result) {
  LinearityCheck out;
  out.coefficients = result.coefficients;
  double linear = 0.0;
  for (std::size_t i = 0; i < inst.size(); ++i) linear += result.coefficients[i] * inst.sizes[i];
  out.residual = std::abs(result.objective - linear) / result.objective;
  out.strictly_increasing = true;
  for (std::size_t i = 1; i < out.coefficients.size(); ++i)
    if (!(out.coefficients[i] > out.coefficients[i - 1])) out.strictly_increasing = false;
  return out;
}

}  // namespace malleable
