#pragma once

// Randomized property suites shared by `verify` and the acceptance binary.
// Every suite is driven by a 64-bit Mersenne Twister seeded from the caller,
// so a (suite, options) pair always produces the same report.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iomanip>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "smartfill/baselines.hpp"
#include "smartfill/error.hpp"
#include "smartfill/oracle.hpp"
#include "smartfill/scheduler.hpp"
#include "smartfill/speedup.hpp"
#include "smartfill/waterfill.hpp"

namespace malleable::suites {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

inline Family parse_family(const std::string& name) {
  for (Family f : {Family::power, Family::shifted_power, Family::log, Family::saturating, Family::inverted_shift,
                   Family::sum})
    if (family_name(f) == name) return f;
  throw ParseError("unknown family '" + name + "'");
}

// Random member of `family` on [0, B] that passes validate().
inline SpeedupFunction random_speedup(Rng& rng, Family family, double B) {
  switch (family) {
    case Family::power: return SpeedupFunction::power(uniform(rng, 0.5, 5.0), uniform(rng, 0.2, 0.9), B);
    case Family::shifted_power:
      return SpeedupFunction::shifted_power(uniform(rng, 0.5, 5.0), uniform(rng, 0.2, 5.0), uniform(rng, 0.2, 0.9), B);
    case Family::log: return SpeedupFunction::log(uniform(rng, 0.5, 5.0), uniform(rng, 0.2, 3.0), B);
    case Family::saturating:
      return SpeedupFunction::saturating(uniform(rng, 1.0, 10.0), uniform(rng, 0.5 * B, 3.0 * B),
                                         uniform(rng, -2.0, -0.3), B);
    case Family::inverted_shift:
      return SpeedupFunction::inverted_shift(uniform(rng, 0.5, 2.0), B * uniform(rng, 1.2, 3.0),
                                             uniform(rng, 1.2, 3.0), B);
    case Family::sum: {
      const Family parts[] = {Family::power, Family::shifted_power, Family::log};
      std::vector<std::pair<double, SpeedupFunction>> terms;
      const int n = 2 + static_cast<int>(rng() % 2);
      for (int i = 0; i < n; ++i)
        terms.emplace_back(uniform(rng, 0.2, 2.0), random_speedup(rng, parts[rng() % 3], B));
      return SpeedupFunction::sum(std::move(terms), B);
    }
    case Family::custom: break;
  }
  throw FamilyError("no random generator for this family");
}

// M distinct sizes in [1, 10] (descending) with non-decreasing weights in [0.1, 2].
inline ProblemInstance random_instance(Rng& rng, const SpeedupFunction& f, std::size_t M) {
  std::vector<double> sizes(M), weights(M);
  for (auto& x : sizes) x = uniform(rng, 1.0, 10.0);
  for (auto& w : weights) w = uniform(rng, 0.1, 2.0);
  std::sort(sizes.begin(), sizes.end(), std::greater<>());
  std::sort(weights.begin(), weights.end());
  for (std::size_t i = 1; i < M; ++i) sizes[i] = std::min(sizes[i], sizes[i - 1] * (1.0 - 1e-6));
  return ProblemInstance::make(f.bound(), sizes, weights, f);
}

// k in [2, 8], c_0 = 1 and non-increasing ratios down to ~1e-2, budget in (0, B].
inline CapInstance random_cap(Rng& rng, double B) {
  const std::size_t k = 2 + rng() % 7;
  std::vector<double> c(k);
  c[0] = 1.0;
  for (std::size_t i = 1; i < k; ++i) c[i] = c[i - 1] * uniform(rng, 0.5, 1.0);
  return CapInstance{B * uniform(rng, 0.01, 1.0), c};
}

struct SuiteReport {
  std::string name;
  std::size_t passed = 0;
  std::size_t total = 0;
  std::map<std::string, double> metrics;  // worst observed values
  std::vector<std::string> failures;

  bool ok() const { return passed == total; }

  void worst(const std::string& key, double v) {
    auto [it, fresh] = metrics.emplace(key, v);
    if (!fresh) it->second = std::max(it->second, v);
  }
  void record(bool good, const std::string& what) {
    ++total;
    if (good) {
      ++passed;
    } else if (failures.size() < 20) {
      failures.push_back(what);
    }
  }
  std::string summary() const {
    std::ostringstream out;
    out << std::setprecision(6) << name << ": " << passed << "/" << total << " passed";
    for (const auto& [k, v] : metrics) out << "  " << k << "=" << v;
    return out.str();
  }
};

struct SuiteOptions {
  std::uint64_t seed = 20240601;
  std::size_t trials = 0;                 // 0 = suite default
  std::vector<Family> families;           // empty = suite default
  std::vector<std::size_t> job_counts;    // oracle: {2, 3}; structure / linearity: up to 12
};

namespace detail {

inline std::vector<Family> or_default(const std::vector<Family>& chosen, std::vector<Family> fallback) {
  return chosen.empty() ? fallback : chosen;
}

inline std::string describe(Family f, std::size_t trial) {
  return std::string(family_name(f)) + " trial " + std::to_string(trial);
}

}  // namespace detail

// CAP constraint checks; closed form and bisection must agree on regular families.
inline SuiteReport gwf_suite(const SuiteOptions& opt) {
  constexpr double kAgreeTol = 1e-8;
  SuiteReport report;
  report.name = "gwf";
  const std::size_t trials = opt.trials ? opt.trials : 200;
  Rng rng(opt.seed);
  for (Family family : detail::or_default(opt.families, {Family::power, Family::shifted_power, Family::log,
                                                          Family::saturating, Family::inverted_shift, Family::sum})) {
    for (std::size_t t = 0; t < trials; ++t) {
      const double B = uniform(rng, 1.0, 20.0);
      const SpeedupFunction f = random_speedup(rng, family, B);
      const CapInstance cap = random_cap(rng, B);
      const std::string tag = detail::describe(family, t);
      try {
        const WaterFillSolution sol = gwf_solve(f, cap);
        const CapReport check = verify_cap(f, cap, sol.allocations);
        report.worst("budget_residual", check.budget_residual);
        report.worst("ratio_residual", check.ratio_residual);
        bool good = check.ok();
        if (auto desc = regular_descriptor(f)) {
          const auto closed = closed_form_waterfill(*desc, cap).allocations;
          const auto bisected = bisect_waterfill(f, cap).allocations;
          double gap = 0.0;
          for (std::size_t i = 0; i < closed.size(); ++i) gap = std::max(gap, std::abs(closed[i] - bisected[i]));
          gap /= cap.budget;
          report.worst("closed_vs_bisection", gap);
          good = good && gap < kAgreeTol;
        }
        report.record(good, tag);
      } catch (const Error& e) {
        report.record(false, tag + ": " + e.what());
      }
    }
  }
  return report;
}

// SmartFill against the brute-force optimizers: within 1e-3 relative, never
// more than 1e-6 relative above the oracle.
inline SuiteReport oracle_suite(const SuiteOptions& opt) {
  SuiteReport report;
  report.name = "oracle";
  const std::size_t trials = opt.trials ? opt.trials : 50;
  const std::vector<std::size_t> counts = opt.job_counts.empty() ? std::vector<std::size_t>{2, 3} : opt.job_counts;
  Rng rng(opt.seed + 1);
  for (std::size_t M : counts) {
    if (M != 2 && M != 3) throw InvalidInstance("oracle suite supports M = 2 and M = 3 only");
    for (Family family :
         detail::or_default(opt.families, {Family::power, Family::log, Family::shifted_power, Family::sum})) {
      for (std::size_t t = 0; t < trials; ++t) {
        const double B = uniform(rng, 1.0, 20.0);
        const ProblemInstance inst = random_instance(rng, random_speedup(rng, family, B), M);
        const std::string tag = "M=" + std::to_string(M) + " " + detail::describe(family, t);
        try {
          const double sf = smartfill(inst).objective;
          const double best = M == 2 ? oracle::oracle_m2(inst).objective : oracle::oracle_m3(inst).objective;
          const double gap = std::abs(sf - best) / best;
          const double below = (sf - best) / sf;  // > 0 when the oracle beats SmartFill
          report.worst("relative_gap", gap);
          report.worst("oracle_below_smartfill", below);
          report.record(gap < 1e-3 && below <= 1e-6, tag);
        } catch (const Error& e) {
          report.record(false, tag + ": " + e.what());
        }
      }
    }
  }
  return report;
}

// Structural invariants of SmartFill schedules with M <= 12.
inline SuiteReport structure_suite(const SuiteOptions& opt) {
  SuiteReport report;
  report.name = "structure";
  const std::size_t trials = opt.trials ? opt.trials : 50;
  Rng rng(opt.seed + 2);
  for (Family family : detail::or_default(opt.families, {Family::power, Family::shifted_power, Family::log,
                                                          Family::saturating, Family::inverted_shift, Family::sum})) {
    for (std::size_t t = 0; t < trials; ++t) {
      const double B = uniform(rng, 1.0, 20.0);
      const std::size_t M = opt.job_counts.empty() ? 1 + rng() % 12 : opt.job_counts[t % opt.job_counts.size()];
      const ProblemInstance inst = random_instance(rng, random_speedup(rng, family, B), M);
      const std::string tag = "M=" + std::to_string(M) + " " + detail::describe(family, t);
      try {
        const ScheduleResult r = smartfill(inst);
        bool good = r.matrix.upper_triangular();
        double column_error = 0.0;
        for (std::size_t l = 0; l < M; ++l)
          column_error = std::max(column_error, std::abs(r.matrix.column_sum(l) - B) / B);
        report.worst("column_sum_error", column_error);
        good = good && column_error <= 1e-9;
        for (std::size_t i = 1; i < M; ++i) good = good && r.completion_times[i] < r.completion_times[i - 1];
        const CdrReport cdr = verify_cdr(inst, r);
        report.worst("cdr_violations", static_cast<double>(cdr.violations.size()));
        good = good && cdr.ok();
        const LinearityCheck lin = linearity_check(inst, r);
        report.worst("linearity_residual", lin.residual);
        good = good && lin.residual < 1e-8 && lin.strictly_increasing;
        for (std::size_t i = 1; i < M; ++i) good = good && r.cdr_constants[i] <= r.cdr_constants[i - 1];
        if (family == Family::power)
          for (std::size_t l = 0; l < M; ++l)
            for (std::size_t i = 0; i <= l; ++i) good = good && r.matrix(i, l) > 0.0;
        report.record(good, tag);
      } catch (const Error& e) {
        report.record(false, tag + ": " + e.what());
      }
    }
  }
  return report;
}

// Doubling all sizes doubles J and leaves the coefficients a_i unchanged.
inline SuiteReport linearity_suite(const SuiteOptions& opt) {
  SuiteReport report;
  report.name = "linearity";
  const std::size_t trials = opt.trials ? opt.trials : 30;
  Rng rng(opt.seed + 3);
  for (Family family : detail::or_default(opt.families, {Family::power, Family::shifted_power, Family::log,
                                                          Family::saturating, Family::inverted_shift, Family::sum})) {
    for (std::size_t t = 0; t < trials; ++t) {
      const double B = uniform(rng, 1.0, 20.0);
      const std::size_t M = opt.job_counts.empty() ? 1 + rng() % 12 : opt.job_counts[t % opt.job_counts.size()];
      const ProblemInstance inst = random_instance(rng, random_speedup(rng, family, B), M);
      std::vector<double> doubled = inst.sizes;
      for (auto& x : doubled) x *= 2.0;
      const ProblemInstance twice = ProblemInstance::make(B, doubled, inst.weights, inst.speedup);
      const std::string tag = "M=" + std::to_string(M) + " " + detail::describe(family, t);
      try {
        const ScheduleResult r1 = smartfill(inst);
        const ScheduleResult r2 = smartfill(twice);
        const double j_error = std::abs(r2.objective / (2.0 * r1.objective) - 1.0);
        double a_error = 0.0;
        for (std::size_t i = 0; i < M; ++i)
          a_error = std::max(a_error, std::abs(r2.coefficients[i] / r1.coefficients[i] - 1.0));
        report.worst("objective_error", j_error);
        report.worst("coefficient_error", a_error);
        report.record(j_error < 1e-8 && a_error < 1e-7, tag);
      } catch (const Error& e) {
        report.record(false, tag + ": " + e.what());
      }
    }
  }
  return report;
}

inline std::vector<std::string> suite_names() { return {"gwf", "oracle", "structure", "linearity"}; }

inline SuiteReport run_suite(const std::string& name, const SuiteOptions& opt) {
  if (name == "gwf") return gwf_suite(opt);
  if (name == "oracle") return oracle_suite(opt);
  if (name == "structure") return structure_suite(opt);
  if (name == "linearity") return linearity_suite(opt);
  throw ParseError("unknown suite '" + name + "'");
}

}  // namespace malleable::suites
