#include <gtest/gtest.h>

#include <cmath>

#include "smartfill/baselines.hpp"
#include "smartfill/oracle.hpp"
#include "smartfill/scheduler.hpp"

using namespace malleable;

namespace {

ProblemInstance staircase(std::size_t M, const SpeedupFunction& f, double B = 10) {
  std::vector<double> x, w;
  for (std::size_t i = 0; i < M; ++i) {
    x.push_back(static_cast<double>(M - i));
    w.push_back(1.0 / x.back());
  }
  return ProblemInstance::make(B, x, w, f);
}

}  // namespace

TEST(ProblemInstance, ChecksOrdering) {
  const auto f = SpeedupFunction::power(1, 0.5, 10);
  EXPECT_THROW(ProblemInstance::make(10, {1, 2}, {1, 1}, f), InvalidInstance);
  EXPECT_THROW(ProblemInstance::make(10, {2, 1}, {2, 1}, f), InvalidInstance);
  EXPECT_THROW(ProblemInstance::make(10, {2, 1}, {1}, f), InvalidInstance);
  EXPECT_THROW(ProblemInstance::make(0, {1}, {1}, f), InvalidInstance);
  EXPECT_NO_THROW(ProblemInstance::make(10, {2, 1}, {1, 1}, f));
}

TEST(NormalizeJobs, SortsAndBreaksTies) {
  const auto jobs = normalize_jobs(10, {1, 3, 3, 2}, {1, 0.5, 0.4, 0.6}, SpeedupFunction::power(1, 0.5, 10));
  EXPECT_TRUE(jobs.reordered);
  EXPECT_TRUE(jobs.perturbed);
  EXPECT_EQ(jobs.order, (std::vector<std::size_t>{2, 1, 3, 0}));
  EXPECT_DOUBLE_EQ(jobs.original_sizes[1], 3.0);
  EXPECT_LT(jobs.instance.sizes[1], jobs.instance.sizes[0]);
  EXPECT_THROW(normalize_jobs(10, {2, 1}, {2, 1}, SpeedupFunction::power(1, 0.5, 10)), ValidationError);
}

TEST(RealizeSchedule, DirectArithmetic) {
  const auto inst = ProblemInstance::make(4, {4, 2}, {1, 1}, SpeedupFunction::power(1, 0.5, 4));
  ScheduleMatrix m(2);
  m(0, 0) = 4;
  m(1, 1) = 4;
  const auto r = realize_schedule(inst, m);
  EXPECT_DOUBLE_EQ(r.durations[1], 1.0);
  EXPECT_DOUBLE_EQ(r.durations[0], 2.0);
  EXPECT_DOUBLE_EQ(r.completion_times[0], 3.0);
  EXPECT_DOUBLE_EQ(r.completion_times[1], 1.0);
  EXPECT_DOUBLE_EQ(r.objective, 4.0);
}

TEST(RealizeSchedule, MoreBandwidthForLongJobHelpsIt) {
  const auto inst = ProblemInstance::make(4, {4, 2}, {1, 1}, SpeedupFunction::power(1, 0.5, 4));
  ScheduleMatrix m(2);
  m(0, 0) = 4;
  m(0, 1) = 1;
  m(1, 1) = 3;
  const auto before = realize_schedule(inst, m);
  m(0, 1) = 1.5;
  m(1, 1) = 2.5;
  const auto after = realize_schedule(inst, m);
  EXPECT_GT(after.completion_times[1], before.completion_times[1]);
  m(0, 1) = 1.5;
  m(1, 1) = 3;
  EXPECT_THROW(realize_schedule(inst, m), InfeasibleSchedule);
}

TEST(RealizeSchedule, InfeasibleMatrix) {
  const auto inst = ProblemInstance::make(4, {1, 0.5}, {1, 1}, SpeedupFunction::power(1, 0.5, 4));
  ScheduleMatrix m(2);
  m(0, 0) = 4;
  m(0, 1) = 3.9;
  m(1, 1) = 0.1;
  // The long job finishes before the short one.
  EXPECT_THROW(realize_schedule(inst, m), InfeasibleSchedule);
}

TEST(SmartFill, SingleJob) {
  const auto f = SpeedupFunction::log(1, 1, 10);
  const auto inst = ProblemInstance::make(10, {3}, {2}, f);
  const auto r = smartfill(inst);
  EXPECT_DOUBLE_EQ(r.matrix(0, 0), 10.0);
  EXPECT_DOUBLE_EQ(r.objective, 2 * 3 / std::log(11.0));
  EXPECT_DOUBLE_EQ(r.coefficients[0], 2 / std::log(11.0));
  EXPECT_EQ(linearity_check(inst, r).residual, 0.0);
  EXPECT_TRUE(verify_cdr(inst, r).ok());
}

TEST(SmartFill, TwoJobsMatchOracle) {
  const auto inst = ProblemInstance::make(4, {4, 2}, {0.25, 0.5}, SpeedupFunction::power(1, 0.5, 4));
  const double sf = smartfill(inst).objective;
  const double best = oracle::oracle_m2(inst).objective;
  EXPECT_NEAR(sf, best, 1e-4 * best);
  EXPECT_LE(sf, best * (1 + 1e-9));
}

TEST(SmartFill, PowerMatchesHeSrpt) {
  const auto inst = staircase(10, SpeedupFunction::power(1, 0.5, 10));
  const double sf = smartfill(inst).objective;
  const double he = hesrpt_power(inst).objective;
  EXPECT_NEAR(sf, he, 1e-6 * he);
}

TEST(SmartFill, FrozenLogThreeJobs) {
  const auto inst = ProblemInstance::make(10, {3, 2, 1}, {1.0 / 3, 0.5, 1}, SpeedupFunction::log(1, 1, 10));
  const auto r = smartfill(inst);
  EXPECT_NEAR(r.objective, 1.70143649447, 1e-9);
  EXPECT_DOUBLE_EQ(r.matrix(0, 0), 10.0);
  // J is flat at the optimum, so the split is pinned to ~1e-7 only.
  EXPECT_NEAR(r.matrix(0, 1), 2.73313933578, 1e-6);
  EXPECT_NEAR(r.matrix(1, 1), 7.26686066422, 1e-6);
  EXPECT_NEAR(r.matrix(0, 2), 0.619908135217, 1e-6);
  EXPECT_NEAR(r.matrix(1, 2), 2.58721002303, 1e-6);
  EXPECT_NEAR(r.matrix(2, 2), 6.79288184176, 1e-6);
}

TEST(OptimalSplit, NearlyIdenticalJobs) {
  // Two equal jobs under sqrt speedup: the short one gets B (1 - (1/2)^2) = 3.
  const auto f = SpeedupFunction::power(1, 0.5, 4);
  const auto inst = ProblemInstance::make(4, {2, 2 - 1e-9}, {1, 1}, f);
  const WaterFiller filler(f, {1.0});
  const auto split = optimal_split(inst, 1, {1.0 / 2.0}, filler);
  EXPECT_NEAR(split.mu, 3.0, 1e-4);
  EXPECT_NEAR(smartfill(inst).objective, oracle::oracle_m2(inst).objective, 1e-9);
}

TEST(OptimalSplit, MatchesDenseScan) {
  const auto f = SpeedupFunction::log(1, 1, 10);
  const auto inst = ProblemInstance::make(10, {5, 3}, {1, 1}, f);
  const std::vector<double> a{1.0 / std::log(11.0)};
  const WaterFiller filler(f, {1.0});
  const auto split = optimal_split(inst, 1, a, filler);
  double best_mu = 0, best = 1e300;
  for (int g = 1; g <= 10000000; ++g) {
    const double mu = 1e-6 * g;
    const double q = (2.0 - a[0] * std::log1p(10 - mu)) / std::log1p(mu);
    if (q < best) best = q, best_mu = mu;
  }
  EXPECT_NEAR(split.mu, best_mu, 1e-5);
  EXPECT_NEAR(split.value, best, 1e-9);
}

TEST(OptimalSplit, HeavyShortJobTakesEverything) {
  const auto f = SpeedupFunction::log(1, 1, 10);
  const auto inst = ProblemInstance::make(10, {5, 3}, {1e-3, 100}, f);
  const WaterFiller filler(f, {1.0});
  const auto split = optimal_split(inst, 1, {1e-3 / std::log(11.0)}, filler);
  EXPECT_DOUBLE_EQ(split.mu, 10.0);
  EXPECT_EQ(split.allocations[0], 0.0);
}

TEST(VerifyCdr, SmartFillIsClean) {
  const auto inst = staircase(5, SpeedupFunction::log(1, 1, 10));
  EXPECT_TRUE(verify_cdr(inst, smartfill(inst)).ok());
}

TEST(VerifyCdr, EqualSplitViolates) {
  const auto inst = staircase(3, SpeedupFunction::log(1, 1, 10));
  EXPECT_FALSE(verify_cdr(inst, equal_split(inst)).ok());
}

TEST(VerifyCdr, SingleJobHasNoPairs) {
  const auto inst = staircase(1, SpeedupFunction::log(1, 1, 10));
  EXPECT_TRUE(verify_cdr(inst, equal_split(inst)).ok());
}

TEST(Linearity, PowerInstance) {
  const auto inst = staircase(10, SpeedupFunction::power(1, 0.5, 10));
  const auto r = smartfill(inst);
  const auto lin = linearity_check(inst, r);
  EXPECT_LT(lin.residual, 1e-8);
  EXPECT_TRUE(lin.strictly_increasing);
}

TEST(Linearity, ScalingSizes) {
  const auto f = SpeedupFunction::log(1, 1, 10);
  const auto inst = ProblemInstance::make(10, {6, 4, 3, 1}, {0.2, 0.5, 0.5, 1}, f);
  const auto twice = ProblemInstance::make(10, {12, 8, 6, 2}, {0.2, 0.5, 0.5, 1}, f);
  const auto r1 = smartfill(inst), r2 = smartfill(twice);
  EXPECT_NEAR(r2.objective, 2 * r1.objective, 1e-8 * r2.objective);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(r2.coefficients[i], r1.coefficients[i], 1e-8 * r1.coefficients[i]);
}

TEST(SmartFill, StructureOnSum) {
  const double B = 5;
  const auto f =
      SpeedupFunction::sum({{1.0, SpeedupFunction::power(1, 0.5, B)}, {0.5, SpeedupFunction::log(2, 1, B)}}, B);
  const auto inst = ProblemInstance::make(B, {9, 7, 4, 3, 1}, {0.3, 0.4, 0.4, 1, 2}, f);
  const auto r = smartfill(inst);
  EXPECT_TRUE(r.matrix.upper_triangular());
  for (std::size_t l = 0; l < 5; ++l) EXPECT_NEAR(r.matrix.column_sum(l), B, 1e-9 * B);
  for (std::size_t i = 1; i < 5; ++i) {
    EXPECT_LT(r.completion_times[i], r.completion_times[i - 1]);
    EXPECT_LE(r.cdr_constants[i], r.cdr_constants[i - 1]);
  }
  EXPECT_TRUE(verify_cdr(inst, r).ok());
  EXPECT_LE(r.objective, equal_split(inst).objective);
}
