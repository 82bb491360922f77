#include <gtest/gtest.h>

#include "smartfill/waterfill.hpp"

using namespace malleable;

namespace {

const double kInvSqrt2 = 0.70710678118654752;

SpeedupFunction mixed(double B) {
  return SpeedupFunction::sum({{1.0, SpeedupFunction::power(1, 0.5, B)}, {1.0, SpeedupFunction::log(1, 1, B)}}, B);
}

}  // namespace

TEST(GwfSolve, SymmetricPower) {
  const auto sol = gwf_solve(SpeedupFunction::power(1, 0.5, 10), {3, {1, 1}});
  EXPECT_NEAR(sol.allocations[0], 1.5, 1e-12);
  EXPECT_NEAR(sol.allocations[1], 1.5, 1e-12);
  EXPECT_TRUE(sol.zero_set.empty());
}

TEST(GwfSolve, PowerRatio) {
  const auto sol = gwf_solve(SpeedupFunction::power(1, 0.5, 10), {3, {1, kInvSqrt2}});
  EXPECT_NEAR(sol.allocations[0], 1.0, 1e-9);
  EXPECT_NEAR(sol.allocations[1], 2.0, 1e-9);
}

TEST(GwfSolve, LogZeroAllocation) {
  const auto f = SpeedupFunction::log(1, 1, 10);
  const CapInstance cap{1, {1, 0.4}};
  const auto sol = gwf_solve(f, cap);
  EXPECT_EQ(sol.allocations[0], 0.0);
  EXPECT_NEAR(sol.allocations[1], 1.0, 1e-12);
  ASSERT_EQ(sol.zero_set.size(), 1u);
  EXPECT_EQ(sol.zero_set[0], 0u);
  const auto bis = bisect_waterfill(f, cap);
  EXPECT_EQ(bis.allocations[0], 0.0);
  EXPECT_NEAR(bis.allocations[1], 1.0, 1e-10);
}

TEST(GwfSolve, NonRegularUsesBisection) {
  const auto sol = gwf_solve(mixed(10), {2, {1, 1}});
  EXPECT_NEAR(sol.allocations[0], 1.0, 1e-9);
  EXPECT_NEAR(sol.allocations[1], 1.0, 1e-9);
}

TEST(GwfSolve, ThreeEqual) {
  const auto sol = gwf_solve(SpeedupFunction::power(1, 0.5, 10), {3, {1, 1, 1}});
  for (double t : sol.allocations) EXPECT_NEAR(t, 1.0, 1e-12);
}

TEST(GwfSolve, SingleJobTakesBudget) {
  const auto sol = gwf_solve(SpeedupFunction::log(1, 1, 10), {4, {1}});
  ASSERT_EQ(sol.allocations.size(), 1u);
  EXPECT_DOUBLE_EQ(sol.allocations[0], 4.0);
}

TEST(GwfSolve, RejectsBadInstances) {
  const auto f = SpeedupFunction::log(1, 1, 10);
  EXPECT_THROW(gwf_solve(f, {0, {1, 1}}), InvalidInstance);
  EXPECT_THROW(gwf_solve(f, {11, {1, 1}}), InvalidInstance);
  EXPECT_THROW(gwf_solve(f, {1, {0.5, 1}}), InvalidInstance);
  EXPECT_THROW(gwf_solve(f, {1, {}}), InvalidInstance);
}

TEST(ClosedForm, PowerBottlesShareFloor) {
  const auto desc = *regular_descriptor(SpeedupFunction::power(1, 0.5, 10));
  for (double b : {1e-6, 0.1, 5.0}) {
    const auto sol = closed_form_waterfill(desc, {b, {1, 0.3, 0.01}});
    for (double t : sol.allocations) EXPECT_GT(t, 0.0);
  }
}

TEST(ClosedForm, AgreesWithBisection) {
  const auto f = SpeedupFunction::power(1, 0.5, 10);
  const CapInstance cap{3, {1, kInvSqrt2}};
  const auto a = closed_form_waterfill(*regular_descriptor(f), cap).allocations;
  const auto b = bisect_waterfill(f, cap).allocations;
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-8 * cap.budget);
}

TEST(ClosedForm, AgreesWithBisectionAcrossFamilies) {
  const double B = 6;
  const SpeedupFunction fs[] = {SpeedupFunction::shifted_power(1, 2, 0.6, B), SpeedupFunction::log(3, 0.5, B),
                                SpeedupFunction::saturating(4, 5, -0.7, B),
                                SpeedupFunction::inverted_shift(1, 12, 2.5, B)};
  const CapInstance cap{4, {1, 0.8, 0.5, 0.2, 0.05}};
  for (const auto& f : fs) {
    const auto a = closed_form_waterfill(*regular_descriptor(f), cap).allocations;
    const auto b = bisect_waterfill(f, cap).allocations;
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-8 * cap.budget);
    EXPECT_TRUE(verify_cap(f, cap, a).ok());
  }
}

TEST(WaterFiller, MatchesSolveAndHandlesEmptyBudget) {
  const auto f = SpeedupFunction::log(1, 1, 10);
  const WaterFiller filler(f, {1, 0.6, 0.3});
  for (double t : filler.allocate(0.0)) EXPECT_EQ(t, 0.0);
  const auto direct = gwf_solve(f, {2.5, {1, 0.6, 0.3}}).allocations;
  const auto cached = filler.allocate(2.5);
  for (std::size_t i = 0; i < direct.size(); ++i) EXPECT_DOUBLE_EQ(direct[i], cached[i]);
}

TEST(VerifyCap, ReportsViolations) {
  const auto f = SpeedupFunction::power(1, 0.5, 10);
  const CapInstance cap{3, {1, kInvSqrt2}};
  EXPECT_TRUE(verify_cap(f, cap, {1, 2}).ok());
  const auto bad = verify_cap(f, cap, {1.5, 1.5});
  ASSERT_FALSE(bad.ok());
  EXPECT_EQ(bad.violations[0].constraint, "ratio");
  EXPECT_TRUE(verify_cap(SpeedupFunction::log(1, 1, 10), {1, {1, 0.4}}, {0, 1}).ok());
  EXPECT_EQ(verify_cap(f, cap, {1, 1}).violations[0].constraint, "budget");
  EXPECT_EQ(verify_cap(f, cap, {2, 1}).violations.front().constraint, "ordering");
}

TEST(VerifyCap, ZeroAllocationInequality) {
  // s'(1)/s'(0) = 0.5 < 0.6, so theta_1 = 0 is not allowed.
  const auto report = verify_cap(SpeedupFunction::log(1, 1, 10), {1, {1, 0.6}}, {0, 1});
  ASSERT_FALSE(report.ok());
  EXPECT_EQ(report.violations[0].constraint, "zero_allocation");
}
