#include <gtest/gtest.h>

#include <cmath>

#include "smartfill/oracle.hpp"
#include "smartfill/scheduler.hpp"

using namespace malleable;

TEST(OracleM2, AgreesWithSmartFill) {
  const auto inst = ProblemInstance::make(4, {4, 2}, {1, 1}, SpeedupFunction::power(1, 0.5, 4));
  const auto best = oracle::oracle_m2(inst);
  const double sf = smartfill(inst).objective;
  EXPECT_NEAR(best.objective, sf, 1e-4 * sf);
  EXPECT_NEAR(best.objective, 2 + std::sqrt(3.0), 1e-9);
}

TEST(OracleM2, VanishingShortJob) {
  const auto f = SpeedupFunction::log(1, 1, 10);
  const auto inst = ProblemInstance::make(10, {4, 1e-9}, {1, 1}, f);
  EXPECT_NEAR(oracle::oracle_m2(inst).objective, 4 / std::log(11.0), 1e-6);
}

TEST(OracleM2, SplitIndependentOfShortSize) {
  const auto f = SpeedupFunction::log(1, 1, 10);
  const double a = oracle::oracle_m2(ProblemInstance::make(10, {4, 1e-3}, {1, 1}, f)).mu;
  const double b = oracle::oracle_m2(ProblemInstance::make(10, {4, 1.0}, {1, 1}, f)).mu;
  EXPECT_NEAR(a, b, 1e-4);
}

TEST(OracleM2, RequiresTwoJobs) {
  const auto inst = ProblemInstance::make(4, {4}, {1}, SpeedupFunction::power(1, 0.5, 4));
  EXPECT_THROW(oracle::oracle_m2(inst), InvalidInstance);
}

class OracleM3 : public ::testing::TestWithParam<SpeedupFunction> {};

TEST_P(OracleM3, BracketsSmartFill) {
  const auto inst = ProblemInstance::make(10, {3, 2, 1}, {1.0 / 3, 0.5, 1}, GetParam());
  const double sf = smartfill(inst).objective;
  const double best = oracle::oracle_m3(inst).objective;
  EXPECT_GE(best, sf - 1e-6);
  EXPECT_LE(best, sf * (1 + 1e-3));
}

TEST_P(OracleM3, RefinementOrderIrrelevant) {
  const auto inst = ProblemInstance::make(10, {3, 2, 1}, {1.0 / 3, 0.5, 1}, GetParam());
  const double a = oracle::oracle_m3(inst, false).objective;
  const double b = oracle::oracle_m3(inst, true).objective;
  EXPECT_NEAR(a, b, 1e-6 * a);
}

INSTANTIATE_TEST_SUITE_P(Families, OracleM3,
                         ::testing::Values(SpeedupFunction::log(1, 1, 10), SpeedupFunction::power(1, 0.5, 10)));

TEST(OracleM3, InfeasibleCornersAreInfinite) {
  const auto inst = ProblemInstance::make(10, {3, 2, 1}, {1, 1, 1}, SpeedupFunction::log(1, 1, 10));
  EXPECT_TRUE(std::isinf(oracle::three_job_objective(inst, 0.0, 5, 5)));
  EXPECT_TRUE(std::isinf(oracle::three_job_objective(inst, 6, 5, 5)));
}
