#include <gtest/gtest.h>

#include "smartfill/suites.hpp"

using namespace malleable;

TEST(RandomGenerators, ProduceValidInputs) {
  suites::Rng rng(7);
  for (Family f : {Family::power, Family::shifted_power, Family::log, Family::saturating, Family::inverted_shift,
                   Family::sum}) {
    for (int t = 0; t < 20; ++t) {
      const auto fn = suites::random_speedup(rng, f, suites::uniform(rng, 1, 20));
      EXPECT_TRUE(validate(fn).ok()) << family_name(f);
      EXPECT_NO_THROW(suites::random_instance(rng, fn, 6));
    }
  }
}

TEST(Suites, Deterministic) {
  suites::SuiteOptions opt;
  opt.trials = 5;
  opt.families = {Family::log};
  const auto a = suites::gwf_suite(opt), b = suites::gwf_suite(opt);
  EXPECT_EQ(a.summary(), b.summary());
  EXPECT_TRUE(a.ok());
}

TEST(Suites, SmallRunsPass) {
  suites::SuiteOptions opt;
  opt.trials = 4;
  for (const auto& name : suites::suite_names()) {
    const auto r = suites::run_suite(name, opt);
    EXPECT_TRUE(r.ok()) << r.summary();
    EXPECT_GT(r.total, 0u);
  }
  EXPECT_THROW(suites::run_suite("bogus", opt), ParseError);
  EXPECT_THROW(suites::parse_family("cubic"), ParseError);
}
