#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "cipshare/cipshare.hpp"
#include "oracles.hpp"

using namespace cipshare;

TEST(KcCut, PathologicalViolation) {
  const Instance inst = oracle::pathological();
  const std::vector<double> x{1.0, 0.1};
  EXPECT_NEAR(kc_violation(inst, 0, FacilitySet{0}, x), 0.9, 1e-12);
  EXPECT_NEAR(kc_violation(inst, 0, FacilitySet{}, x), 0.0, 1e-12);
  const KcCut cut = make_kc_cut(inst, 0, FacilitySet{0});
  EXPECT_DOUBLE_EQ(cut.residual, 1.0);
  EXPECT_DOUBLE_EQ(cut.row[0], 0.0);
  EXPECT_DOUBLE_EQ(cut.row[1], 1.0);
}

TEST(Separation, AllOnesPointIsNeverCut) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const Instance inst = oracle::random_real_instance(rng, 7, 3);
    const std::vector<double> ones(7, 1.0);
    for (std::size_t j = 0; j < 3; ++j) {
      EXPECT_FALSE(separate_user(inst, j, ones, 10.0).found());
    }
  }
}

TEST(Separation, FindsPathologicalCut) {
  const Instance inst = oracle::pathological();
  const std::vector<double> x{1.0, 0.1};
  const SeparationResult res = separate_user(inst, 0, x, 1.0);
  ASSERT_TRUE(res.found());
  EXPECT_EQ(res.subset, FacilitySet{0});
  EXPECT_NEAR(res.violation, 0.9, 1e-12);
}

TEST(Separation, EmptySetAtOrigin) {
  const Instance inst({1.0}, {3.0}, {{3.0}});
  const SeparationResult res = separate_user(inst, 0, std::vector<double>{0.0}, 1.0);
  ASSERT_TRUE(res.found());
  EXPECT_TRUE(res.subset.empty());
  EXPECT_NEAR(res.violation, 3.0, 1e-12);
}

TEST(Separation, ScaleOverflow) {
  const Instance inst({1.0}, {3.0}, {{3.0}});
  SeparationOptions opt;
  opt.dp_cap = 100;
  try {
    separate_user(inst, 0, std::vector<double>{0.0}, 1000.0, opt);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kScaleOverflow);
  }
}

// On integer data with K = 1 the knapsack DP works on exact weights, so the
// returned cut must be a most violated one. Enumeration is disabled to test
// the DP and prefix passes alone.
TEST(Separation, DpIsExactOnIntegerData) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SeparationOptions opt;
  opt.enumeration_limit = 0;
  int violated = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const Instance inst = oracle::random_integer_instance(rng, 8, 2, 6);
    std::vector<double> x(8);
    for (double& v : x) v = u(rng) < 0.3 ? 0.0 : u(rng);
    for (std::size_t j = 0; j < 2; ++j) {
      const double expect = oracle::max_kc_violation(inst, j, x);
      const SeparationResult res = separate_user(inst, j, x, 1.0, opt);
      if (expect > 1e-7) {
        ++violated;
        ASSERT_TRUE(res.found()) << "trial " << trial;
        EXPECT_NEAR(res.violation, expect, 1e-9) << "trial " << trial;
      } else {
        EXPECT_FALSE(res.found());
      }
    }
  }
  EXPECT_GT(violated, 100);
}

TEST(Separation, EnumerationCertifiesRealData) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const Instance inst = oracle::random_real_instance(rng, 8, 2);
    std::vector<double> x(8);
    for (double& v : x) v = u(rng) < 0.3 ? 0.0 : u(rng);
    for (std::size_t j = 0; j < 2; ++j) {
      const double expect = oracle::max_kc_violation(inst, j, x);
      const SeparationResult res = separate_user(inst, j, x, 10.0);
      if (expect > 1e-7) {
        ASSERT_TRUE(res.found());
        EXPECT_GT(res.violation, 1e-7);
        // The DP may stop at a violated but not maximal cut; enumeration only
        // runs when nothing is found.
        EXPECT_LE(res.violation, expect + 1e-9);
      } else {
        EXPECT_FALSE(res.found());
      }
    }
  }
}

TEST(ColumnGeneration, PathologicalClosesTheGap) {
  const Instance inst = oracle::pathological();
  const auto cg = column_generation_solve(inst, all_users(inst));
  EXPECT_TRUE(cg.converged);
  EXPECT_NEAR(cg.objective, 1.0, 1e-6);
  EXPECT_NEAR(dual_objective(inst, cg.dual), 1.0, 1e-6);
  EXPECT_TRUE(is_dual_feasible(inst, cg.dual));
  EXPECT_NEAR(naive_lp_value(inst, all_users(inst)), 0.11, 1e-6);
}

TEST(ColumnGeneration, SetCoverMatchesNaiveLp) {
  // Triangle set cover: three elements, three pairs; LP optimum 1.5.
  const Instance inst({1, 1, 1}, {1, 1, 1}, {{1, 1, 0}, {0, 1, 1}, {1, 0, 1}});
  const auto cg = column_generation_solve(inst, all_users(inst));
  EXPECT_NEAR(cg.objective, 1.5, 1e-6);
  EXPECT_NEAR(naive_lp_value(inst, all_users(inst)), 1.5, 1e-6);
  EXPECT_NEAR(kc_lp_exact(inst, all_users(inst)).objective, 1.5, 1e-6);
}

TEST(ColumnGeneration, MatchesFullEnumeration) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 3 + trial % 6;
    const std::size_t m = 1 + trial % 3;
    const Instance inst = trial % 2 ? oracle::random_real_instance(rng, n, m)
                                    : oracle::random_integer_instance(rng, n, m);
    const UserSet users = all_users(inst);
    const auto cg = column_generation_solve(inst, users);
    const auto ex = kc_lp_exact(inst, users);
    EXPECT_TRUE(cg.converged);
    EXPECT_NEAR(cg.objective, ex.objective, 1e-6) << "trial " << trial;
    EXPECT_TRUE(is_dual_feasible(inst, cg.dual, 1e-9));
    EXPECT_NEAR(dual_objective(inst, cg.dual), cg.objective, 1e-6);
    const double naive = naive_lp_value(inst, users);
    EXPECT_LE(naive, cg.objective + 1e-6);
    // The final primal point satisfies every KC inequality.
    for (std::size_t j : users) EXPECT_LE(oracle::max_kc_violation(inst, j, cg.x), 1e-6);
  }
}

TEST(ColumnGeneration, RestrictedUsers) {
  const Instance inst({1.0, 1.0}, {1.0, 1.0}, {{1.0, 0.0}, {0.0, 1.0}});
  EXPECT_NEAR(column_generation_solve(inst, UserSet{1}).objective, 1.0, 1e-9);
  EXPECT_NEAR(column_generation_solve(inst, UserSet{}).objective, 0.0, 1e-12);
}

TEST(ColumnGeneration, CutLogFormat) {
  const Instance inst = oracle::pathological();
  const auto cg = column_generation_solve(inst, all_users(inst));
  std::ostringstream os;
  write_cut_log(os, cg.cut_log);
  EXPECT_NE(os.str().find("# round\tuser\tsubset\tviolation"), std::string::npos);
  EXPECT_NE(os.str().find("{0}"), std::string::npos);
}

TEST(RestrictedMaster, RejectsDuplicatesAndTrivialCuts) {
  const Instance inst = oracle::pathological();
  RestrictedMaster master(inst);
  EXPECT_TRUE(master.add(0, FacilitySet{}));
  EXPECT_FALSE(master.add(0, FacilitySet{}));
  EXPECT_FALSE(master.add(0, FacilitySet{1}));  // r^S = 0
  EXPECT_EQ(master.size(), 1u);
}
