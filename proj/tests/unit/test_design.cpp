#include <gtest/gtest.h>

#include <swedge/design.hpp>
#include <swedge/error.hpp>

#include "oracles.hpp"

using namespace swedge;

namespace {

std::vector<std::string> grid_row(const DesignLayout& l, int i) {
  std::vector<std::string> out;
  for (int j = 1; j <= l.periods(); ++j) out.push_back(cell_label(l, i, j));
  return out;
}

using Row = std::vector<std::string>;

}  // namespace

TEST(Layouts, ClusterCounts) {
  EXPECT_EQ(build_layout(DesignKind::single, 5, 1).clusters(), 4);
  EXPECT_EQ(build_layout(DesignKind::concurrent, 5, 2).clusters(), 8);
  EXPECT_EQ(build_layout(DesignKind::concurrent, 7, 3).clusters(), 18);
  EXPECT_EQ(build_layout(DesignKind::factorial, 5, 2).clusters(), 6);
  EXPECT_EQ(build_layout(DesignKind::factorial, 11, 2).clusters(), 18);
  EXPECT_EQ(build_layout(DesignKind::factorial_augmented, 5, 2).clusters(), 8);
  EXPECT_EQ(build_layout(DesignKind::factorial_augmented, 11, 2, {3, 1, {}}).clusters(), 20);
  EXPECT_EQ(build_layout(DesignKind::supplementation, 5, 2).clusters(), 3);
  EXPECT_EQ(build_layout(DesignKind::concurrent, 5, 2, {1, 3, {}}).clusters(), 24);
}

TEST(Layouts, SingleMatchesFigureOne) {
  const auto l = build_layout(DesignKind::single, 5, 1);
  EXPECT_EQ(grid_row(l, 1), (Row{"0", "d1", "d2", "d3", "d4"}));
  EXPECT_EQ(grid_row(l, 4), (Row{"0", "0", "0", "0", "d1"}));
}

TEST(Layouts, ConcurrentMatchesFigureTwo) {
  const auto l = build_layout(DesignKind::concurrent, 5, 2);
  EXPECT_EQ(grid_row(l, 1), (Row{"0", "d1,1", "d1,2", "d1,3", "d1,4"}));
  EXPECT_EQ(grid_row(l, 3), (Row{"0", "0", "0", "d1,1", "d1,2"}));
  EXPECT_EQ(grid_row(l, 5), (Row{"0", "d2,1", "d2,2", "d2,3", "d2,4"}));
  EXPECT_EQ(grid_row(l, 8), (Row{"0", "0", "0", "0", "d2,1"}));
  // cluster i receives intervention k iff (k-1)(T-1)+1 <= i <= k(T-1)
  for (int i = 1; i <= 8; ++i) {
    EXPECT_EQ(l.start(i, 1).has_value(), i <= 4);
    EXPECT_EQ(l.start(i, 2).has_value(), i >= 5);
  }
}

TEST(Layouts, SupplementationCells) {
  const auto l = build_layout(DesignKind::supplementation, 5, 2);
  EXPECT_EQ(grid_row(l, 1), (Row{"0", "d1,1", "d1,2+d2,1", "d1,3+d2,2", "d1,4+d2,3"}));
  EXPECT_EQ(grid_row(l, 3), (Row{"0", "0", "0", "d1,1", "d1,2+d2,1"}));
}

TEST(Layouts, FactorialMatchesFigureFour) {
  const auto l = build_layout(DesignKind::factorial, 5, 2);
  EXPECT_EQ(grid_row(l, 1), (Row{"0", "d1,1", "d1,2+d2,1", "d1,3+d2,2", "d1,4+d2,3"}));
  EXPECT_EQ(grid_row(l, 2), (Row{"0", "d2,1", "d1,1+d2,2", "d1,2+d2,3", "d1,3+d2,4"}));
  EXPECT_EQ(exposure_time(l, 2, 1, 4), 2);
  EXPECT_EQ(exposure_time(l, 1, 1, 4), 3);
  for (int i = 1; i <= l.clusters(); ++i) {
    const auto a = l.start(i, 1), b = l.start(i, 2);
    ASSERT_TRUE(a && b);
    EXPECT_EQ(std::abs(*a - *b), 1);
  }
}

TEST(Layouts, FactorialThreePeriodsMatchesFigureSix) {
  const auto l = build_layout(DesignKind::factorial, 3, 2, {1, 1, {}});
  ASSERT_EQ(l.clusters(), 4);
  EXPECT_EQ(l.kind(), DesignKind::factorial_augmented);
  const auto x = matrices(l);
  Eigen::MatrixXd x1(3, 2), x2(3, 2), x3(3, 2), x4(3, 2);
  x1 << 0, 0, 1, 0, 1, 1;
  x2 << 0, 0, 0, 0, 1, 0;
  x3 << 0, 0, 0, 0, 0, 1;
  x4 << 0, 0, 0, 1, 1, 1;
  EXPECT_EQ(x[0].x, x1);
  EXPECT_EQ(x[1].x, x2);
  EXPECT_EQ(x[2].x, x3);
  EXPECT_EQ(x[3].x, x4);

  Eigen::MatrixXd z11(3, 2), z12(3, 2);
  z11 << 0, 0, 1, 0, 0, 1;
  z12 << 0, 0, 0, 0, 1, 0;
  EXPECT_EQ(x[0].exposure_block(1), z11);
  EXPECT_EQ(x[3].exposure_block(2), z11);
  EXPECT_EQ(x[1].exposure_block(1), z12);
  EXPECT_EQ(x[2].exposure_block(2), z12);
  EXPECT_TRUE(x[2].exposure_block(1).isZero());
  EXPECT_TRUE(x[1].exposure_block(2).isZero());
  EXPECT_EQ(x[3].exposure_block(1), z12);
  EXPECT_EQ(x[0].exposure_block(2), z12);

  // Mirror ordering: cluster I+1-i swaps the interventions.
  for (int i = 1; i <= 4; ++i) {
    EXPECT_EQ(l.start(i, 1), l.start(5 - i, 2));
  }
}

TEST(Layouts, AugmentFlag) {
  EXPECT_EQ(build_layout(DesignKind::factorial, 5, 2).clusters(), 6);
  EXPECT_EQ(build_layout(DesignKind::factorial, 5, 2, {1, 1, true}).clusters(), 8);
  EXPECT_EQ(build_layout(DesignKind::factorial, 3, 2, {1, 1, false}).clusters(), 2);
}

TEST(Layouts, ExposureIsCumulativeTreatment) {
  for (auto kind : {DesignKind::concurrent, DesignKind::factorial, DesignKind::supplementation}) {
    const auto l = build_layout(kind, 6, 2);
    for (int i = 1; i <= l.clusters(); ++i)
      for (int k = 1; k <= 2; ++k) {
        int cum = 0;
        for (int j = 1; j <= 6; ++j) {
          cum += l.treated(k, i, j) ? 1 : 0;
          EXPECT_EQ(l.exposure(k, i, j), cum);
        }
      }
  }
}

TEST(Layouts, RejectsInvalidParameters) {
  EXPECT_THROW(build_layout(DesignKind::concurrent, 2, 2), InvalidArgument);
  EXPECT_THROW(build_layout(DesignKind::factorial, 5, 3), InvalidArgument);
  EXPECT_THROW(build_layout(DesignKind::factorial, 5, 2, {4, 1, {}}), InvalidArgument);
  EXPECT_THROW(build_layout(DesignKind::single, 5, 1, {1, 0, {}}), InvalidArgument);
  EXPECT_THROW(DesignLayout(DesignKind::custom, 4, 1, {{1}}), InvalidArgument);
  EXPECT_THROW(DesignLayout(DesignKind::custom, 4, 1, {{5}}), InvalidArgument);
  EXPECT_THROW(parse_design_kind("zigzag"), InvalidArgument);
}

TEST(Identifiability, MatchesRationalRankOracle) {
  for (int T = 3; T <= 7; ++T) {
    std::vector<DesignLayout> layouts{build_layout(DesignKind::single, T, 1),
                                      build_layout(DesignKind::concurrent, T, 2),
                                      build_layout(DesignKind::concurrent, T, 3),
                                      build_layout(DesignKind::factorial_augmented, T, 2)};
    for (int o = 1; o <= T - 2; ++o) {
      layouts.push_back(build_layout(DesignKind::supplementation, T, 2, {o, 1, {}}));
      if (T >= 4) layouts.push_back(build_layout(DesignKind::factorial, T, 2, {o, 1, false}));
      layouts.push_back(build_layout(DesignKind::factorial_augmented, T, 2, {o, 1, {}}));
    }
    for (const auto& l : layouts)
      for (FitModel model : {FitModel::A, FitModel::B, FitModel::C}) {
        const Eigen::MatrixXd d = oracle::cell_design(l, model == FitModel::C ? FitModel::A : model);
        const int rank = oracle::rational_rank(d);
        const auto report = check_identifiability(l, model);
        SCOPED_TRACE(std::string(to_string(l.kind())) + " T=" + std::to_string(T));
        EXPECT_EQ(report.rank, rank);
        EXPECT_EQ(report.columns, d.cols());
        EXPECT_EQ(report.identifiable, rank == d.cols());
      }
  }
}

TEST(Identifiability, SupplementationRejectsModelB) {
  const auto l = build_layout(DesignKind::supplementation, 5, 2);
  const auto report = check_identifiability(l, FitModel::B);
  EXPECT_FALSE(report.identifiable);
  const auto& comb = report.estimable_combinations;
  EXPECT_NE(std::find(comb.begin(), comb.end(), "delta[1,2]+delta[2,1]"), comb.end());
  EXPECT_NE(std::find(comb.begin(), comb.end(), "delta[1,4]+delta[2,3]"), comb.end());
  EXPECT_NE(std::find(comb.begin(), comb.end(), "delta[1,1]"), comb.end());
  EXPECT_THROW(require_identifiable(l, FitModel::B), IdentifiabilityError);
  EXPECT_NO_THROW(require_identifiable(l, FitModel::A));
}

TEST(Identifiability, FactorialAndConcurrentSupportAllModels) {
  for (auto kind : {DesignKind::concurrent, DesignKind::factorial, DesignKind::factorial_augmented}) {
    const auto l = build_layout(kind, 5, 2);
    for (FitModel model : {FitModel::A, FitModel::B, FitModel::C})
      EXPECT_TRUE(check_identifiability(l, model).identifiable) << to_string(kind);
  }
}

TEST(Labels, FixedEffects) {
  const auto l = build_layout(DesignKind::concurrent, 3, 2);
  const auto b = fixed_effect_labels(l, FitModel::B);
  ASSERT_EQ(b.size(), 7u);
  EXPECT_EQ(b[0], "beta[1]");
  EXPECT_EQ(b[3], "delta[1,1]");
  EXPECT_EQ(b[6], "delta[2,2]");
  EXPECT_EQ(fixed_effect_labels(l, FitModel::A)[4], "theta[2]");
  EXPECT_EQ(fixed_effect_labels(l, FitModel::C)[4], "mu[2]");
}
