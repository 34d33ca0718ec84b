#include <gtest/gtest.h>

#include <swedge/bias.hpp>
#include <swedge/error.hpp>

#include "oracles.hpp"

using namespace swedge;

TEST(DesignScalar, Limits) {
  EXPECT_EQ(design_scalar({0.0, 2.0, {}}, 30, 5), 0.0);
  EXPECT_LT(std::abs(design_scalar({1.0, 1e-12, {}}, 1, 11) - 1.0 / 11), 1e-10);
  EXPECT_DOUBLE_EQ(design_scalar({0.15, 2.85, {}}, 30, 5), 0.15 / (5 * 0.15 + 2.85 / 30));
  EXPECT_THROW(design_scalar({0.1, 0.0, {}}, 30, 5), InvalidArgument);
}

TEST(WeightMatrix, FactorialWorkedExample) {
  const auto l = build_layout(DesignKind::factorial, 3, 2);
  const WeightMatrix h = H_general(l, 1.0 / 3);
  Eigen::MatrixXd want(2, 4);
  want << 7.0 / 8, 1.0 / 8, -3.0 / 8, 3.0 / 8, -3.0 / 8, 3.0 / 8, 7.0 / 8, 1.0 / 8;
  EXPECT_LT((h.h - want).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(h.provenance, HProvenance::factorial_block);

  Eigen::VectorXd d1(2), d2(2);
  d1 << 1, -1;
  d2 << 2, 3;
  const auto e = expected_constant_estimate(h, EffectCurve(3, {d1, d2}));
  EXPECT_NEAR(e.expected(0), 9.0 / 8, 1e-12);
  EXPECT_NEAR(e.expected(1), 11.0 / 8, 1e-12);
  EXPECT_NEAR(e.bias(0), 9.0 / 8, 1e-12);
  EXPECT_NEAR(e.bias(1), -9.0 / 8, 1e-12);
}

TEST(WeightMatrix, GeneralMatchesDenseInverse) {
  const std::vector<DesignLayout> layouts{
      build_layout(DesignKind::single, 6, 1), build_layout(DesignKind::concurrent, 5, 2),
      build_layout(DesignKind::factorial, 6, 2), build_layout(DesignKind::factorial_augmented, 11, 2, {3, 1, {}}),
      build_layout(DesignKind::supplementation, 6, 2, {2, 1, {}}), build_layout(DesignKind::concurrent, 4, 3)};
  for (const auto& l : layouts) {
    for (double s2a : {0.0, 0.05, 0.15, 2.0}) {
      const auto h = H_general(l, {s2a, 2.85, {}}, 30);
      const auto ref = oracle::H_dense(l, s2a, 2.85, 30);
      EXPECT_LT((h.h - ref).cwiseAbs().maxCoeff(), 1e-10) << to_string(l.kind()) << " s2a=" << s2a;
    }
    for (double b : {0.0, 0.05, 1.0 / l.periods() - 1e-6}) {
      const auto ref = oracle::H_dense_b(l, b);
      EXPECT_LT((H_general(l, b).h - ref).cwiseAbs().maxCoeff(), 1e-9) << to_string(l.kind()) << " b=" << b;
    }
  }
}

TEST(WeightMatrix, ConcurrentClosedFormMatchesGeneral) {
  double worst = 0.0;
  for (int T = 3; T <= 12; ++T)
    for (int m = 1; m <= 3; ++m)
      for (double b : {0.0, 0.02, 0.1, 1.0 / T - 1e-6}) {
        const auto closed = H_concurrent_closed(T, m, b);
        const auto general = H_general(build_layout(DesignKind::concurrent, T, m), b);
        worst = std::max(worst, (closed.h - general.h).cwiseAbs().maxCoeff());
        EXPECT_EQ(closed.provenance, HProvenance::concurrent_closed_form);
      }
  EXPECT_LT(worst, 1e-10);
}

TEST(WeightMatrix, ScalarIdentities) {
  for (int T = 3; T <= 12; ++T)
    for (int m = 1; m <= 3; ++m)
      for (double b : {0.0, 0.02, 0.05, 0.1, 1.0 / T - 1e-6}) {
        const auto s = concurrent_scalars(T, m, b);
        // direct summation of the displayed entries
        double rs = 0.0, vs = 0.0;
        for (int j = 1; j <= T - 1; ++j) {
          rs += (T - j) * (1 + b * (1.0 - T - j) / 2);
          vs += (T - j) * (1 - b * T + j / (T - 1.0)) / (2.0 * m);
        }
        EXPECT_NEAR(s.r.sum(), rs, 1e-10);
        EXPECT_NEAR(s.v.sum(), vs, 1e-10);
        EXPECT_NEAR(s.r.sum(), s.c, 1e-10);
        EXPECT_NEAR(s.v.sum(), s.d, 1e-10);
        EXPECT_NEAR(s.g, s.c - m * s.d, 1e-10);
      }
}

TEST(WeightMatrix, RowSumsAndBlockSymmetry) {
  for (int T = 3; T <= 12; ++T)
    for (double b : {0.0, 0.02, 0.1, 1.0 / T - 1e-6}) {
      for (int m = 1; m <= 3; ++m) {
        EXPECT_LT(row_sum_deviation(H_general(build_layout(DesignKind::concurrent, T, m), b)), 1e-10);
      }
      const auto f = H_general(build_layout(DesignKind::factorial_augmented, T, 2), b);
      EXPECT_LT(row_sum_deviation(f), 1e-10);
      EXPECT_LT(block_symmetry_deviation(f), 1e-10);
      if (T >= 4) {
        const auto p = H_general(build_layout(DesignKind::factorial, T, 2, {1, 1, false}), b);
        EXPECT_LT(row_sum_deviation(p), 1e-10);
        EXPECT_LT(block_symmetry_deviation(p), 1e-10);
      }
    }
}

TEST(WeightMatrix, ConstantTruthIsRecovered) {
  const auto l = build_layout(DesignKind::factorial_augmented, 7, 2, {2, 1, {}});
  const auto h = H_general(l, 0.07);
  const EffectCurve c(7, {Eigen::VectorXd::Constant(6, 0.3), Eigen::VectorXd::Constant(6, -1.2)});
  const auto e = expected_constant_estimate(h, c);
  EXPECT_NEAR(e.expected(0), 0.3, 1e-12);
  EXPECT_NEAR(e.expected(1), -1.2, 1e-12);
  const EffectCurve zero(7, {Eigen::VectorXd::Zero(6), Eigen::VectorXd::Zero(6)});
  EXPECT_TRUE(expected_constant_estimate(h, zero).expected.isZero());
}

TEST(SingleWeights, MatchGeneralAndClosedForms) {
  for (int T = 3; T <= 12; ++T)
    for (double b : {0.0, 0.05, 1.0 / T - 1e-6}) {
      const auto sw = single_intervention_weights(T, b);
      EXPECT_NEAR(6 * sw.w.sum(), sw.denom, 1e-9 * std::abs(sw.denom));
      EXPECT_NEAR(sw.denom, T * (T - 1.0) * (T - 2.0) * (2 + b - b * T), 1e-12 * std::abs(sw.denom));
      const Eigen::VectorXd row = 6 * sw.w / sw.denom;
      EXPECT_LT((H_general(build_layout(DesignKind::single, T, 1), b).h.row(0).transpose() - row)
                    .cwiseAbs()
                    .maxCoeff(),
                1e-10);
      EXPECT_LT((H_concurrent_closed(T, 1, b).h.row(0).transpose() - row).cwiseAbs().maxCoeff(), 1e-10);
    }
  const auto w0 = single_intervention_weights(6, 0.0);
  for (int j = 1; j <= 5; ++j) EXPECT_DOUBLE_EQ(w0.w(j - 1), (6 - j) * (5.0 - j));
  EXPECT_EQ(w0.w(4), 0.0);
  EXPECT_THROW(single_intervention_weights(2, 0.0), InvalidArgument);
}

TEST(WeightMatrix, DegenerateInputs) {
  // g = T(T-2)(2+b-bT)/12 vanishes at b = 2/(T-1).
  EXPECT_THROW(H_concurrent_closed(5, 2, 0.5), NumericalError);
  EXPECT_THROW(H_general(build_layout(DesignKind::factorial, 3, 2, {1, 1, false}), 1.0 / 3), NumericalError);
  EXPECT_THROW(expected_constant_estimate(Eigen::MatrixXd::Zero(2, 3), outcome_curve(OutcomeModel::A, EffectRegime::small, 5)),
               InvalidArgument);
}

TEST(BiasTable, Shapes) {
  const int T = 11;
  const std::vector<NamedLayout> designs{{"concurrent", build_layout(DesignKind::concurrent, T, 2)},
                                         {"factorial", build_layout(DesignKind::factorial_augmented, T, 2, {3, 1, {}})}};
  const std::vector<NamedCurve> curves{{"constant", outcome_curve(OutcomeModel::A, EffectRegime::small, T)},
                                       {"lag_half", outcome_curve(OutcomeModel::B2, EffectRegime::small, T)}};
  const auto rows = bias_curve_table(designs, {1.0 / T, 0.05}, curves);
  ASSERT_EQ(rows.size(), 2u * 2u * 2u * 2u);
  double lag_conc = 0, lag_fact = 0;
  for (const auto& r : rows) {
    if (r.family == "constant") EXPECT_NEAR(r.bias, 0.0, 1e-12);
    EXPECT_NEAR(r.bias, r.expected - r.truth, 1e-15);
    if (r.family == "lag_half" && r.intervention == 1 && r.b == 1.0 / T) {
      EXPECT_LT(r.expected, 0.0);  // negative despite nonnegative truth
      (r.design == "concurrent" ? lag_conc : lag_fact) = r.bias;
    }
  }
  EXPECT_GT(std::abs(lag_conc - lag_fact), 0.02);

  // hand check of one row
  const auto h = H_general(designs[0].layout, 0.05);
  const double want = h.h.row(1).dot(curves[1].curve.stacked());
  bool found = false;
  for (const auto& r : rows)
    if (r.design == "concurrent" && r.family == "lag_half" && r.b == 0.05 && r.intervention == 2) {
      EXPECT_NEAR(r.expected, want, 1e-14);
      found = true;
    }
  EXPECT_TRUE(found);
}
