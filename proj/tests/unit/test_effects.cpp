#include <gtest/gtest.h>

#include <cmath>

#include <swedge/effects.hpp>
#include <swedge/error.hpp>
#include <swedge/io.hpp>

using namespace swedge;

namespace {

void expect_vec(const Eigen::VectorXd& got, std::initializer_list<double> want, double tol = 1e-12) {
  ASSERT_EQ(got.size(), static_cast<Eigen::Index>(want.size()));
  Eigen::Index i = 0;
  for (double w : want) {
    EXPECT_NEAR(got(i), w, tol) << "entry " << i;
    ++i;
  }
}

}  // namespace

TEST(Curves, LagHalf) {
  expect_vec(effect_vector(CurveFamily::lag_half, 5, 1, {0.10, 0, 0}), {0, 0, 0.2, 0.2});
  const auto v = effect_vector(CurveFamily::lag_half, 11, 1, {0.13, 0, 0});
  for (int e = 1; e <= 10; ++e) EXPECT_EQ(v(e - 1), e > 5 ? 0.26 : 0.0);
}

TEST(Curves, LagOne) {
  const auto v = effect_vector(CurveFamily::lag_one, 5, 1, {0.10, 0, 0});
  expect_vec(v, {0, 2.0 / 15, 2.0 / 15, 2.0 / 15});
  EXPECT_NEAR(v.mean(), 0.10, 1e-15);
}

TEST(Curves, LinearSharedGrid) {
  expect_vec(effect_vector(CurveFamily::linear, 5, 1, {0, 0.08, 0.15}), {0.08, 0.09, 0.10, 0.11});
  expect_vec(effect_vector(CurveFamily::linear, 5, 2, {0, 0.08, 0.15}), {0.12, 0.13, 0.14, 0.15});
  const auto v = effect_vector(CurveFamily::linear, 11, 2, {0, 0.24, 0.45});
  EXPECT_NEAR(v(9), 0.45, 1e-15);
  EXPECT_NEAR(v(1) - v(0), 0.21 / 19, 1e-15);
}

TEST(Curves, LogAndExpAreCenteredOnDelta) {
  for (int T : {5, 11}) {
    for (double d : {0.1, 0.29, 0.4}) {
      for (CurveFamily f : {CurveFamily::log, CurveFamily::exp}) {
        const auto v = effect_vector(f, T, 1, {d, 0, 0});
        EXPECT_NEAR(v.mean(), d, 1e-12);
      }
      // log f(e) = d log{(T-1)/2 (1 + 3(e-1)/(T-2))}; the increments do not
      // depend on the centering constant.
      const auto lg = effect_vector(CurveFamily::log, T, 1, {d, 0, 0});
      const auto ex = effect_vector(CurveFamily::exp, T, 2, {d, 0, 0});
      const double h = (T - 1) / 2.0;
      auto fl = [&](int t) { return d * std::log(h * (1 + 3.0 * (t - 1) / (T - 2))); };
      auto fe = [&](int t) { return d * std::exp(-h + (0.1 + h) / (T - 2) * (t - 1)); };
      for (int e = 2; e <= T - 1; ++e) {
        EXPECT_NEAR(lg(e - 1) - lg(e - 2), fl(e) - fl(e - 1), 1e-12);
        EXPECT_NEAR(ex(e - 1) - ex(e - 2), fe(e) - fe(e - 1), 1e-12);
      }
      EXPECT_LT(lg(0), lg(T - 2));
      EXPECT_LT(ex(0), ex(T - 2));
    }
  }
}

TEST(Curves, ConstantEverywhere) {
  const auto v = effect_vector(CurveFamily::constant, 7, 2, {0.28, 0, 0});
  EXPECT_TRUE((v.array() == 0.28).all());
}

TEST(Curves, RealizedEstimandOfWorkedExample) {
  Eigen::VectorXd d1(2), d2(2);
  d1 << 1, -1;
  d2 << 2, 3;
  const EffectCurve c(3, {d1, d2});
  const auto est = c.realized_estimand();
  EXPECT_DOUBLE_EQ(est(0), 0.0);
  EXPECT_DOUBLE_EQ(est(1), 2.5);
  EXPECT_EQ(c.delta(1, 0), 0.0);
  EXPECT_EQ(c.delta(2, 2), 3.0);
}

TEST(Curves, OutcomeModels) {
  const auto b1 = outcome_curve(OutcomeModel::B1, EffectRegime::small, 5);
  EXPECT_NEAR(b1.realized_estimand()(0), 0.095, 1e-12);
  EXPECT_NEAR(b1.realized_estimand()(1), 0.135, 1e-12);
  const auto b4 = outcome_curve(OutcomeModel::B4, EffectRegime::large, 11);
  EXPECT_EQ(b4.family(1), CurveFamily::log);
  EXPECT_EQ(b4.family(2), CurveFamily::exp);
  EXPECT_NEAR(b4.realized_estimand()(0), 0.29, 1e-12);
  EXPECT_NEAR(b4.realized_estimand()(1), 0.40, 1e-12);
  const auto a = outcome_curve(OutcomeModel::A, EffectRegime::small, 5);
  EXPECT_NEAR(a.realized_estimand()(1), 0.14, 1e-15);
  const auto b2 = outcome_curve(OutcomeModel::B2, EffectRegime::small, 11);
  EXPECT_NEAR(b2.realized_estimand()(1), 0.13, 1e-15);
}

TEST(Curves, LinearBoundsFromAverages) {
  for (int T : {5, 11}) {
    const auto p = linear_bounds_from_averages(0.21, 0.49, T);
    const auto c = outcome_curve(OutcomeModel::B1, T, 0.21, 0.49, &p);
    EXPECT_NEAR(c.realized_estimand()(0), 0.21, 1e-12);
    EXPECT_NEAR(c.realized_estimand()(1), 0.49, 1e-12);
    EXPECT_NEAR(c.vector(2)(0) - c.vector(1)(T - 2), c.vector(1)(1) - c.vector(1)(0), 1e-12);
  }
}

TEST(Curves, Errors) {
  EXPECT_THROW(effect_vector(CurveFamily::lag_one, 2, 1, {0.1, 0, 0}), InvalidArgument);
  EXPECT_THROW(effect_vector(CurveFamily::constant, 5, 1, {NAN, 0, 0}), InvalidArgument);
  EXPECT_THROW(parse_curve_family("sigmoid"), InvalidArgument);
  EXPECT_THROW(EffectCurve(5, {Eigen::VectorXd::Zero(3)}), InvalidArgument);
}

TEST(Curves, JsonAndCsvRoundTrip) {
  Eigen::VectorXd d1(4), d2(4);
  d1 << 0.1, -1.0 / 3, 2e-17, 7.25;
  d2 << 1e300, -0.0, 0.3, 1.0 / 7;
  const EffectCurve c(5, {d1, d2}, {CurveFamily::custom, CurveFamily::custom});
  EXPECT_EQ(curve_from_json(curve_to_json(c)), c);
  const EffectCurve back = curve_from_csv(curve_to_csv(c));
  EXPECT_EQ(back.vector(1), d1);
  EXPECT_EQ(back.vector(2), d2);
}
