#include <gtest/gtest.h>

#include <swedge/error.hpp>
#include <swedge/rng.hpp>
#include <swedge/simulate.hpp>

using namespace swedge;

namespace {

SimulationConfig config(double s2a = 0.15, double s2e = 2.85, int n = 30) {
  const auto l = build_layout(DesignKind::concurrent, 5, 2);
  return SimulationConfig{l, outcome_curve(OutcomeModel::B2, EffectRegime::small, 5), default_period_effects(5),
                          VarianceComponents{s2a, s2e, {}}, n, {}, 77};
}

}  // namespace

TEST(Simulate, Deterministic) {
  const auto cfg = config();
  EXPECT_EQ(simulate(cfg, 4), simulate(cfg, 4));
  EXPECT_FALSE(simulate(cfg, 4) == simulate(cfg, 5));
  auto other = cfg;
  other.seed = 78;
  EXPECT_FALSE(simulate(cfg, 4) == simulate(other, 4));
}

TEST(Simulate, NoiseFreeMeanStructure) {
  const auto cfg = config(0.0, 1e-20);
  const auto data = simulate(cfg, 0);
  for (int i = 0; i < data.clusters(); ++i)
    for (int j = 0; j < data.periods(); ++j) {
      double mu = cfg.beta(j);
      for (int k = 1; k <= 2; ++k) mu += cfg.curve.delta(k, cfg.layout.exposure(k, i + 1, j + 1));
      for (int s = 0; s < data.size(i, j); ++s) EXPECT_NEAR(data.cell(i, j)[s], mu, 1e-8);
    }
}

TEST(Simulate, ArmsMatchLayout) {
  const auto cfg = config();
  const auto data = simulate(cfg, 1);
  EXPECT_NO_THROW(data.check_against(cfg.layout));
  EXPECT_EQ(data.observations(), 8u * 5u * 30u);
  const auto rec = data.records();
  ASSERT_EQ(rec.size(), data.observations());
  EXPECT_EQ(rec.front().cluster, 1);
  EXPECT_EQ(rec.back().cluster, 8);
  EXPECT_EQ(rec.back().individual, 30);
  for (const auto& r : rec) {
    EXPECT_EQ(r.x[0], cfg.layout.treated(1, r.cluster, r.period) ? 1 : 0);
    EXPECT_EQ(r.e[1], cfg.layout.exposure(2, r.cluster, r.period));
  }
  const auto wrong = build_layout(DesignKind::factorial_augmented, 5, 2);
  EXPECT_THROW(data.check_against(wrong), InvalidArgument);
}

TEST(Simulate, VarianceComponentsAreRespected) {
  // Pooled within-cell variance estimates sigma2_eps; between-cluster spread
  // of cluster means estimates sigma2_alpha + sigma2_eps / (n T).
  auto cfg = config(0.6, 2.0, 40);
  double within = 0, dfw = 0, between = 0;
  int reps = 200;
  for (int r = 0; r < reps; ++r) {
    const auto m = cluster_period_means(simulate(cfg, r));
    within += m.within_ss;
    dfw += (m.n.array() - 1).sum();
    // cluster mean after removing the period-by-arm mean structure
    Eigen::VectorXd cm(8);
    for (int i = 0; i < 8; ++i) {
      double s = 0;
      for (int j = 0; j < 5; ++j) {
        double mu = cfg.beta(j);
        for (int k = 1; k <= 2; ++k) mu += cfg.curve.delta(k, cfg.layout.exposure(k, i + 1, j + 1));
        s += m.mean(i, j) - mu;
      }
      cm(i) = s / 5;
    }
    between += cm.squaredNorm() / 8;
  }
  EXPECT_NEAR(within / dfw, 2.0, 0.03);
  EXPECT_NEAR(between / reps, 0.6 + 2.0 / 200, 0.08);
}

TEST(Simulate, CustomSizes) {
  auto cfg = config();
  cfg.sizes = Eigen::MatrixXi::Constant(8, 5, 3);
  cfg.sizes(2, 4) = 11;
  const auto data = simulate(cfg, 0);
  EXPECT_EQ(data.size(2, 4), 11);
  EXPECT_EQ(data.observations(), 8u * 5u * 3u + 8u);
  cfg.sizes(0, 0) = 0;
  EXPECT_THROW(simulate(cfg, 0), InvalidArgument);
}

TEST(CellMeans, MatchDirectComputation) {
  const auto data = simulate(config(), 2);
  const auto m = cluster_period_means(data);
  for (int i = 0; i < data.clusters(); ++i)
    for (int j = 0; j < data.periods(); ++j) {
      const double* y = data.cell(i, j);
      const int n = data.size(i, j);
      double s = 0;
      for (int t = 0; t < n; ++t) s += y[t];
      const double mean = s / n;
      double ss = 0;
      for (int t = 0; t < n; ++t) ss += (y[t] - mean) * (y[t] - mean);
      EXPECT_NEAR(m.mean(i, j), mean, 1e-12);
      EXPECT_NEAR(m.ss(i, j), ss, 1e-9);
      EXPECT_EQ(m.n(i, j), n);
    }
}

TEST(CellMeans, ResampleStaysInsideCells) {
  const auto data = simulate(config(), 3);
  RandomStream rng(1, 2, 3);
  const auto m = resample_means(data, rng);
  for (int i = 0; i < data.clusters(); ++i)
    for (int j = 0; j < data.periods(); ++j) {
      const double* y = data.cell(i, j);
      const auto [lo, hi] = std::minmax_element(y, y + data.size(i, j));
      EXPECT_GE(m.mean(i, j), *lo - 1e-12);
      EXPECT_LE(m.mean(i, j), *hi + 1e-12);
      EXPECT_EQ(m.n(i, j), data.size(i, j));
    }
  RandomStream again(1, 2, 3);
  EXPECT_EQ(resample_means(data, again).mean, m.mean);
}
