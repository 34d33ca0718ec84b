#include <gtest/gtest.h>

#include <swedge/error.hpp>
#include <swedge/mixed_model.hpp>

#include "oracles.hpp"

using namespace swedge;

namespace {

struct Instance {
  DesignLayout layout;
  TrialDataset data;
};

// Small unequal-size instances (<= 200 observations) for dense comparisons.
Instance small_instance(DesignKind kind, int T, std::uint64_t seed, double effect = 0.3) {
  const DesignLayout l = build_layout(kind, T, 2);
  Eigen::MatrixXi sizes(l.clusters(), T);
  RandomStream rng(seed, 0, 5);
  for (int i = 0; i < sizes.rows(); ++i)
    for (int j = 0; j < T; ++j) sizes(i, j) = 2 + static_cast<int>(rng.below(5));
  const EffectCurve c(T, {Eigen::VectorXd::LinSpaced(T - 1, 0.0, effect), Eigen::VectorXd::Constant(T - 1, -effect)});
  SimulationConfig cfg{l, c, default_period_effects(T), {0.4, 1.3, {}}, 0, sizes, seed};
  return {l, simulate(cfg, 0)};
}

std::vector<Instance> instances() {
  std::vector<Instance> out;
  out.push_back(small_instance(DesignKind::concurrent, 3, 1));
  out.push_back(small_instance(DesignKind::concurrent, 4, 2));
  out.push_back(small_instance(DesignKind::factorial_augmented, 4, 3));
  out.push_back(small_instance(DesignKind::factorial, 5, 4));
  return out;
}

MeansModel engine(const Instance& in, FitModel model) {
  MeansModel mm(in.layout, model, in.data.sizes().cast<double>());
  mm.set_data(cluster_period_means(in.data));
  return mm;
}

}  // namespace

TEST(MeansModel, DevianceMatchesDenseOracle) {
  for (const auto& in : instances()) {
    ASSERT_LE(in.data.observations(), 200u);
    for (FitModel model : {FitModel::A, FitModel::B, FitModel::C}) {
      const MeansModel mm = engine(in, model);
      std::vector<VarianceComponents> grid{{0.4, 1.3, {}}, {0.0, 2.0, {}}, {3.0, 0.5, {}}};
      if (model == FitModel::C) grid = {{0.4, 1.3, {0.2, 0.05}}, {0.0, 2.0, {0.0, 0.7}}, {1.1, 0.6, {0.3, 0.3}}};
      for (const auto& vc : grid)
        for (Method method : {Method::reml, Method::ml}) {
          const double want = oracle::dense_deviance(in.data, in.layout, model, vc, method);
          EXPECT_NEAR(mm.deviance(vc, method), want, 1e-8 * std::max(1.0, std::abs(want)))
              << to_string(in.layout.kind()) << " " << to_string(model) << " " << to_string(method);
        }
    }
  }
}

TEST(MeansModel, ProfiledDevianceEqualsAbsoluteAtSigmaHat) {
  for (const auto& in : instances()) {
    for (FitModel model : {FitModel::A, FitModel::C}) {
      const MeansModel mm = engine(in, model);
      Eigen::VectorXd psi(mm.parameter_count());
      psi.setConstant(0.25);
      psi(0) = 0.6;
      for (Method method : {Method::reml, Method::ml}) {
        const auto sol = mm.solve(psi, method);
        VarianceComponents vc{psi(0) * sol.sigma2_hat, sol.sigma2_hat, {}};
        for (int k = 1; k < psi.size(); ++k) vc.treatment.push_back(psi(k) * sol.sigma2_hat);
        EXPECT_NEAR(mm.deviance(psi, method), mm.deviance(vc, method), 1e-8);
        // sigma_hat minimizes the deviance along the residual scale
        for (double f : {0.9, 1.1}) {
          VarianceComponents off = vc;
          off.cluster *= f;
          off.residual *= f;
          for (auto& t : off.treatment) t *= f;
          EXPECT_GT(mm.deviance(off, method), mm.deviance(vc, method));
        }
      }
    }
  }
}

TEST(MeansModel, ModelCWithZeroTreatmentVarianceIsModelA) {
  for (const auto& in : instances()) {
    const MeansModel a = engine(in, FitModel::A);
    const MeansModel c = engine(in, FitModel::C);
    for (Method method : {Method::reml, Method::ml}) {
      EXPECT_NEAR(c.deviance(VarianceComponents{0.4, 1.3, {0.0, 0.0}}, method),
                  a.deviance(VarianceComponents{0.4, 1.3, {}}, method), 1e-8);
      Eigen::VectorXd pa(1), pc(3);
      pa << 0.3;
      pc << 0.3, 0.0, 0.0;
      EXPECT_NEAR(c.deviance(pc, method), a.deviance(pa, method), 1e-8);
      const auto sa = a.solve(pa, method), sc = c.solve(pc, method);
      EXPECT_LT((sa.fixed - sc.fixed).cwiseAbs().maxCoeff(), 1e-8);
      EXPECT_TRUE(sc.random.isZero(1e-12));
    }
  }
}

TEST(MeansModel, SolveMatchesDenseGls) {
  for (const auto& in : instances()) {
    for (FitModel model : {FitModel::A, FitModel::B, FitModel::C}) {
      const MeansModel mm = engine(in, model);
      VarianceComponents vc{0.4, 1.3, {}};
      if (model == FitModel::C) vc.treatment = {0.2, 0.1};
      Eigen::VectorXd psi(mm.parameter_count());
      psi(0) = vc.cluster / vc.residual;
      for (int k = 1; k < psi.size(); ++k) psi(k) = vc.treatment[k - 1] / vc.residual;
      const auto sol = mm.solve(psi, Method::reml);
      const auto [beta, cov] = oracle::dense_gls(in.data, in.layout, model, vc);
      EXPECT_LT((sol.fixed - beta).cwiseAbs().maxCoeff(), 1e-8);
      EXPECT_LT((sol.fixed_cov_rel * vc.residual - cov).cwiseAbs().maxCoeff(), 1e-8);
    }
  }
}

TEST(MeansModel, ModelCPredictionsMatchDenseBlup) {
  const auto in = small_instance(DesignKind::concurrent, 4, 9, 0.8);
  const MeansModel mm = engine(in, FitModel::C);
  const VarianceComponents vc{0.4, 1.3, {0.2, 0.1}};
  Eigen::VectorXd psi(3);
  psi << vc.cluster / vc.residual, 0.2 / 1.3, 0.1 / 1.3;
  const auto sol = mm.solve(psi, Method::reml);

  const auto d = oracle::individual_design(in.data, in.layout, FitModel::C);
  const Eigen::MatrixXd v = oracle::individual_covariance(d, FitModel::C, vc);
  const auto [beta, cov] = oracle::dense_gls(in.data, in.layout, FitModel::C, vc);
  Eigen::VectorXd g(d.gamma.cols());
  for (Eigen::Index c = 0; c < g.size(); ++c) g(c) = vc.treatment[d.gamma_owner[c]];
  const Eigen::VectorXd blup = g.asDiagonal() * d.gamma.transpose() * v.ldlt().solve(d.y - d.x * beta);
  EXPECT_LT((sol.random - blup).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(MeansModel, RejectsMismatchedData) {
  const auto in = small_instance(DesignKind::concurrent, 4, 2);
  MeansModel mm(in.layout, FitModel::A, in.data.sizes().cast<double>());
  auto means = cluster_period_means(in.data);
  means.n(0, 0) += 1;
  EXPECT_THROW(mm.set_data(means), InvalidArgument);
  EXPECT_THROW(MeansModel(in.layout, FitModel::A, Eigen::MatrixXd::Constant(3, 4, 10.0)), InvalidArgument);
  Eigen::MatrixXd empty_cell = in.data.sizes().cast<double>();
  empty_cell(1, 1) = 0;
  EXPECT_THROW(MeansModel(in.layout, FitModel::A, empty_cell), InvalidArgument);
}
