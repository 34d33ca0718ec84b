#pragma once

// Synthetic stand-in for a two-intervention factorial trial with 10 clusters
// and 10 periods: unequal cluster-period sizes, ICC 0.05, no treatment effect.

#include <Eigen/Dense>

#include <string>

#include <swedge/design.hpp>
#include <swedge/effects.hpp>
#include <swedge/rng.hpp>
#include <swedge/simulate.hpp>

namespace fixture {

inline constexpr std::uint64_t kSeed = 424242;
inline constexpr double kCluster = 0.8;    // ICC 0.8 / 16 = 0.05
inline constexpr double kResidual = 15.2;

inline swedge::DesignLayout layout() {
  // A-first and B-first clusters alternate; the second intervention follows
  // two periods after the first.
  std::vector<std::vector<swedge::StartPeriod>> starts;
  for (int s = 2; s <= 6; ++s) {
    starts.push_back({s, s + 2});
    starts.push_back({s + 2, s});
  }
  return swedge::DesignLayout(swedge::DesignKind::custom, 10, 2, std::move(starts));
}

inline Eigen::MatrixXi sizes() {
  swedge::RandomStream rng(kSeed, 0, 99);
  Eigen::MatrixXi n(10, 10);
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j) n(i, j) = 25 + static_cast<int>(rng.below(21));
  return n;
}

inline swedge::SimulationConfig config() {
  const swedge::DesignLayout l = layout();
  const swedge::EffectCurve zero(10, {Eigen::VectorXd::Zero(9), Eigen::VectorXd::Zero(9)});
  Eigen::VectorXd beta = Eigen::VectorXd::Constant(10, 8.0);
  for (int j = 0; j < 10; ++j) beta(j) += 0.05 * j;
  return swedge::SimulationConfig{l, zero, beta, swedge::VarianceComponents{kCluster, kResidual, {}}, 0, sizes(),
                                  kSeed};
}

}  // namespace fixture
