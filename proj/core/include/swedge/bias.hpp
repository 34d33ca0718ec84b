#pragma once

// Expectation of the constant-effect GLS estimator when the true effects vary
// with exposure time: E(theta_hat) = H delta.

#include <Eigen/Dense>

#include <string>
#include <string_view>
#include <vector>

#include "swedge/design.hpp"
#include "swedge/effects.hpp"
#include "swedge/types.hpp"

namespace swedge {

/// b = sigma2_alpha / (T sigma2_alpha + sigma2_eps / n)
double design_scalar(const VarianceComponents& vc, double n, int periods);

enum class HProvenance { general, concurrent_closed_form, factorial_block };

std::string_view to_string(HProvenance provenance);

/// m x m(T-1) weight matrix; row k holds the weights of theta_hat_k on the
/// stacked (delta_1', ..., delta_m')'.
struct WeightMatrix {
  Eigen::MatrixXd h;
  HProvenance provenance = HProvenance::general;
  int periods = 0;
  int interventions = 0;
  double b = 0.0;
};

/// H from the GLS normal equations with Sigma_i = sigma2_alpha J +
/// (sigma2_eps / n) I for every cluster.
WeightMatrix H_general(const DesignLayout& layout, const VarianceComponents& vc, double n);

/// Same, parameterized directly by b through Sigma^{-1} proportional to I - bJ.
/// Any b with a nonsingular normal matrix is accepted, including b >= 1/T.
WeightMatrix H_general(const DesignLayout& layout, double b);

struct ConcurrentScalars {
  double c = 0.0;
  double d = 0.0;
  double g = 0.0;
  Eigen::VectorXd r;
  Eigen::VectorXd v;
};

/// c = T(T-1)(3+b-2bT)/6, d = T[4T-2-3bT(T-1)]/(12m), g = T(T-2)(2+b-bT)/12,
/// r_j = (T-j)[1+b(1-T-j)/2], v_j = (T-j)[1-bT+j/(T-1)]/(2m), j = 1..T-1.
ConcurrentScalars concurrent_scalars(int periods, int interventions, double b);

/// H = [(1/c)(I + (d/g)J)] kron r' - (1/g) J kron v' for the concurrent layout.
/// Throws NumericalError when c or g is degenerate.
WeightMatrix H_concurrent_closed(int periods, int interventions, double b);

struct SingleWeights {
  Eigen::VectorXd w;
  /// E(theta_hat) = 6 sum_j w_j delta_j / denom
  double denom = 0.0;
};

/// w_j = (T-j)[(b-1-bT)j + (1+b)(T-1)], denom = T(T-1)(T-2)(2+b-bT).
SingleWeights single_intervention_weights(int periods, double b);

struct ExpectedEstimate {
  Eigen::VectorXd expected;
  Eigen::VectorXd truth;
  Eigen::VectorXd bias;
};

ExpectedEstimate expected_constant_estimate(const WeightMatrix& h, const EffectCurve& curve);
ExpectedEstimate expected_constant_estimate(const Eigen::MatrixXd& h, const EffectCurve& curve);

/// Largest deviation of own-block row sums from 1 and cross-block row sums
/// from 0.
double row_sum_deviation(const WeightMatrix& h);

/// Largest deviation from the (h1' h2'; h2' h1') pattern (m = 2 only).
double block_symmetry_deviation(const WeightMatrix& h);

struct NamedLayout {
  std::string name;
  DesignLayout layout;
};

struct NamedCurve {
  std::string name;
  EffectCurve curve;
};

struct BiasRow {
  std::string design;
  std::string family;
  double b = 0.0;
  int intervention = 0;
  double truth = 0.0;
  double expected = 0.0;
  double bias = 0.0;
};

/// Rows (design, family, b, intervention, truth, expected, bias) over the full
/// grid, in design-major order.
std::vector<BiasRow> bias_curve_table(const std::vector<NamedLayout>& designs,
                                      const std::vector<double>& b_grid,
                                      const std::vector<NamedCurve>& curves);

}  // namespace swedge
