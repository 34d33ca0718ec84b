#pragma once

#include <string_view>
#include <vector>

namespace swedge {

/// The three competing analysis models.
///   A: constant treatment effect per intervention (theta_k)
///   B: one fixed effect per exposure time per intervention (delta_{k,e})
///   C: exposure-time effects as exchangeable random deviations around mu_k
enum class FitModel { A, B, C };

std::string_view to_string(FitModel model);
FitModel parse_fit_model(std::string_view name);

/// Variance components on the outcome scale. `treatment` holds one variance
/// per intervention for the random treatment effect model and is empty
/// otherwise.
struct VarianceComponents {
  double cluster = 0.0;
  double residual = 1.0;
  std::vector<double> treatment;

  /// sigma2_alpha / (sigma2_alpha + sigma2_eps)
  double icc() const { return cluster / (cluster + residual); }

  /// Throws InvalidArgument unless all variances are finite, nonnegative and
  /// the residual variance is strictly positive.
  void validate() const;
};

}  // namespace swedge
