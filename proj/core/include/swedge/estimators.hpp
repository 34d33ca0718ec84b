#pragma once

// Model A/B/C fits by GLS (known variances) or profiled REML/ML, estimand
// extraction and percentile bootstrap intervals.

#include <Eigen/Dense>

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "swedge/design.hpp"
#include "swedge/mixed_model.hpp"
#include "swedge/optimizer.hpp"
#include "swedge/simulate.hpp"
#include "swedge/types.hpp"

namespace swedge {

std::string_view to_string(Method method);

/// Natural-scale bounds on the relative variance parameters.
inline constexpr double kVarianceLowerBound = 1e-10;
inline constexpr double kVarianceUpperBound = 1e6;

struct FitOptions {
  Method method = Method::reml;
  OptimizerOptions optimizer;
  /// Starting log relative variances; defaults to log(0.1) for each.
  std::optional<Eigen::VectorXd> start;
  /// Snap a parameter to its lower bound when that does not worsen the
  /// objective by more than this amount.
  double snap_tolerance = 1e-8;
  bool check_identifiability = true;
};

struct Estimand {
  int intervention = 0;
  double estimate = 0.0;
  double se = 0.0;
  double ci_low = std::numeric_limits<double>::quiet_NaN();
  double ci_high = std::numeric_limits<double>::quiet_NaN();
};

struct ConvergenceInfo {
  bool converged = true;
  int iterations = 0;
  int evaluations = 0;
  int restarts = 0;
  double gradient_norm = 0.0;
  /// Names of variance parameters at the lower bound.
  std::vector<std::string> boundary;
};

struct FitResult {
  FitModel model = FitModel::A;
  Method method = Method::reml;
  bool known_variance = false;
  Eigen::VectorXd beta;
  /// theta (A), delta stacked by intervention (B) or mu (C).
  Eigen::VectorXd effects;
  std::vector<std::string> effect_labels;
  /// Predicted exposure-time deviations gamma (C only).
  Eigen::VectorXd random_effects;
  VarianceComponents vc;
  /// Covariance of (beta', effects')'.
  Eigen::MatrixXd cov;
  std::vector<Estimand> estimands;
  double loglik = 0.0;
  ConvergenceInfo convergence;
  /// Log relative variance parameters at the optimum (warm start for refits).
  Eigen::VectorXd log_psi;

  Eigen::VectorXd estimates() const;
};

/// Row k of the result maps (beta', effects')' to Delta_hat_k: the effect
/// coordinate for A and C, the average of the k-th delta block for B.
Eigen::MatrixXd estimand_contrasts(FitModel model, int periods, int interventions);

/// Reusable fitter for one layout, model and cell-size table.
class ModelFitter {
 public:
  ModelFitter(const DesignLayout& layout, FitModel model, const Eigen::MatrixXd& sizes,
              FitOptions options = {});

  /// Profiled REML/ML fit. `warm_start` overrides the configured start.
  FitResult fit(const CellMeans& means, const Eigen::VectorXd* warm_start = nullptr);

  /// GLS with the variance components held at `vc`.
  FitResult fit_known(const CellMeans& means, const VarianceComponents& vc);

  const MeansModel& engine() const noexcept { return engine_; }
  const FitOptions& options() const noexcept { return options_; }

 private:
  FitResult finish(const Eigen::VectorXd& psi, double sigma2, bool profiled);

  FitModel model_;
  int periods_;
  int interventions_;
  FitOptions options_;
  MeansModel engine_;
  Eigen::MatrixXd contrasts_;
  std::vector<std::string> labels_;
};

/// GLS for Model A or B (C accepted when vc lists treatment variances) with
/// known variance components; Sigma_i = sigma2_alpha J + diag(sigma2_eps/n_ij).
FitResult fit_gls(const CellMeans& means, const DesignLayout& layout, FitModel model,
                  const VarianceComponents& vc);

FitResult fit_reml(const TrialDataset& data, const DesignLayout& layout, FitModel model,
                   const FitOptions& options = {});
FitResult fit_reml(const CellMeans& means, const DesignLayout& layout, FitModel model,
                   const FitOptions& options = {});

/// Normal-theory intervals estimate +- z * se (the CLI default without
/// bootstrap).
void set_wald_intervals(FitResult& fit, double level);

/// Model-based standard errors of Delta_hat_k.
Eigen::VectorXd estimand_se(const FitResult& fit);

/// Type-1 empirical quantile: the ceil(q * B)-th order statistic of the
/// sorted values (clamped to 1..B).
double empirical_quantile(const std::vector<double>& sorted, double q);

/// Percentile interval (level e.g. 0.95) from unsorted values.
std::pair<double, double> percentile_interval(std::vector<double> values, double level);

struct BootstrapResult {
  Eigen::VectorXd low;
  Eigen::VectorXd high;
  /// Successful resample estimates, one row per resample.
  Eigen::MatrixXd draws;
  int requested = 0;
  int failures = 0;
  /// Empirical SD of the successful resample estimates.
  Eigen::VectorXd sd;
  /// Set when failures exceed 1% of the requested resamples.
  std::optional<std::string> warning;
};

/// Copies percentile bounds into the fit's estimands.
void set_bootstrap_intervals(FitResult& fit, const BootstrapResult& boot);

/// Resample individuals within each cluster-period B times from streams
/// (seed, stream, b + 1), refit, and take percentile intervals. Refits are
/// warm-started from `reference` when given.
BootstrapResult bootstrap_ci(const TrialDataset& data, const DesignLayout& layout, FitModel model,
                             int resamples, double level, std::uint64_t seed,
                             std::uint64_t stream = 0, const FitOptions& options = {},
                             const FitResult* reference = nullptr);

/// Summarizes per-resample estimates (rows may contain NaN for failures).
BootstrapResult summarize_bootstrap(const std::vector<Eigen::VectorXd>& estimates, int failures,
                                    double level);

}  // namespace swedge
