#pragma once

// Monte Carlo simulation studies: bias, SD, coverage, CI length and power.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "swedge/design.hpp"
#include "swedge/effects.hpp"
#include "swedge/error.hpp"
#include "swedge/estimators.hpp"
#include "swedge/simulate.hpp"
#include "swedge/types.hpp"

namespace swedge {

struct ScenarioSpec {
  std::string id;
  DesignKind design = DesignKind::concurrent;
  int periods = 5;
  int interventions = 2;
  LayoutOptions layout_options;
  int n = 30;
  OutcomeModel outcome = OutcomeModel::A;
  EffectRegime regime = EffectRegime::small;
  /// Overrides the regime's target averages (B1 endpoints are then derived
  /// from the averages).
  std::optional<std::pair<double, double>> deltas;
  std::vector<FitModel> fit_models{FitModel::A, FitModel::B, FitModel::C};
  int replicates = 500;
  int bootstrap = 500;
  double level = 0.95;
  std::uint64_t seed = 20250101;
  VarianceComponents vc{0.15, 2.85, {}};
  /// Period effects; defaults to T points from 0.1 to 0.5.
  std::optional<Eigen::VectorXd> beta;
  Method method = Method::reml;

  void validate() const;
  DesignLayout layout() const;
  EffectCurve curve() const;
  SimulationConfig simulation() const;
};

/// One (replicate, model, intervention) outcome.
struct ReplicateRecord {
  int replicate = 0;
  FitModel model = FitModel::A;
  int intervention = 0;
  bool failed = false;
  double estimate = 0.0;
  double se = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double boot_sd = 0.0;
  int boot_failures = 0;
  bool converged = true;
  bool boundary = false;
};

struct MetricRow {
  std::string scenario_id;
  std::string design;
  int periods = 0;
  int n = 0;
  std::string outcome_model;
  FitModel fit_model = FitModel::A;
  int intervention = 0;
  double truth = 0.0;
  double bias = 0.0;
  double sd = 0.0;
  double coverage_pct = 0.0;
  double ci_length = 0.0;
  double mean_se = 0.0;
  double mc_se_bias = 0.0;
  double mc_se_coverage = 0.0;
  int n_fail = 0;
  // Not part of the report CSV but kept for power tables and diagnostics.
  int n_ok = 0;
  double power_pct = 0.0;
  double mc_se_power = 0.0;
  double mean_boot_sd = 0.0;
  double mc_se_sd = 0.0;
  double mc_se_ci_length = 0.0;
  double mc_se_mean_se = 0.0;
};

struct StudyReport {
  std::vector<MetricRow> rows;
  std::vector<ReplicateRecord> replicates;
  std::vector<std::string> warnings;
};

struct RunOptions {
  int workers = 1;
  /// Called after each finished replicate with (finished, total); may be
  /// called from worker threads, never concurrently.
  std::function<void(int, int)> progress;
};

/// Thrown when more than 5% of replicates fail for some fitting model.
class StudyAborted : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Seed of a scenario derived from the base seed and the scenario id, so a
/// subset of a preset reproduces the full run.
std::uint64_t scenario_seed(std::uint64_t base, const std::string& id);

/// Runs one scenario: simulate, fit each model, bootstrap with resamples
/// shared across models, aggregate against the realized truth. Results do not
/// depend on the worker count.
StudyReport run_scenario(const ScenarioSpec& spec, const RunOptions& options = {});

/// Aggregates replicate records into metric rows (also used to re-aggregate
/// persisted replicate CSVs).
std::vector<MetricRow> aggregate(const ScenarioSpec& spec, const std::vector<ReplicateRecord>& records);

/// Monte Carlo standard errors.
double mc_se_mean(double sd, int replicates);
double mc_se_proportion(double p, int replicates);

/// Fills every mc_se_* field of the rows from their own metrics (R = n_ok).
void mc_standard_errors(std::vector<MetricRow>& rows);

struct PowerRow {
  std::string design;
  int n = 0;
  double delta1 = 0.0;
  int intervention = 0;
  double power = 0.0;   // percent
  double mc_se = 0.0;   // percentage points
};

struct PowerGrid {
  std::vector<DesignKind> designs{DesignKind::concurrent, DesignKind::factorial_augmented};
  int periods = 5;
  LayoutOptions layout_options;
  std::vector<int> sizes{30, 100, 500};
  std::vector<double> delta1{0.01, 0.11, 0.21, 0.31, 0.41, 0.51, 0.61};
  double delta2_shift = 0.28;
  int replicates = 500;
  int bootstrap = 500;
  double level = 0.95;
  std::uint64_t seed = 20250101;
  VarianceComponents vc{0.05, 0.95, {}};
};

/// Scenario for one grid point (Model B fits, outcome B1 from averages).
ScenarioSpec power_scenario(const PowerGrid& grid, DesignKind design, int n, double delta1);

/// Power = percentage of replicates whose percentile CI excludes 0.
std::vector<PowerRow> run_power(const PowerGrid& grid, const RunOptions& options = {},
                                std::vector<StudyReport>* reports = nullptr);

std::vector<PowerRow> power_rows(const ScenarioSpec& spec, const StudyReport& report, double delta1);

/// Named scenario grids: table1..table4 (concurrent/factorial x small/large,
/// T in {5, 11}, outcome models A..B4, fits A, B, C).
std::vector<ScenarioSpec> study_preset(const std::string& name);

}  // namespace swedge
