#pragma once

// File formats: layout/curve/fit JSON, dataset and table CSVs.
//
// Numbers are written with the shortest representation that reads back
// exactly, independent of the C locale.

#include <Eigen/Dense>

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "swedge/bias.hpp"
#include "swedge/design.hpp"
#include "swedge/effects.hpp"
#include "swedge/estimators.hpp"
#include "swedge/simulate.hpp"
#include "swedge/study.hpp"

namespace swedge {

std::string format_double(double v);
/// Strict parse of a whole field; throws ParseError.
double parse_double(std::string_view text, long line = 0);
long parse_integer(std::string_view text, long line = 0);

/// Splits one CSV line on commas (no quoting; none of the formats need it).
std::vector<std::string> split_csv_line(std::string_view line);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

// Layout: {"kind", "T", "m", "clusters": [{"id", "starts": [period|null]}]}
std::string layout_to_json(const DesignLayout& layout);
DesignLayout layout_from_json(std::string_view text);

// Curves: CSV intervention,exposure,delta and JSON
// {"T", "interventions": [{"k", "family", "delta": [...]}]}
std::string curve_to_csv(const EffectCurve& curve);
EffectCurve curve_from_csv(std::string_view text);
std::string curve_to_json(const EffectCurve& curve);
EffectCurve curve_from_json(std::string_view text);

// Dataset CSV: cluster,period,individual,x1..xm,e1..em,y
void write_dataset_csv(std::ostream& os, const TrialDataset& data);
std::string dataset_to_csv(const TrialDataset& data);
TrialDataset dataset_from_csv(std::string_view text);

// {"model", "method", "beta", "effects", "vc", "estimands", "loglik",
//  "converged", "boundary", ...}
std::string fit_to_json(const FitResult& fit);

std::string weight_matrix_to_json(const WeightMatrix& h);
std::string bias_table_to_csv(const std::vector<BiasRow>& rows);

std::string report_to_csv(const std::vector<MetricRow>& rows);
std::string replicates_to_csv(const std::vector<ReplicateRecord>& records);
std::vector<ReplicateRecord> replicates_from_csv(std::string_view text);
std::string power_to_csv(const std::vector<PowerRow>& rows);

// Study configs. A scenario document is one object or {"scenarios": [...]}
// with keys id, design, T, m, offset, clusters_per_sequence, augment, n,
// outcome, regime, deltas, fit_models, replicates, bootstrap, level, seed,
// sigma2_alpha, sigma2_eps, beta, method. Unknown keys are rejected.
std::vector<ScenarioSpec> scenarios_from_json(std::string_view text);
std::string scenario_to_json(const ScenarioSpec& spec);

// Power grid: designs, T, offset, n, delta1, delta2_shift, replicates,
// bootstrap, level, seed, sigma2_alpha, sigma2_eps.
PowerGrid power_grid_from_json(std::string_view text);

}  // namespace swedge
