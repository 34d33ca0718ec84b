#pragma once

// Individual-level data generation and cluster-period summaries.

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "swedge/design.hpp"
#include "swedge/effects.hpp"
#include "swedge/rng.hpp"
#include "swedge/types.hpp"

namespace swedge {

/// T equally spaced points from 0.1 to 0.5.
Eigen::VectorXd default_period_effects(int periods);

struct SimulationConfig {
  DesignLayout layout;
  EffectCurve curve;
  Eigen::VectorXd beta;
  VarianceComponents vc;
  int n = 30;
  /// Optional I x T cluster-period sizes; overrides `n` when nonempty.
  Eigen::MatrixXi sizes;
  std::uint64_t seed = 0;

  void validate() const;
  Eigen::MatrixXi cell_sizes() const;
};

/// One individual's row in the flat dataset view (1-based cluster/period/
/// individual).
struct Record {
  int cluster;
  int period;
  int individual;
  std::vector<int> x;
  std::vector<int> e;
  double y;
};

/// Outcomes grouped by cluster-period cell, cells ordered cluster-major.
class TrialDataset {
 public:
  TrialDataset() = default;
  /// `x` and `e` hold one I x T matrix per intervention.
  TrialDataset(Eigen::MatrixXi sizes, std::vector<Eigen::MatrixXi> x, std::vector<Eigen::MatrixXi> e,
               std::vector<double> y);
  /// Arms and exposures taken from the layout.
  TrialDataset(const DesignLayout& layout, Eigen::MatrixXi sizes, std::vector<double> y);

  int clusters() const noexcept { return static_cast<int>(sizes_.rows()); }
  int periods() const noexcept { return static_cast<int>(sizes_.cols()); }
  int interventions() const noexcept { return static_cast<int>(x_.size()); }
  std::size_t observations() const noexcept { return y_.size(); }

  /// n_ij, 0-based cell indices.
  int size(int i, int j) const { return sizes_(i, j); }
  const Eigen::MatrixXi& sizes() const noexcept { return sizes_; }
  int arm(int k, int i, int j) const { return x_[k](i, j); }
  int exposure(int k, int i, int j) const { return e_[k](i, j); }

  /// Outcomes of cell (i, j), 0-based.
  const double* cell(int i, int j) const { return y_.data() + offsets_[cell_index(i, j)]; }
  double* cell(int i, int j) { return y_.data() + offsets_[cell_index(i, j)]; }
  const std::vector<double>& outcomes() const noexcept { return y_; }

  std::vector<Record> records() const;

  /// Throws InvalidArgument unless dimensions, arms and exposures agree with
  /// the layout.
  void check_against(const DesignLayout& layout) const;

  /// Multiplies every outcome by `factor`.
  void scale(double factor);

  bool operator==(const TrialDataset& other) const;

 private:
  std::size_t cell_index(int i, int j) const { return static_cast<std::size_t>(i) * sizes_.cols() + j; }
  void build_offsets();

  Eigen::MatrixXi sizes_;
  std::vector<Eigen::MatrixXi> x_;
  std::vector<Eigen::MatrixXi> e_;
  std::vector<std::size_t> offsets_;
  std::vector<double> y_;
};

/// y_ijs = beta_j + sum_k x_kij delta_{k,e_kij} + alpha_i + eps_ijs, drawn
/// from stream (seed, replicate, 0). Cluster effects are drawn first, then
/// residuals cell by cell.
TrialDataset simulate(const SimulationConfig& config, std::uint64_t replicate = 0);

/// Cluster-period means and within-cell sums of squares.
struct CellMeans {
  Eigen::MatrixXd mean;  // I x T
  Eigen::MatrixXd n;     // I x T
  Eigen::MatrixXd ss;    // I x T, sum of squared deviations from the cell mean
  double within_ss = 0.0;
  double observations = 0.0;
  /// Rescaled as if the outcomes had been multiplied by `factor`.
  void scale(double factor);
};

CellMeans cluster_period_means(const TrialDataset& data);

/// Bootstrap resample: n_ij draws with replacement inside each cell.
CellMeans resample_means(const TrialDataset& data, RandomStream& rng);

/// Same, writing into `out` (reused across resamples to avoid allocation).
void resample_means(const TrialDataset& data, RandomStream& rng, CellMeans& out);

}  // namespace swedge
