#pragma once

// Linear mixed model on cluster-period means with a random cluster intercept
// and, for Model C, random exposure-time deviations shared across clusters.
//
// Variance parameters are carried relative to the residual variance,
// psi = (sigma2_alpha, sigma2_1, ..., sigma2_m) / sigma2_eps. The residual
// variance itself is profiled out. Individual-level likelihoods are recovered
// exactly from the means, the cell sizes and the pooled within-cell sum of
// squares.

#include <Eigen/Dense>

#include <vector>

#include "swedge/design.hpp"
#include "swedge/simulate.hpp"
#include "swedge/types.hpp"

namespace swedge {

enum class Method { reml, ml };

/// Solution of the mixed model equations at fixed relative variances.
struct MeansSolution {
  Eigen::VectorXd fixed;          // beta (T) then the treatment coefficients
  Eigen::MatrixXd fixed_cov_rel;  // Q^{-1}; multiply by sigma2_eps
  Eigen::VectorXd random;         // exposure-time deviations (Model C), else empty
  double rss = 0.0;               // W + r'V^{-1}r in relative units
  double logdet_v = 0.0;          // log|V| of the individual-level relative covariance
  double logdet_q = 0.0;
  double sigma2_hat = 0.0;        // profiled residual variance
};

class MeansModel {
 public:
  /// `sizes` is the I x T table of n_ij.
  MeansModel(const DesignLayout& layout, FitModel model, const Eigen::MatrixXd& sizes);

  FitModel model() const noexcept { return model_; }
  int fixed_count() const noexcept { return p_; }
  int random_count() const noexcept { return q_; }
  /// Number of relative variance parameters: 1, or 1 + m for Model C.
  int parameter_count() const noexcept { return model_ == FitModel::C ? 1 + m_ : 1; }
  double observations() const noexcept { return n_total_; }

  /// Loads a data set (means must match the sizes given at construction).
  void set_data(const CellMeans& means);

  /// Profiled -2 log-likelihood (REML or ML) at relative variances psi.
  double deviance(const Eigen::VectorXd& psi, Method method) const;

  /// -2 log-likelihood at absolute variance components, not profiled.
  double deviance(const VarianceComponents& vc, Method method) const;

  MeansSolution solve(const Eigen::VectorXd& psi, Method method) const;

 private:
  struct Group {
    double s = 0.0;      // cluster total sample size
    double count = 0.0;  // clusters in the group
    Eigen::MatrixXd kk;  // sum of k_i k_i'
    Eigen::VectorXd kt;  // sum of k_i t_i (data)
    double tt = 0.0;     // sum of t_i^2 (data)
  };

  struct Pieces {
    Eigen::MatrixXd q;   // F'V^{-1}F
    Eigen::VectorXd fy;  // F'V^{-1}y
    double yy = 0.0;     // y'V^{-1}y
    double logdet_v = 0.0;
    // Model C only, for the random-effect predictions.
    Eigen::MatrixXd l_solve_uf;  // L^{-1} Psi^{1/2} U'B^{-1}F
    Eigen::VectorXd l_solve_uy;  // L^{-1} Psi^{1/2} U'B^{-1}y
    Eigen::VectorXd sqrt_psi;
  };

  Pieces assemble(const Eigen::VectorXd& psi, bool keep_random) const;

  FitModel model_;
  int T_ = 0;
  int m_ = 0;
  int p_ = 0;
  int q_ = 0;
  double n_total_ = 0.0;
  double sum_log_n_ = 0.0;
  Eigen::MatrixXd sizes_;
  std::vector<Eigen::MatrixXd> design_;  // per cluster T x (p+q), [F U]
  std::vector<int> group_of_;
  std::vector<Group> groups_;
  Eigen::MatrixXd g_sum_;  // sum of [F U]'D[F U]
  // data
  Eigen::VectorXd a_sum_;
  double yy_sum_ = 0.0;
  double within_ss_ = 0.0;
  bool has_data_ = false;
};

}  // namespace swedge
