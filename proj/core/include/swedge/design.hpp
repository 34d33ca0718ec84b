#pragma once

// Stepped-wedge layouts with one or more interventions.
//
// Cluster, intervention and period indices are 1-based in every accessor that
// takes them as separate integers, matching the usual (k, i, j) notation.
// Matrix rows/columns returned as Eigen objects are 0-based as usual.

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "swedge/types.hpp"

namespace swedge {

enum class DesignKind {
  single,
  concurrent,
  supplementation,
  factorial,
  factorial_augmented,
  custom
};

std::string_view to_string(DesignKind kind);
DesignKind parse_design_kind(std::string_view name);

/// First period in which an intervention is active in a cluster; empty when
/// the cluster never receives it.
using StartPeriod = std::optional<int>;

struct LayoutOptions {
  /// Periods between the first and second intervention start in a cluster
  /// (factorial and supplementation kinds). Offset o means the second
  /// intervention begins at exposure period o + 1 of the first.
  int offset = 1;
  /// Clusters sharing each sequence.
  int clusters_per_sequence = 1;
  /// Factorial only: add the sequences whose second start would fall after
  /// period T as single-intervention sequences. Unset means augment exactly
  /// when the plain layout cannot identify the constant-effect model from
  /// within-cluster contrasts (e.g. T = 3).
  std::optional<bool> augment;
};

/// Cluster-by-period treatment assignment. Every cluster starts in control
/// and an intervention, once started, stays on through the last period.
class DesignLayout {
 public:
  /// `starts[i][k]` is the start period of intervention k+1 in cluster i+1.
  /// Throws InvalidArgument when a start lies outside 2..periods or a row has
  /// the wrong width.
  DesignLayout(DesignKind kind, int periods, int interventions,
               std::vector<std::vector<StartPeriod>> starts);

  DesignKind kind() const noexcept { return kind_; }
  int periods() const noexcept { return periods_; }
  int interventions() const noexcept { return interventions_; }
  int clusters() const noexcept { return static_cast<int>(starts_.size()); }

  StartPeriod start(int cluster, int intervention) const;
  const std::vector<std::vector<StartPeriod>>& starts() const noexcept { return starts_; }

  /// x_{kij}
  bool treated(int intervention, int cluster, int period) const;
  /// e_{kij}: number of periods up to and including `period` under the
  /// intervention.
  int exposure(int intervention, int cluster, int period) const;

  /// True when some cluster is under at least one intervention at each
  /// exposure time 1..T-1 of every intervention.
  bool covers_all_exposures() const;

  bool operator==(const DesignLayout& other) const = default;

 private:
  void check_indices(int intervention, int cluster, int period) const;

  DesignKind kind_;
  int periods_;
  int interventions_;
  std::vector<std::vector<StartPeriod>> starts_;
};

/// Builds one of the standard layouts.
///   single:               T-1 clusters, cluster i starts at period i+1 (m = 1)
///   concurrent:           m(T-1) clusters; cluster i gets intervention k iff
///                         (k-1)(T-1)+1 <= i <= k(T-1)
///   supplementation:      T-1-o clusters; cluster i starts intervention 1 at
///                         i+1 and adds intervention 2 at i+1+o (m = 2)
///   factorial:            2(T-1-o) clusters; sequences with first start
///                         s = 2..T-o, in A-first/B-first pairs (m = 2)
///   factorial_augmented:  2(T-1) clusters; first start s = 2..T, the second
///                         intervention starts at s+o when s+o <= T
/// Plain factorial pairs are interleaved by start period, A-first before
/// B-first. The augmented layout lists the A-first sequences by increasing
/// start and then their mirror images in reverse, so cluster I+1-i is cluster
/// i with the interventions swapped.
DesignLayout build_layout(DesignKind kind, int periods, int interventions,
                          const LayoutOptions& options = {});

/// e_{kij} (1-based indices).
int exposure_time(const DesignLayout& layout, int intervention, int cluster, int period);

/// Per-cluster treatment indicator X_i (T x m) and exposure indicator
/// Z_i = (Z_{1,i} ... Z_{m,i}) (T x m(T-1)).
struct TreatmentMatrices {
  Eigen::MatrixXd x;
  Eigen::MatrixXd z;

  /// Z_{k,i}, the T x (T-1) block for intervention k (1-based).
  Eigen::MatrixXd exposure_block(int intervention) const;
};

std::vector<TreatmentMatrices> matrices(const DesignLayout& layout);

/// Fixed-effect design on the cluster-period cells, rows ordered cluster-major
/// (cluster 1 periods 1..T, cluster 2, ...). Columns are the T period
/// indicators followed by the treatment columns of the model: X for A and C,
/// Z for B.
Eigen::MatrixXd stacked_fixed_design(const DesignLayout& layout, FitModel model);

/// Column labels matching stacked_fixed_design, e.g. "beta[3]", "theta[2]",
/// "delta[1,4]".
std::vector<std::string> fixed_effect_labels(const DesignLayout& layout, FitModel model);

struct IdentifiabilityReport {
  bool identifiable = false;
  int rank = 0;
  int columns = 0;
  /// Treatment coordinates that are not estimable on their own.
  std::vector<std::string> non_estimable;
  /// Treatment combinations seen in the layout's cells (e.g.
  /// "delta[1,2]+delta[2,1]") that are estimable.
  std::vector<std::string> estimable_combinations;
  /// Basis of the null space of the stacked design, one column per direction.
  Eigen::MatrixXd null_space;

  std::string summary() const;
};

/// Rank analysis of stacked_fixed_design. Model C shares Model A's fixed part.
IdentifiabilityReport check_identifiability(const DesignLayout& layout, FitModel model);

/// Throws IdentifiabilityError (with the estimable combinations in the
/// message) unless the model is identifiable on the layout.
void require_identifiable(const DesignLayout& layout, FitModel model);

/// Human-readable cell label: "0", "d1,2", "d1,2+d2,1". Intervention index is
/// omitted for single-intervention layouts ("d3").
std::string cell_label(const DesignLayout& layout, int cluster, int period);

}  // namespace swedge
