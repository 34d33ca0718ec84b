#include "swedge/design.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "swedge/error.hpp"

namespace swedge {

namespace {

constexpr double kRankTolerance = 1e-9;

std::string index_label(std::string_view name, int a) {
  return std::string(name) + "[" + std::to_string(a) + "]";
}

std::string index_label(std::string_view name, int a, int b) {
  return std::string(name) + "[" + std::to_string(a) + "," + std::to_string(b) + "]";
}

void require(bool condition, const std::string& message) {
  if (!condition) throw InvalidArgument(message);
}

}  // namespace

std::string_view to_string(FitModel model) {
  switch (model) {
    case FitModel::A: return "A";
    case FitModel::B: return "B";
    case FitModel::C: return "C";
  }
  return "?";
}

FitModel parse_fit_model(std::string_view name) {
  if (name == "A" || name == "a") return FitModel::A;
  if (name == "B" || name == "b") return FitModel::B;
  if (name == "C" || name == "c") return FitModel::C;
  throw InvalidArgument("unknown fit model '" + std::string(name) + "' (expected A, B or C)");
}

std::string_view to_string(DesignKind kind) {
  switch (kind) {
    case DesignKind::single: return "single";
    case DesignKind::concurrent: return "concurrent";
    case DesignKind::supplementation: return "supplementation";
    case DesignKind::factorial: return "factorial";
    case DesignKind::factorial_augmented: return "factorial-augmented";
    case DesignKind::custom: return "custom";
  }
  return "?";
}

DesignKind parse_design_kind(std::string_view name) {
  if (name == "single") return DesignKind::single;
  if (name == "concurrent") return DesignKind::concurrent;
  if (name == "supplementation") return DesignKind::supplementation;
  if (name == "factorial") return DesignKind::factorial;
  if (name == "factorial-augmented" || name == "factorial_augmented")
    return DesignKind::factorial_augmented;
  if (name == "custom") return DesignKind::custom;
  throw InvalidArgument("unknown design kind '" + std::string(name) + "'");
}

DesignLayout::DesignLayout(DesignKind kind, int periods, int interventions,
                           std::vector<std::vector<StartPeriod>> starts)
    : kind_(kind), periods_(periods), interventions_(interventions), starts_(std::move(starts)) {
  require(periods_ >= 2, "a layout needs at least 2 periods");
  require(interventions_ >= 1, "a layout needs at least 1 intervention");
  require(!starts_.empty(), "a layout needs at least 1 cluster");
  for (std::size_t i = 0; i < starts_.size(); ++i) {
    const auto& row = starts_[i];
    require(static_cast<int>(row.size()) == interventions_,
            "cluster " + std::to_string(i + 1) + " lists " + std::to_string(row.size()) +
                " start periods, expected " + std::to_string(interventions_));
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (!row[k]) continue;
      require(*row[k] >= 2 && *row[k] <= periods_,
              "cluster " + std::to_string(i + 1) + ", intervention " + std::to_string(k + 1) +
                  ": start period " + std::to_string(*row[k]) + " outside 2.." +
                  std::to_string(periods_) + " (period 1 is always control)");
    }
  }
}

void DesignLayout::check_indices(int intervention, int cluster, int period) const {
  if (intervention < 1 || intervention > interventions_ || cluster < 1 || cluster > clusters() ||
      period < 1 || period > periods_) {
    throw InvalidArgument("index out of range: k=" + std::to_string(intervention) +
                          " i=" + std::to_string(cluster) + " j=" + std::to_string(period));
  }
}

StartPeriod DesignLayout::start(int cluster, int intervention) const {
  check_indices(intervention, cluster, 1);
  return starts_[cluster - 1][intervention - 1];
}

bool DesignLayout::treated(int intervention, int cluster, int period) const {
  check_indices(intervention, cluster, period);
  const auto& s = starts_[cluster - 1][intervention - 1];
  return s && period >= *s;
}

int DesignLayout::exposure(int intervention, int cluster, int period) const {
  check_indices(intervention, cluster, period);
  const auto& s = starts_[cluster - 1][intervention - 1];
  return (s && period >= *s) ? period - *s + 1 : 0;
}

bool DesignLayout::covers_all_exposures() const {
  for (int k = 0; k < interventions_; ++k) {
    const bool earliest = std::any_of(starts_.begin(), starts_.end(),
                                      [k](const auto& row) { return row[k] && *row[k] == 2; });
    if (!earliest) return false;
  }
  return true;
}

namespace {

// Model A stays estimable with cluster effects treated as fixed, i.e. from
// within-cluster contrasts alone (the b -> 1/T limit of the GLS weights).
bool within_cluster_identifiable(const DesignLayout& layout) {
  const Eigen::MatrixXd d = stacked_fixed_design(layout, FitModel::A);
  const int T = layout.periods();
  const int I = layout.clusters();
  Eigen::MatrixXd full(d.rows(), d.cols() + I);
  full << d, Eigen::MatrixXd::Zero(d.rows(), I);
  for (int i = 0; i < I; ++i) full.block(i * T, d.cols() + i, T, 1).setOnes();
  Eigen::FullPivLU<Eigen::MatrixXd> lu(full);
  lu.setThreshold(kRankTolerance);
  // Period and cluster indicators share one redundancy.
  return lu.rank() == full.cols() - 1;
}

}  // namespace

DesignLayout build_layout(DesignKind kind, int periods, int interventions,
                          const LayoutOptions& options) {
  const int T = periods;
  const int m = interventions;
  const int o = options.offset;
  require(options.clusters_per_sequence >= 1, "clusters_per_sequence must be at least 1");

  std::vector<std::vector<StartPeriod>> seq;
  switch (kind) {
    case DesignKind::single:
      require(m == 1, "single layout has exactly one intervention");
      require(T >= 2, "single layout needs T >= 2");
      for (int i = 1; i <= T - 1; ++i) seq.push_back({i + 1});
      break;

    case DesignKind::concurrent:
      require(m >= 1, "concurrent layout needs m >= 1");
      require(T >= (m == 1 ? 2 : 3), "concurrent layout with several interventions needs T >= 3");
      for (int k = 0; k < m; ++k) {
        for (int l = 1; l <= T - 1; ++l) {
          std::vector<StartPeriod> row(m);
          row[k] = l + 1;
          seq.push_back(std::move(row));
        }
      }
      break;

    case DesignKind::supplementation:
      require(m == 2, "supplementation layout has exactly two interventions");
      require(T >= 3, "supplementation layout needs T >= 3");
      require(o >= 1 && o <= T - 2, "supplementation offset must lie in 1..T-2");
      for (int i = 1; i <= T - 1 - o; ++i) seq.push_back({i + 1, i + 1 + o});
      break;

    case DesignKind::factorial:
    case DesignKind::factorial_augmented: {
      require(m == 2, "factorial layout has exactly two interventions");
      require(T >= 3, "factorial layout needs T >= 3");
      require(o >= 1, "factorial offset must be at least 1");
      require(2 + o <= T, "factorial offset " + std::to_string(o) +
                              " starts the second intervention after period T in the first sequence");
      bool augment = kind == DesignKind::factorial_augmented;
      if (kind == DesignKind::factorial) {
        if (options.augment) {
          augment = *options.augment;
        } else {
          LayoutOptions plain = options;
          plain.augment = false;
          plain.clusters_per_sequence = 1;
          augment = !within_cluster_identifiable(build_layout(kind, T, m, plain));
        }
      }
      if (!augment) {
        for (int s = 2; s + o <= T; ++s) {
          seq.push_back({s, s + o});
          seq.push_back({s + o, s});
        }
        break;
      }
      kind = DesignKind::factorial_augmented;
      for (int s = 2; s <= T; ++s) {
        const StartPeriod second = s + o <= T ? StartPeriod(s + o) : std::nullopt;
        seq.push_back({s, second});
      }
      for (int s = T; s >= 2; --s) {
        const StartPeriod second = s + o <= T ? StartPeriod(s + o) : std::nullopt;
        seq.push_back({second, s});
      }
      break;
    }

    case DesignKind::custom:
      throw InvalidArgument("custom layouts are constructed from an explicit start map");
  }

  std::vector<std::vector<StartPeriod>> starts;
  starts.reserve(seq.size() * options.clusters_per_sequence);
  for (const auto& row : seq)
    for (int r = 0; r < options.clusters_per_sequence; ++r) starts.push_back(row);
  return DesignLayout(kind, T, m, std::move(starts));
}

int exposure_time(const DesignLayout& layout, int intervention, int cluster, int period) {
  return layout.exposure(intervention, cluster, period);
}

Eigen::MatrixXd TreatmentMatrices::exposure_block(int intervention) const {
  const auto T = x.rows();
  if (intervention < 1 || intervention > x.cols())
    throw InvalidArgument("intervention index out of range");
  return z.middleCols((intervention - 1) * (T - 1), T - 1);
}

std::vector<TreatmentMatrices> matrices(const DesignLayout& layout) {
  const int T = layout.periods();
  const int m = layout.interventions();
  std::vector<TreatmentMatrices> out;
  out.reserve(layout.clusters());
  for (int i = 1; i <= layout.clusters(); ++i) {
    TreatmentMatrices tm{Eigen::MatrixXd::Zero(T, m), Eigen::MatrixXd::Zero(T, m * (T - 1))};
    for (int k = 1; k <= m; ++k) {
      for (int j = 1; j <= T; ++j) {
        const int e = layout.exposure(k, i, j);
        if (e == 0) continue;
        tm.x(j - 1, k - 1) = 1.0;
        tm.z(j - 1, (k - 1) * (T - 1) + e - 1) = 1.0;
      }
    }
    out.push_back(std::move(tm));
  }
  return out;
}

Eigen::MatrixXd stacked_fixed_design(const DesignLayout& layout, FitModel model) {
  const int T = layout.periods();
  const int m = layout.interventions();
  const int treat_cols = model == FitModel::B ? m * (T - 1) : m;
  Eigen::MatrixXd d =
      Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(layout.clusters()) * T, T + treat_cols);
  const auto tms = matrices(layout);
  for (int i = 0; i < layout.clusters(); ++i) {
    auto rows = d.middleRows(static_cast<Eigen::Index>(i) * T, T);
    rows.leftCols(T).setIdentity();
    rows.rightCols(treat_cols) = model == FitModel::B ? tms[i].z : tms[i].x;
  }
  return d;
}

std::vector<std::string> fixed_effect_labels(const DesignLayout& layout, FitModel model) {
  const int T = layout.periods();
  const int m = layout.interventions();
  std::vector<std::string> labels;
  for (int j = 1; j <= T; ++j) labels.push_back(index_label("beta", j));
  for (int k = 1; k <= m; ++k) {
    switch (model) {
      case FitModel::A: labels.push_back(index_label("theta", k)); break;
      case FitModel::C: labels.push_back(index_label("mu", k)); break;
      case FitModel::B:
        for (int e = 1; e <= T - 1; ++e) labels.push_back(index_label("delta", k, e));
        break;
    }
  }
  return labels;
}

IdentifiabilityReport check_identifiability(const DesignLayout& layout, FitModel model) {
  const Eigen::MatrixXd d = stacked_fixed_design(layout, model);
  const auto labels = fixed_effect_labels(layout, model);
  const int T = layout.periods();

  Eigen::FullPivLU<Eigen::MatrixXd> lu(d);
  lu.setThreshold(kRankTolerance);

  IdentifiabilityReport report;
  report.columns = static_cast<int>(d.cols());
  report.rank = static_cast<int>(lu.rank());
  report.identifiable = report.rank == report.columns;
  if (!report.identifiable) {
    report.null_space = lu.kernel();
    for (Eigen::Index c = T; c < d.cols(); ++c) {
      if (report.null_space.row(c).cwiseAbs().maxCoeff() > 1e-8)
        report.non_estimable.push_back(labels[c]);
    }
  } else {
    report.null_space = Eigen::MatrixXd(d.cols(), 0);
  }

  // A combination c'b is estimable iff c is orthogonal to the null space.
  std::set<std::vector<int>> seen;
  for (Eigen::Index r = 0; r < d.rows(); ++r) {
    std::vector<int> cols;
    for (Eigen::Index c = T; c < d.cols(); ++c)
      if (d(r, c) != 0.0) cols.push_back(static_cast<int>(c));
    if (cols.empty() || !seen.insert(cols).second) continue;
    Eigen::VectorXd comb = Eigen::VectorXd::Zero(d.cols());
    for (int c : cols) comb(c) = 1.0;
    const bool estimable = report.null_space.cols() == 0 ||
                           (report.null_space.transpose() * comb).cwiseAbs().maxCoeff() < 1e-8;
    if (!estimable) continue;
    std::string name;
    for (int c : cols) name += (name.empty() ? "" : "+") + labels[c];
    report.estimable_combinations.push_back(std::move(name));
  }
  return report;
}

std::string IdentifiabilityReport::summary() const {
  std::ostringstream os;
  os << (identifiable ? "identifiable" : "not identifiable") << " (rank " << rank << " of "
     << columns << " columns)";
  if (!identifiable) {
    os << "; not estimable:";
    for (const auto& s : non_estimable) os << ' ' << s;
    os << "; estimable combinations:";
    for (const auto& s : estimable_combinations) os << ' ' << s;
  }
  return os.str();
}

void require_identifiable(const DesignLayout& layout, FitModel model) {
  const auto report = check_identifiability(layout, model);
  if (!report.identifiable) {
    throw IdentifiabilityError("model " + std::string(to_string(model)) + " on " +
                               std::string(to_string(layout.kind())) + " layout is " +
                               report.summary());
  }
}

std::string cell_label(const DesignLayout& layout, int cluster, int period) {
  std::string label;
  for (int k = 1; k <= layout.interventions(); ++k) {
    const int e = layout.exposure(k, cluster, period);
    if (e == 0) continue;
    if (!label.empty()) label += "+";
    label += "d";
    if (layout.interventions() > 1) label += std::to_string(k) + ",";
    label += std::to_string(e);
  }
  return label.empty() ? "0" : label;
}

}  // namespace swedge
