#include "swedge/simulate.hpp"

#include <cmath>
#include <string>

#include "swedge/error.hpp"

namespace swedge {

Eigen::VectorXd default_period_effects(int periods) {
  if (periods < 1) throw InvalidArgument("T must be positive");
  if (periods == 1) return Eigen::VectorXd::Constant(1, 0.1);
  return Eigen::VectorXd::LinSpaced(periods, 0.1, 0.5);
}

void SimulationConfig::validate() const {
  vc.validate();
  if (beta.size() != layout.periods())
    throw InvalidArgument("beta has " + std::to_string(beta.size()) + " entries, expected T = " +
                          std::to_string(layout.periods()));
  if (!beta.allFinite()) throw InvalidArgument("beta must be finite");
  if (curve.periods() != layout.periods() || curve.interventions() != layout.interventions())
    throw InvalidArgument("effect curve does not match the layout (T and m must agree)");
  if (sizes.size() == 0) {
    if (n < 1) throw InvalidArgument("cluster-period size n must be at least 1");
  } else {
    if (sizes.rows() != layout.clusters() || sizes.cols() != layout.periods())
      throw InvalidArgument("cluster-period size table must be I x T");
    if (sizes.minCoeff() < 1) throw InvalidArgument("every cluster-period needs at least 1 individual");
  }
}

Eigen::MatrixXi SimulationConfig::cell_sizes() const {
  if (sizes.size() != 0) return sizes;
  return Eigen::MatrixXi::Constant(layout.clusters(), layout.periods(), n);
}

TrialDataset::TrialDataset(Eigen::MatrixXi sizes, std::vector<Eigen::MatrixXi> x,
                           std::vector<Eigen::MatrixXi> e, std::vector<double> y)
    : sizes_(std::move(sizes)), x_(std::move(x)), e_(std::move(e)), y_(std::move(y)) {
  if (sizes_.size() == 0) throw InvalidArgument("dataset has no cells");
  if (sizes_.minCoeff() < 1) throw InvalidArgument("every cluster-period needs at least 1 observation");
  if (x_.size() != e_.size() || x_.empty())
    throw InvalidArgument("dataset needs arm and exposure indicators for each intervention");
  for (std::size_t k = 0; k < x_.size(); ++k) {
    if (x_[k].rows() != sizes_.rows() || x_[k].cols() != sizes_.cols() ||
        e_[k].rows() != sizes_.rows() || e_[k].cols() != sizes_.cols())
      throw InvalidArgument("arm/exposure tables must be I x T");
  }
  build_offsets();
  if (offsets_.back() != y_.size())
    throw InvalidArgument("outcome count " + std::to_string(y_.size()) +
                          " does not match the cell sizes (" + std::to_string(offsets_.back()) + ")");
}

TrialDataset::TrialDataset(const DesignLayout& layout, Eigen::MatrixXi sizes, std::vector<double> y) {
  const int I = layout.clusters();
  const int T = layout.periods();
  std::vector<Eigen::MatrixXi> x(layout.interventions(), Eigen::MatrixXi::Zero(I, T));
  std::vector<Eigen::MatrixXi> e(layout.interventions(), Eigen::MatrixXi::Zero(I, T));
  for (int k = 0; k < layout.interventions(); ++k)
    for (int i = 0; i < I; ++i)
      for (int j = 0; j < T; ++j) {
        e[k](i, j) = layout.exposure(k + 1, i + 1, j + 1);
        x[k](i, j) = e[k](i, j) > 0 ? 1 : 0;
      }
  *this = TrialDataset(std::move(sizes), std::move(x), std::move(e), std::move(y));
}

void TrialDataset::build_offsets() {
  offsets_.assign(static_cast<std::size_t>(sizes_.size()) + 1, 0);
  for (int i = 0; i < sizes_.rows(); ++i)
    for (int j = 0; j < sizes_.cols(); ++j)
      offsets_[cell_index(i, j) + 1] = offsets_[cell_index(i, j)] + sizes_(i, j);
}

std::vector<Record> TrialDataset::records() const {
  std::vector<Record> out;
  out.reserve(y_.size());
  for (int i = 0; i < clusters(); ++i)
    for (int j = 0; j < periods(); ++j) {
      const double* y = cell(i, j);
      for (int s = 0; s < sizes_(i, j); ++s) {
        Record r{i + 1, j + 1, s + 1, {}, {}, y[s]};
        for (int k = 0; k < interventions(); ++k) {
          r.x.push_back(x_[k](i, j));
          r.e.push_back(e_[k](i, j));
        }
        out.push_back(std::move(r));
      }
    }
  return out;
}

void TrialDataset::check_against(const DesignLayout& layout) const {
  if (clusters() != layout.clusters() || periods() != layout.periods() ||
      interventions() != layout.interventions()) {
    throw InvalidArgument("dataset has " + std::to_string(clusters()) + " clusters, " +
                          std::to_string(periods()) + " periods and " +
                          std::to_string(interventions()) + " interventions; layout has " +
                          std::to_string(layout.clusters()) + ", " + std::to_string(layout.periods()) +
                          " and " + std::to_string(layout.interventions()));
  }
  for (int k = 0; k < interventions(); ++k)
    for (int i = 0; i < clusters(); ++i)
      for (int j = 0; j < periods(); ++j) {
        const int e = layout.exposure(k + 1, i + 1, j + 1);
        if (e_[k](i, j) != e || x_[k](i, j) != (e > 0 ? 1 : 0)) {
          throw InvalidArgument("cluster " + std::to_string(i + 1) + ", period " +
                                std::to_string(j + 1) + ": intervention " + std::to_string(k + 1) +
                                " indicators (x=" + std::to_string(x_[k](i, j)) +
                                ", e=" + std::to_string(e_[k](i, j)) +
                                ") disagree with the layout (e=" + std::to_string(e) + ")");
        }
      }
}

void TrialDataset::scale(double factor) {
  for (double& v : y_) v *= factor;
}

bool TrialDataset::operator==(const TrialDataset& other) const {
  return sizes_ == other.sizes_ && x_ == other.x_ && e_ == other.e_ && y_ == other.y_;
}

TrialDataset simulate(const SimulationConfig& config, std::uint64_t replicate) {
  config.validate();
  const auto& layout = config.layout;
  const int I = layout.clusters();
  const int T = layout.periods();
  const int m = layout.interventions();
  const Eigen::MatrixXi sizes = config.cell_sizes();

  RandomStream rng(config.seed, replicate, 0);
  const double sd_cluster = std::sqrt(config.vc.cluster);
  const double sd_resid = std::sqrt(config.vc.residual);
  Eigen::VectorXd alpha(I);
  for (int i = 0; i < I; ++i) alpha(i) = sd_cluster * rng.normal();

  std::vector<double> y;
  y.reserve(static_cast<std::size_t>(sizes.sum()));
  for (int i = 0; i < I; ++i) {
    for (int j = 0; j < T; ++j) {
      double mu = config.beta(j) + alpha(i);
      for (int k = 1; k <= m; ++k) mu += config.curve.delta(k, layout.exposure(k, i + 1, j + 1));
      for (int s = 0; s < sizes(i, j); ++s) y.push_back(mu + sd_resid * rng.normal());
    }
  }
  return TrialDataset(layout, sizes, std::move(y));
}

void CellMeans::scale(double factor) {
  mean *= factor;
  ss *= factor * factor;
  within_ss *= factor * factor;
}

CellMeans cluster_period_means(const TrialDataset& data) {
  const int I = data.clusters();
  const int T = data.periods();
  CellMeans out;
  out.mean.resize(I, T);
  out.n = data.sizes().cast<double>();
  out.ss.resize(I, T);
  for (int i = 0; i < I; ++i)
    for (int j = 0; j < T; ++j) {
      const double* y = data.cell(i, j);
      const int n = data.size(i, j);
      double sum = 0.0;
      for (int s = 0; s < n; ++s) sum += y[s];
      const double mean = sum / n;
      double ss = 0.0;
      for (int s = 0; s < n; ++s) ss += (y[s] - mean) * (y[s] - mean);
      out.mean(i, j) = mean;
      out.ss(i, j) = ss;
    }
  out.within_ss = out.ss.sum();
  out.observations = out.n.sum();
  return out;
}

void resample_means(const TrialDataset& data, RandomStream& rng, CellMeans& out) {
  const int I = data.clusters();
  const int T = data.periods();
  if (out.mean.rows() != I || out.mean.cols() != T) {
    out.mean.resize(I, T);
    out.ss.resize(I, T);
    out.n = data.sizes().cast<double>();
    out.observations = out.n.sum();
  }
  std::vector<double> draw;
  for (int i = 0; i < I; ++i)
    for (int j = 0; j < T; ++j) {
      const double* y = data.cell(i, j);
      const auto n = static_cast<std::uint32_t>(data.size(i, j));
      draw.resize(n);
      double sum = 0.0;
      for (std::uint32_t s = 0; s < n; ++s) {
        draw[s] = y[rng.below(n)];
        sum += draw[s];
      }
      const double mean = sum / n;
      double ss = 0.0;
      for (double v : draw) ss += (v - mean) * (v - mean);
      out.mean(i, j) = mean;
      out.ss(i, j) = ss;
    }
  out.within_ss = out.ss.sum();
}

CellMeans resample_means(const TrialDataset& data, RandomStream& rng) {
  CellMeans out;
  resample_means(data, rng, out);
  return out;
}

}  // namespace swedge
