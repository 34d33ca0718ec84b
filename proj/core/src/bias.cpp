#include "swedge/bias.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "swedge/error.hpp"

namespace swedge {

namespace {

constexpr double kDegenerate = 1e-12;

std::string describe(double b, int T) {
  std::ostringstream os;
  os.precision(17);
  os << "b=" << b << ", T=" << T;
  return os.str();
}

// Sum over clusters of A'(I - bJ)B.
Eigen::MatrixXd weighted_cross(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b_mat, double b) {
  return a.transpose() * b_mat - b * (a.colwise().sum().transpose() * b_mat.colwise().sum());
}

}  // namespace

double design_scalar(const VarianceComponents& vc, double n, int periods) {
  vc.validate();
  if (!(n >= 1.0)) throw InvalidArgument("cluster-period size must be at least 1");
  if (periods < 1) throw InvalidArgument("T must be positive");
  return vc.cluster / (periods * vc.cluster + vc.residual / n);
}

std::string_view to_string(HProvenance provenance) {
  switch (provenance) {
    case HProvenance::general: return "general";
    case HProvenance::concurrent_closed_form: return "concurrent-closed-form";
    case HProvenance::factorial_block: return "factorial-block";
  }
  return "?";
}

WeightMatrix H_general(const DesignLayout& layout, const VarianceComponents& vc, double n) {
  return H_general(layout, design_scalar(vc, n, layout.periods()));
}

WeightMatrix H_general(const DesignLayout& layout, double b) {
  if (!std::isfinite(b)) throw InvalidArgument("b must be finite");
  const int T = layout.periods();
  const int m = layout.interventions();
  const auto tms = matrices(layout);

  // With a common Sigma^{-1} proportional to (I - bJ) the period effects
  // profile out as (1/I) Xsum'(I - bJ) Xsum, so the inverse of the summed
  // precision is never formed.
  Eigen::MatrixXd wxx = Eigen::MatrixXd::Zero(m, m);
  Eigen::MatrixXd wxz = Eigen::MatrixXd::Zero(m, m * (T - 1));
  Eigen::MatrixXd xsum = Eigen::MatrixXd::Zero(T, m);
  Eigen::MatrixXd zsum = Eigen::MatrixXd::Zero(T, m * (T - 1));
  for (const auto& tm : tms) {
    wxx += weighted_cross(tm.x, tm.x, b);
    wxz += weighted_cross(tm.x, tm.z, b);
    xsum += tm.x;
    zsum += tm.z;
  }
  const double clusters = layout.clusters();
  const Eigen::MatrixXd lhs = wxx - weighted_cross(xsum, xsum, b) / clusters;
  const Eigen::MatrixXd rhs = wxz - weighted_cross(xsum, zsum, b) / clusters;

  Eigen::FullPivLU<Eigen::MatrixXd> lu(lhs);
  lu.setThreshold(1e-10);
  const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(lhs).singularValues();
  // judged against the unprofiled block, since lhs can cancel to rounding noise
  const double scale = std::max(wxx.norm(), 1.0);
  const bool ill = sv(m - 1) < 1e-9 * scale;
  if (lu.rank() < m || ill) {
    throw NumericalError("singular normal matrix for the constant-effect estimator on the " +
                         std::string(to_string(layout.kind())) + " layout with " +
                         std::to_string(layout.clusters()) + " clusters (" + describe(b, T) + ")");
  }

  WeightMatrix out;
  out.h = lu.solve(rhs);
  out.periods = T;
  out.interventions = m;
  out.b = b;
  const bool factorial = layout.kind() == DesignKind::factorial ||
                         layout.kind() == DesignKind::factorial_augmented;
  out.provenance = factorial ? HProvenance::factorial_block : HProvenance::general;
  return out;
}

ConcurrentScalars concurrent_scalars(int periods, int interventions, double b) {
  const double T = periods;
  const double m = interventions;
  if (periods < 3) throw InvalidArgument("closed form needs T >= 3");
  if (interventions < 1) throw InvalidArgument("closed form needs m >= 1");
  ConcurrentScalars s;
  s.c = T * (T - 1) * (3 + b - 2 * b * T) / 6;
  s.d = T * (4 * T - 2 - 3 * b * T * (T - 1)) / (12 * m);
  s.g = T * (T - 2) * (2 + b - b * T) / 12;
  s.r.resize(periods - 1);
  s.v.resize(periods - 1);
  for (int j = 1; j <= periods - 1; ++j) {
    s.r(j - 1) = (T - j) * (1 + b * (1 - T - j) / 2);
    s.v(j - 1) = (T - j) * (1 - b * T + j / (T - 1)) / (2 * m);
  }
  return s;
}

WeightMatrix H_concurrent_closed(int periods, int interventions, double b) {
  const auto s = concurrent_scalars(periods, interventions, b);
  const double scale = static_cast<double>(periods) * periods;
  if (std::abs(s.c) < kDegenerate * scale || std::abs(s.g) < kDegenerate * scale) {
    throw NumericalError("closed-form weights degenerate (c=" + std::to_string(s.c) +
                         ", g=" + std::to_string(s.g) + ") at " + describe(b, periods));
  }
  const int m = interventions;
  const int L = periods - 1;
  WeightMatrix out;
  out.h.resize(m, m * L);
  for (int k = 0; k < m; ++k) {
    for (int k2 = 0; k2 < m; ++k2) {
      const double own = (k == k2 ? 1.0 : 0.0) + s.d / s.g;
      out.h.block(k, k2 * L, 1, L) = (own / s.c) * s.r.transpose() - s.v.transpose() / s.g;
    }
  }
  out.provenance = HProvenance::concurrent_closed_form;
  out.periods = periods;
  out.interventions = m;
  out.b = b;
  return out;
}

SingleWeights single_intervention_weights(int periods, double b) {
  if (periods < 3) throw InvalidArgument("single-intervention weights need T >= 3");
  const double T = periods;
  SingleWeights out;
  out.w.resize(periods - 1);
  for (int j = 1; j <= periods - 1; ++j)
    out.w(j - 1) = (T - j) * ((b - 1 - b * T) * j + (1 + b) * (T - 1));
  out.denom = T * (T - 1) * (T - 2) * (2 + b - b * T);
  if (std::abs(out.denom) < kDegenerate * T * T * T)
    throw NumericalError("single-intervention weights degenerate at " + describe(b, periods));
  return out;
}

ExpectedEstimate expected_constant_estimate(const Eigen::MatrixXd& h, const EffectCurve& curve) {
  const Eigen::VectorXd delta = curve.stacked();
  if (h.cols() != delta.size() || h.rows() != curve.interventions()) {
    throw InvalidArgument("weight matrix is " + std::to_string(h.rows()) + "x" +
                          std::to_string(h.cols()) + " but the curve has " +
                          std::to_string(curve.interventions()) + " interventions and " +
                          std::to_string(delta.size()) + " effects");
  }
  ExpectedEstimate out;
  out.expected = h * delta;
  out.truth = curve.realized_estimand();
  out.bias = out.expected - out.truth;
  return out;
}

ExpectedEstimate expected_constant_estimate(const WeightMatrix& h, const EffectCurve& curve) {
  return expected_constant_estimate(h.h, curve);
}

double row_sum_deviation(const WeightMatrix& h) {
  const int m = h.interventions;
  const int L = h.periods - 1;
  double worst = 0.0;
  for (int k = 0; k < m; ++k)
    for (int k2 = 0; k2 < m; ++k2) {
      const double sum = h.h.block(k, k2 * L, 1, L).sum();
      worst = std::max(worst, std::abs(sum - (k == k2 ? 1.0 : 0.0)));
    }
  return worst;
}

double block_symmetry_deviation(const WeightMatrix& h) {
  if (h.interventions != 2) throw InvalidArgument("block symmetry applies to two interventions");
  const int L = h.periods - 1;
  const double a = (h.h.block(0, 0, 1, L) - h.h.block(1, L, 1, L)).cwiseAbs().maxCoeff();
  const double c = (h.h.block(0, L, 1, L) - h.h.block(1, 0, 1, L)).cwiseAbs().maxCoeff();
  return std::max(a, c);
}

std::vector<BiasRow> bias_curve_table(const std::vector<NamedLayout>& designs,
                                      const std::vector<double>& b_grid,
                                      const std::vector<NamedCurve>& curves) {
  std::vector<BiasRow> rows;
  for (const auto& design : designs) {
    for (double b : b_grid) {
      const WeightMatrix h = H_general(design.layout, b);
      for (const auto& curve : curves) {
        if (curve.curve.periods() != design.layout.periods() ||
            curve.curve.interventions() != design.layout.interventions()) {
          throw InvalidArgument("curve '" + curve.name + "' does not match design '" +
                                design.name + "'");
        }
        const auto e = expected_constant_estimate(h, curve.curve);
        for (int k = 0; k < e.expected.size(); ++k) {
          rows.push_back({design.name, curve.name, b, k + 1, e.truth(k), e.expected(k), e.bias(k)});
        }
      }
    }
  }
  return rows;
}

}  // namespace swedge
