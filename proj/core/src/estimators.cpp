#include "swedge/estimators.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/special_functions/erf.hpp>

#include "swedge/error.hpp"
#include "swedge/rng.hpp"

namespace swedge {

namespace {

std::string variance_name(FitModel model, int index) {
  if (index == 0) return "sigma2_alpha";
  (void)model;
  return "sigma2_gamma[" + std::to_string(index) + "]";
}

const DesignLayout& checked(const DesignLayout& layout, FitModel model, bool check) {
  if (check) require_identifiable(layout, model);
  return layout;
}

}  // namespace

std::string_view to_string(Method method) { return method == Method::reml ? "REML" : "ML"; }

Eigen::VectorXd FitResult::estimates() const {
  Eigen::VectorXd out(estimands.size());
  for (std::size_t k = 0; k < estimands.size(); ++k) out(k) = estimands[k].estimate;
  return out;
}

Eigen::MatrixXd estimand_contrasts(FitModel model, int periods, int interventions) {
  const int T = periods;
  const int L = T - 1;
  const int p = T + (model == FitModel::B ? interventions * L : interventions);
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(interventions, p);
  for (int k = 0; k < interventions; ++k) {
    if (model == FitModel::B)
      c.block(k, T + k * L, 1, L).setConstant(1.0 / L);
    else
      c(k, T + k) = 1.0;
  }
  return c;
}

ModelFitter::ModelFitter(const DesignLayout& layout, FitModel model, const Eigen::MatrixXd& sizes,
                         FitOptions options)
    : model_(model),
      periods_(layout.periods()),
      interventions_(layout.interventions()),
      options_(std::move(options)),
      engine_(checked(layout, model, options_.check_identifiability), model, sizes),
      contrasts_(estimand_contrasts(model, layout.periods(), layout.interventions())) {
  const auto labels = fixed_effect_labels(layout, model);
  labels_.assign(labels.begin() + periods_, labels.end());
}

FitResult ModelFitter::finish(const Eigen::VectorXd& psi, double sigma2, bool profiled) {
  const MeansSolution sol = engine_.solve(psi, options_.method);
  const double s2 = profiled ? sol.sigma2_hat : sigma2;
  FitResult fit;
  fit.model = model_;
  fit.method = options_.method;
  fit.known_variance = !profiled;
  fit.beta = sol.fixed.head(periods_);
  fit.effects = sol.fixed.tail(sol.fixed.size() - periods_);
  fit.effect_labels = labels_;
  fit.random_effects = sol.random;
  fit.vc.residual = s2;
  fit.vc.cluster = psi(0) * s2;
  if (model_ == FitModel::C)
    for (int k = 0; k < interventions_; ++k) fit.vc.treatment.push_back(psi(1 + k) * s2);
  fit.cov = s2 * sol.fixed_cov_rel;
  fit.cov = 0.5 * (fit.cov + fit.cov.transpose());
  const Eigen::VectorXd est = contrasts_ * sol.fixed;
  const Eigen::MatrixXd var = contrasts_ * fit.cov * contrasts_.transpose();
  for (int k = 0; k < interventions_; ++k) {
    Estimand e;
    e.intervention = k + 1;
    e.estimate = est(k);
    e.se = std::sqrt(std::max(var(k, k), 0.0));
    fit.estimands.push_back(e);
  }
  fit.log_psi = psi.array().max(kVarianceLowerBound).log();
  return fit;
}

FitResult ModelFitter::fit(const CellMeans& means, const Eigen::VectorXd* warm_start) {
  engine_.set_data(means);
  const int np = engine_.parameter_count();
  const double lo = std::log(kVarianceLowerBound);
  const double hi = std::log(kVarianceUpperBound);
  const Eigen::VectorXd lower = Eigen::VectorXd::Constant(np, lo);
  const Eigen::VectorXd upper = Eigen::VectorXd::Constant(np, hi);
  Eigen::VectorXd start = Eigen::VectorXd::Constant(np, std::log(0.1));
  if (warm_start) {
    start = *warm_start;
  } else if (options_.start) {
    start = *options_.start;
  }
  if (start.size() != np)
    throw InvalidArgument("start vector has " + std::to_string(start.size()) + " entries, expected " +
                          std::to_string(np));

  const Method method = options_.method;
  const Objective f = [this, method](const Eigen::VectorXd& x) {
    return engine_.deviance(Eigen::VectorXd(x.array().exp()), method);
  };
  OptimizerResult opt = minimize_box(f, start, lower, upper, options_.optimizer);
  if (!std::isfinite(opt.value))
    throw NumericalError("likelihood is not finite anywhere along the optimizer path");

  // Parameters drifting toward zero stop short of the bound on a flat
  // objective; pin them when that costs nothing.
  for (int i = 0; i < np; ++i) {
    if (opt.x(i) > lo && opt.x(i) < std::log(1e-4)) {
      Eigen::VectorXd x = opt.x;
      x(i) = lo;
      const double fx = f(x);
      if (fx <= opt.value + options_.snap_tolerance) {
        opt.x = x;
        opt.value = std::min(opt.value, fx);
      }
    }
  }

  FitResult fit = finish(opt.x.array().exp(), 0.0, true);
  fit.loglik = -0.5 * opt.value;
  fit.log_psi = opt.x;
  fit.convergence.converged = opt.converged;
  fit.convergence.iterations = opt.iterations;
  fit.convergence.evaluations = opt.evaluations;
  fit.convergence.restarts = opt.restarts_used;
  fit.convergence.gradient_norm = opt.gradient_norm;
  for (int i = 0; i < np; ++i)
    if (opt.x(i) <= lo + 1e-9) fit.convergence.boundary.push_back(variance_name(model_, i));
  return fit;
}

FitResult ModelFitter::fit_known(const CellMeans& means, const VarianceComponents& vc) {
  vc.validate();
  engine_.set_data(means);
  Eigen::VectorXd psi(engine_.parameter_count());
  psi(0) = vc.cluster / vc.residual;
  if (model_ == FitModel::C) {
    if (static_cast<int>(vc.treatment.size()) != interventions_)
      throw InvalidArgument("Model C needs one treatment variance per intervention");
    for (int k = 0; k < interventions_; ++k) psi(1 + k) = vc.treatment[k] / vc.residual;
  }
  FitResult fit = finish(psi, vc.residual, false);
  fit.vc = vc;
  fit.loglik = -0.5 * engine_.deviance(vc, options_.method);
  return fit;
}

FitResult fit_gls(const CellMeans& means, const DesignLayout& layout, FitModel model,
                  const VarianceComponents& vc) {
  ModelFitter fitter(layout, model, means.n);
  return fitter.fit_known(means, vc);
}

FitResult fit_reml(const TrialDataset& data, const DesignLayout& layout, FitModel model,
                   const FitOptions& options) {
  data.check_against(layout);
  return fit_reml(cluster_period_means(data), layout, model, options);
}

FitResult fit_reml(const CellMeans& means, const DesignLayout& layout, FitModel model,
                   const FitOptions& options) {
  ModelFitter fitter(layout, model, means.n, options);
  return fitter.fit(means);
}

void set_wald_intervals(FitResult& fit, double level) {
  if (!(level > 0.0 && level < 1.0)) throw InvalidArgument("confidence level must lie in (0, 1)");
  const double z = std::sqrt(2.0) * boost::math::erfc_inv(1.0 - level);
  for (auto& e : fit.estimands) {
    e.ci_low = e.estimate - z * e.se;
    e.ci_high = e.estimate + z * e.se;
  }
}

void set_bootstrap_intervals(FitResult& fit, const BootstrapResult& boot) {
  if (boot.low.size() != static_cast<Eigen::Index>(fit.estimands.size()))
    throw InvalidArgument("bootstrap result does not match the fit");
  for (std::size_t k = 0; k < fit.estimands.size(); ++k) {
    fit.estimands[k].ci_low = boot.low(static_cast<Eigen::Index>(k));
    fit.estimands[k].ci_high = boot.high(static_cast<Eigen::Index>(k));
  }
}

Eigen::VectorXd estimand_se(const FitResult& fit) {
  Eigen::VectorXd se(fit.estimands.size());
  for (std::size_t k = 0; k < fit.estimands.size(); ++k) se(k) = fit.estimands[k].se;
  return se;
}

double empirical_quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw InvalidArgument("quantile of an empty sample");
  const auto n = static_cast<double>(sorted.size());
  // The small offset keeps exact products such as 0.025 * 400 = 10 from
  // rounding up to the next order statistic.
  double idx = std::ceil(q * n - 1e-9);
  idx = std::clamp(idx, 1.0, n);
  return sorted[static_cast<std::size_t>(idx) - 1];
}

std::pair<double, double> percentile_interval(std::vector<double> values, double level) {
  if (!(level > 0.0 && level < 1.0)) throw InvalidArgument("confidence level must lie in (0, 1)");
  std::sort(values.begin(), values.end());
  const double alpha = 1.0 - level;
  return {empirical_quantile(values, alpha / 2), empirical_quantile(values, 1.0 - alpha / 2)};
}

BootstrapResult summarize_bootstrap(const std::vector<Eigen::VectorXd>& estimates, int failures,
                                    double level) {
  BootstrapResult out;
  out.requested = static_cast<int>(estimates.size());
  out.failures = failures;
  std::vector<const Eigen::VectorXd*> ok;
  for (const auto& e : estimates)
    if (e.size() > 0 && e.allFinite()) ok.push_back(&e);
  if (ok.empty()) throw NumericalError("every bootstrap refit failed");
  const auto m = ok.front()->size();
  out.draws.resize(static_cast<Eigen::Index>(ok.size()), m);
  for (std::size_t r = 0; r < ok.size(); ++r) out.draws.row(r) = ok[r]->transpose();
  out.low.resize(m);
  out.high.resize(m);
  out.sd.resize(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const Eigen::VectorXd col = out.draws.col(k);
    std::vector<double> v(col.data(), col.data() + col.size());
    const auto [lo, hi] = percentile_interval(std::move(v), level);
    out.low(k) = lo;
    out.high(k) = hi;
    const double mean = col.mean();
    out.sd(k) = col.size() > 1 ? std::sqrt((col.array() - mean).square().sum() / (col.size() - 1)) : 0.0;
  }
  if (failures > 0.01 * out.requested) {
    out.warning = std::to_string(failures) + " of " + std::to_string(out.requested) +
                  " bootstrap refits failed; intervals use the remaining resamples";
  }
  return out;
}

BootstrapResult bootstrap_ci(const TrialDataset& data, const DesignLayout& layout, FitModel model,
                             int resamples, double level, std::uint64_t seed, std::uint64_t stream,
                             const FitOptions& options, const FitResult* reference) {
  if (resamples < 2) throw InvalidArgument("bootstrap needs at least 2 resamples");
  data.check_against(layout);
  ModelFitter fitter(layout, model, data.sizes().cast<double>(), options);
  std::optional<Eigen::VectorXd> warm;
  if (reference) warm = reference->log_psi;
  if (!warm) warm = fitter.fit(cluster_period_means(data)).log_psi;

  std::vector<Eigen::VectorXd> est(resamples);
  int failures = 0;
  CellMeans means;
  for (int b = 0; b < resamples; ++b) {
    RandomStream rng(seed, stream, static_cast<std::uint32_t>(b + 1));
    resample_means(data, rng, means);
    try {
      const FitResult fit = fitter.fit(means, &*warm);
      if (!fit.convergence.converged) {
        ++failures;
        continue;
      }
      est[b] = fit.estimates();
    } catch (const NumericalError&) {
      ++failures;
    }
  }
  return summarize_bootstrap(est, failures, level);
}

}  // namespace swedge
