#include "swedge/study.hpp"

#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "swedge/error.hpp"
#include "swedge/rng.hpp"

namespace swedge {

namespace {

constexpr double kAbortFraction = 0.05;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::string format_number(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

struct ReplicateOutput {
  std::vector<ReplicateRecord> records;
};

// Per-worker state: one fitter per model, reused across replicates.
class ReplicateRunner {
 public:
  ReplicateRunner(const ScenarioSpec& spec, const DesignLayout& layout, const SimulationConfig& config)
      : spec_(spec), config_(config) {
    FitOptions opt;
    opt.method = spec.method;
    opt.check_identifiability = false;
    const Eigen::MatrixXd sizes = config.cell_sizes().cast<double>();
    for (FitModel model : spec.fit_models) fitters_.emplace_back(layout, model, sizes, opt);
  }

  ReplicateOutput run(int r) {
    const int m = spec_.interventions;
    const std::size_t models = fitters_.size();
    const TrialDataset data = simulate(config_, static_cast<std::uint64_t>(r));
    const CellMeans means = cluster_period_means(data);

    std::vector<std::optional<FitResult>> fits(models);
    for (std::size_t f = 0; f < models; ++f) {
      try {
        FitResult fit = fitters_[f].fit(means);
        if (fit.convergence.converged) fits[f] = std::move(fit);
      } catch (const NumericalError&) {
      }
    }

    std::vector<std::vector<Eigen::VectorXd>> boot(models, std::vector<Eigen::VectorXd>(spec_.bootstrap));
    std::vector<int> boot_fail(models, 0);
    CellMeans resampled;
    for (int b = 0; b < spec_.bootstrap; ++b) {
      RandomStream rng(config_.seed, static_cast<std::uint64_t>(r), static_cast<std::uint32_t>(b + 1));
      resample_means(data, rng, resampled);
      for (std::size_t f = 0; f < models; ++f) {
        if (!fits[f]) continue;
        try {
          const FitResult refit = fitters_[f].fit(resampled, &fits[f]->log_psi);
          if (refit.convergence.converged) {
            boot[f][b] = refit.estimates();
            continue;
          }
        } catch (const NumericalError&) {
        }
        ++boot_fail[f];
      }
    }

    ReplicateOutput out;
    for (std::size_t f = 0; f < models; ++f) {
      std::optional<BootstrapResult> ci;
      if (fits[f]) {
        try {
          ci = summarize_bootstrap(boot[f], boot_fail[f], spec_.level);
        } catch (const NumericalError&) {
        }
      }
      for (int k = 0; k < m; ++k) {
        ReplicateRecord rec;
        rec.replicate = r;
        rec.model = spec_.fit_models[f];
        rec.intervention = k + 1;
        rec.failed = !fits[f] || !ci;
        rec.boot_failures = boot_fail[f];
        if (fits[f]) {
          rec.estimate = fits[f]->estimands[k].estimate;
          rec.se = fits[f]->estimands[k].se;
          rec.converged = fits[f]->convergence.converged;
          rec.boundary = !fits[f]->convergence.boundary.empty();
        } else {
          rec.converged = false;
        }
        if (ci) {
          rec.ci_low = ci->low(k);
          rec.ci_high = ci->high(k);
          rec.boot_sd = ci->sd(k);
        }
        out.records.push_back(rec);
      }
    }
    return out;
  }

 private:
  const ScenarioSpec& spec_;
  const SimulationConfig& config_;
  std::vector<ModelFitter> fitters_;
};

}  // namespace

void ScenarioSpec::validate() const {
  if (replicates < 1) throw InvalidArgument("replicates must be at least 1");
  if (bootstrap < 2) throw InvalidArgument("bootstrap resamples must be at least 2");
  if (!(level > 0.0 && level < 1.0)) throw InvalidArgument("level must lie in (0, 1)");
  if (n < 1) throw InvalidArgument("n must be at least 1");
  if (fit_models.empty()) throw InvalidArgument("at least one fitting model is required");
  vc.validate();
  if (interventions != 2) throw InvalidArgument("simulation outcome models are defined for two interventions");
}

DesignLayout ScenarioSpec::layout() const {
  return build_layout(design, periods, interventions, layout_options);
}

EffectCurve ScenarioSpec::curve() const {
  if (deltas) return outcome_curve(outcome, periods, deltas->first, deltas->second);
  return outcome_curve(outcome, regime, periods);
}

SimulationConfig ScenarioSpec::simulation() const {
  SimulationConfig cfg{layout(), curve(), beta ? *beta : default_period_effects(periods), vc, n, {}, seed};
  cfg.validate();
  return cfg;
}

std::uint64_t scenario_seed(std::uint64_t base, const std::string& id) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : id) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return splitmix64(base ^ splitmix64(h));
}

double mc_se_mean(double sd, int replicates) {
  return replicates > 0 ? sd / std::sqrt(static_cast<double>(replicates)) : 0.0;
}

double mc_se_proportion(double p, int replicates) {
  if (replicates <= 0) return 0.0;
  return std::sqrt(std::max(p * (1.0 - p), 0.0) / replicates);
}

void mc_standard_errors(std::vector<MetricRow>& rows) {
  for (auto& row : rows) {
    const int r = row.n_ok;
    row.mc_se_bias = mc_se_mean(row.sd, r);
    row.mc_se_coverage = 100.0 * mc_se_proportion(row.coverage_pct / 100.0, r);
    row.mc_se_power = 100.0 * mc_se_proportion(row.power_pct / 100.0, r);
    // SD of the sample SD under approximate normality.
    row.mc_se_sd = r > 1 ? row.sd / std::sqrt(2.0 * (r - 1)) : 0.0;
  }
}

std::vector<MetricRow> aggregate(const ScenarioSpec& spec, const std::vector<ReplicateRecord>& records) {
  const Eigen::VectorXd truth = spec.curve().realized_estimand();
  std::vector<MetricRow> rows;
  for (FitModel model : spec.fit_models) {
    for (int k = 1; k <= spec.interventions; ++k) {
      std::vector<const ReplicateRecord*> ok;
      int fails = 0;
      for (const auto& rec : records) {
        if (rec.model != model || rec.intervention != k) continue;
        if (rec.failed) {
          ++fails;
        } else {
          ok.push_back(&rec);
        }
      }
      MetricRow row;
      row.scenario_id = spec.id;
      row.design = std::string(to_string(spec.design));
      row.periods = spec.periods;
      row.n = spec.n;
      row.outcome_model = std::string(to_string(spec.outcome));
      row.fit_model = model;
      row.intervention = k;
      row.truth = truth(k - 1);
      row.n_fail = fails;
      row.n_ok = static_cast<int>(ok.size());
      if (!ok.empty()) {
        const double r = static_cast<double>(ok.size());
        double sum = 0, se = 0, len = 0, cover = 0, reject = 0, bsd = 0;
        for (const auto* rec : ok) {
          sum += rec->estimate;
          se += rec->se;
          len += rec->ci_high - rec->ci_low;
          cover += (rec->ci_low <= row.truth && row.truth <= rec->ci_high) ? 1 : 0;
          reject += (rec->ci_low > 0.0 || rec->ci_high < 0.0) ? 1 : 0;
          bsd += rec->boot_sd;
        }
        const double mean = sum / r;
        double ss = 0, lss = 0, sess = 0;
        for (const auto* rec : ok) {
          ss += (rec->estimate - mean) * (rec->estimate - mean);
          lss += std::pow(rec->ci_high - rec->ci_low - len / r, 2);
          sess += std::pow(rec->se - se / r, 2);
        }
        row.bias = mean - row.truth;
        row.sd = ok.size() > 1 ? std::sqrt(ss / (r - 1)) : 0.0;
        row.coverage_pct = 100.0 * cover / r;
        row.ci_length = len / r;
        row.mean_se = se / r;
        row.power_pct = 100.0 * reject / r;
        row.mean_boot_sd = bsd / r;
        if (ok.size() > 1) {
          row.mc_se_ci_length = std::sqrt(lss / (r - 1)) / std::sqrt(r);
          row.mc_se_mean_se = std::sqrt(sess / (r - 1)) / std::sqrt(r);
        }
      }
      rows.push_back(row);
    }
  }
  mc_standard_errors(rows);
  return rows;
}

StudyReport run_scenario(const ScenarioSpec& spec, const RunOptions& options) {
  spec.validate();
  const DesignLayout layout = spec.layout();
  for (FitModel model : spec.fit_models) require_identifiable(layout, model);
  const SimulationConfig config = spec.simulation();

  const int R = spec.replicates;
  std::vector<ReplicateOutput> results(R);
  std::atomic<int> next{0};
  std::atomic<int> done{0};
  std::mutex progress_mutex;
  std::exception_ptr error;
  std::mutex error_mutex;

  auto worker = [&]() {
    try {
      ReplicateRunner runner(spec, layout, config);
      for (int r = next++; r < R; r = next++) {
        results[r] = runner.run(r);
        const int finished = ++done;
        if (options.progress) {
          std::lock_guard<std::mutex> lock(progress_mutex);
          options.progress(finished, R);
        }
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!error) error = std::current_exception();
      next = R;
    }
  };

  const int workers = std::max(1, std::min(options.workers, R));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);

  StudyReport report;
  for (auto& res : results)
    for (auto& rec : res.records) report.replicates.push_back(rec);
  report.rows = aggregate(spec, report.replicates);

  int boot_failures = 0;
  for (const auto& rec : report.replicates)
    if (rec.intervention == 1) boot_failures += rec.boot_failures;
  const double boot_total = static_cast<double>(R) * spec.bootstrap * spec.fit_models.size();
  if (boot_failures > 0.01 * boot_total) {
    report.warnings.push_back(spec.id + ": " + std::to_string(boot_failures) + " bootstrap refits failed (" +
                              format_number(100.0 * boot_failures / boot_total) + "%)");
  }
  for (const auto& row : report.rows) {
    if (row.n_fail > kAbortFraction * R) {
      throw StudyAborted("scenario " + spec.id + ": model " + std::string(to_string(row.fit_model)) +
                         " failed in " + std::to_string(row.n_fail) + " of " + std::to_string(R) +
                         " replicates (limit 5%)");
    }
    if (row.n_fail > 0) {
      report.warnings.push_back(spec.id + ": model " + std::string(to_string(row.fit_model)) +
                                " excluded " + std::to_string(row.n_fail) + " failed replicates");
    }
  }
  return report;
}

ScenarioSpec power_scenario(const PowerGrid& grid, DesignKind design, int n, double delta1) {
  ScenarioSpec spec;
  std::ostringstream id;
  id << "power-" << to_string(design) << "-T" << grid.periods << "-n" << n << "-d" << delta1;
  spec.id = id.str();
  spec.design = design;
  spec.periods = grid.periods;
  spec.layout_options = grid.layout_options;
  spec.n = n;
  spec.outcome = OutcomeModel::B1;
  spec.deltas = std::make_pair(delta1, delta1 + grid.delta2_shift);
  spec.fit_models = {FitModel::B};
  spec.replicates = grid.replicates;
  spec.bootstrap = grid.bootstrap;
  spec.level = grid.level;
  spec.vc = grid.vc;
  spec.seed = scenario_seed(grid.seed, spec.id);
  return spec;
}

std::vector<PowerRow> power_rows(const ScenarioSpec& spec, const StudyReport& report, double delta1) {
  std::vector<PowerRow> out;
  for (const auto& row : report.rows) {
    if (row.fit_model != FitModel::B) continue;
    out.push_back({row.design, spec.n, delta1, row.intervention, row.power_pct, row.mc_se_power});
  }
  return out;
}

std::vector<PowerRow> run_power(const PowerGrid& grid, const RunOptions& options,
                                std::vector<StudyReport>* reports) {
  std::vector<PowerRow> rows;
  for (DesignKind design : grid.designs)
    for (int n : grid.sizes)
      for (double d1 : grid.delta1) {
        const ScenarioSpec spec = power_scenario(grid, design, n, d1);
        StudyReport report = run_scenario(spec, options);
        const auto part = power_rows(spec, report, d1);
        rows.insert(rows.end(), part.begin(), part.end());
        if (reports) reports->push_back(std::move(report));
      }
  return rows;
}

std::vector<ScenarioSpec> study_preset(const std::string& name) {
  DesignKind design;
  EffectRegime regime;
  if (name == "table1") {
    design = DesignKind::concurrent;
    regime = EffectRegime::small;
  } else if (name == "table2") {
    design = DesignKind::concurrent;
    regime = EffectRegime::large;
  } else if (name == "table3") {
    design = DesignKind::factorial_augmented;
    regime = EffectRegime::small;
  } else if (name == "table4") {
    design = DesignKind::factorial_augmented;
    regime = EffectRegime::large;
  } else {
    throw InvalidArgument("unknown study preset '" + name + "' (expected table1..table4)");
  }
  std::vector<ScenarioSpec> out;
  for (int T : {5, 11}) {
    for (OutcomeModel outcome :
         {OutcomeModel::A, OutcomeModel::B1, OutcomeModel::B2, OutcomeModel::B3, OutcomeModel::B4}) {
      ScenarioSpec spec;
      spec.design = design;
      spec.periods = T;
      // The second intervention starts at exposure period 2 (T = 5) or 4 (T = 11).
      spec.layout_options.offset = T == 5 ? 1 : 3;
      spec.outcome = outcome;
      spec.regime = regime;
      spec.id = name + "-T" + std::to_string(T) + "-" + std::string(to_string(outcome));
      spec.seed = scenario_seed(spec.seed, spec.id);
      out.push_back(std::move(spec));
    }
  }
  return out;
}

}  // namespace swedge
