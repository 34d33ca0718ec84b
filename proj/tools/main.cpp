#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <thread>

#include <swedge/error.hpp>
#include <swedge/io.hpp>

#include "commands.hpp"

using namespace swedge::cli;

namespace {

void layout_options(CLI::App* cmd, LayoutArgs& a, bool kind_required) {
  auto* kind = cmd->add_option("--kind,--design", a.kind,
                               "single | concurrent | supplementation | factorial | factorial_augmented");
  if (kind_required) kind->required();
  cmd->add_option("--T", a.periods, "number of periods")->check(CLI::Range(2, 1000));
  cmd->add_option("--m", a.interventions, "number of interventions (default 1 for single, else 2)")
      ->check(CLI::Range(1, 50));
  cmd->add_option("--offset", a.offset, "periods between first and second start")->check(CLI::Range(1, 1000));
  cmd->add_option("--clusters-per-sequence", a.clusters_per_sequence)->check(CLI::Range(1, 100000));
}

void augment_flags(CLI::App* cmd, int& augment) {
  auto* on = cmd->add_flag_callback("--augment", [&augment] { augment = 1; },
                                    "force the augmented factorial layout (default: only when needed)");
  auto* off = cmd->add_flag_callback("--no-augment", [&augment] { augment = 0; }, "never augment");
  on->excludes(off);
}

std::optional<bool> tri_state(int v) {
  if (v < 0) return std::nullopt;
  return v != 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"swedge: stepped-wedge designs with multiple interventions and time-varying effects"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  std::string seed_text;
  g.workers = std::max(1u, std::thread::hardware_concurrency());
  app.add_option("--seed", seed_text, "random seed (default: $SWEDGE_SEED, else built in)");
  app.add_option("--workers", g.workers, "worker threads for studies")->check(CLI::Range(1, 1024));
  app.add_option("--out-dir", g.out_dir, "directory for output files");
  app.add_option("--format", g.format, "table format")->check(CLI::IsMember({"csv", "json"}));
  app.add_flag("-q,--quiet", g.quiet, "no progress or warnings on stderr");

  DesignArgs design;
  int design_augment = -1;
  auto* c_design = app.add_subcommand("design", "print a layout grid and write its JSON");
  layout_options(c_design, design.layout, false);
  augment_flags(c_design, design_augment);
  c_design->add_option("--config", design.config, "layout JSON to load instead of building one")
      ->check(CLI::ExistingFile);
  c_design->add_option("--out", design.out, "layout JSON path ('-' for stdout)");

  CurveArgs curve;
  auto* c_curve = app.add_subcommand("curve", "tabulate an effect curve");
  c_curve->add_option("--T", curve.periods)->check(CLI::Range(3, 1000));
  c_curve->add_option("--outcome", curve.outcome, "A | B1 | B2 | B3 | B4");
  c_curve->add_option("--regime", curve.regime, "small | large");
  c_curve->add_option("--family", curve.families, "one family per intervention")->delimiter(',');
  c_curve->add_option("--deltas", curve.deltas, "target averages")->delimiter(',');
  c_curve->add_option("--out", curve.out);

  BiasArgs bias;
  int bias_augment = -1;
  auto* c_bias = app.add_subcommand("bias", "expected constant-effect estimates under time-varying truth");
  c_bias->add_option("--preset", bias.preset, "fig5 | fig7");
  c_bias->add_option("--design", bias.designs, "design kinds")->delimiter(',');
  c_bias->add_option("--T", bias.layout.periods)->check(CLI::Range(3, 1000));
  c_bias->add_option("--m", bias.layout.interventions)->check(CLI::Range(1, 50));
  c_bias->add_option("--offset", bias.layout.offset)->check(CLI::Range(1, 1000));
  augment_flags(c_bias, bias_augment);
  c_bias->add_option("--b", bias.b, "values of b (default 1/T)")->delimiter(',');
  c_bias->add_option("--n", bias.n, "individuals per cluster-period (with the variances, sets b)");
  c_bias->add_option("--sigma2-alpha", bias.sigma2_alpha);
  c_bias->add_option("--sigma2-eps", bias.sigma2_eps);
  c_bias->add_option("--outcome", bias.outcomes, "outcome-model curves (default A,B1,B2,B4)")->delimiter(',');
  c_bias->add_option("--regime", bias.regime, "small | large");
  c_bias->add_option("--delta", bias.delta, "explicit stacked delta, m(T-1) values")->delimiter(',');
  c_bias->add_option("--plot", bias.plot, "SVG output path");
  c_bias->add_option("--h-out", bias.h_out, "H matrix JSON path");
  c_bias->add_option("--out", bias.out, "table path (default stdout)");

  SimulateArgs sim;
  int sim_augment = -1;
  auto* c_sim = app.add_subcommand("simulate", "simulate one trial dataset");
  c_sim->add_option("--config", sim.config, "scenario JSON")->check(CLI::ExistingFile);
  layout_options(c_sim, sim.layout, false);
  augment_flags(c_sim, sim_augment);
  c_sim->add_option("--outcome", sim.outcome, "A | B1 | B2 | B3 | B4");
  c_sim->add_option("--regime", sim.regime, "small | large");
  c_sim->add_option("--deltas", sim.deltas, "target averages (overrides the regime)")->delimiter(',');
  c_sim->add_option("--n", sim.n)->check(CLI::Range(1, 10000000));
  c_sim->add_option("--sigma2-alpha", sim.sigma2_alpha);
  c_sim->add_option("--sigma2-eps", sim.sigma2_eps);
  c_sim->add_option("--replicate", sim.replicate, "replicate index (selects the random stream)");
  c_sim->add_option("--out", sim.out, "dataset CSV path");
  c_sim->add_option("--layout-out", sim.layout_out, "layout JSON path");

  FitArgs fit;
  auto* c_fit = app.add_subcommand("fit", "fit a model to a dataset");
  c_fit->add_option("dataset", fit.dataset, "dataset CSV")->required()->check(CLI::ExistingFile);
  c_fit->add_option("layout", fit.layout, "layout JSON")->required()->check(CLI::ExistingFile);
  c_fit->add_option("--model", fit.model, "A | B | C");
  c_fit->add_option("--method", fit.method, "REML | ML");
  c_fit->add_option("--bootstrap", fit.bootstrap, "percentile bootstrap resamples (0: Wald interval)");
  c_fit->add_option("--level", fit.level, "confidence level");
  c_fit->add_option("--out", fit.out, "FitResult JSON path (default stdout)");

  StudyArgs study;
  auto* c_study = app.add_subcommand("study", "run simulation scenarios");
  c_study->add_option("--preset", study.preset, "table1 | table2 | table3 | table4");
  c_study->add_option("--config", study.config, "scenario JSON")->check(CLI::ExistingFile);
  c_study->add_option("--replicates", study.replicates)->check(CLI::Range(1, 10000000));
  c_study->add_option("--bootstrap", study.bootstrap)->check(CLI::Range(2, 10000000));
  c_study->add_option("--scenario", study.scenarios, "run only these scenario ids")->delimiter(',');
  c_study->add_option("--fit", study.fits, "fitting models (default A,B,C)")->delimiter(',');
  c_study->add_flag("--fresh", study.fresh, "ignore persisted replicates");

  PowerArgs power;
  auto* c_power = app.add_subcommand("power", "empirical power curves");
  c_power->add_option("--preset", power.preset, "sim2");
  c_power->add_option("--config", power.config, "power grid JSON")->check(CLI::ExistingFile);
  c_power->add_option("--n", power.n, "cluster-period sizes")->delimiter(',');
  c_power->add_option("--delta1", power.delta1)->delimiter(',');
  c_power->add_option("--design", power.designs)->delimiter(',');
  c_power->add_option("--replicates", power.replicates)->check(CLI::Range(1, 10000000));
  c_power->add_option("--bootstrap", power.bootstrap)->check(CLI::Range(2, 10000000));
  c_power->add_option("--plot", power.plot, "SVG output path");
  c_power->add_flag("--fresh", power.fresh, "ignore persisted replicates");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    const char* env_seed = std::getenv("SWEDGE_SEED");
    if (seed_text.empty() && env_seed && *env_seed) seed_text = env_seed;
    if (!seed_text.empty()) {
      const long parsed = swedge::parse_integer(seed_text);
      if (parsed < 0) throw swedge::InvalidArgument("seed must be non-negative");
      g.seed = static_cast<std::uint64_t>(parsed);
    }
    design.layout.augment = tri_state(design_augment);
    bias.layout.augment = tri_state(bias_augment);
    sim.layout.augment = tri_state(sim_augment);

    if (c_design->parsed()) {
      if (design.config.empty() && design.layout.kind.empty())
        throw swedge::InvalidArgument("give --kind or --config");
      return cmd_design(g, design);
    }
    if (c_curve->parsed()) return cmd_curve(g, curve);
    if (c_bias->parsed()) return cmd_bias(g, bias);
    if (c_sim->parsed()) return cmd_simulate(g, sim);
    if (c_fit->parsed()) return cmd_fit(g, fit);
    if (c_study->parsed()) return cmd_study(g, study);
    if (c_power->parsed()) return cmd_power(g, power);
  } catch (const swedge::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const swedge::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumerical;
  }
  return kUsage;
}
