#include "commands.hpp"

#include <json.hpp>

#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>

#include <swedge/bias.hpp>
#include <swedge/design.hpp>
#include <swedge/effects.hpp>
#include <swedge/error.hpp>
#include <swedge/estimators.hpp>
#include <swedge/io.hpp>
#include <swedge/render.hpp>
#include <swedge/simulate.hpp>
#include <swedge/study.hpp>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace swedge::cli {

namespace {

constexpr std::uint64_t kDefaultSeed = 20250101;

std::string path_in(const Globals& g, const std::string& name) {
  fs::create_directories(g.out_dir);
  return (fs::path(g.out_dir) / name).string();
}

// Numeric-looking CSV fields become JSON numbers, the rest strings.
std::string csv_to_json(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  const auto header = split_csv_line(line);
  json rows = json::array();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    json row = json::object();
    for (std::size_t c = 0; c < header.size() && c < fields.size(); ++c) {
      try {
        row[header[c]] = parse_double(fields[c]);
      } catch (const ParseError&) {
        row[header[c]] = fields[c];
      }
    }
    rows.push_back(row);
  }
  return rows.dump(2) + "\n";
}

void emit_table(const Globals& g, const std::string& csv, const std::string& out) {
  const std::string text = g.format == "json" ? csv_to_json(csv) : csv;
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    write_file(out, text);
    if (!g.quiet) std::cerr << "wrote " << out << "\n";
  }
}

std::string table_name(const Globals& g, const std::string& stem) {
  return stem + (g.format == "json" ? ".json" : ".csv");
}

DesignLayout make_layout(const LayoutArgs& a, const std::string& kind_name) {
  const DesignKind kind = parse_design_kind(kind_name);
  LayoutOptions opt;
  opt.offset = a.offset;
  opt.clusters_per_sequence = a.clusters_per_sequence;
  opt.augment = a.augment;
  const int m = a.interventions > 0 ? a.interventions : (kind == DesignKind::single ? 1 : 2);
  return build_layout(kind, a.periods, m, opt);
}

const char* curve_name(OutcomeModel model) {
  switch (model) {
    case OutcomeModel::A: return "constant";
    case OutcomeModel::B1: return "linear";
    case OutcomeModel::B2: return "lag_half";
    case OutcomeModel::B3: return "lag_one";
    case OutcomeModel::B4: return "log_exp";
  }
  return "custom";
}

EffectCurve split_curve(const std::vector<double>& delta, int periods, int interventions) {
  const int L = periods - 1;
  if (static_cast<int>(delta.size()) != interventions * L)
    throw InvalidArgument("--delta needs m(T-1) = " + std::to_string(interventions * L) + " values, got " +
                          std::to_string(delta.size()));
  std::vector<Eigen::VectorXd> parts;
  for (int k = 0; k < interventions; ++k)
    parts.push_back(Eigen::Map<const Eigen::VectorXd>(delta.data() + k * L, L));
  return EffectCurve(periods, std::move(parts));
}

void print_warnings(const Globals& g, const std::vector<std::string>& warnings) {
  if (g.quiet) return;
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

RunOptions run_options(const Globals& g, const std::string& id) {
  RunOptions opt;
  opt.workers = g.workers;
  if (!g.quiet) {
    opt.progress = [id](int done, int total) {
      const int step = std::max(1, total / 20);
      if (done % step == 0 || done == total) {
        std::cerr << "\r[" << id << "] " << done << "/" << total << std::flush;
        if (done == total) std::cerr << "\n";
      }
    };
  }
  return opt;
}

// Reuses persisted replicates when the stored spec matches exactly.
StudyReport run_or_resume(const Globals& g, const ScenarioSpec& spec, bool fresh) {
  const std::string rep_path = path_in(g, spec.id + ".replicates.csv");
  const std::string spec_path = path_in(g, spec.id + ".spec.json");
  const std::string spec_json = scenario_to_json(spec);
  if (!fresh && fs::exists(rep_path) && fs::exists(spec_path) && read_file(spec_path) == spec_json) {
    StudyReport report;
    report.replicates = replicates_from_csv(read_file(rep_path));
    report.rows = aggregate(spec, report.replicates);
    if (!g.quiet) std::cerr << "[" << spec.id << "] resumed from " << rep_path << "\n";
    return report;
  }
  if (fs::exists(spec_path)) fs::remove(spec_path);
  StudyReport report = run_scenario(spec, run_options(g, spec.id));
  write_file(rep_path, replicates_to_csv(report.replicates));
  // Written last: its presence marks a finished scenario.
  write_file(spec_path, spec_json);
  print_warnings(g, report.warnings);
  return report;
}

std::vector<FitModel> parse_fits(const std::vector<std::string>& names) {
  std::vector<FitModel> out;
  for (const auto& n : names) out.push_back(parse_fit_model(n));
  return out;
}

}  // namespace

int cmd_design(const Globals& g, const DesignArgs& a) {
  const DesignLayout layout = a.config.empty() ? make_layout(a.layout, a.layout.kind)
                                               : layout_from_json(read_file(a.config));
  std::cout << ascii_grid(layout);
  const std::string text = layout_to_json(layout);
  if (a.out == "-") {
    std::cout << text;
  } else {
    const std::string out = a.out.empty() ? path_in(g, "layout.json") : a.out;
    write_file(out, text);
    if (!g.quiet) std::cerr << "wrote " << out << "\n";
  }
  return kOk;
}

int cmd_curve(const Globals& g, const CurveArgs& a) {
  EffectCurve curve;
  if (!a.outcome.empty()) {
    const OutcomeModel model = parse_outcome_model(a.outcome);
    if (a.deltas.empty()) {
      curve = outcome_curve(model, parse_effect_regime(a.regime), a.periods);
    } else if (a.deltas.size() == 2) {
      curve = outcome_curve(model, a.periods, a.deltas[0], a.deltas[1]);
    } else {
      throw InvalidArgument("--deltas takes two values with --outcome");
    }
  } else if (!a.families.empty()) {
    if (a.deltas.size() != a.families.size())
      throw InvalidArgument("--family and --deltas need the same number of values");
    const double d2 = a.deltas.size() > 1 ? a.deltas[1] : a.deltas[0];
    CurveParams lin = linear_bounds_from_averages(a.deltas[0], d2, a.periods);
    std::vector<EffectCurve> parts;
    for (std::size_t k = 0; k < a.families.size(); ++k) {
      CurveParams p = lin;
      p.delta = a.deltas[k];
      parts.push_back(make_curve(parse_curve_family(a.families[k]), a.periods, static_cast<int>(k) + 1, p));
    }
    curve = combine(parts);
  } else {
    throw InvalidArgument("give --outcome or --family");
  }
  if (g.format == "json") {
    const std::string text = curve_to_json(curve);
    if (a.out.empty() || a.out == "-") {
      std::cout << text;
    } else {
      write_file(a.out, text);
    }
  } else {
    emit_table(g, curve_to_csv(curve), a.out);
  }
  return kOk;
}

namespace {

// "0.25" or "1/3"
double parse_fraction(const std::string& text) {
  const auto slash = text.find('/');
  if (slash == std::string::npos) return parse_double(text);
  const double den = parse_double(std::string_view(text).substr(slash + 1));
  if (den == 0.0) throw InvalidArgument("zero denominator in '" + text + "'");
  return parse_double(std::string_view(text).substr(0, slash)) / den;
}

}  // namespace

int cmd_bias(const Globals& g, const BiasArgs& a) {
  LayoutArgs la = a.layout;
  std::vector<std::string> designs = a.designs;
  std::vector<std::string> outcomes = a.outcomes;
  std::vector<double> bs;
  for (const auto& text : a.b) bs.push_back(parse_fraction(text));
  if (!a.preset.empty()) {
    if (a.preset != "fig5" && a.preset != "fig7")
      throw InvalidArgument("unknown bias preset '" + a.preset + "' (expected fig5 or fig7)");
    la.periods = 11;
    la.interventions = 2;
    if (a.preset == "fig5") {
      designs = {"concurrent"};
    } else {
      designs = {"factorial_augmented"};
      la.offset = 3;
    }
    if (outcomes.empty()) outcomes = {"A", "B1", "B2", "B4"};
  }
  if (designs.empty()) {
    if (la.kind.empty()) throw InvalidArgument("give --design or --preset");
    designs = {la.kind};
  }
  if (outcomes.empty()) outcomes = {"A", "B1", "B2", "B4"};

  std::vector<NamedLayout> layouts;
  for (const auto& d : designs) layouts.push_back({d, make_layout(la, d)});
  const int T = la.periods;
  const int m = layouts.front().layout.interventions();
  for (const auto& l : layouts)
    if (l.layout.interventions() != m) throw InvalidArgument("all designs must share m");

  if (bs.empty()) {
    if (a.n || a.sigma2_alpha || a.sigma2_eps) {
      if (!(a.n && a.sigma2_alpha && a.sigma2_eps))
        throw InvalidArgument("--n, --sigma2-alpha and --sigma2-eps go together");
      bs = {design_scalar(VarianceComponents{*a.sigma2_alpha, *a.sigma2_eps, {}}, *a.n, T)};
    } else {
      bs = {1.0 / T};
    }
  }

  std::vector<NamedCurve> curves;
  if (!a.delta.empty()) {
    curves.push_back({"custom", split_curve(a.delta, T, m)});
  } else {
    if (m != 2) throw InvalidArgument("outcome-model curves need m = 2; pass --delta for other m");
    const EffectRegime regime = parse_effect_regime(a.regime);
    for (const auto& o : outcomes) {
      const OutcomeModel model = parse_outcome_model(o);
      curves.push_back({curve_name(model), outcome_curve(model, regime, T)});
    }
  }

  std::vector<BiasRow> rows;
  try {
    rows = bias_curve_table(layouts, bs, curves);
  } catch (const NumericalError& e) {
    std::ostringstream os;
    os << "bias table failed (T = " << T << ", b in {";
    for (std::size_t i = 0; i < bs.size(); ++i) os << (i ? ", " : "") << format_double(bs[i]);
    os << "}): " << e.what();
    throw NumericalError(os.str());
  }
  emit_table(g, bias_table_to_csv(rows), a.out);

  if (!a.plot.empty()) {
    std::vector<BiasPanel> panels;
    for (const auto& l : layouts) {
      const WeightMatrix h = H_general(l.layout, bs.front());
      for (const auto& c : curves)
        panels.push_back({l.name + ", " + c.name + ", b = " + format_double(bs.front()), c.curve, h});
    }
    write_file(a.plot, bias_svg(panels));
    if (!g.quiet) std::cerr << "wrote " << a.plot << "\n";
  }
  if (!a.h_out.empty()) {
    write_file(a.h_out, weight_matrix_to_json(H_general(layouts.front().layout, bs.front())));
    if (!g.quiet) std::cerr << "wrote " << a.h_out << "\n";
  }
  return kOk;
}

int cmd_simulate(const Globals& g, const SimulateArgs& a) {
  ScenarioSpec spec;
  if (!a.config.empty()) {
    const auto specs = scenarios_from_json(read_file(a.config));
    if (specs.size() != 1) throw InvalidArgument("simulate takes a config with exactly one scenario");
    spec = specs.front();
  } else {
    if (a.layout.kind.empty()) throw InvalidArgument("give --design or --config");
    spec.design = parse_design_kind(a.layout.kind);
    spec.periods = a.layout.periods;
    spec.interventions = a.layout.interventions > 0 ? a.layout.interventions : 2;
    spec.layout_options.offset = a.layout.offset;
    spec.layout_options.clusters_per_sequence = a.layout.clusters_per_sequence;
    spec.layout_options.augment = a.layout.augment;
    spec.outcome = parse_outcome_model(a.outcome);
    spec.regime = parse_effect_regime(a.regime);
    if (!a.deltas.empty()) {
      if (a.deltas.size() != 2) throw InvalidArgument("--deltas takes two values");
      spec.deltas = std::make_pair(a.deltas[0], a.deltas[1]);
    }
    spec.n = a.n;
    spec.vc = VarianceComponents{a.sigma2_alpha, a.sigma2_eps, {}};
    spec.seed = kDefaultSeed;
  }
  if (g.seed) spec.seed = *g.seed;
  spec.validate();
  if (a.replicate < 0) throw InvalidArgument("--replicate must be >= 0");
  const SimulationConfig config = spec.simulation();
  const TrialDataset data = simulate(config, static_cast<std::uint64_t>(a.replicate));
  const std::string out = a.out.empty() ? path_in(g, "dataset.csv") : a.out;
  const std::string layout_out = a.layout_out.empty() ? path_in(g, "layout.json") : a.layout_out;
  write_file(out, dataset_to_csv(data));
  write_file(layout_out, layout_to_json(config.layout));
  if (!g.quiet) std::cerr << "wrote " << out << " (" << data.observations() << " records) and " << layout_out << "\n";
  return kOk;
}

int cmd_fit(const Globals& g, const FitArgs& a) {
  const TrialDataset data = dataset_from_csv(read_file(a.dataset));
  const DesignLayout layout = layout_from_json(read_file(a.layout));
  const FitModel model = parse_fit_model(a.model);
  FitOptions options;
  if (a.method == "REML" || a.method == "reml") {
    options.method = Method::reml;
  } else if (a.method == "ML" || a.method == "ml") {
    options.method = Method::ml;
  } else {
    throw InvalidArgument("--method must be REML or ML");
  }
  if (!(a.level > 0.0 && a.level < 1.0)) throw InvalidArgument("--level must lie in (0, 1)");
  if (a.bootstrap == 1 || a.bootstrap < 0) throw InvalidArgument("--bootstrap must be 0 or at least 2");

  FitResult fit = fit_reml(data, layout, model, options);
  json extra;
  if (a.bootstrap >= 2) {
    const BootstrapResult boot =
        bootstrap_ci(data, layout, model, a.bootstrap, a.level, g.seed.value_or(kDefaultSeed), 0, options, &fit);
    set_bootstrap_intervals(fit, boot);
    extra["interval"] = "percentile bootstrap";
    extra["bootstrap"] = {{"requested", boot.requested}, {"failures", boot.failures}};
    if (boot.warning) {
      extra["bootstrap"]["warning"] = *boot.warning;
      if (!g.quiet) std::cerr << "warning: " << *boot.warning << "\n";
    }
  } else {
    set_wald_intervals(fit, a.level);
    extra["interval"] = "wald";
  }
  extra["level"] = a.level;
  if (!fit.convergence.converged && !g.quiet)
    std::cerr << "warning: optimizer did not converge (gradient norm "
              << format_double(fit.convergence.gradient_norm) << ")\n";

  json j = json::parse(fit_to_json(fit));
  j.update(extra);
  const std::string text = j.dump(2) + "\n";
  if (a.out.empty() || a.out == "-") {
    std::cout << text;
  } else {
    write_file(a.out, text);
    if (!g.quiet) std::cerr << "wrote " << a.out << "\n";
  }
  return kOk;
}

int cmd_study(const Globals& g, const StudyArgs& a) {
  if (a.preset.empty() == a.config.empty()) throw InvalidArgument("give exactly one of --preset and --config");
  std::vector<ScenarioSpec> specs = a.preset.empty() ? scenarios_from_json(read_file(a.config))
                                                     : study_preset(a.preset);
  if (!a.scenarios.empty()) {
    std::vector<ScenarioSpec> keep;
    for (const auto& id : a.scenarios) {
      auto it = std::find_if(specs.begin(), specs.end(), [&](const ScenarioSpec& s) { return s.id == id; });
      if (it == specs.end()) throw InvalidArgument("no scenario with id '" + id + "'");
      keep.push_back(*it);
    }
    specs = std::move(keep);
  }
  const auto fits = parse_fits(a.fits);
  for (auto& s : specs) {
    if (g.seed) s.seed = scenario_seed(*g.seed, s.id);
    if (a.replicates) s.replicates = *a.replicates;
    if (a.bootstrap) s.bootstrap = *a.bootstrap;
    if (!fits.empty()) s.fit_models = fits;
    s.validate();
  }
  std::vector<MetricRow> rows;
  for (const auto& s : specs) {
    const StudyReport report = run_or_resume(g, s, a.fresh);
    rows.insert(rows.end(), report.rows.begin(), report.rows.end());
  }
  const std::string stem = a.preset.empty() ? "report" : a.preset;
  emit_table(g, report_to_csv(rows), path_in(g, table_name(g, stem)));
  return kOk;
}

int cmd_power(const Globals& g, const PowerArgs& a) {
  if (a.preset.empty() == a.config.empty()) throw InvalidArgument("give exactly one of --preset and --config");
  PowerGrid grid;
  if (!a.config.empty()) {
    grid = power_grid_from_json(read_file(a.config));
  } else if (a.preset != "sim2") {
    throw InvalidArgument("unknown power preset '" + a.preset + "' (expected sim2)");
  }
  if (g.seed) grid.seed = *g.seed;
  if (!a.n.empty()) grid.sizes = a.n;
  if (!a.delta1.empty()) grid.delta1 = a.delta1;
  if (!a.designs.empty()) {
    grid.designs.clear();
    for (const auto& d : a.designs) grid.designs.push_back(parse_design_kind(d));
  }
  if (a.replicates) grid.replicates = *a.replicates;
  if (a.bootstrap) grid.bootstrap = *a.bootstrap;

  std::vector<PowerRow> rows;
  for (DesignKind design : grid.designs)
    for (int n : grid.sizes)
      for (double d1 : grid.delta1) {
        const ScenarioSpec spec = power_scenario(grid, design, n, d1);
        spec.validate();
        const StudyReport report = run_or_resume(g, spec, a.fresh);
        const auto part = power_rows(spec, report, d1);
        rows.insert(rows.end(), part.begin(), part.end());
      }
  const std::string stem = a.preset.empty() ? "power" : a.preset + "_power";
  emit_table(g, power_to_csv(rows), path_in(g, table_name(g, stem)));
  if (!a.plot.empty()) {
    write_file(a.plot, power_svg(rows));
    if (!g.quiet) std::cerr << "wrote " << a.plot << "\n";
  }
  return kOk;
}

}  // namespace swedge::cli
