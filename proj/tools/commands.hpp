#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace swedge::cli {

enum ExitCode { kOk = 0, kUsage = 2, kNumerical = 3 };

struct Globals {
  std::optional<std::uint64_t> seed;
  int workers = 1;
  std::string out_dir = ".";
  std::string format = "csv";
  bool quiet = false;
};

struct LayoutArgs {
  std::string kind;
  int periods = 5;
  int interventions = 0;  // 0: 1 for single, 2 otherwise
  int offset = 1;
  int clusters_per_sequence = 1;
  std::optional<bool> augment;
};

struct DesignArgs {
  LayoutArgs layout;
  std::string config;
  std::string out;
};

struct CurveArgs {
  int periods = 5;
  std::string outcome;
  std::string regime = "small";
  std::vector<double> deltas;
  std::vector<std::string> families;
  std::string out;
};

struct BiasArgs {
  std::string preset;
  std::vector<std::string> designs;
  LayoutArgs layout;
  std::vector<std::string> b;  // decimals or fractions p/q
  std::vector<std::string> outcomes;
  std::string regime = "small";
  std::vector<double> delta;
  std::optional<double> n;
  std::optional<double> sigma2_alpha;
  std::optional<double> sigma2_eps;
  std::string plot;
  std::string h_out;
  std::string out;
};

struct SimulateArgs {
  std::string config;
  LayoutArgs layout;
  std::string outcome = "A";
  std::string regime = "small";
  std::vector<double> deltas;
  int n = 30;
  double sigma2_alpha = 0.15;
  double sigma2_eps = 2.85;
  int replicate = 0;
  std::string out;
  std::string layout_out;
};

struct FitArgs {
  std::string dataset;
  std::string layout;
  std::string model = "A";
  std::string method = "REML";
  int bootstrap = 0;
  double level = 0.95;
  std::string out;
};

struct StudyArgs {
  std::string preset;
  std::string config;
  std::optional<int> replicates;
  std::optional<int> bootstrap;
  std::vector<std::string> scenarios;
  std::vector<std::string> fits;
  bool fresh = false;
};

struct PowerArgs {
  std::string preset;
  std::string config;
  std::vector<int> n;
  std::vector<double> delta1;
  std::vector<std::string> designs;
  std::optional<int> replicates;
  std::optional<int> bootstrap;
  std::string plot;
  bool fresh = false;
};

int cmd_design(const Globals& g, const DesignArgs& a);
int cmd_curve(const Globals& g, const CurveArgs& a);
int cmd_bias(const Globals& g, const BiasArgs& a);
int cmd_simulate(const Globals& g, const SimulateArgs& a);
int cmd_fit(const Globals& g, const FitArgs& a);
int cmd_study(const Globals& g, const StudyArgs& a);
int cmd_power(const Globals& g, const PowerArgs& a);

}  // namespace swedge::cli
