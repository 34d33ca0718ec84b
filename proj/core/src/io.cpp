#include "swedge/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <iterator>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "swedge/error.hpp"

namespace swedge {

using json = nlohmann::json;

namespace {

json parse_json(std::string_view text, const std::string& what) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(what + ": " + e.what());
  }
}

void require_keys(const json& j, std::initializer_list<const char*> required,
                  std::initializer_list<const char*> allowed, const std::string& what) {
  if (!j.is_object()) throw ParseError(what + " must be a JSON object");
  for (const char* key : required)
    if (!j.contains(key)) throw ParseError(what + " is missing \"" + key + "\"");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) throw ParseError(what + " has unknown key \"" + key + "\"");
  }
}

template <typename T>
T get_as(const json& j, const char* key, const std::string& what) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ParseError(what + ": \"" + key + "\" has the wrong type");
  }
}

json number(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

json vector_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number(v(i)));
  return a;
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    out.push_back(line);
    pos = end + 1;
  }
  return out;
}

std::string csv_row(std::initializer_list<std::string> fields) {
  std::string out;
  for (const auto& f : fields) {
    if (!out.empty()) out += ',';
    out += f;
  }
  return out + '\n';
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "NaN";
  if (std::isinf(v)) return v > 0 ? "Inf" : "-Inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text, long line) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  if (text == "NaN" || text == "nan" || text == "NA") return std::numeric_limits<double>::quiet_NaN();
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw ParseError("expected a number, got '" + std::string(text) + "'", line);
  return v;
}

long parse_integer(std::string_view text, long line) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  long v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw ParseError("expected an integer, got '" + std::string(text) + "'", line);
  return v;
}

std::vector<std::string> split_csv_line(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t end = line.find(',', pos);
    out.emplace_back(line.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos));
    if (end == std::string_view::npos) break;
    pos = end + 1;
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot open '" + path + "' for writing");
  out << contents;
  if (!out) throw InvalidArgument("failed writing '" + path + "'");
}

std::string layout_to_json(const DesignLayout& layout) {
  json j;
  j["kind"] = std::string(to_string(layout.kind()));
  j["T"] = layout.periods();
  j["m"] = layout.interventions();
  json clusters = json::array();
  for (int i = 1; i <= layout.clusters(); ++i) {
    json starts = json::array();
    for (int k = 1; k <= layout.interventions(); ++k) {
      const auto s = layout.start(i, k);
      starts.push_back(s ? json(*s) : json(nullptr));
    }
    clusters.push_back({{"id", i}, {"starts", starts}});
  }
  j["clusters"] = clusters;
  return j.dump(2) + "\n";
}

DesignLayout layout_from_json(std::string_view text) {
  const json j = parse_json(text, "layout");
  require_keys(j, {"T", "m", "clusters"}, {"kind", "T", "m", "clusters"}, "layout");
  const DesignKind kind = j.contains("kind") ? parse_design_kind(get_as<std::string>(j, "kind", "layout"))
                                             : DesignKind::custom;
  const int T = get_as<int>(j, "T", "layout");
  const int m = get_as<int>(j, "m", "layout");
  const json& clusters = j.at("clusters");
  if (!clusters.is_array()) throw ParseError("layout \"clusters\" must be an array");
  std::vector<std::vector<StartPeriod>> starts;
  std::map<int, std::size_t> ids;
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    const std::string what = "layout cluster " + std::to_string(c + 1);
    require_keys(clusters[c], {"starts"}, {"id", "starts"}, what);
    if (clusters[c].contains("id")) {
      const int id = get_as<int>(clusters[c], "id", what);
      if (id != static_cast<int>(c) + 1)
        throw ParseError(what + ": ids must run 1..I in order (got " + std::to_string(id) + ")");
    }
    const json& s = clusters[c].at("starts");
    if (!s.is_array() || static_cast<int>(s.size()) != m)
      throw ParseError(what + ": \"starts\" must list " + std::to_string(m) + " entries");
    std::vector<StartPeriod> row;
    for (const auto& v : s) {
      if (v.is_null()) {
        row.emplace_back();
      } else if (v.is_number_integer()) {
        row.emplace_back(v.get<int>());
      } else {
        throw ParseError(what + ": start periods must be integers or null");
      }
    }
    starts.push_back(std::move(row));
  }
  return DesignLayout(kind, T, m, std::move(starts));
}

std::string curve_to_csv(const EffectCurve& curve) {
  std::string out = "intervention,exposure,delta\n";
  for (int k = 1; k <= curve.interventions(); ++k)
    for (int e = 1; e < curve.periods(); ++e)
      out += csv_row({std::to_string(k), std::to_string(e), format_double(curve.delta(k, e))});
  return out;
}

EffectCurve curve_from_csv(std::string_view text) {
  const auto lines = lines_of(text);
  if (lines.empty() || lines[0] != "intervention,exposure,delta")
    throw ParseError("curve CSV header must be 'intervention,exposure,delta'", 1);
  std::map<int, std::map<int, double>> values;
  for (std::size_t l = 1; l < lines.size(); ++l) {
    if (lines[l].empty()) continue;
    const long ln = static_cast<long>(l) + 1;
    const auto f = split_csv_line(lines[l]);
    if (f.size() != 3) throw ParseError("expected 3 fields", ln);
    const long k = parse_integer(f[0], ln);
    const long e = parse_integer(f[1], ln);
    if (k < 1 || e < 1) throw ParseError("intervention and exposure must be positive", ln);
    if (!values[static_cast<int>(k)].emplace(static_cast<int>(e), parse_double(f[2], ln)).second)
      throw ParseError("duplicate (intervention, exposure)", ln);
  }
  if (values.empty()) throw ParseError("curve CSV has no rows");
  const int L = static_cast<int>(values.begin()->second.size());
  std::vector<Eigen::VectorXd> deltas;
  int expect_k = 1;
  for (const auto& [k, row] : values) {
    if (k != expect_k++) throw ParseError("interventions must run 1..m");
    if (static_cast<int>(row.size()) != L) throw ParseError("every intervention needs the same exposures");
    Eigen::VectorXd d(L);
    int expect_e = 1;
    for (const auto& [e, v] : row) {
      if (e != expect_e++) throw ParseError("exposures must run 1..T-1");
      d(e - 1) = v;
    }
    deltas.push_back(std::move(d));
  }
  return EffectCurve(L + 1, std::move(deltas));
}

std::string curve_to_json(const EffectCurve& curve) {
  json j;
  j["T"] = curve.periods();
  json arr = json::array();
  for (int k = 1; k <= curve.interventions(); ++k) {
    arr.push_back({{"k", k},
                   {"family", std::string(to_string(curve.family(k)))},
                   {"delta", vector_json(curve.vector(k))},
                   {"average", curve.vector(k).mean()}});
  }
  j["interventions"] = arr;
  return j.dump(2) + "\n";
}

EffectCurve curve_from_json(std::string_view text) {
  const json j = parse_json(text, "curve");
  require_keys(j, {"T", "interventions"}, {"T", "interventions"}, "curve");
  const int T = get_as<int>(j, "T", "curve");
  std::vector<Eigen::VectorXd> deltas;
  std::vector<CurveFamily> families;
  const json& arr = j.at("interventions");
  if (!arr.is_array()) throw ParseError("curve \"interventions\" must be an array");
  for (std::size_t k = 0; k < arr.size(); ++k) {
    const std::string what = "curve intervention " + std::to_string(k + 1);
    require_keys(arr[k], {"delta"}, {"k", "family", "delta", "average"}, what);
    const auto values = get_as<std::vector<double>>(arr[k], "delta", what);
    deltas.push_back(Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size())));
    families.push_back(arr[k].contains("family")
                           ? parse_curve_family(get_as<std::string>(arr[k], "family", what))
                           : CurveFamily::custom);
  }
  return EffectCurve(T, std::move(deltas), std::move(families));
}

void write_dataset_csv(std::ostream& os, const TrialDataset& data) {
  const int m = data.interventions();
  os << "cluster,period,individual";
  for (int k = 1; k <= m; ++k) os << ",x" << k;
  for (int k = 1; k <= m; ++k) os << ",e" << k;
  os << ",y\n";
  for (int i = 0; i < data.clusters(); ++i)
    for (int j = 0; j < data.periods(); ++j) {
      std::string prefix = std::to_string(i + 1) + "," + std::to_string(j + 1) + ",";
      std::string arms;
      for (int k = 0; k < m; ++k) arms += "," + std::to_string(data.arm(k, i, j));
      for (int k = 0; k < m; ++k) arms += "," + std::to_string(data.exposure(k, i, j));
      const double* y = data.cell(i, j);
      for (int s = 0; s < data.size(i, j); ++s)
        os << prefix << s + 1 << arms << ',' << format_double(y[s]) << '\n';
    }
}

std::string dataset_to_csv(const TrialDataset& data) {
  std::ostringstream os;
  write_dataset_csv(os, data);
  return os.str();
}

TrialDataset dataset_from_csv(std::string_view text) {
  const auto lines = lines_of(text);
  if (lines.empty()) throw ParseError("dataset CSV is empty", 1);
  const auto header = split_csv_line(lines[0]);
  const std::size_t width = header.size();
  if (width < 6 || (width - 4) % 2 != 0 || header[0] != "cluster" || header[1] != "period" ||
      header[2] != "individual" || header.back() != "y") {
    throw ParseError("dataset header must be cluster,period,individual,x1..xm,e1..em,y", 1);
  }
  const int m = static_cast<int>((width - 4) / 2);
  for (int k = 1; k <= m; ++k) {
    if (header[2 + k] != "x" + std::to_string(k) || header[2 + m + k] != "e" + std::to_string(k))
      throw ParseError("dataset header must be cluster,period,individual,x1..xm,e1..em,y", 1);
  }

  struct Row {
    int cluster, period;
    std::vector<int> xe;
    double y;
    long line;
  };
  std::vector<Row> rows;
  int I = 0, T = 0;
  for (std::size_t l = 1; l < lines.size(); ++l) {
    if (lines[l].empty()) continue;
    const long ln = static_cast<long>(l) + 1;
    const auto f = split_csv_line(lines[l]);
    if (f.size() != width)
      throw ParseError("expected " + std::to_string(width) + " fields, got " + std::to_string(f.size()), ln);
    Row r{static_cast<int>(parse_integer(f[0], ln)), static_cast<int>(parse_integer(f[1], ln)), {}, 0.0, ln};
    parse_integer(f[2], ln);
    if (r.cluster < 1 || r.period < 1) throw ParseError("cluster and period must be positive", ln);
    for (int c = 0; c < 2 * m; ++c) {
      const long v = parse_integer(f[3 + c], ln);
      if (v < 0 || (c < m && v > 1)) throw ParseError("arm indicators must be 0/1 and exposures >= 0", ln);
      r.xe.push_back(static_cast<int>(v));
    }
    r.y = parse_double(f.back(), ln);
    if (!std::isfinite(r.y)) throw ParseError("outcome must be finite", ln);
    I = std::max(I, r.cluster);
    T = std::max(T, r.period);
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw ParseError("dataset CSV has no records");

  Eigen::MatrixXi sizes = Eigen::MatrixXi::Zero(I, T);
  std::vector<Eigen::MatrixXi> x(m, Eigen::MatrixXi::Constant(I, T, -1));
  std::vector<Eigen::MatrixXi> e(m, Eigen::MatrixXi::Constant(I, T, -1));
  for (const auto& r : rows) {
    const int i = r.cluster - 1, j = r.period - 1;
    ++sizes(i, j);
    for (int k = 0; k < m; ++k) {
      if (x[k](i, j) == -1) {
        x[k](i, j) = r.xe[k];
        e[k](i, j) = r.xe[m + k];
      } else if (x[k](i, j) != r.xe[k] || e[k](i, j) != r.xe[m + k]) {
        throw ParseError("arm/exposure values differ within cluster " + std::to_string(r.cluster) +
                             ", period " + std::to_string(r.period),
                         r.line);
      }
    }
  }
  for (int i = 0; i < I; ++i)
    for (int j = 0; j < T; ++j)
      if (sizes(i, j) == 0)
        throw ParseError("cluster " + std::to_string(i + 1) + ", period " + std::to_string(j + 1) +
                         " has no records (incomplete designs are not supported)");

  std::vector<std::size_t> cursor(static_cast<std::size_t>(I) * T + 1, 0);
  for (int i = 0; i < I; ++i)
    for (int j = 0; j < T; ++j) cursor[i * T + j + 1] = cursor[i * T + j] + sizes(i, j);
  std::vector<double> y(rows.size());
  for (const auto& r : rows) y[cursor[(r.cluster - 1) * T + r.period - 1]++] = r.y;
  return TrialDataset(std::move(sizes), std::move(x), std::move(e), std::move(y));
}

std::string fit_to_json(const FitResult& fit) {
  json j;
  j["model"] = std::string(to_string(fit.model));
  j["method"] = fit.known_variance ? "GLS" : std::string(to_string(fit.method));
  j["beta"] = vector_json(fit.beta);
  json effects = json::object();
  for (std::size_t c = 0; c < fit.effect_labels.size(); ++c)
    effects[fit.effect_labels[c]] = number(fit.effects(static_cast<Eigen::Index>(c)));
  j["effects"] = effects;
  if (fit.random_effects.size() > 0) j["random_effects"] = vector_json(fit.random_effects);
  json vc = {{"sigma2_alpha", fit.vc.cluster}, {"sigma2_eps", fit.vc.residual}, {"icc", fit.vc.icc()}};
  for (std::size_t k = 0; k < fit.vc.treatment.size(); ++k)
    vc["sigma2_gamma_" + std::to_string(k + 1)] = fit.vc.treatment[k];
  j["vc"] = vc;
  json est = json::array();
  for (const auto& e : fit.estimands) {
    est.push_back({{"k", e.intervention},
                   {"delta_hat", number(e.estimate)},
                   {"se", number(e.se)},
                   {"ci_low", number(e.ci_low)},
                   {"ci_high", number(e.ci_high)}});
  }
  j["estimands"] = est;
  j["loglik"] = number(fit.loglik);
  j["converged"] = fit.convergence.converged;
  j["boundary"] = fit.convergence.boundary;
  j["iterations"] = fit.convergence.iterations;
  j["gradient_norm"] = number(fit.convergence.gradient_norm);
  return j.dump(2) + "\n";
}

std::string weight_matrix_to_json(const WeightMatrix& h) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < h.h.rows(); ++r) rows.push_back(vector_json(h.h.row(r).transpose()));
  json j = {{"T", h.periods},
            {"m", h.interventions},
            {"b", h.b},
            {"provenance", std::string(to_string(h.provenance))},
            {"H", rows}};
  return j.dump(2) + "\n";
}

std::string bias_table_to_csv(const std::vector<BiasRow>& rows) {
  std::string out = "design,family,b,intervention,truth,expected,bias\n";
  for (const auto& r : rows)
    out += csv_row({r.design, r.family, format_double(r.b), std::to_string(r.intervention),
                    format_double(r.truth), format_double(r.expected), format_double(r.bias)});
  return out;
}

std::string report_to_csv(const std::vector<MetricRow>& rows) {
  std::string out =
      "scenario_id,design,T,n,outcome_model,fit_model,intervention,truth,bias,sd,coverage_pct,"
      "ci_length,mean_se,mc_se_bias,mc_se_coverage,n_fail\n";
  for (const auto& r : rows)
    out += csv_row({r.scenario_id, r.design, std::to_string(r.periods), std::to_string(r.n), r.outcome_model,
                    std::string(to_string(r.fit_model)), std::to_string(r.intervention),
                    format_double(r.truth), format_double(r.bias), format_double(r.sd),
                    format_double(r.coverage_pct), format_double(r.ci_length), format_double(r.mean_se),
                    format_double(r.mc_se_bias), format_double(r.mc_se_coverage), std::to_string(r.n_fail)});
  return out;
}

std::string replicates_to_csv(const std::vector<ReplicateRecord>& records) {
  std::string out =
      "replicate,fit_model,intervention,failed,estimate,se,ci_low,ci_high,boot_sd,boot_failures,"
      "converged,boundary\n";
  for (const auto& r : records)
    out += csv_row({std::to_string(r.replicate), std::string(to_string(r.model)), std::to_string(r.intervention),
                    r.failed ? "1" : "0", format_double(r.estimate), format_double(r.se),
                    format_double(r.ci_low), format_double(r.ci_high), format_double(r.boot_sd),
                    std::to_string(r.boot_failures), r.converged ? "1" : "0", r.boundary ? "1" : "0"});
  return out;
}

std::vector<ReplicateRecord> replicates_from_csv(std::string_view text) {
  const auto lines = lines_of(text);
  if (lines.empty() ||
      lines[0] !=
          "replicate,fit_model,intervention,failed,estimate,se,ci_low,ci_high,boot_sd,boot_failures,"
          "converged,boundary")
    throw ParseError("unexpected replicate CSV header", 1);
  std::vector<ReplicateRecord> out;
  for (std::size_t l = 1; l < lines.size(); ++l) {
    if (lines[l].empty()) continue;
    const long ln = static_cast<long>(l) + 1;
    const auto f = split_csv_line(lines[l]);
    if (f.size() != 12) throw ParseError("expected 12 fields", ln);
    ReplicateRecord r;
    r.replicate = static_cast<int>(parse_integer(f[0], ln));
    r.model = parse_fit_model(f[1]);
    r.intervention = static_cast<int>(parse_integer(f[2], ln));
    r.failed = parse_integer(f[3], ln) != 0;
    r.estimate = parse_double(f[4], ln);
    r.se = parse_double(f[5], ln);
    r.ci_low = parse_double(f[6], ln);
    r.ci_high = parse_double(f[7], ln);
    r.boot_sd = parse_double(f[8], ln);
    r.boot_failures = static_cast<int>(parse_integer(f[9], ln));
    r.converged = parse_integer(f[10], ln) != 0;
    r.boundary = parse_integer(f[11], ln) != 0;
    out.push_back(r);
  }
  return out;
}

std::string power_to_csv(const std::vector<PowerRow>& rows) {
  std::string out = "design,n,delta1,intervention,power,mc_se\n";
  for (const auto& r : rows)
    out += csv_row({r.design, std::to_string(r.n), format_double(r.delta1), std::to_string(r.intervention),
                    format_double(r.power), format_double(r.mc_se)});
  return out;
}

namespace {

const char* const kScenarioKeys[] = {"id",         "design",   "T",         "m",         "offset",
                                     "clusters_per_sequence", "augment", "n", "outcome", "regime",
                                     "deltas",     "fit_models", "replicates", "bootstrap", "level",
                                     "seed",       "sigma2_alpha", "sigma2_eps", "beta",   "method"};

void reject_unknown(const json& j, const char* const* begin, const char* const* end, const std::string& what) {
  if (!j.is_object()) throw ParseError(what + " must be a JSON object");
  for (const auto& [key, value] : j.items())
    if (std::find_if(begin, end, [&](const char* k) { return key == k; }) == end)
      throw ParseError(what + " has unknown key \"" + key + "\"");
}

ScenarioSpec scenario_from(const json& j, std::size_t index) {
  const std::string what = "scenario " + std::to_string(index + 1);
  reject_unknown(j, std::begin(kScenarioKeys), std::end(kScenarioKeys), what);
  ScenarioSpec spec;
  spec.id = j.contains("id") ? get_as<std::string>(j, "id", what) : "scenario" + std::to_string(index + 1);
  try {
    if (j.contains("design")) spec.design = parse_design_kind(get_as<std::string>(j, "design", what));
    if (j.contains("outcome")) spec.outcome = parse_outcome_model(get_as<std::string>(j, "outcome", what));
    if (j.contains("regime")) spec.regime = parse_effect_regime(get_as<std::string>(j, "regime", what));
    if (j.contains("method")) {
      const auto m = get_as<std::string>(j, "method", what);
      if (m == "REML" || m == "reml") {
        spec.method = Method::reml;
      } else if (m == "ML" || m == "ml") {
        spec.method = Method::ml;
      } else {
        throw ParseError(what + ": method must be REML or ML");
      }
    }
    if (j.contains("fit_models")) {
      spec.fit_models.clear();
      for (const auto& name : get_as<std::vector<std::string>>(j, "fit_models", what))
        spec.fit_models.push_back(parse_fit_model(name));
    }
  } catch (const InvalidArgument& e) {
    throw ParseError(what + ": " + e.what());
  }
  if (j.contains("T")) spec.periods = get_as<int>(j, "T", what);
  if (j.contains("m")) spec.interventions = get_as<int>(j, "m", what);
  if (j.contains("offset")) spec.layout_options.offset = get_as<int>(j, "offset", what);
  if (j.contains("clusters_per_sequence"))
    spec.layout_options.clusters_per_sequence = get_as<int>(j, "clusters_per_sequence", what);
  if (j.contains("augment")) spec.layout_options.augment = get_as<bool>(j, "augment", what);
  if (j.contains("n")) spec.n = get_as<int>(j, "n", what);
  if (j.contains("deltas")) {
    const auto d = get_as<std::vector<double>>(j, "deltas", what);
    if (d.size() != 2) throw ParseError(what + ": \"deltas\" needs two values");
    spec.deltas = std::make_pair(d[0], d[1]);
  }
  if (j.contains("replicates")) spec.replicates = get_as<int>(j, "replicates", what);
  if (j.contains("bootstrap")) spec.bootstrap = get_as<int>(j, "bootstrap", what);
  if (j.contains("level")) spec.level = get_as<double>(j, "level", what);
  if (j.contains("seed")) spec.seed = get_as<std::uint64_t>(j, "seed", what);
  if (j.contains("sigma2_alpha")) spec.vc.cluster = get_as<double>(j, "sigma2_alpha", what);
  if (j.contains("sigma2_eps")) spec.vc.residual = get_as<double>(j, "sigma2_eps", what);
  if (j.contains("beta")) {
    const auto b = get_as<std::vector<double>>(j, "beta", what);
    spec.beta = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size()));
  }
  return spec;
}

}  // namespace

std::vector<ScenarioSpec> scenarios_from_json(std::string_view text) {
  const json j = parse_json(text, "study config");
  std::vector<ScenarioSpec> out;
  if (j.is_object() && j.contains("scenarios")) {
    require_keys(j, {"scenarios"}, {"scenarios"}, "study config");
    const json& arr = j.at("scenarios");
    if (!arr.is_array() || arr.empty()) throw ParseError("\"scenarios\" must be a nonempty array");
    for (std::size_t i = 0; i < arr.size(); ++i) out.push_back(scenario_from(arr[i], i));
  } else {
    out.push_back(scenario_from(j, 0));
  }
  for (std::size_t a = 0; a < out.size(); ++a)
    for (std::size_t b = a + 1; b < out.size(); ++b)
      if (out[a].id == out[b].id) throw ParseError("duplicate scenario id '" + out[a].id + "'");
  return out;
}

std::string scenario_to_json(const ScenarioSpec& spec) {
  json j;
  j["id"] = spec.id;
  j["design"] = std::string(to_string(spec.design));
  j["T"] = spec.periods;
  j["m"] = spec.interventions;
  j["offset"] = spec.layout_options.offset;
  j["clusters_per_sequence"] = spec.layout_options.clusters_per_sequence;
  if (spec.layout_options.augment) j["augment"] = *spec.layout_options.augment;
  j["n"] = spec.n;
  j["outcome"] = std::string(to_string(spec.outcome));
  j["regime"] = std::string(to_string(spec.regime));
  if (spec.deltas) j["deltas"] = {spec.deltas->first, spec.deltas->second};
  json fits = json::array();
  for (FitModel m : spec.fit_models) fits.push_back(std::string(to_string(m)));
  j["fit_models"] = fits;
  j["replicates"] = spec.replicates;
  j["bootstrap"] = spec.bootstrap;
  j["level"] = spec.level;
  j["seed"] = spec.seed;
  j["sigma2_alpha"] = spec.vc.cluster;
  j["sigma2_eps"] = spec.vc.residual;
  if (spec.beta) j["beta"] = vector_json(*spec.beta);
  j["method"] = std::string(to_string(spec.method));
  return j.dump(2) + "\n";
}

PowerGrid power_grid_from_json(std::string_view text) {
  const json j = parse_json(text, "power config");
  require_keys(j, {},
               {"designs", "T", "offset", "n", "delta1", "delta2_shift", "replicates", "bootstrap", "level",
                "seed", "sigma2_alpha", "sigma2_eps"},
               "power config");
  const std::string what = "power config";
  PowerGrid grid;
  if (j.contains("designs")) {
    grid.designs.clear();
    try {
      for (const auto& d : get_as<std::vector<std::string>>(j, "designs", what))
        grid.designs.push_back(parse_design_kind(d));
    } catch (const InvalidArgument& e) {
      throw ParseError(what + ": " + e.what());
    }
  }
  if (j.contains("T")) grid.periods = get_as<int>(j, "T", what);
  if (j.contains("offset")) grid.layout_options.offset = get_as<int>(j, "offset", what);
  if (j.contains("n")) grid.sizes = get_as<std::vector<int>>(j, "n", what);
  if (j.contains("delta1")) grid.delta1 = get_as<std::vector<double>>(j, "delta1", what);
  if (j.contains("delta2_shift")) grid.delta2_shift = get_as<double>(j, "delta2_shift", what);
  if (j.contains("replicates")) grid.replicates = get_as<int>(j, "replicates", what);
  if (j.contains("bootstrap")) grid.bootstrap = get_as<int>(j, "bootstrap", what);
  if (j.contains("level")) grid.level = get_as<double>(j, "level", what);
  if (j.contains("seed")) grid.seed = get_as<std::uint64_t>(j, "seed", what);
  if (j.contains("sigma2_alpha")) grid.vc.cluster = get_as<double>(j, "sigma2_alpha", what);
  if (j.contains("sigma2_eps")) grid.vc.residual = get_as<double>(j, "sigma2_eps", what);
  return grid;
}

}  // namespace swedge
