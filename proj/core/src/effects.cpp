#include "swedge/effects.hpp"

#include <cmath>
#include <string>

#include "swedge/error.hpp"

namespace swedge {

std::string_view to_string(CurveFamily family) {
  switch (family) {
    case CurveFamily::constant: return "constant";
    case CurveFamily::linear: return "linear";
    case CurveFamily::lag_half: return "lag-half";
    case CurveFamily::lag_one: return "lag-one";
    case CurveFamily::log: return "log";
    case CurveFamily::exp: return "exp";
    case CurveFamily::custom: return "custom";
  }
  return "?";
}

CurveFamily parse_curve_family(std::string_view name) {
  if (name == "constant") return CurveFamily::constant;
  if (name == "linear") return CurveFamily::linear;
  if (name == "lag-half" || name == "lag_half") return CurveFamily::lag_half;
  if (name == "lag-one" || name == "lag_one") return CurveFamily::lag_one;
  if (name == "log") return CurveFamily::log;
  if (name == "exp") return CurveFamily::exp;
  if (name == "custom") return CurveFamily::custom;
  throw InvalidArgument("unknown curve family '" + std::string(name) + "'");
}

std::string_view to_string(OutcomeModel model) {
  switch (model) {
    case OutcomeModel::A: return "A";
    case OutcomeModel::B1: return "B1";
    case OutcomeModel::B2: return "B2";
    case OutcomeModel::B3: return "B3";
    case OutcomeModel::B4: return "B4";
  }
  return "?";
}

OutcomeModel parse_outcome_model(std::string_view name) {
  if (name == "A") return OutcomeModel::A;
  if (name == "B1") return OutcomeModel::B1;
  if (name == "B2") return OutcomeModel::B2;
  if (name == "B3") return OutcomeModel::B3;
  if (name == "B4") return OutcomeModel::B4;
  throw InvalidArgument("unknown outcome model '" + std::string(name) + "' (expected A, B1..B4)");
}

std::string_view to_string(EffectRegime regime) {
  return regime == EffectRegime::small ? "small" : "large";
}

EffectRegime parse_effect_regime(std::string_view name) {
  if (name == "small") return EffectRegime::small;
  if (name == "large") return EffectRegime::large;
  throw InvalidArgument("unknown effect regime '" + std::string(name) + "' (expected small or large)");
}

RegimeValues regime_values(EffectRegime regime, int periods) {
  if (regime == EffectRegime::small) {
    return periods == 5 ? RegimeValues{0.10, 0.14, 0.08, 0.15} : RegimeValues{0.10, 0.13, 0.08, 0.15};
  }
  return periods == 5 ? RegimeValues{0.28, 0.40, 0.24, 0.45} : RegimeValues{0.29, 0.40, 0.24, 0.45};
}

Eigen::VectorXd effect_vector(CurveFamily family, int periods, int intervention,
                              const CurveParams& params) {
  const int T = periods;
  if (T < 2) throw InvalidArgument("effect curves need T >= 2");
  if (intervention < 1) throw InvalidArgument("intervention index must be at least 1");
  if (!std::isfinite(params.delta) || !std::isfinite(params.lower) || !std::isfinite(params.upper))
    throw InvalidArgument("effect curve parameters must be finite");
  const bool lagged = family == CurveFamily::lag_half || family == CurveFamily::lag_one ||
                      family == CurveFamily::log || family == CurveFamily::exp;
  if (lagged && T < 3) throw InvalidArgument(std::string(to_string(family)) + " curve needs T >= 3");

  const double delta = params.delta;
  const double half = (T - 1) / 2.0;
  Eigen::VectorXd d(T - 1);
  for (int e = 1; e <= T - 1; ++e) {
    double v = 0.0;
    switch (family) {
      case CurveFamily::constant: v = delta; break;
      case CurveFamily::linear:
        v = params.lower + (params.upper - params.lower) / (2.0 * (T - 1) - 1.0) *
                               (e + (intervention - 1) * (T - 1) - 1);
        break;
      case CurveFamily::lag_half: v = e > half ? 2.0 * delta : 0.0; break;
      case CurveFamily::lag_one: v = e > 1 ? (T - 1.0) / (T - 2.0) * delta : 0.0; break;
      case CurveFamily::log: v = delta * std::log(half * (1.0 + 3.0 * (e - 1) / (T - 2.0))); break;
      case CurveFamily::exp: v = delta * std::exp(-half + (0.1 + half) / (T - 2.0) * (e - 1)); break;
      case CurveFamily::custom:
        throw InvalidArgument("custom curves are given as explicit vectors");
    }
    d(e - 1) = v;
  }
  if (family == CurveFamily::linear && params.lower > params.upper)
    throw InvalidArgument("linear curve needs lower <= upper");
  if (family == CurveFamily::log || family == CurveFamily::exp) {
    d.array() += delta - d.mean();
  }
  return d;
}

CurveParams linear_bounds_from_averages(double delta1, double delta2, int periods) {
  const int T = periods;
  const double step = (delta2 - delta1) / (T - 1);
  CurveParams p;
  p.lower = delta1 - step * (T - 2) / 2.0;
  p.upper = p.lower + step * (2.0 * (T - 1) - 1.0);
  p.delta = delta1;
  return p;
}

EffectCurve::EffectCurve(int periods, std::vector<Eigen::VectorXd> deltas,
                         std::vector<CurveFamily> families)
    : periods_(periods), deltas_(std::move(deltas)), families_(std::move(families)) {
  if (periods_ < 2) throw InvalidArgument("effect curves need T >= 2");
  if (deltas_.empty()) throw InvalidArgument("effect curve needs at least one intervention");
  for (std::size_t k = 0; k < deltas_.size(); ++k) {
    if (deltas_[k].size() != periods_ - 1)
      throw InvalidArgument("intervention " + std::to_string(k + 1) + " has " +
                            std::to_string(deltas_[k].size()) + " effects, expected T-1 = " +
                            std::to_string(periods_ - 1));
    if (!deltas_[k].allFinite()) throw InvalidArgument("effect curve values must be finite");
  }
  if (families_.empty()) families_.assign(deltas_.size(), CurveFamily::custom);
  if (families_.size() != deltas_.size()) throw InvalidArgument("one family tag per intervention");
}

CurveFamily EffectCurve::family(int intervention) const {
  if (intervention < 1 || intervention > interventions())
    throw InvalidArgument("intervention index out of range");
  return families_[intervention - 1];
}

double EffectCurve::delta(int intervention, int exposure) const {
  if (exposure == 0) return 0.0;
  if (exposure < 0 || exposure > periods_ - 1) throw InvalidArgument("exposure out of range");
  return vector(intervention)(exposure - 1);
}

const Eigen::VectorXd& EffectCurve::vector(int intervention) const {
  if (intervention < 1 || intervention > interventions())
    throw InvalidArgument("intervention index out of range");
  return deltas_[intervention - 1];
}

Eigen::VectorXd EffectCurve::stacked() const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(deltas_.size()) * (periods_ - 1));
  for (std::size_t k = 0; k < deltas_.size(); ++k)
    out.segment(static_cast<Eigen::Index>(k) * (periods_ - 1), periods_ - 1) = deltas_[k];
  return out;
}

Eigen::VectorXd EffectCurve::realized_estimand() const {
  Eigen::VectorXd out(deltas_.size());
  for (std::size_t k = 0; k < deltas_.size(); ++k) out(k) = deltas_[k].mean();
  return out;
}

bool EffectCurve::operator==(const EffectCurve& other) const {
  if (periods_ != other.periods_ || deltas_.size() != other.deltas_.size() ||
      families_ != other.families_)
    return false;
  for (std::size_t k = 0; k < deltas_.size(); ++k)
    if (deltas_[k] != other.deltas_[k]) return false;
  return true;
}

EffectCurve make_curve(CurveFamily family, int periods, int intervention, const CurveParams& params) {
  return EffectCurve(periods, {effect_vector(family, periods, intervention, params)}, {family});
}

EffectCurve combine(const std::vector<EffectCurve>& parts) {
  if (parts.empty()) throw InvalidArgument("nothing to combine");
  std::vector<Eigen::VectorXd> deltas;
  std::vector<CurveFamily> families;
  for (const auto& p : parts) {
    if (p.periods() != parts.front().periods())
      throw InvalidArgument("combined curves must share T");
    for (int k = 1; k <= p.interventions(); ++k) {
      deltas.push_back(p.vector(k));
      families.push_back(p.family(k));
    }
  }
  return EffectCurve(parts.front().periods(), std::move(deltas), std::move(families));
}

EffectCurve outcome_curve(OutcomeModel model, int periods, double delta1, double delta2,
                          const CurveParams* linear) {
  const double targets[2] = {delta1, delta2};
  std::vector<EffectCurve> parts;
  for (int k = 1; k <= 2; ++k) {
    CurveParams p;
    p.delta = targets[k - 1];
    CurveFamily family = CurveFamily::constant;
    switch (model) {
      case OutcomeModel::A: family = CurveFamily::constant; break;
      case OutcomeModel::B1: {
        family = CurveFamily::linear;
        const CurveParams bounds = linear ? *linear : linear_bounds_from_averages(delta1, delta2, periods);
        p.lower = bounds.lower;
        p.upper = bounds.upper;
        break;
      }
      case OutcomeModel::B2: family = CurveFamily::lag_half; break;
      case OutcomeModel::B3: family = CurveFamily::lag_one; break;
      case OutcomeModel::B4: family = k == 1 ? CurveFamily::log : CurveFamily::exp; break;
    }
    parts.push_back(make_curve(family, periods, k, p));
  }
  return combine(parts);
}

EffectCurve outcome_curve(OutcomeModel model, EffectRegime regime, int periods) {
  const RegimeValues v = regime_values(regime, periods);
  CurveParams bounds;
  bounds.lower = v.lower;
  bounds.upper = v.upper;
  return outcome_curve(model, periods, v.delta1, v.delta2, &bounds);
}

Eigen::VectorXd realized_estimand(const EffectCurve& curve) { return curve.realized_estimand(); }

}  // namespace swedge
