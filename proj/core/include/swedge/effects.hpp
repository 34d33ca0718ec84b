#pragma once

// Exposure-time-specific true effects delta_{k,e}, e = 1..T-1.

#include <Eigen/Dense>

#include <string_view>
#include <vector>

namespace swedge {

enum class CurveFamily { constant, linear, lag_half, lag_one, log, exp, custom };

std::string_view to_string(CurveFamily family);
CurveFamily parse_curve_family(std::string_view name);

/// Simulation outcome models. B4 uses the logarithmic shape for intervention 1
/// and the exponential shape for intervention 2.
enum class OutcomeModel { A, B1, B2, B3, B4 };

std::string_view to_string(OutcomeModel model);
OutcomeModel parse_outcome_model(std::string_view name);

enum class EffectRegime { small, large };

std::string_view to_string(EffectRegime regime);
EffectRegime parse_effect_regime(std::string_view name);

/// Target averages and linear-grid endpoints for a regime. Values are tabled
/// for T = 5 and T = 11; any other T uses the T = 11 row.
struct RegimeValues {
  double delta1;
  double delta2;
  double lower;
  double upper;
};

RegimeValues regime_values(EffectRegime regime, int periods);

struct CurveParams {
  /// Target average Delta_k (every family except linear-with-bounds).
  double delta = 0.0;
  /// Endpoints of the shared linear grid. Used by the linear family only.
  double lower = 0.0;
  double upper = 0.0;
};

/// delta_k for one intervention, evaluated at e = 1..T-1.
///   constant  Delta
///   linear    l + (u-l)/(2(T-1)-1) * (e + (k-1)(T-1) - 1)
///   lag_half  2 Delta 1{e > (T-1)/2}
///   lag_one   (T-1)/(T-2) Delta 1{e > 1}
///   log       Delta + f(e) - mean f, f(e) = Delta log{(T-1)/2 (1 + 3(e-1)/(T-2))}
///   exp       Delta + f(e) - mean f,
///             f(e) = Delta exp{-(T-1)/2 + (0.1 + (T-1)/2)/(T-2) (e-1)}
/// The centering mean runs over e = 1..T-1, so log and exp average to Delta.
Eigen::VectorXd effect_vector(CurveFamily family, int periods, int intervention,
                              const CurveParams& params);

/// Endpoints of a shared linear grid whose two halves average to delta1 and
/// delta2.
CurveParams linear_bounds_from_averages(double delta1, double delta2, int periods);

class EffectCurve {
 public:
  EffectCurve() = default;
  /// One vector of length T-1 per intervention.
  EffectCurve(int periods, std::vector<Eigen::VectorXd> deltas,
              std::vector<CurveFamily> families = {});

  int periods() const noexcept { return periods_; }
  int interventions() const noexcept { return static_cast<int>(deltas_.size()); }
  CurveFamily family(int intervention) const;

  /// delta_{k,e}; exposure 0 gives 0.
  double delta(int intervention, int exposure) const;
  const Eigen::VectorXd& vector(int intervention) const;
  /// (delta_1', ..., delta_m')'
  Eigen::VectorXd stacked() const;

  /// Delta_k = mean of delta_k.
  Eigen::VectorXd realized_estimand() const;

  bool operator==(const EffectCurve& other) const;

 private:
  int periods_ = 0;
  std::vector<Eigen::VectorXd> deltas_;
  std::vector<CurveFamily> families_;
};

/// Single-intervention curve from a family.
EffectCurve make_curve(CurveFamily family, int periods, int intervention, const CurveParams& params);

/// Joins single-intervention curves over the same T into an m-intervention
/// curve, in order.
EffectCurve combine(const std::vector<EffectCurve>& parts);

/// Two-intervention truth for a simulation outcome model with target averages
/// delta1, delta2. B1 takes its endpoints from `linear` when given, otherwise
/// derives them with linear_bounds_from_averages.
EffectCurve outcome_curve(OutcomeModel model, int periods, double delta1, double delta2,
                          const CurveParams* linear = nullptr);

/// Outcome model curve with the regime's tabled parameters.
EffectCurve outcome_curve(OutcomeModel model, EffectRegime regime, int periods);

/// Realized averages, one per intervention.
Eigen::VectorXd realized_estimand(const EffectCurve& curve);

}  // namespace swedge
