#pragma once
// Pressure curves, curve diagnostics, the delta(f) solver and the supermultiplicativity check.

#include <string>
#include <utility>
#include <vector>

#include "bowen_press/pressure.hpp"

namespace bowen {

struct PressureCurve {
  std::vector<double> grid;
  std::vector<PressureEstimate> estimates;
  double monotone_violation = 0.0;   ///< max positive jump P(t_{i+1}) - P(t_i)
  double convexity_violation = 0.0;  ///< max excess of P(t_i) over the chord of its neighbours, less rounding
  /// Largest violation minus its allowance (sum of adjacent headline bracket widths); <= 0 means within allowance.
  double monotone_excess = 0.0;
  double convexity_excess = 0.0;
};

/// grid must be strictly increasing with every t > 0.
PressureCurve pressure_curve(const FamilySpec& spec, const ExtendedPoint& z, const std::vector<double>& grid,
                             const TruncationPolicy& policy, int threads = 1);

enum class DeltaStatus { converged, ambiguous, no_sign_change_high, all_negative };
std::string to_string(DeltaStatus s);

struct DeltaProbe {
  double t = 0.0;
  double headline = 0.0, headline_lower = 0.0, headline_upper = 0.0;
  SignEvidence evidence = SignEvidence::ambiguous;
};

struct DeltaBracket {
  double t_low = 0.0;   ///< last probe with positive evidence
  double t_high = 0.0;  ///< last probe with negative evidence
  double width() const { return t_high - t_low; }
  DeltaStatus status = DeltaStatus::converged;
  bool has_ambiguous_band = false;
  double ambiguous_low = 0.0, ambiguous_high = 0.0;  ///< probes whose bracket straddles zero
  DeltaProbe low_probe, high_probe;
  std::vector<DeltaProbe> probes;  ///< in evaluation order
};

/// Bisection on the sign of the headline pressure over [max(t_div + 0.05, 0.55), 2].
DeltaBracket delta_solve(const FamilySpec& spec, const ExtendedPoint& z, double tol, const TruncationPolicy& policy,
                         int threads = 1);

struct SupermultiplicativityReport {
  std::vector<std::pair<int, int>> pairs;
  std::vector<double> residuals;  ///< ln S_{n+m} - ln S_n - ln S_m (central estimates)
  double log_c = 0.0;             ///< min residual
  double spread = 0.0;            ///< max - min residual
  bool hyperbolic_evidence = false;
};

SupermultiplicativityReport supermultiplicativity_check(const FamilySpec& spec, const ExtendedPoint& z, double t,
                                                        const std::vector<std::pair<int, int>>& pairs,
                                                        const TruncationPolicy& policy, int threads = 1);

}  // namespace bowen
