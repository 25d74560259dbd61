#include "bowen_press/bowen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace bowen {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

DeltaProbe probe(const FamilySpec& spec, const ExtendedPoint& z, double t, const TruncationPolicy& policy,
                 int threads) {
  const PressureEstimate p = pressure_estimate(spec, t, z, policy, threads);
  return {t, p.headline, p.headline_lower, p.headline_upper, sign_evidence(p)};
}

}  // namespace

std::string to_string(DeltaStatus s) {
  switch (s) {
    case DeltaStatus::converged: return "converged";
    case DeltaStatus::ambiguous: return "ambiguous";
    case DeltaStatus::no_sign_change_high: return "no_sign_change_high";
    case DeltaStatus::all_negative: return "all_negative";
  }
  return "?";
}

PressureCurve pressure_curve(const FamilySpec& spec, const ExtendedPoint& z, const std::vector<double>& grid,
                             const TruncationPolicy& policy, int threads) {
  if (grid.empty()) throw std::invalid_argument("t-grid is empty");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw std::invalid_argument("t-grid must be strictly increasing");
  PressureCurve c;
  c.grid = grid;
  c.estimates = pressure_estimates(spec, grid, z, policy, threads);
  const std::size_t n = grid.size();
  std::vector<double> p(n), w(n);
  std::vector<bool> finite(n);
  for (std::size_t i = 0; i < n; ++i) {
    p[i] = c.estimates[i].headline;
    w[i] = c.estimates[i].headline_width();
    finite[i] = !c.estimates[i].divergent && std::isfinite(p[i]);
  }
  c.monotone_excess = c.convexity_excess = -kInf;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (!finite[i] || !finite[i + 1]) continue;
    const double jump = std::max(0.0, p[i + 1] - p[i]);
    c.monotone_violation = std::max(c.monotone_violation, jump);
    c.monotone_excess = std::max(c.monotone_excess, jump - (w[i] + w[i + 1]));
  }
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!finite[i - 1] || !finite[i] || !finite[i + 1]) continue;
    const double span = grid[i + 1] - grid[i - 1];
    const double chord = ((grid[i + 1] - grid[i]) * p[i - 1] + (grid[i] - grid[i - 1]) * p[i + 1]) / span;
    // a few ulps of the chord arithmetic; exact brackets (width 0) would otherwise flag rounding
    const double rounding = 8 * std::numeric_limits<double>::epsilon() *
                            (std::abs(p[i - 1]) + std::abs(p[i]) + std::abs(p[i + 1]));
    const double v = std::max(0.0, p[i] - chord - rounding);
    c.convexity_violation = std::max(c.convexity_violation, v);
    c.convexity_excess = std::max(c.convexity_excess, v - (w[i] + std::max(w[i - 1], w[i + 1])));
  }
  if (c.monotone_excess == -kInf) c.monotone_excess = 0.0;
  if (c.convexity_excess == -kInf) c.convexity_excess = 0.0;
  return c;
}

DeltaBracket delta_solve(const FamilySpec& spec, const ExtendedPoint& z, double tol, const TruncationPolicy& policy,
                         int threads) {
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  policy.validate();
  DeltaBracket out;
  const double seed_low = std::max(level_divergence_threshold(spec) + 0.05, 0.55);
  const double seed_high = 2.0;
  auto run = [&](double t) {
    out.probes.push_back(probe(spec, z, t, policy, threads));
    return out.probes.back();
  };
  DeltaProbe a = run(seed_low);
  DeltaProbe b = run(seed_high);
  out.t_low = a.t;
  out.t_high = b.t;
  out.low_probe = a;
  out.high_probe = b;
  if (a.evidence == SignEvidence::negative) {
    out.status = DeltaStatus::all_negative;
    return out;
  }
  if (b.evidence != SignEvidence::negative) {
    out.status = b.evidence == SignEvidence::positive ? DeltaStatus::no_sign_change_high : DeltaStatus::ambiguous;
    if (b.evidence == SignEvidence::ambiguous) {
      out.has_ambiguous_band = true;
      out.ambiguous_low = out.ambiguous_high = b.t;
    }
    return out;
  }
  if (a.evidence == SignEvidence::ambiguous) {
    out.status = DeltaStatus::ambiguous;
    out.has_ambiguous_band = true;
    out.ambiguous_low = out.ambiguous_high = a.t;
    return out;
  }

  // plain bisection until the first straddling probe
  bool amb = false;
  double amb_lo = 0.0, amb_hi = 0.0;
  while (b.t - a.t > tol && !amb) {
    const DeltaProbe m = run(0.5 * (a.t + b.t));
    if (m.evidence == SignEvidence::positive)
      a = m;
    else if (m.evidence == SignEvidence::negative)
      b = m;
    else {
      amb = true;
      amb_lo = amb_hi = m.t;
    }
  }
  // shrink the gaps on either side of the ambiguous band to tol/2
  if (amb) {
    while (amb && amb_lo - a.t > 0.5 * tol) {
      const DeltaProbe m = run(0.5 * (a.t + amb_lo));
      if (m.evidence == SignEvidence::positive) {
        a = m;
      } else if (m.evidence == SignEvidence::ambiguous) {
        amb_lo = m.t;
      } else {
        b = m;  // negative evidence below the band: the band lies above the crossing
        amb = false;
      }
    }
    while (amb && b.t - amb_hi > 0.5 * tol) {
      const DeltaProbe m = run(0.5 * (amb_hi + b.t));
      if (m.evidence == SignEvidence::negative) {
        b = m;
      } else if (m.evidence == SignEvidence::ambiguous) {
        amb_hi = m.t;
      } else {
        a = m;
        amb = false;
      }
    }
    // a band discarded by contrary evidence leaves a plain bracket that may still be wide
    while (!amb && b.t - a.t > tol) {
      const DeltaProbe m = run(0.5 * (a.t + b.t));
      if (m.evidence == SignEvidence::positive)
        a = m;
      else if (m.evidence == SignEvidence::negative)
        b = m;
      else {
        amb = true;
        amb_lo = amb_hi = m.t;
      }
    }
  }
  out.t_low = a.t;
  out.t_high = b.t;
  out.low_probe = a;
  out.high_probe = b;
  out.has_ambiguous_band = amb;
  out.ambiguous_low = amb_lo;
  out.ambiguous_high = amb_hi;
  out.status = amb ? DeltaStatus::ambiguous : DeltaStatus::converged;
  return out;
}

SupermultiplicativityReport supermultiplicativity_check(const FamilySpec& spec, const ExtendedPoint& z, double t,
                                                        const std::vector<std::pair<int, int>>& pairs,
                                                        const TruncationPolicy& policy, int threads) {
  if (pairs.empty()) throw std::invalid_argument("no (n, m) pairs given");
  int depth = 1;
  for (const auto& [n, m] : pairs) {
    if (n < 1 || m < 1) throw std::invalid_argument("pair entries must be >= 1");
    depth = std::max(depth, n + m);
  }
  TruncationPolicy p = policy;
  p.depth = depth;
  const std::vector<SumInterval> sums = level_sums(spec, t, z, p, threads);
  SupermultiplicativityReport rep;
  rep.pairs = pairs;
  rep.hyperbolic_evidence = hyperbolicity_probe(spec, 64).attracting_cycles_found;
  double lo = kInf, hi = -kInf;
  for (const auto& [n, m] : pairs) {
    const auto at = [&](int k) { return sums[static_cast<std::size_t>(k - 1)].log_estimate; };
    const double r = at(n + m) - at(n) - at(m);
    rep.residuals.push_back(r);
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  rep.log_c = lo;
  rep.spread = hi - lo;
  return rep;
}

}  // namespace bowen
