#pragma once
// Preimage sums S_n(t,z) = sum over w in f^{-n}(z) of |(f^n)*(w)|^{-t}, with brackets, and pressure estimates.

#include <limits>
#include <vector>

#include "bowen_press/families.hpp"

namespace bowen {

enum class TailMode { propagate_upper, ignore_with_flag };

struct TruncationPolicy {
  int depth = 5;
  int sheet_cutoff = 4;  ///< explicit sheets |k| <= K at the root level
  bool decay_cutoff = false;  ///< K_d = max(K / 2^d, 4)
  double prune_log_weight = -std::numeric_limits<double>::infinity();
  TailMode tail_mode = TailMode::propagate_upper;
  /// Simpson panels in ln k covering sheets K < |k| <= far_limit; 0 leaves those sheets to the tail bound.
  int far_panels = 16;
  double far_limit = 1e12;
  int level_offset = 0;  ///< shifts the cutoff schedule; a child subtree uses level_offset + 1

  /// Throws std::invalid_argument on K < 1, positive prune threshold, bad panel count.
  void validate() const;
  int cutoff_at(int level) const;
  /// Policy for the subtree below one edge (matched truncation).
  TruncationPolicy shifted() const;
};

/// Bracket of ln S. log_estimate is the central value (quadrature included); lower/upper bound it.
struct SumInterval {
  double log_lower = -std::numeric_limits<double>::infinity();
  double log_estimate = -std::numeric_limits<double>::infinity();
  double log_upper = -std::numeric_limits<double>::infinity();
  bool divergent = false;
  bool tail_ignored = false;
  double width() const { return log_upper - log_lower; }
};

/// One node of the explicit preimage tree.
struct WeightedPreimage {
  ExtendedPoint point;
  double log_weight = 0.0;  ///< -t * sum of ln|f*| along the ancestry
  int depth = 0;
  std::vector<long> sheet_path;
};

/// An edge below a node: explicit sheet or far-sheet quadrature node.
struct TreeEdge {
  cplx point;
  double log_coeff = 0.0;       ///< ln of the multiplicity (0 for an explicit sheet)
  double log_sph_deriv = 0.0;   ///< ln|f*(point)|
  bool far = false;
  long index = 0;
  double log_weight(double t) const { return log_coeff - t * log_sph_deriv; }
};

/// Edges used by s_n at a node on the given level (central-estimate coefficients).
std::vector<TreeEdge> tree_edges(const FamilySpec& spec, cplx z, const TruncationPolicy& policy, int level);

/// Explicit preimage tree to the given depth (no tails, no quadrature).
std::vector<WeightedPreimage> enumerate_preimages(const FamilySpec& spec, double t, const ExtendedPoint& z,
                                                  int depth, int cutoff);

SumInterval level_sum(const FamilySpec& spec, double t, const ExtendedPoint& z, int cutoff);

/// ln S_d for d = 1..policy.depth from one traversal.
std::vector<SumInterval> level_sums(const FamilySpec& spec, double t, const ExtendedPoint& z,
                                    const TruncationPolicy& policy, int threads = 1);
/// Same for many t values; edge logs are shared between them. Result indexed [t][d-1].
std::vector<std::vector<SumInterval>> level_sums_grid(const FamilySpec& spec, const std::vector<double>& ts,
                                                      const ExtendedPoint& z, const TruncationPolicy& policy,
                                                      int threads = 1);

SumInterval s_n(const FamilySpec& spec, double t, const ExtendedPoint& z, const TruncationPolicy& policy,
                int threads = 1);

struct LevelRecord {
  int n = 0;
  SumInterval sum;
  double p_lower = 0.0, p_estimate = 0.0, p_upper = 0.0;  ///< sum / n
  bool has_ratio = false;  ///< ratio = ln S_n - ln S_{n-1}, from level 2 on
  double ratio_lower = 0.0, ratio_estimate = 0.0, ratio_upper = 0.0;
};

struct PressureEstimate {
  double t = 0.0;
  std::vector<LevelRecord> levels;
  double headline_lower = 0.0, headline = 0.0, headline_upper = 0.0;
  bool divergent = false;
  bool gps_warning = false;
  double headline_width() const { return headline_upper - headline_lower; }
};

enum class SignEvidence { positive, negative, ambiguous };
SignEvidence sign_evidence(const PressureEstimate& p);

PressureEstimate pressure_estimate(const FamilySpec& spec, double t, const ExtendedPoint& z,
                                   const TruncationPolicy& policy, int threads = 1);
std::vector<PressureEstimate> pressure_estimates(const FamilySpec& spec, const std::vector<double>& ts,
                                                 const ExtendedPoint& z, const TruncationPolicy& policy,
                                                 int threads = 1);

/// Builds the per-level records and the headline from level sums.
PressureEstimate make_estimate(double t, const std::vector<SumInterval>& sums);

}  // namespace bowen
