#pragma once
// Finite conformal IFS built from composite inverse branches on a spherical disc, word sums and P_hyp search.

#include <optional>
#include <string>
#include <vector>

#include "bowen_press/families.hpp"

namespace bowen {

/// Composite inverse branch h = g_{k_p} o ... o g_{k_1}, continued analytically from the disc centre.
class BranchMap {
 public:
  /// Throws std::domain_error when the continuation is undefined at the anchor.
  BranchMap(const FamilySpec& spec, cplx anchor, std::vector<long> sheet_path);

  const std::vector<long>& sheet_path() const { return path_; }
  /// Image of z; log_deriv receives ln|h*(z)|. Returns nullopt where the continuation is undefined.
  std::optional<cplx> apply(cplx z, double& log_deriv) const;
  cplx anchor_image() const { return anchors_.back(); }

 private:
  FamilySpec spec_;
  std::vector<long> path_;
  std::vector<cplx> anchors_;  ///< anchors_[j] is the image of the disc centre after j steps
};

struct CompositeBranch {
  std::vector<long> sheet_path;
  ExtendedPoint image_center;
  double image_radius = 0.0;   ///< spherical radius of a disc containing h(D)
  double inside_margin = 0.0;  ///< r - d(c, h(c)) - image_radius
  double log_center_deriv = 0.0;
  double log_max_deriv = 0.0;  ///< max of ln|h*| over the samples
};

struct RepellerSystem {
  FamilySpec spec;
  SphericalDisc base_disc;
  std::vector<CompositeBranch> branches;
  double separation_margin = 0.0;
  int samples = 64;
  int path_length = 1;
};

enum class RepellerFailure {
  none,
  too_few_branches,
  mixed_path_lengths,
  disc_meets_postsingular,
  branch_undefined,
  escape_from_disc,
  overlap,
  non_contraction
};
std::string to_string(RepellerFailure f);

struct RepellerBuild {
  std::optional<RepellerSystem> system;
  RepellerFailure failure = RepellerFailure::none;
  std::string detail;
  bool valid() const { return system.has_value(); }
};

/// Checks strict inclusion, pairwise disjointness and contraction on `samples` boundary points.
/// Throws std::invalid_argument for fewer than two sheet paths.
RepellerBuild build_repeller(const FamilySpec& spec, const SphericalDisc& disc,
                             const std::vector<std::vector<long>>& sheet_paths, int samples = 64);

/// Spherical distance from z to the postsingular orbit (depth 32), with infinity added for transcendental maps.
double postsingular_distance(const FamilySpec& spec, const ExtendedPoint& z);

/// All sheet paths of the given length (sheets |k| <= max_sheet, or 0/1 for quad) whose centre image lies in the disc.
std::vector<std::vector<long>> paths_into_disc(const FamilySpec& spec, const SphericalDisc& disc, int length,
                                               int max_sheet);

/// ln|h_w*(v)| at the disc centre for every word of the given depth, plus the sampled distortion ln K_d.
struct WordSums {
  int depth = 1;
  int path_length = 1;
  std::vector<double> center_log_derivs;
  double log_distortion = 0.0;
};

WordSums word_sums(const RepellerSystem& system, int depth, int threads = 1);
/// Single-scale toy: m branches with constant ln|h*| = log_ratio.
WordSums moran_word_sums(int branches, double log_ratio, int depth);

struct SubsystemPressureValue {
  double t = 0.0;
  int word_depth = 1;
  double value = 0.0, lower = 0.0, upper = 0.0;  ///< per word step
  double per_iterate = 0.0, per_iterate_lower = 0.0, per_iterate_upper = 0.0;
};

SubsystemPressureValue subsystem_pressure(const WordSums& sums, double t);
SubsystemPressureValue subsystem_pressure(const RepellerSystem& system, double t, int word_depth, int threads = 1);

struct DimensionBracket {
  double estimate = 0.0, lower = 0.0, upper = 0.0;
};

/// Zero of the word-sum pressure (central, lower and upper curves) on [0, 2].
DimensionBracket subsystem_dimension(const WordSums& sums, double tol);
DimensionBracket subsystem_dimension(const RepellerSystem& system, double tol, int word_depth, int threads = 1);

struct PhypCandidate {
  ExtendedPoint center;
  double radius = 0.0;
  int period = 1;
  int branch_count = 0;
  bool valid = false;
  RepellerFailure failure = RepellerFailure::none;
  SubsystemPressureValue pressure;
};

struct PhypReport {
  double t = 0.0;
  double value = 0.0;  ///< best per-iterate central value; -inf when nothing valid was found
  double lower = 0.0, upper = 0.0;
  int candidates_tried = 0;
  int valid_systems = 0;
  std::optional<RepellerSystem> best;
  std::vector<PhypCandidate> candidates;
};

/// Searches discs about Julia samples; budget caps the number of candidate (centre, radius, period) triples.
PhypReport phyp_lower_bound(const FamilySpec& spec, double t, int search_budget, int threads = 1, int samples = 64);

}  // namespace bowen
