#pragma once
// Built-in map families: lambda*exp(z), lambda*tan(z) and the quadratic test map z^2 + c.

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "bowen_press/sphere.hpp"

namespace bowen {

enum class FamilyKind { exponential, tangent, quadratic };

std::string to_string(FamilyKind kind);
FamilyKind parse_family_kind(const std::string& name);

class FamilySpec {
 public:
  /// Throws std::invalid_argument for a zero parameter on the transcendental kinds.
  FamilySpec(FamilyKind kind, cplx parameter);

  static FamilySpec exponential(cplx lambda) { return {FamilyKind::exponential, lambda}; }
  static FamilySpec tangent(cplx lambda) { return {FamilyKind::tangent, lambda}; }
  static FamilySpec quadratic(cplx c) { return {FamilyKind::quadratic, c}; }

  FamilyKind kind() const { return kind_; }
  cplx parameter() const { return parameter_; }
  bool transcendental() const { return kind_ != FamilyKind::quadratic; }

 private:
  FamilyKind kind_;
  cplx parameter_;
};

/// Level-one sums diverge for t at or below this value.
double level_divergence_threshold(const FamilySpec& spec);
/// Sums of depth >= 2 diverge at or below this value (1 for exp: far sheets carry |w|^{-t} edges).
double deep_divergence_threshold(const FamilySpec& spec);

struct SingularData {
  std::vector<ExtendedPoint> singular_values;
  std::vector<ExtendedPoint> omitted_values;
  std::vector<std::string> tags;  ///< one per singular value: "asymptotic" or "critical"
};

SingularData singular_values(const FamilySpec& spec);

/// Throws std::domain_error where the map is undefined (transcendental kinds at infinity).
ExtendedPoint evaluate(const FamilySpec& spec, const ExtendedPoint& z);
/// Euclidean f'(z) at a finite point.
cplx derivative(const FamilySpec& spec, cplx z);

struct InverseBranch {
  long index = 0;
  ExtendedPoint point;
  DerivativeMagnitude sph_deriv;  ///< |f*| at the preimage
};

struct TailBound {
  int cutoff = 0;
  double t = 0.0;
  double log_tail_upper = -std::numeric_limits<double>::infinity();
  bool divergent = false;
};

struct BranchSet {
  std::vector<InverseBranch> branches;
  TailBound tail;
  bool omitted = false;
};

/// Preimages of z with |k| <= cutoff plus a bound on the weight mass sum_{|k|>K} |f*(w_k)|^{-t}.
BranchSet inverse_branches(const FamilySpec& spec, const ExtendedPoint& z, int cutoff, double t);

/// Preimages of a transcendental map form a lattice w_k = base + k*step; |f'| is the same on all of them.
struct SheetLattice {
  cplx base;
  cplx step;
  double log_scale = 0.0;  ///< ln(1+|z|^2) - ln|f'(w_k)|

  cplx point(double k) const { return base + step * k; }
  /// ln|f*(w)| along the lattice (also used at non-integer k by the far-sheet quadrature).
  double log_sph_deriv(cplx w) const { return log1p_abs2(w) - log_scale; }
  double period() const { return std::abs(step); }
  /// Offset of the principal preimage along the lattice, |.| <= period/2.
  double along() const;
  /// Distance of the lattice line from the origin.
  double transverse() const;
};

/// Empty for omitted values and for the quadratic kind.
std::optional<SheetLattice> sheet_lattice(const FamilySpec& spec, cplx z);

/// ln of a sound upper bound on sum_{|k|>K} |f*(w_k)|^{-t}; +inf when t <= 1/2.
double log_lattice_tail_bound(const SheetLattice& lattice, double cutoff, double t);
/// ln of a sound lower bound on the same tail.
double log_lattice_tail_lower(const SheetLattice& lattice, double cutoff, double t);
/// ln of the midpoint-rule estimate of the same tail.
double log_lattice_tail_estimate(const SheetLattice& lattice, double cutoff, double t);

struct OrbitTable {
  std::vector<std::vector<ExtendedPoint>> rows;  ///< row n: f^n of each singular value
  std::vector<std::vector<bool>> escaped;
};

inline constexpr double kWorkingRadius = 1e12;

OrbitTable postsingular_orbit(const FamilySpec& spec, int depth);

struct GPSReport {
  ExtendedPoint z;
  std::vector<double> distances;  ///< d(z, P_n) for n = 1..N
  std::vector<double> slopes;     ///< -ln d(z, P_n) / n
  bool in_postsingular_set = false;
  bool consistent_with_gps = false;
};

GPSReport gps_check(const ExtendedPoint& z, const OrbitTable& table);

struct CycleReport {
  ExtendedPoint singular_value;
  bool escaped = false;
  bool converged = false;
  int period = 0;
  std::vector<cplx> cycle;
  double multiplier_modulus = 0.0;
  double tail_distance = 0.0;  ///< spherical distance of the last orbit point to the cycle
};

struct HyperbolicityReport {
  bool attracting_cycles_found = false;
  std::vector<CycleReport> orbits;
  std::vector<cplx> julia_samples;
  double min_cycle_julia_distance = 0.0;
};

HyperbolicityReport hyperbolicity_probe(const FamilySpec& spec, int depth);

}  // namespace bowen
