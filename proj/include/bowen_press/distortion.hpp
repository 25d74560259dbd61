#pragma once
// Sampled checks of the distortion estimates: classical and spherical Koebe, the Eremenko-Lyubich
// bound in logarithmic tracts, tract growth of |f*| and the inverse-branch sandwich.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bowen_press/families.hpp"

namespace bowen {

/// Relative floating-point slack allowed on proven inequalities.
inline constexpr double kProvenSlack = 1e-9;

/// Outcome of one inequality over a sample set.
struct InequalityTally {
  std::string name;
  long evaluated = 0;
  long violations = 0;
  double worst = 0.0;  ///< max of observed / allowed, oriented so that values above 1 + slack violate
  bool holds() const { return violations == 0; }
};

// ---- classical Koebe ----

enum class UnivalentKind { affine, inversion, exponential, koebe_extremal };
std::string to_string(UnivalentKind kind);

/// A univalent map on the Euclidean disc D(center, radius) and a test offset with |offset| <= 1.
struct UnivalentSample {
  UnivalentKind kind = UnivalentKind::affine;
  cplx coeff{1.0, 0.0};  ///< affine slope, exp prefactor, or extremal rotation e^{i theta}
  cplx shift{0.0, 0.0};  ///< affine offset or inversion pole
  cplx center{0.0, 0.0};
  double radius = 1.0;
  cplx offset{0.0, 0.0};

  cplx value(cplx z) const;
  cplx derivative(cplx z) const;
};

struct KoebePoint {
  double deriv_ratio = 1.0;  ///< |g'(z)| / |g'(z0)| at z = center + lambda * radius * offset
  double deriv_lower = 1.0, deriv_upper = 1.0;
  double displacement = 0.0;  ///< |g(z) - g(z0)|
  double disp_lower = 0.0, disp_upper = 0.0;
};

/// (1-l)/(1+l)^3 and (1+l)/(1-l)^3.
std::pair<double, double> koebe_derivative_bounds(double lambda);
KoebePoint koebe_point(const UnivalentSample& sample, double lambda);

std::vector<UnivalentSample> sample_univalent_maps(long count, std::uint64_t seed);

struct KoebeReport {
  long samples = 0;
  std::vector<double> lambdas;
  std::vector<InequalityTally> checks;
  bool passed() const;
};

KoebeReport verify_koebe(const std::vector<UnivalentSample>& samples, const std::vector<double>& lambdas,
                         int threads = 1);
/// Lambdas 0.25, 0.5, 0.75.
KoebeReport verify_koebe(long samples, std::uint64_t seed, int threads = 1);

// ---- spherical Koebe ----

enum class SphericalMapKind { rotation, dilation, quadratic_branch };
std::string to_string(SphericalMapKind kind);

inline constexpr std::size_t kSphericalCoords = 9;
inline constexpr int kDefaultRefineSteps = 1000;

/// A univalent map on the spherical disc D(center, radius), plus two offsets in the unit disc that place
/// z1, z2 inside the shrunken disc of radius lambda * radius.
struct SphericalSample {
  SphericalMapKind kind = SphericalMapKind::rotation;
  cplx param{0.0, 0.0};  ///< rotation target, dilation factor, or critical value of z^2 + c
  ExtendedPoint center;
  double radius = 0.5;
  cplx offset1{0.0, 0.0}, offset2{0.0, 0.0};
  double complement_diameter = 0.0;  ///< lower bound for diam of the complement of g(D)
  std::array<double, kSphericalCoords> coords{};  ///< sampling coordinates, see make_spherical_sample

  /// Image and ln|g*| at a finite point of the disc.
  cplx value(cplx z, double& log_sph_deriv) const;
};

/// |g*(z1)| / |g*(z2)| for the sample's offsets at the given lambda.
double spherical_koebe_ratio(const SphericalSample& sample, double lambda);

/// Coordinates: centre polar-angle fraction and longitude, radius, two (modulus, angle) offsets, two map
/// parameters in [-2, 2] (rotation target, dilation log-factor, or distance and bearing of the critical value
/// from the centre). Values are clamped to their boxes, so every admissible disc stays 1.001 r away from the
/// points its map must avoid.
std::optional<SphericalSample> make_spherical_sample(SphericalMapKind kind,
                                                     const std::array<double, kSphericalCoords>& coords);

std::vector<SphericalSample> sample_spherical_maps(long count, std::uint64_t seed,
                                                   const std::vector<SphericalMapKind>& kinds);

/// Smallest c with ratio <= c / (1 - lambda)^4 over the samples in one (r1, r2) bucket, after a local
/// hill-climb from the largest sampled ratios.
struct SphericalKoebeFit {
  double diameter_cap = 0.0;     ///< r1: diam D < r1
  double complement_floor = 0.0; ///< r2: diam of the image complement > r2
  double lambda = 0.0;
  long samples_used = 0;
  double max_ratio = 1.0;
  double fitted_c = 0.0;
};

struct SphericalKoebeReport {
  long samples = 0;
  std::vector<SphericalKoebeFit> fits;
};

SphericalKoebeReport verify_spherical_koebe(const std::vector<SphericalSample>& samples,
                                            const std::vector<double>& lambdas, int threads = 1,
                                            int refine_steps = kDefaultRefineSteps);
/// Buckets r1 in {1, 2} x r2 in {1, 2.5}; lambdas 0.25, 0.5, 0.75, 0.9; every map kind.
SphericalKoebeReport verify_spherical_koebe(long samples, std::uint64_t seed, int threads = 1);

/// Largest relative change of the fitted constants between the two reports (matching buckets).
double fit_drift(const SphericalKoebeReport& a, const SphericalKoebeReport& b);

// ---- logarithmic tracts over infinity ----

/// Tract of lambda*exp over infinity, or of h o (lambda*tan) with h a sphere rotation taking i*lambda to
/// infinity. The tract is U = {|g| > level}.
class TractChart {
 public:
  /// Throws std::invalid_argument for the quadratic family or a level too small for U to avoid 0 and the
  /// other singular value.
  TractChart(const FamilySpec& family, double level);

  const FamilySpec& family() const { return family_; }
  double level() const { return level_; }
  /// Smallest admissible level for this family.
  static double minimum_level(const FamilySpec& family);

  cplx value(cplx z) const;
  cplx derivative(cplx z) const;
  double log_sph_derivative(cplx z) const;
  /// Logarithmic lift F with exp o F = g o exp.
  cplx lift(cplx w) const;
  cplx lift_derivative(cplx w) const;
  /// Translation between consecutive preimage sheets.
  cplx period() const;
  /// Preimage of zeta on the given sheet (|zeta| > level).
  cplx preimage(cplx zeta, long sheet) const;
  /// Continues the preimage z_from of zeta_from along the path that first turns at constant modulus
  /// (counterclockwise if turn > 0, clockwise otherwise) and then moves radially to zeta_to.
  cplx continue_preimage(cplx zeta_from, cplx z_from, cplx zeta_to, int turn) const;

 private:
  cplx nearest_preimage(cplx zeta, cplx near) const;

  FamilySpec family_;
  double level_;
  cplx lambda_;
  cplx pole_;  ///< rotated asymptotic value for the tangent chart
};

/// ln L / (4 pi ln(LR) (1 + (LR)^-2)): a valid constant in |g*(z)| > c |z| ln|g| / |g| when |g| > LR.
double tract_growth_constant(double level, double ratio);

struct TractReport {
  double level = 0.0;
  double ratio = 2.0;  ///< L
  std::vector<InequalityTally> checks;
  bool passed() const;
};

/// Both forms of the Eremenko-Lyubich bound plus the lift identity exp o F = g o exp (to 1e-10).
TractReport verify_el_bound(const TractChart& chart, long samples, std::uint64_t seed, int threads = 1);
/// |g*(z)| > c |z| ln|g(z)| / |g(z)| for |g(z)| > L * level with c from tract_growth_constant.
TractReport verify_tract_growth(const TractChart& chart, double ratio, long samples, std::uint64_t seed,
                                int threads = 1);

/// Fitted constants for the inverse-branch sandwich and the modulus bound, per branch extension.
struct SandwichReport {
  double level = 0.0;
  double ratio = 2.0;
  long pairs = 0;
  double fit_counterclockwise = 0.0;
  double fit_clockwise = 0.0;
  double fit_best = 0.0;          ///< per pair the better extension, then max over pairs
  double modulus_fit_best = 0.0;  ///< same for |g(z1)|/|g(z2)| against (ln|z1|/ln|z2|)^{+-4 pi}
};

/// Required sandwich constant for one pair and one branch value at each point (ln|g*| given).
double sandwich_constant(cplx z1, cplx z2, double log_sph_deriv1, double log_sph_deriv2);
double modulus_constant(cplx z1, cplx z2, cplx g1, cplx g2);

/// Pairs satisfy |z1| >= |z2| >= L * level with both moduli within a factor 1e3 of the lower end; sheets
/// |k| <= 3. Fits include a local climb from the largest sampled constants.
SandwichReport verify_tract_sandwich(const TractChart& chart, double ratio, long pairs, std::uint64_t seed,
                                     int threads = 1, int refine_steps = kDefaultRefineSteps);

}  // namespace bowen
