#pragma once
// Riemann sphere geometry: points, spherical distance, discs, spherical derivative.
// Metric normalization ds = 2|dz|/(1+|z|^2); the sphere has diameter pi.

#include <complex>
#include <string>

namespace bowen {

using cplx = std::complex<double>;

/// A point of the Riemann sphere. Infinity has exactly one representation.
class ExtendedPoint {
 public:
  ExtendedPoint() = default;
  /// Non-finite components collapse to infinity; NaN is rejected.
  ExtendedPoint(cplx z);  // NOLINT(google-explicit-constructor)
  ExtendedPoint(double re, double im = 0.0) : ExtendedPoint(cplx(re, im)) {}

  static ExtendedPoint infinity();

  bool is_infinite() const { return infinite_; }
  bool is_finite() const { return !infinite_; }
  /// Finite value. Throws std::domain_error at infinity.
  cplx value() const;

  friend bool operator==(const ExtendedPoint& a, const ExtendedPoint& b) {
    if (a.infinite_ || b.infinite_) return a.infinite_ == b.infinite_;
    return a.z_ == b.z_;
  }

 private:
  cplx z_{0.0, 0.0};
  bool infinite_ = false;
};

/// 1/z with 0 <-> infinity.
ExtendedPoint chart_flip(const ExtendedPoint& z);

/// Spherical distance in [0, pi].
double sph_distance(const ExtendedPoint& z1, const ExtendedPoint& z2);

/// ln(1 + |z|^2) without overflow for huge |z|.
double log1p_abs2(cplx z);

/// Spherical isometry taking 0 to c: z -> (z + c)/(1 - conj(c) z).
ExtendedPoint rotate_from_origin(const ExtendedPoint& c, const ExtendedPoint& z);
/// Inverse of rotate_from_origin: takes c to 0.
ExtendedPoint rotate_to_origin(const ExtendedPoint& c, const ExtendedPoint& z);

class SphericalDisc {
 public:
  /// radius in spherical radians, (0, pi].
  SphericalDisc(ExtendedPoint center, double radius);

  const ExtendedPoint& center() const { return center_; }
  double radius() const { return radius_; }
  bool contains(const ExtendedPoint& z) const { return sph_distance(center_, z) < radius_; }
  /// Point at spherical distance radius*scale from the center, direction angle theta.
  ExtendedPoint boundary_point(double theta, double scale = 1.0) const;

 private:
  ExtendedPoint center_;
  double radius_;
};

enum class DerivativeKind { spherical, euclidean };

struct DerivativeMagnitude {
  double log_magnitude = 0.0;
  DerivativeKind kind = DerivativeKind::spherical;
};

/// |g*(z)| from ln|g'(z)| and the endpoint values z, g(z) (both finite).
DerivativeMagnitude sph_derivative(cplx z, cplx gz, double euclid_deriv_log);

/// Parses "a+bi", "a-bi", "bi", "a", "i", "inf".
ExtendedPoint parse_point(const std::string& text);
std::string format_point(const ExtendedPoint& z);

}  // namespace bowen
