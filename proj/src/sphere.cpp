#include "bowen_press/sphere.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <fmt/format.h>

namespace bowen {

ExtendedPoint::ExtendedPoint(cplx z) {
  if (std::isnan(z.real()) || std::isnan(z.imag()))
    throw std::invalid_argument("ExtendedPoint: NaN component");
  if (std::isinf(z.real()) || std::isinf(z.imag())) {
    infinite_ = true;
    return;
  }
  z_ = z;
}

ExtendedPoint ExtendedPoint::infinity() {
  ExtendedPoint p;
  p.infinite_ = true;
  return p;
}

cplx ExtendedPoint::value() const {
  if (infinite_) throw std::domain_error("ExtendedPoint: value() at infinity");
  return z_;
}

ExtendedPoint chart_flip(const ExtendedPoint& z) {
  if (z.is_infinite()) return ExtendedPoint(0.0);
  const cplx v = z.value();
  if (v == cplx(0.0, 0.0)) return ExtendedPoint::infinity();
  return ExtendedPoint(1.0 / v);
}

double sph_distance(const ExtendedPoint& z1, const ExtendedPoint& z2) {
  if (z1.is_infinite() && z2.is_infinite()) return 0.0;
  if (z1.is_infinite() || z2.is_infinite()) {
    const cplx v = z1.is_infinite() ? z2.value() : z1.value();
    return 2.0 * std::atan2(1.0, std::abs(v));
  }
  cplx a = z1.value();
  cplx b = z2.value();
  // far from the origin the 1/z chart keeps 1 + conj(a) b well conditioned
  if (std::abs(a) > 2.0 && std::abs(b) > 2.0) {
    a = 1.0 / a;
    b = 1.0 / b;
  }
  return 2.0 * std::atan2(std::abs(a - b), std::abs(1.0 + std::conj(a) * b));
}

double log1p_abs2(cplx z) {
  const double r = std::abs(z);
  if (r > 1.0) return 2.0 * std::log(r) + std::log1p(1.0 / (r * r));
  return std::log1p(r * r);
}

ExtendedPoint rotate_from_origin(const ExtendedPoint& c, const ExtendedPoint& z) {
  if (c.is_infinite()) return chart_flip(z);
  const cplx cv = c.value();
  if (z.is_infinite()) {
    if (cv == cplx(0.0, 0.0)) return z;
    return ExtendedPoint(-1.0 / std::conj(cv));
  }
  const cplx zv = z.value();
  const cplx den = 1.0 - std::conj(cv) * zv;
  if (den == cplx(0.0, 0.0)) return ExtendedPoint::infinity();
  return ExtendedPoint((zv + cv) / den);
}

ExtendedPoint rotate_to_origin(const ExtendedPoint& c, const ExtendedPoint& z) {
  if (c.is_infinite()) return chart_flip(z);
  const cplx cv = c.value();
  if (z.is_infinite()) {
    if (cv == cplx(0.0, 0.0)) return z;
    return ExtendedPoint(1.0 / std::conj(cv));
  }
  const cplx zv = z.value();
  const cplx den = 1.0 + std::conj(cv) * zv;
  if (den == cplx(0.0, 0.0)) return ExtendedPoint::infinity();
  return ExtendedPoint((zv - cv) / den);
}

SphericalDisc::SphericalDisc(ExtendedPoint center, double radius) : center_(center), radius_(radius) {
  if (!(radius > 0.0 && radius <= std::numbers::pi))
    throw std::invalid_argument("SphericalDisc: radius must lie in (0, pi]");
}

ExtendedPoint SphericalDisc::boundary_point(double theta, double scale) const {
  const double rho = std::tan(0.5 * radius_ * scale);
  return rotate_from_origin(center_, ExtendedPoint(std::polar(rho, theta)));
}

DerivativeMagnitude sph_derivative(cplx z, cplx gz, double euclid_deriv_log) {
  if (!std::isfinite(euclid_deriv_log)) throw std::invalid_argument("sph_derivative: non-finite log derivative");
  return {euclid_deriv_log + log1p_abs2(z) - log1p_abs2(gz), DerivativeKind::spherical};
}

namespace {

double parse_real(const std::string& s, const std::string& whole) {
  if (s.empty() || s == "+") return 1.0;
  if (s == "-") return -1.0;
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("cannot parse complex number '" + whole + "'");
  }
  if (used != s.size()) throw std::invalid_argument("cannot parse complex number '" + whole + "'");
  return v;
}

}  // namespace

ExtendedPoint parse_point(const std::string& text) {
  std::string s;
  for (char ch : text)
    if (ch != ' ') s.push_back(ch);
  if (s.empty()) throw std::invalid_argument("empty complex number");
  if (s == "inf" || s == "Inf" || s == "infinity" || s == "+inf") return ExtendedPoint::infinity();
  if (s.back() != 'i' && s.back() != 'j') return ExtendedPoint(parse_real(s, text), 0.0);
  s.pop_back();
  // split at the last sign that is not an exponent sign
  std::size_t split = std::string::npos;
  for (std::size_t k = s.size(); k-- > 1;) {
    if ((s[k] == '+' || s[k] == '-') && s[k - 1] != 'e' && s[k - 1] != 'E') {
      split = k;
      break;
    }
  }
  if (split == std::string::npos) return ExtendedPoint(0.0, parse_real(s, text));
  return ExtendedPoint(parse_real(s.substr(0, split), text), parse_real(s.substr(split), text));
}

std::string format_point(const ExtendedPoint& z) {
  if (z.is_infinite()) return "inf";
  const cplx v = z.value();
  return fmt::format("{:.17g}{:+.17g}i", v.real(), v.imag());
}

}  // namespace bowen
