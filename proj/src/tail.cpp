#include "bowen_press/tail.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/special_functions/beta.hpp>

namespace bowen {

namespace {

// s0 >= 2: expand (1+s^2)^{-t} = s^{-2t} (1+s^{-2})^{-t} and integrate term by term.
double log_tail_far(double s0, double t) {
  const double q = 1.0 / (s0 * s0);
  double coeff = 1.0;  // binom(-t, j) q^j
  double sum = 0.0;
  for (int j = 0; j < 400; ++j) {
    const double term = coeff / (2.0 * t + 2.0 * j - 1.0);
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
    coeff *= -(t + j) / (j + 1.0) * q;
  }
  return (1.0 - 2.0 * t) * std::log(s0) + std::log(sum);
}

// s0 <= 1/2: full integral minus the head, the head summed as a power series in s0^2.
double log_tail_near(double s0, double t) {
  const double full = 0.5 * std::sqrt(std::numbers::pi) * std::exp(std::lgamma(t - 0.5) - std::lgamma(t));
  const double q = s0 * s0;
  double coeff = 1.0;
  double head = 0.0;
  for (int j = 0; j < 400; ++j) {
    const double term = coeff * s0 / (2.0 * j + 1.0);
    head += term;
    if (std::abs(term) < 1e-17 * std::abs(head) || term == 0.0) break;
    coeff *= -(t + j) / (j + 1.0) * q;
  }
  return std::log(full - head);
}

}  // namespace

double log_tail_integral(double s0, double t) {
  if (!(t > 0.5)) return std::numeric_limits<double>::infinity();
  if (s0 < 0.0) s0 = 0.0;
  if (s0 >= 2.0) return log_tail_far(s0, t);
  if (s0 <= 0.5) return log_tail_near(s0, t);
  // substitution u = 1/(1+s^2) turns the integral into B(u0; t - 1/2, 1/2) / 2
  const double u0 = 1.0 / (1.0 + s0 * s0);
  return std::log(0.5 * boost::math::beta(t - 0.5, 0.5, u0));
}

}  // namespace bowen
