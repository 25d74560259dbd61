#pragma once
// Independent reference computations for the tests. None of these call into the library.

#include <cmath>
#include <complex>
#include <numbers>

namespace bowen::test {

using cd = std::complex<double>;

/// Spherical distance via the chord of the unit-diameter-2 sphere: d = 2 asin(chord / 2).
inline double chord_distance(cd a, cd b) {
  const double chord = 2.0 * std::abs(a - b) / std::sqrt((1.0 + std::norm(a)) * (1.0 + std::norm(b)));
  return 2.0 * std::asin(std::min(1.0, chord / 2.0));
}

/// sum_{|k| <= kmax} |f*(w_k)|^{-t} for lambda*exp at z, by brute force in long double.
inline long double exp_level_sum(cd lambda, cd z, double t, long kmax) {
  const cd base = std::log(z / lambda);
  const long double az = std::abs(z), scale = az / (1.0L + az * az);
  long double s = 0.0L;
  for (long k = kmax; k >= -kmax; --k) {
    const long double re = base.real();
    const long double im = base.imag() + 2.0L * std::numbers::pi_v<long double> * k;
    const long double deriv = (1.0L + re * re + im * im) * scale;
    s += std::pow(deriv, -static_cast<long double>(t));
  }
  return s;
}

/// Same for lambda*tan: preimages arctan(z/lambda) + pi k, |f'| = |lambda| |1 + (z/lambda)^2|.
inline long double tan_level_sum(cd lambda, cd z, double t, long kmax) {
  const cd u = z / lambda;
  const cd base = std::atan(u);
  const long double fprime = std::abs(lambda) * std::abs(1.0 + u * u);
  const long double az2 = std::norm(z);
  long double s = 0.0L;
  for (long k = kmax; k >= -kmax; --k) {
    const long double re = base.real() + std::numbers::pi_v<long double> * k, im = base.imag();
    const long double deriv = (1.0L + re * re + im * im) * fprime / (1.0L + az2);
    s += std::pow(deriv, -static_cast<long double>(t));
  }
  return s;
}

/// ln S_n for z^2 at a point of the unit circle: n (1 - t) ln 2.
inline double circle_log_sum(int n, double t) { return n * (1.0 - t) * std::numbers::ln2; }

/// Moran dimension ln m / ln(1/r).
inline double moran_dimension(int m, double r) { return std::log(static_cast<double>(m)) / std::log(1.0 / r); }

/// Real attracting fixed point of x = lambda e^x for 0 < lambda < 1/e (Newton from 0).
inline double exp_fixed_point(double lambda) {
  double x = 0.0;
  for (int i = 0; i < 100; ++i) x -= (x - lambda * std::exp(x)) / (1.0 - lambda * std::exp(x));
  return x;
}

}  // namespace bowen::test
