#pragma once

namespace bowen {

/// ln of the integral of (1+s^2)^{-t} over [s0, inf); s0 >= 0, t > 1/2 (+inf otherwise).
double log_tail_integral(double s0, double t);

}  // namespace bowen
