#include "bowen_press/distortion.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include "bowen_press/parallel.hpp"

namespace bowen {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::size_t kRefineStarts = 8;

/// Uniform in [0, 1) from the top 53 bits, identical on every platform.
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double uniform(std::mt19937_64& rng, double a, double b) { return a + (b - a) * unit(rng); }

cplx unit_disc_point(std::mt19937_64& rng, double boundary_share) {
  const double theta = uniform(rng, -kPi, kPi);
  const double rho = unit(rng) < boundary_share ? 1.0 : std::sqrt(unit(rng));
  return std::polar(rho, theta);
}

/// Accumulates observed / allowed ratios for one inequality; ratio > 1 + slack counts as a violation.
struct Tally {
  InequalityTally out;
  explicit Tally(std::string name) { out.name = std::move(name); }
  void add(double ratio) {
    ++out.evaluated;
    if (!(ratio <= 1.0 + kProvenSlack)) ++out.violations;
    if (std::isnan(ratio))
      out.worst = std::numeric_limits<double>::infinity();
    else
      out.worst = std::max(out.worst, ratio);
  }
};

/// An upper bound lhs <= rhs as a ratio.
double upper_ratio(double lhs, double rhs) { return lhs / rhs; }
/// A lower bound lhs >= rhs as a ratio.
double lower_ratio(double lhs, double rhs) { return rhs / lhs; }

/// Coordinate pattern search inside a box, restarted from random kicks around the best point until the budget
/// (objective evaluations) is spent. The objective returns nullopt outside its feasible set.
template <std::size_t N, class Objective>
std::pair<std::array<double, N>, double> pattern_climb(std::array<double, N> best, double best_value,
                                                       const std::array<std::pair<double, double>, N>& box,
                                                       Objective&& objective, int budget, std::mt19937_64& rng) {
  int evals = 0;
  std::array<double, N> x = best;
  double fx = best_value;
  while (evals < budget) {
    std::array<double, N> step{};
    for (std::size_t i = 0; i < N; ++i) step[i] = 0.1 * (box[i].second - box[i].first);
    while (evals < budget) {
      double largest = 0.0;
      for (std::size_t i = 0; i < N && evals < budget; ++i) {
        const double width = box[i].second - box[i].first;
        bool moved = false;
        for (double sign : {1.0, -1.0}) {
          std::array<double, N> y = x;
          y[i] = std::clamp(x[i] + sign * step[i], box[i].first, box[i].second);
          if (y[i] == x[i]) continue;
          ++evals;
          const std::optional<double> fy = objective(y);
          if (fy && *fy > fx) {
            x = y;
            fx = *fy;
            moved = true;
            break;
          }
        }
        step[i] = moved ? std::min(2.0 * step[i], 0.5 * width) : 0.5 * step[i];
        largest = std::max(largest, step[i] / width);
      }
      if (largest < 1e-9) break;
    }
    if (fx > best_value) {
      best = x;
      best_value = fx;
    }
    // kick away from the best point and climb again
    for (int tries = 0; tries < 100 && evals < budget; ++tries) {
      std::array<double, N> y = best;
      for (std::size_t i = 0; i < N; ++i)
        y[i] = std::clamp(y[i] + 0.05 * (box[i].second - box[i].first) * uniform(rng, -1.0, 1.0), box[i].first,
                          box[i].second);
      ++evals;
      if (const auto fy = objective(y)) {
        x = y;
        fx = *fy;
        break;
      }
    }
  }
  return {best, best_value};
}

bool all_hold(const std::vector<InequalityTally>& checks) {
  return std::all_of(checks.begin(), checks.end(), [](const InequalityTally& c) { return c.holds(); });
}

}  // namespace

// ---- classical Koebe ----

std::string to_string(UnivalentKind kind) {
  switch (kind) {
    case UnivalentKind::affine: return "affine";
    case UnivalentKind::inversion: return "inversion";
    case UnivalentKind::exponential: return "exponential";
    case UnivalentKind::koebe_extremal: return "koebe_extremal";
  }
  return "?";
}

cplx UnivalentSample::value(cplx z) const {
  switch (kind) {
    case UnivalentKind::affine: return coeff * z + shift;
    case UnivalentKind::inversion: return 1.0 / (z - shift);
    case UnivalentKind::exponential: return coeff * std::exp(z);
    case UnivalentKind::koebe_extremal: {
      const cplx u = (z - center) / radius;
      const cplx d = 1.0 - coeff * u;
      return u / (d * d);
    }
  }
  return {};
}

cplx UnivalentSample::derivative(cplx z) const {
  switch (kind) {
    case UnivalentKind::affine: return coeff;
    case UnivalentKind::inversion: {
      const cplx d = z - shift;
      return -1.0 / (d * d);
    }
    case UnivalentKind::exponential: return coeff * std::exp(z);
    case UnivalentKind::koebe_extremal: {
      const cplx u = (z - center) / radius;
      const cplx d = 1.0 - coeff * u;
      return (1.0 + coeff * u) / (d * d * d) / radius;
    }
  }
  return {};
}

std::pair<double, double> koebe_derivative_bounds(double lambda) {
  if (!(lambda >= 0.0 && lambda < 1.0)) throw std::invalid_argument("lambda must lie in [0, 1)");
  return {(1.0 - lambda) / std::pow(1.0 + lambda, 3), (1.0 + lambda) / std::pow(1.0 - lambda, 3)};
}

KoebePoint koebe_point(const UnivalentSample& s, double lambda) {
  const auto [lo, hi] = koebe_derivative_bounds(lambda);
  const cplx z = s.center + lambda * s.radius * s.offset;
  const double d0 = std::abs(s.derivative(s.center));
  KoebePoint p;
  p.deriv_ratio = std::abs(s.derivative(z)) / d0;
  p.deriv_lower = lo;
  p.deriv_upper = hi;
  // displacement bounds at the exact relative distance of z
  const double rho = std::abs(z - s.center) / s.radius;
  p.displacement = std::abs(s.value(z) - s.value(s.center));
  p.disp_lower = rho * s.radius / ((1.0 + rho) * (1.0 + rho)) * d0;
  p.disp_upper = rho * s.radius / ((1.0 - rho) * (1.0 - rho)) * d0;
  return p;
}

std::vector<UnivalentSample> sample_univalent_maps(long count, std::uint64_t seed) {
  if (count < 0) throw std::invalid_argument("sample count must be non-negative");
  std::mt19937_64 rng(seed);
  std::vector<UnivalentSample> out;
  out.reserve(static_cast<std::size_t>(count));
  for (long i = 0; i < count; ++i) {
    UnivalentSample s;
    s.kind = static_cast<UnivalentKind>(i % 4);
    s.center = cplx(uniform(rng, -3.0, 3.0), uniform(rng, -3.0, 3.0));
    s.radius = std::exp(uniform(rng, std::log(0.01), std::log(5.0)));
    const double phase = uniform(rng, -kPi, kPi);
    switch (s.kind) {
      case UnivalentKind::affine:
        s.coeff = std::polar(std::exp(uniform(rng, -3.0, 3.0)), phase);
        s.shift = cplx(uniform(rng, -5.0, 5.0), uniform(rng, -5.0, 5.0));
        break;
      case UnivalentKind::inversion:
        s.shift = s.center + std::polar(s.radius * (1.0 + std::exp(uniform(rng, std::log(1e-3), std::log(2.0)))),
                                        phase);
        break;
      case UnivalentKind::exponential:
        s.radius = uniform(rng, 0.01, kPi);
        s.coeff = std::polar(std::exp(uniform(rng, -2.0, 2.0)), phase);
        break;
      case UnivalentKind::koebe_extremal:
        s.coeff = std::polar(1.0, phase);
        break;
    }
    s.offset = unit_disc_point(rng, 0.25);
    out.push_back(s);
  }
  return out;
}

bool KoebeReport::passed() const { return all_hold(checks); }

KoebeReport verify_koebe(const std::vector<UnivalentSample>& samples, const std::vector<double>& lambdas,
                         int threads) {
  const std::size_t nl = lambdas.size();
  std::vector<KoebePoint> pts(samples.size() * nl);
  parallel_for(samples.size(), threads, [&](std::size_t i) {
    for (std::size_t j = 0; j < nl; ++j) pts[i * nl + j] = koebe_point(samples[i], lambdas[j]);
  });
  Tally dl("koebe_derivative_lower"), du("koebe_derivative_upper"), xl("koebe_displacement_lower"),
      xu("koebe_displacement_upper");
  for (const KoebePoint& p : pts) {
    dl.add(lower_ratio(p.deriv_ratio, p.deriv_lower));
    du.add(upper_ratio(p.deriv_ratio, p.deriv_upper));
    if (p.disp_lower > 0.0) xl.add(lower_ratio(p.displacement, p.disp_lower));
    if (p.disp_upper > 0.0) xu.add(upper_ratio(p.displacement, p.disp_upper));
  }
  KoebeReport rep;
  rep.samples = static_cast<long>(samples.size());
  rep.lambdas = lambdas;
  rep.checks = {dl.out, du.out, xl.out, xu.out};
  return rep;
}

KoebeReport verify_koebe(long samples, std::uint64_t seed, int threads) {
  return verify_koebe(sample_univalent_maps(samples, seed), {0.25, 0.5, 0.75}, threads);
}

// ---- spherical Koebe ----

std::string to_string(SphericalMapKind kind) {
  switch (kind) {
    case SphericalMapKind::rotation: return "rotation";
    case SphericalMapKind::dilation: return "dilation";
    case SphericalMapKind::quadratic_branch: return "quadratic_branch";
  }
  return "?";
}

cplx SphericalSample::value(cplx z, double& log_sph_deriv) const {
  cplx g, dg;
  switch (kind) {
    case SphericalMapKind::rotation: {
      // z -> (z + a)/(1 - conj(a) z) is an isometry
      const cplx den = 1.0 - std::conj(param) * z;
      g = (z + param) / den;
      dg = (1.0 + std::norm(param)) / (den * den);
      break;
    }
    case SphericalMapKind::dilation:
      g = param * z;
      dg = param;
      break;
    case SphericalMapKind::quadratic_branch: {
      // branch of sqrt(z - c) continued from the centre
      const cplx c0 = center.value() - param;
      g = std::sqrt(c0) * std::sqrt((z - param) / c0);
      dg = 0.5 / g;
      break;
    }
  }
  log_sph_deriv = std::log(std::abs(dg)) + log1p_abs2(z) - log1p_abs2(g);
  return g;
}

double spherical_koebe_ratio(const SphericalSample& s, double lambda) {
  const auto at = [&](cplx offset) {
    const ExtendedPoint z = rotate_from_origin(s.center, ExtendedPoint(std::tan(0.5 * lambda * s.radius) * offset));
    double ld = 0.0;
    s.value(z.value(), ld);
    return ld;
  };
  return std::exp(at(s.offset1) - at(s.offset2));
}

namespace {

/// Spherical radius of the image of a spherical disc about a finite centre under z -> s z (real s > 0), from
/// the extreme points on the meridian through the centre. The disc must avoid infinity.
double dilated_radius(const ExtendedPoint& center, double radius, double s) {
  const double theta0 = 2.0 * std::atan(std::abs(center.value()));
  const double near = std::tan(0.5 * (theta0 - radius));
  const double far = std::tan(0.5 * (theta0 + radius));
  return std::atan(s * far) - std::atan(s * near);
}

}  // namespace

namespace {

constexpr std::array<std::pair<double, double>, kSphericalCoords> kSphericalBox{{
    {-1.0, 1.0}, {-kPi, kPi}, {0.02, 0.98}, {0.0, 1.0}, {-kPi, kPi}, {0.0, 1.0}, {-kPi, kPi}, {-2.0, 2.0},
    {-2.0, 2.0}}};

}  // namespace

std::optional<SphericalSample> make_spherical_sample(SphericalMapKind kind,
                                                     const std::array<double, kSphericalCoords>& coords) {
  SphericalSample s;
  s.kind = kind;
  for (std::size_t i = 0; i < kSphericalCoords; ++i)
    s.coords[i] = std::clamp(coords[i], kSphericalBox[i].first, kSphericalBox[i].second);
  const auto& c = s.coords;
  s.radius = c[2];
  s.offset1 = std::polar(c[3], c[4]);
  s.offset2 = std::polar(c[5], c[6]);
  // polar angle of the centre; dilations and branches need the disc to stay 1.001 r away from infinity
  const double top = kind == SphericalMapKind::rotation ? kPi : kPi - 1.001 * s.radius;
  s.center = ExtendedPoint(std::polar(std::tan(0.25 * top * (c[0] + 1.0)), c[1]));
  switch (kind) {
    case SphericalMapKind::rotation:
      s.param = std::polar(std::tan(0.5 * std::acos(0.5 * c[7])), 0.5 * kPi * c[8]);
      // the complement of a disc of radius < pi/2 contains antipodal points
      s.complement_diameter = kPi;
      break;
    case SphericalMapKind::dilation: {
      const double factor = std::exp((0.25 * c[7] + 0.5) * std::log(8.0));
      s.param = factor;
      const double image = dilated_radius(s.center, s.radius, factor);
      s.complement_diameter = std::min(kPi, 2.0 * (kPi - image));
      break;
    }
    case SphericalMapKind::quadratic_branch: {
      // critical value at spherical distance between 1.001 r and 1.001 r + 2 from the centre
      const double dist = std::min(1.001 * s.radius + 0.5 * (c[7] + 2.0), kPi);
      const ExtendedPoint cv = rotate_from_origin(s.center, ExtendedPoint(std::polar(std::tan(0.5 * dist), 0.5 * kPi * c[8])));
      if (cv.is_infinite()) return std::nullopt;
      s.param = cv.value();
      // the image misses 0 and infinity
      s.complement_diameter = kPi;
      break;
    }
  }
  return s;
}

std::vector<SphericalSample> sample_spherical_maps(long count, std::uint64_t seed,
                                                   const std::vector<SphericalMapKind>& kinds) {
  if (count < 0) throw std::invalid_argument("sample count must be non-negative");
  if (kinds.empty()) throw std::invalid_argument("no map kinds given");
  std::mt19937_64 rng(seed);
  std::vector<SphericalSample> out;
  out.reserve(static_cast<std::size_t>(count));
  while (static_cast<long>(out.size()) < count) {
    std::array<double, kSphericalCoords> c{};
    for (std::size_t i = 0; i < kSphericalCoords; ++i) c[i] = uniform(rng, kSphericalBox[i].first, kSphericalBox[i].second);
    // a quarter of the test points sit on the boundary of the shrunken disc
    if (unit(rng) < 0.25) c[3] = 1.0;
    if (unit(rng) < 0.25) c[5] = 1.0;
    c[3] = std::sqrt(c[3]);
    c[5] = std::sqrt(c[5]);
    if (auto smp = make_spherical_sample(kinds[out.size() % kinds.size()], c)) out.push_back(*smp);
  }
  return out;
}

SphericalKoebeReport verify_spherical_koebe(const std::vector<SphericalSample>& samples,
                                            const std::vector<double>& lambdas, int threads, int refine_steps) {
  for (double l : lambdas)
    if (!(l > 0.0 && l < 1.0)) throw std::invalid_argument("lambda must lie in (0, 1)");
  const std::size_t nl = lambdas.size();
  std::vector<double> ratios(samples.size() * nl);
  parallel_for(samples.size(), threads, [&](std::size_t i) {
    for (std::size_t j = 0; j < nl; ++j) ratios[i * nl + j] = spherical_koebe_ratio(samples[i], lambdas[j]);
  });
  SphericalKoebeReport rep;
  rep.samples = static_cast<long>(samples.size());
  struct Start {
    std::size_t fit, sample;
  };
  std::vector<Start> starts;
  for (double r1 : {1.0, 2.0})
    for (double r2 : {1.0, 2.5})
      for (std::size_t j = 0; j < nl; ++j) {
        SphericalKoebeFit fit;
        fit.diameter_cap = r1;
        fit.complement_floor = r2;
        fit.lambda = lambdas[j];
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < samples.size(); ++i) {
          if (!(2.0 * samples[i].radius < r1 && samples[i].complement_diameter > r2)) continue;
          members.push_back(i);
          fit.max_ratio = std::max(fit.max_ratio, ratios[i * nl + j]);
        }
        fit.samples_used = static_cast<long>(members.size());
        const std::size_t top = std::min<std::size_t>(kRefineStarts, members.size());
        std::partial_sort(members.begin(), members.begin() + static_cast<std::ptrdiff_t>(top), members.end(),
                          [&](std::size_t a, std::size_t b) {
                            const double ra = ratios[a * nl + j], rb = ratios[b * nl + j];
                            return ra != rb ? ra > rb : a < b;
                          });
        for (std::size_t k = 0; k < top; ++k) starts.push_back({rep.fits.size(), members[k]});
        rep.fits.push_back(fit);
      }
  // climb from the largest ratios of every bucket, staying inside the bucket
  std::vector<SphericalSample> refined(starts.size());
  parallel_for(starts.size(), threads, [&](std::size_t k) {
    const SphericalKoebeFit& fit = rep.fits[starts[k].fit];
    const SphericalSample& seed_sample = samples[starts[k].sample];
    std::mt19937_64 rng(0x9e3779b97f4a7c15ULL * (k + 1));
    const auto objective = [&](const std::array<double, kSphericalCoords>& c) -> std::optional<double> {
      const auto cand = make_spherical_sample(seed_sample.kind, c);
      if (!cand || !(2.0 * cand->radius < fit.diameter_cap && cand->complement_diameter > fit.complement_floor))
        return std::nullopt;
      return spherical_koebe_ratio(*cand, fit.lambda);
    };
    const auto [coords, ratio] = pattern_climb(seed_sample.coords, spherical_koebe_ratio(seed_sample, fit.lambda),
                                               kSphericalBox, objective, refine_steps, rng);
    (void)ratio;
    const auto best = make_spherical_sample(seed_sample.kind, coords).value_or(seed_sample);
    refined[k] = best;
  });
  // a climbed sample counts for every bucket it belongs to, at every lambda
  for (SphericalKoebeFit& fit : rep.fits)
    for (const SphericalSample& r : refined)
      if (2.0 * r.radius < fit.diameter_cap && r.complement_diameter > fit.complement_floor)
        fit.max_ratio = std::max(fit.max_ratio, spherical_koebe_ratio(r, fit.lambda));
  for (SphericalKoebeFit& fit : rep.fits) fit.fitted_c = fit.max_ratio * std::pow(1.0 - fit.lambda, 4);
  return rep;
}

SphericalKoebeReport verify_spherical_koebe(long samples, std::uint64_t seed, int threads) {
  const std::vector<SphericalMapKind> kinds{SphericalMapKind::rotation, SphericalMapKind::dilation,
                                            SphericalMapKind::quadratic_branch};
  return verify_spherical_koebe(sample_spherical_maps(samples, seed, kinds), {0.25, 0.5, 0.75, 0.9}, threads,
                                kDefaultRefineSteps);
}

double fit_drift(const SphericalKoebeReport& a, const SphericalKoebeReport& b) {
  if (a.fits.size() != b.fits.size()) throw std::invalid_argument("reports have different buckets");
  double drift = 0.0;
  for (std::size_t i = 0; i < a.fits.size(); ++i) {
    if (a.fits[i].samples_used == 0 || b.fits[i].samples_used == 0) continue;
    drift = std::max(drift, std::abs(b.fits[i].fitted_c - a.fits[i].fitted_c) / a.fits[i].fitted_c);
  }
  return drift;
}

// ---- tracts ----

double TractChart::minimum_level(const FamilySpec& family) {
  const double m = std::abs(family.parameter());
  switch (family.kind()) {
    case FamilyKind::exponential: return std::max(1.0, m * std::numbers::e);
    case FamilyKind::tangent:
      // the rotated tract must avoid 0 (image 1/|lambda|) and the other asymptotic value
      return std::max({1.0, 1.0 / m, std::abs(1.0 - m * m) / (2.0 * m)});
    case FamilyKind::quadratic: break;
  }
  throw std::invalid_argument("the quadratic family has no logarithmic tract");
}

TractChart::TractChart(const FamilySpec& family, double level)
    : family_(family), level_(level), lambda_(family.parameter()), pole_(cplx(0.0, 1.0) * family.parameter()) {
  if (!(level > minimum_level(family)))
    throw std::invalid_argument("tract level must exceed " + std::to_string(minimum_level(family)));
}

cplx TractChart::value(cplx z) const {
  if (family_.kind() == FamilyKind::exponential) return lambda_ * std::exp(z);
  // tan z = a'(1 - q)/(1 + q) with q = e^{2iz}; f - a = -2aq/(1+q); then h(w) = (1 + conj(a) w)/(w - a)
  const cplx q = std::exp(cplx(0.0, 2.0) * z);
  const cplx f = pole_ * (1.0 - q) / (1.0 + q);
  return (1.0 + std::conj(pole_) * f) * (1.0 + q) / (-2.0 * pole_ * q);
}

cplx TractChart::derivative(cplx z) const {
  if (family_.kind() == FamilyKind::exponential) return lambda_ * std::exp(z);
  const cplx q = std::exp(cplx(0.0, 2.0) * z);
  return (1.0 + std::norm(pole_)) * lambda_ / (-(pole_ * pole_) * q);
}

double TractChart::log_sph_derivative(cplx z) const {
  return std::log(std::abs(derivative(z))) + log1p_abs2(z) - log1p_abs2(value(z));
}

cplx TractChart::lift(cplx w) const {
  const cplx z = std::exp(w);
  if (family_.kind() == FamilyKind::exponential) return std::log(lambda_) + z;
  const cplx q = std::exp(cplx(0.0, 2.0) * z);
  const cplx f = pole_ * (1.0 - q) / (1.0 + q);
  return std::log((1.0 + std::conj(pole_) * f) * (1.0 + q) / (-2.0 * pole_)) - cplx(0.0, 2.0) * z;
}

cplx TractChart::lift_derivative(cplx w) const {
  const cplx z = std::exp(w);
  return derivative(z) * z / value(z);
}

cplx TractChart::period() const {
  return family_.kind() == FamilyKind::exponential ? cplx(0.0, 2.0 * kPi) : cplx(kPi, 0.0);
}

cplx TractChart::preimage(cplx zeta, long sheet) const {
  if (family_.kind() == FamilyKind::exponential) return std::log(zeta / lambda_) + static_cast<double>(sheet) * period();
  const cplx f = (1.0 + pole_ * zeta) / (zeta - std::conj(pole_));
  const cplx q = (pole_ - f) / (pole_ + f);
  return std::log(q) / cplx(0.0, 2.0) + static_cast<double>(sheet) * period();
}

cplx TractChart::nearest_preimage(cplx zeta, cplx near) const {
  const cplx base = preimage(zeta, 0);
  const double k = std::round(((near - base) / period()).real());
  return base + k * period();
}

cplx TractChart::continue_preimage(cplx zeta_from, cplx z_from, cplx zeta_to, int turn) const {
  constexpr int kSteps = 64;
  const double r0 = std::log(std::abs(zeta_from)), r1 = std::log(std::abs(zeta_to));
  const double a0 = std::arg(zeta_from);
  double da = std::remainder(std::arg(zeta_to) - a0, 2.0 * kPi);  // in [-pi, pi]
  if (turn > 0 && da < 0.0) da += 2.0 * kPi;
  if (turn <= 0 && da > 0.0) da -= 2.0 * kPi;
  cplx z = z_from;
  for (int i = 1; i <= kSteps; ++i)
    z = nearest_preimage(std::polar(std::exp(r0), a0 + da * i / kSteps), z);
  for (int i = 1; i <= kSteps; ++i)
    z = nearest_preimage(std::polar(std::exp(r0 + (r1 - r0) * i / kSteps), a0 + da), z);
  return z;
}

double tract_growth_constant(double level, double ratio) {
  if (!(level > 1.0 && ratio > 1.0)) throw std::invalid_argument("level and ratio must exceed 1");
  const double lr = level * ratio;
  return std::log(ratio) / (4.0 * kPi * std::log(lr) * (1.0 + 1.0 / (lr * lr)));
}

bool TractReport::passed() const { return all_hold(checks); }

namespace {

/// Tract points: |g| log-uniform on (floor, floor * 1e6) plus a share just above the floor; sheets |k| <= 20.
std::vector<cplx> tract_points(const TractChart& chart, double floor, long count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<cplx> out;
  out.reserve(static_cast<std::size_t>(count));
  for (long i = 0; i < count; ++i) {
    const double lm = unit(rng) < 0.1 ? std::log(floor) + 1e-6 * unit(rng)
                                      : std::log(floor) + uniform(rng, 1e-9, std::log(1e6));
    const cplx zeta = std::polar(std::exp(lm), uniform(rng, -kPi, kPi));
    const long sheet = static_cast<long>(rng() % 41) - 20;
    out.push_back(chart.preimage(zeta, sheet));
  }
  return out;
}

}  // namespace

TractReport verify_el_bound(const TractChart& chart, long samples, std::uint64_t seed, int threads) {
  const std::vector<cplx> pts = tract_points(chart, chart.level(), samples, seed);
  const double log_level = std::log(chart.level());
  struct Row {
    bool in_tract;
    double plane, lifted, lift_error;
  };
  std::vector<Row> rows(pts.size());
  parallel_for(pts.size(), threads, [&](std::size_t i) {
    const cplx z = pts[i];
    const cplx g = chart.value(z);
    Row r{};
    r.in_tract = std::abs(g) > chart.level();
    const double rhs = std::abs(g) * (std::log(std::abs(g)) - log_level) / (4.0 * kPi * std::abs(z));
    r.plane = upper_ratio(rhs, std::abs(chart.derivative(z)));
    const cplx w = std::log(z);
    const cplx lw = chart.lift(w);
    r.lifted = upper_ratio((lw.real() - log_level) / (4.0 * kPi), std::abs(chart.lift_derivative(w)));
    r.lift_error = std::abs(std::exp(lw) - g) / std::abs(g);
    rows[i] = r;
  });
  Tally plane("el_plane_form"), lifted("el_lifted_form"), lift("lift_identity");
  for (const Row& r : rows) {
    if (!r.in_tract) continue;
    plane.add(r.plane);
    lifted.add(r.lifted);
    lift.add(r.lift_error / 1e-10);
  }
  TractReport rep;
  rep.level = chart.level();
  rep.checks = {plane.out, lifted.out, lift.out};
  return rep;
}

TractReport verify_tract_growth(const TractChart& chart, double ratio, long samples, std::uint64_t seed,
                                int threads) {
  const double c = tract_growth_constant(chart.level(), ratio);
  const double floor = chart.level() * ratio;
  const std::vector<cplx> pts = tract_points(chart, floor, samples, seed);
  std::vector<double> vals(pts.size(), std::numeric_limits<double>::quiet_NaN());
  parallel_for(pts.size(), threads, [&](std::size_t i) {
    const cplx z = pts[i];
    const double ag = std::abs(chart.value(z));
    if (!(ag > floor)) return;
    // compare in logs: ln c + ln|z| + ln ln|g| - ln|g| against ln|g*|
    const double log_rhs = std::log(c) + std::log(std::abs(z)) + std::log(std::log(ag)) - std::log(ag);
    vals[i] = std::exp(log_rhs - chart.log_sph_derivative(z));
  });
  Tally growth("tract_growth");
  for (double v : vals)
    if (!std::isnan(v)) growth.add(v);
  TractReport rep;
  rep.level = chart.level();
  rep.ratio = ratio;
  rep.checks = {growth.out};
  return rep;
}

double sandwich_constant(cplx z1, cplx z2, double log_sph_deriv1, double log_sph_deriv2) {
  const double a1 = std::abs(z1), a2 = std::abs(z2);
  const double log_ratio = log_sph_deriv1 - log_sph_deriv2;
  const double log_mod = std::log(a1 / a2);
  const double log_log = std::log(std::log(a1) / std::log(a2));
  const double above = log_ratio - (log_mod + log_log);
  const double below = (log_mod - 3.0 * log_log) - log_ratio;
  return std::exp(std::max(above, below));
}

double modulus_constant(cplx z1, cplx z2, cplx g1, cplx g2) {
  const double log_ratio = std::log(std::abs(g1) / std::abs(g2));
  const double log_log = 4.0 * kPi * std::log(std::log(std::abs(z1)) / std::log(std::abs(z2)));
  return std::exp(std::max(log_ratio - log_log, -log_log - log_ratio));
}

namespace {

constexpr std::size_t kPairCoords = 4;

/// Pair coordinates: ln|z2| above the floor, ln|z1| - ln|z2|, arg z1, arg z2.
constexpr std::array<std::pair<double, double>, kPairCoords> kPairBox{
    {{0.0, 6.907755278982137}, {0.0, 6.907755278982137}, {-2.0 * kPi, 2.0 * kPi}, {-2.0 * kPi, 2.0 * kPi}}};

struct PairSample {
  std::array<double, kPairCoords> coords{};
  long sheet = 0;
};

/// Sandwich constants for the two extensions, then the modulus constants.
std::array<double, 4> pair_constants(const TractChart& chart, double log_floor, const PairSample& p) {
  const double m2 = log_floor + p.coords[0];
  const cplx z2 = std::polar(std::exp(m2), p.coords[3]);
  const cplx z1 = std::polar(std::exp(m2 + p.coords[1]), p.coords[2]);
  const cplx g1 = chart.preimage(z1, p.sheet);
  // |G*(zeta)| = 1/|g*(G(zeta))| for the inverse branch G
  const double l1 = -chart.log_sph_derivative(g1);
  std::array<double, 4> out{};
  for (int e = 0; e < 2; ++e) {
    const cplx g2 = chart.continue_preimage(z1, g1, z2, e == 0 ? 1 : -1);
    out[static_cast<std::size_t>(e)] = sandwich_constant(z1, z2, l1, -chart.log_sph_derivative(g2));
    out[static_cast<std::size_t>(2 + e)] = modulus_constant(z1, z2, g1, g2);
  }
  return out;
}

/// Objectives: counterclockwise, clockwise, better sandwich extension, better modulus extension.
double pair_objective(const std::array<double, 4>& c, int which) {
  switch (which) {
    case 0: return c[0];
    case 1: return c[1];
    case 2: return std::min(c[0], c[1]);
    default: return std::min(c[2], c[3]);
  }
}

}  // namespace

SandwichReport verify_tract_sandwich(const TractChart& chart, double ratio, long pairs, std::uint64_t seed,
                                     int threads, int refine_steps) {
  if (!(ratio > 1.0)) throw std::invalid_argument("ratio must exceed 1");
  if (pairs < 1) throw std::invalid_argument("need at least one pair");
  const double log_floor = std::log(chart.level() * ratio);
  std::mt19937_64 rng(seed);
  std::vector<PairSample> ps(static_cast<std::size_t>(pairs));
  for (PairSample& p : ps) {
    p.coords = {uniform(rng, kPairBox[0].first, kPairBox[0].second), uniform(rng, kPairBox[1].first, kPairBox[1].second),
                uniform(rng, -kPi, kPi), uniform(rng, -kPi, kPi)};
    p.sheet = static_cast<long>(rng() % 7) - 3;
  }
  std::vector<std::array<double, 4>> rows(ps.size());
  parallel_for(ps.size(), threads, [&](std::size_t i) { rows[i] = pair_constants(chart, log_floor, ps[i]); });

  std::vector<std::pair<int, std::size_t>> starts;
  for (int which = 0; which < 4; ++which) {
    std::vector<std::size_t> order(ps.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    const std::size_t top = std::min<std::size_t>(kRefineStarts, order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(top), order.end(),
                      [&](std::size_t a, std::size_t b) {
                        const double va = pair_objective(rows[a], which), vb = pair_objective(rows[b], which);
                        return va != vb ? va > vb : a < b;
                      });
    for (std::size_t k = 0; k < top; ++k) starts.emplace_back(which, order[k]);
  }
  std::vector<std::array<double, 4>> climbed(starts.size());
  parallel_for(starts.size(), threads, [&](std::size_t k) {
    const auto [which, index] = starts[k];
    PairSample p = ps[index];
    const auto objective = [&](const std::array<double, kPairCoords>& c) -> std::optional<double> {
      PairSample q{c, p.sheet};
      return pair_objective(pair_constants(chart, log_floor, q), which);
    };
    std::mt19937_64 rng(0x9e3779b97f4a7c15ULL * (k + 1));
    p.coords =
        pattern_climb(p.coords, pair_objective(rows[index], which), kPairBox, objective, refine_steps, rng).first;
    climbed[k] = pair_constants(chart, log_floor, p);
  });
  rows.insert(rows.end(), climbed.begin(), climbed.end());

  SandwichReport rep;
  rep.level = chart.level();
  rep.ratio = ratio;
  rep.pairs = pairs;
  for (const auto& r : rows) {
    rep.fit_counterclockwise = std::max(rep.fit_counterclockwise, pair_objective(r, 0));
    rep.fit_clockwise = std::max(rep.fit_clockwise, pair_objective(r, 1));
    rep.fit_best = std::max(rep.fit_best, pair_objective(r, 2));
    rep.modulus_fit_best = std::max(rep.modulus_fit_best, pair_objective(r, 3));
  }
  return rep;
}

}  // namespace bowen
