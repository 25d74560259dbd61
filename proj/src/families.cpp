#include "bowen_press/families.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "bowen_press/tail.hpp"

namespace bowen {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = std::numbers::pi;

bool near(cplx a, cplx b, double scale) { return std::abs(a - b) <= 1e-14 * std::max(1.0, scale); }

}  // namespace

std::string to_string(FamilyKind kind) {
  switch (kind) {
    case FamilyKind::exponential: return "exp";
    case FamilyKind::tangent: return "tan";
    case FamilyKind::quadratic: return "quad";
  }
  return "?";
}

FamilyKind parse_family_kind(const std::string& name) {
  if (name == "exp" || name == "exponential") return FamilyKind::exponential;
  if (name == "tan" || name == "tangent") return FamilyKind::tangent;
  if (name == "quad" || name == "quadratic") return FamilyKind::quadratic;
  throw std::invalid_argument("unknown family '" + name + "' (expected exp, tan or quad)");
}

FamilySpec::FamilySpec(FamilyKind kind, cplx parameter) : kind_(kind), parameter_(parameter) {
  if (!std::isfinite(parameter.real()) || !std::isfinite(parameter.imag()))
    throw std::invalid_argument("family parameter must be finite");
  if (kind != FamilyKind::quadratic && parameter == cplx(0.0, 0.0))
    throw std::invalid_argument("lambda must be nonzero for the exp and tan families");
}

double level_divergence_threshold(const FamilySpec& spec) { return spec.transcendental() ? 0.5 : 0.0; }

double deep_divergence_threshold(const FamilySpec& spec) {
  switch (spec.kind()) {
    case FamilyKind::exponential: return 1.0;
    case FamilyKind::tangent: return 0.5;
    case FamilyKind::quadratic: return 0.0;
  }
  return 0.0;
}

SingularData singular_values(const FamilySpec& spec) {
  const cplx p = spec.parameter();
  switch (spec.kind()) {
    case FamilyKind::exponential:
      return {{ExtendedPoint(0.0)}, {ExtendedPoint(0.0)}, {"asymptotic"}};
    case FamilyKind::tangent: {
      const ExtendedPoint a(cplx(0.0, 1.0) * p), b(cplx(0.0, -1.0) * p);
      return {{a, b}, {a, b}, {"asymptotic", "asymptotic"}};
    }
    case FamilyKind::quadratic:
      return {{ExtendedPoint(p), ExtendedPoint::infinity()}, {}, {"critical", "critical"}};
  }
  return {};
}

ExtendedPoint evaluate(const FamilySpec& spec, const ExtendedPoint& z) {
  const cplx p = spec.parameter();
  if (spec.kind() == FamilyKind::quadratic) {
    if (z.is_infinite()) return z;
    const cplx v = z.value();
    return ExtendedPoint(v * v + p);
  }
  if (z.is_infinite()) throw std::domain_error("transcendental map is undefined at infinity");
  const cplx v = z.value();
  if (spec.kind() == FamilyKind::exponential) {
    const double log_mod = v.real() + std::log(std::abs(p));
    if (log_mod > 700.0) return ExtendedPoint::infinity();
    return ExtendedPoint(std::polar(std::exp(log_mod), v.imag() + std::arg(p)));
  }
  const cplx c = std::cos(v);
  const cplx s = std::sin(v);
  if (std::abs(c) < 1e-15 * std::max(1.0, std::abs(s))) return ExtendedPoint::infinity();
  return ExtendedPoint(p * (s / c));
}

cplx derivative(const FamilySpec& spec, cplx z) {
  const cplx p = spec.parameter();
  switch (spec.kind()) {
    case FamilyKind::exponential: return p * std::exp(z);
    case FamilyKind::tangent: {
      const cplx c = std::cos(z);
      return p / (c * c);
    }
    case FamilyKind::quadratic: return 2.0 * z;
  }
  return {};
}

double SheetLattice::along() const { return (base * std::conj(step)).real() / period(); }

double SheetLattice::transverse() const { return std::abs((base * std::conj(step)).imag()) / period(); }

std::optional<SheetLattice> sheet_lattice(const FamilySpec& spec, cplx z) {
  const cplx p = spec.parameter();
  switch (spec.kind()) {
    case FamilyKind::exponential: {
      if (z == cplx(0.0, 0.0)) return std::nullopt;
      const cplx base = std::log(z / p);
      return SheetLattice{base, cplx(0.0, 2.0 * kPi), log1p_abs2(z) - std::log(std::abs(z))};
    }
    case FamilyKind::tangent: {
      const cplx ip = cplx(0.0, 1.0) * p;
      if (near(z, ip, std::abs(p)) || near(z, -ip, std::abs(p))) return std::nullopt;
      const cplx base = std::atan(z / p);
      // |f'(w)| = |lambda| |1 + (z/lambda)^2|
      const double log_fprime = std::log(std::abs(p)) + std::log(std::abs(1.0 + (z / p) * (z / p)));
      return SheetLattice{base, cplx(kPi, 0.0), log1p_abs2(z) - log_fprime};
    }
    case FamilyKind::quadratic: return std::nullopt;
  }
  return std::nullopt;
}

double log_lattice_tail_bound(const SheetLattice& lattice, double cutoff, double t) {
  if (!(t > 0.5)) return kInf;
  const double per = lattice.period();
  const double tr = lattice.transverse();
  const double c = 1.0 + tr * tr;
  // |w_k|^2 >= tr^2 + per^2 (|k| - 1/2)^2; sum over k > K bounded by the integral from K
  const double s0 = per * (cutoff - 0.5) / std::sqrt(c);
  return t * lattice.log_scale + std::log(2.0 / per) + (0.5 - t) * std::log(c) + log_tail_integral(s0, t);
}

double log_lattice_tail_lower(const SheetLattice& lattice, double cutoff, double t) {
  if (!(t > 0.5)) return kInf;
  const double per = lattice.period();
  const double tr = lattice.transverse();
  const double c = 1.0 + tr * tr;
  // |w_k|^2 <= tr^2 + per^2 (|k| + 1/2)^2; decreasing terms dominate the integral from K+1
  const double s1 = per * (cutoff + 1.5) / std::sqrt(c);
  return t * lattice.log_scale + std::log(2.0 / per) + (0.5 - t) * std::log(c) + log_tail_integral(s1, t);
}

double log_lattice_tail_estimate(const SheetLattice& lattice, double cutoff, double t) {
  if (!(t > 0.5)) return kInf;
  const double per = lattice.period();
  const double tr = lattice.transverse();
  const double c = 1.0 + tr * tr;
  const double sc = std::sqrt(c);
  const double a = lattice.along();
  const double up = log_tail_integral((per * (cutoff + 0.5) + a) / sc, t);
  const double down = log_tail_integral((per * (cutoff + 0.5) - a) / sc, t);
  const double m = std::max(up, down);
  const double both = m + std::log(std::exp(up - m) + std::exp(down - m));
  return t * lattice.log_scale - std::log(per) + (0.5 - t) * std::log(c) + both;
}

BranchSet inverse_branches(const FamilySpec& spec, const ExtendedPoint& z, int cutoff, double t) {
  if (cutoff < 1) throw std::invalid_argument("sheet cutoff must be >= 1");
  if (z.is_infinite()) throw std::domain_error("inverse branches need a finite target");
  const cplx v = z.value();
  BranchSet out;
  out.tail.cutoff = cutoff;
  out.tail.t = t;
  if (spec.kind() == FamilyKind::quadratic) {
    const cplx w = std::sqrt(v - spec.parameter());
    for (int s = 0; s < 2; ++s) {
      const cplx ws = s == 0 ? w : -w;
      InverseBranch b;
      b.index = s;
      b.point = ExtendedPoint(ws);
      if (ws == cplx(0.0, 0.0)) {
        b.sph_deriv.log_magnitude = -kInf;
      } else {
        b.sph_deriv = sph_derivative(ws, v, std::log(2.0 * std::abs(ws)));
      }
      out.branches.push_back(b);
    }
    return out;
  }
  const auto lattice = sheet_lattice(spec, v);
  if (!lattice) {
    out.omitted = true;
    return out;
  }
  for (int k = -cutoff; k <= cutoff; ++k) {
    const cplx w = lattice->point(k);
    out.branches.push_back({k, ExtendedPoint(w), {lattice->log_sph_deriv(w), DerivativeKind::spherical}});
  }
  out.tail.divergent = !(t > level_divergence_threshold(spec));
  out.tail.log_tail_upper = log_lattice_tail_bound(*lattice, cutoff, t);
  return out;
}

OrbitTable postsingular_orbit(const FamilySpec& spec, int depth) {
  if (depth < 1) throw std::invalid_argument("orbit depth must be >= 1");
  OrbitTable table;
  const SingularData sd = singular_values(spec);
  std::vector<ExtendedPoint> row = sd.singular_values;
  std::vector<bool> esc(row.size(), false);
  for (std::size_t i = 0; i < row.size(); ++i)
    esc[i] = row[i].is_infinite() || std::abs(row[i].value()) > kWorkingRadius;
  for (int n = 0; n < depth; ++n) {
    table.rows.push_back(row);
    table.escaped.push_back(esc);
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (esc[i] && spec.transcendental()) {
        row[i] = ExtendedPoint::infinity();
        continue;
      }
      row[i] = evaluate(spec, row[i]);
      if (row[i].is_infinite() || std::abs(row[i].value()) > kWorkingRadius) esc[i] = true;
    }
  }
  return table;
}

GPSReport gps_check(const ExtendedPoint& z, const OrbitTable& table) {
  if (z.is_infinite()) throw std::domain_error("gps_check needs a finite base point");
  GPSReport rep;
  rep.z = z;
  double best = kInf;
  for (std::size_t n = 0; n < table.rows.size(); ++n) {
    for (const auto& p : table.rows[n]) best = std::min(best, sph_distance(z, p));
    rep.distances.push_back(best);
    rep.slopes.push_back(best > 0.0 ? -std::log(best) / static_cast<double>(n + 1) : kInf);
  }
  rep.in_postsingular_set = !rep.distances.empty() && rep.distances.back() == 0.0;
  if (!rep.in_postsingular_set && !rep.slopes.empty()) {
    // slopes are negative while d(z, P_n) > 1; only their size matters
    const double last = std::abs(rep.slopes.back());
    const double mid = std::abs(rep.slopes[rep.slopes.size() / 2]);
    rep.consistent_with_gps = last < 0.2 && last <= mid + 1e-12;
  }
  return rep;
}

namespace {

ExtendedPoint iterate(const FamilySpec& spec, ExtendedPoint z, int steps) {
  for (int i = 0; i < steps; ++i) {
    if (z.is_infinite() && spec.transcendental()) return z;
    z = evaluate(spec, z);
  }
  return z;
}

bool escaped_point(const ExtendedPoint& z) { return z.is_infinite() || std::abs(z.value()) > kWorkingRadius; }

std::vector<cplx> julia_samples(const FamilySpec& spec) {
  std::vector<cplx> out;
  for (int k = 0; k < 2; ++k) {
    cplx w(1.0, 0.5);
    for (int i = 0; i < 200; ++i) {
      if (spec.kind() == FamilyKind::quadratic) {
        const cplx r = std::sqrt(w - spec.parameter());
        w = k == 0 ? r : -r;
      } else {
        const auto lat = sheet_lattice(spec, w);
        if (!lat) break;
        w = lat->point(k);
      }
    }
    out.push_back(w);
  }
  return out;
}

}  // namespace

HyperbolicityReport hyperbolicity_probe(const FamilySpec& spec, int depth) {
  if (depth < 10) throw std::invalid_argument("hyperbolicity probe needs depth >= 10");
  HyperbolicityReport rep;
  rep.julia_samples = julia_samples(spec);
  const SingularData sd = singular_values(spec);
  bool all_ok = true;
  double min_dist = kInf;
  for (const auto& s : sd.singular_values) {
    CycleReport cr;
    cr.singular_value = s;
    if (s.is_infinite()) {
      // infinity is a superattracting fixed point of the polynomial
      cr.converged = true;
      cr.period = 1;
      cr.multiplier_modulus = 0.0;
      rep.orbits.push_back(cr);
      continue;
    }
    ExtendedPoint z = s;
    for (int i = 0; i < depth && !escaped_point(z); ++i) z = evaluate(spec, z);
    if (escaped_point(z)) {
      cr.escaped = true;
      all_ok = false;
      rep.orbits.push_back(cr);
      continue;
    }
    for (int p = 1; p <= 8; ++p) {
      const ExtendedPoint y = iterate(spec, z, p);
      if (!escaped_point(y) && sph_distance(y, z) < 1e-9) {
        cr.converged = true;
        cr.period = p;
        break;
      }
    }
    if (!cr.converged) {
      all_ok = false;
      rep.orbits.push_back(cr);
      continue;
    }
    double log_mult = 0.0;
    ExtendedPoint c = z;
    for (int j = 0; j < cr.period; ++j) {
      cr.cycle.push_back(c.value());
      log_mult += std::log(std::abs(derivative(spec, c.value())));
      c = evaluate(spec, c);
    }
    cr.multiplier_modulus = std::exp(log_mult);
    cr.tail_distance = sph_distance(c, z);
    if (!(cr.multiplier_modulus < 1.0)) all_ok = false;
    for (const auto& cp : cr.cycle)
      for (const auto& js : rep.julia_samples) min_dist = std::min(min_dist, sph_distance(cp, js));
    rep.orbits.push_back(cr);
  }
  rep.attracting_cycles_found = all_ok;
  rep.min_cycle_julia_distance = min_dist;
  return rep;
}

}  // namespace bowen
