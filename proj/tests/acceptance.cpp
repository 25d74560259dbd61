// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "bowen_press/bowen.hpp"
#include "bowen_press/distortion.hpp"
#include "bowen_press/repeller.hpp"
#include "commands.hpp"

using namespace bowen;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

const cplx kExpBase(2.0, std::numbers::pi);
constexpr double kRelativeSlack = 1e-9;

TruncationPolicy policy(int depth, int cutoff, bool decay = false, int far_panels = 16) {
  TruncationPolicy p;
  p.depth = depth;
  p.sheet_cutoff = cutoff;
  p.decay_cutoff = decay;
  p.far_panels = far_panels;
  return p;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Outcome circle_oracle() {
  const auto start = std::chrono::steady_clock::now();
  const TruncationPolicy p = policy(12, 4);
  const DeltaBracket b = delta_solve(FamilySpec::quadratic(0.0), 1.0, 0.005, p);
  const double secs = seconds_since(start);
  const bool ok = b.t_low <= 1.0 && 1.0 <= b.t_high && b.width() <= 0.01 && secs < 10.0 && p.depth <= 14;
  return {ok, fmt::format("delta bracket [{:.6f}, {:.6f}] width {:.4g} ({}) depth {} in {:.2f} s", b.t_low, b.t_high,
                          b.width(), to_string(b.status), p.depth, secs)};
}

Outcome pressure_at_two() {
  struct Case {
    std::string name;
    FamilySpec spec;
    ExtendedPoint z;
    TruncationPolicy p;
  };
  const std::vector<Case> cases{{"exp 0.2", FamilySpec::exponential(0.2), kExpBase, policy(5, 6, true)},
                                {"tan 0.5", FamilySpec::tangent(0.5), kExpBase, policy(5, 6, true)},
                                {"quad 0", FamilySpec::quadratic(0.0), 1.0, policy(12, 4)}};
  bool ok = true;
  std::string detail;
  for (const Case& c : cases) {
    const PressureEstimate e = pressure_estimate(c.spec, 2.0, c.z, c.p);
    ok = ok && !e.divergent && e.headline <= 0.02 && c.p.depth >= 5;
    detail += fmt::format("{}: P(2) = {:.5f} (depth {}); ", c.name, e.headline, c.p.depth);
  }
  return {ok, detail + "allowance 0.02"};
}

Outcome hyperbolic_exp_dimension() {
  const auto start = std::chrono::steady_clock::now();
  const DeltaBracket b = delta_solve(FamilySpec::exponential(0.2), kExpBase, 0.05, policy(4, 8, true));
  const double secs = seconds_since(start);
  const bool ok = b.t_low > 1.0 && b.t_high < 2.0 && b.width() <= 0.05 && secs <= 300.0;
  return {ok, fmt::format("exp 0.2 delta bracket [{:.5f}, {:.5f}] width {:.4f} ({}) in {:.1f} s", b.t_low, b.t_high,
                          b.width(), to_string(b.status), secs)};
}

std::vector<double> even_grid(double a, double b, int n) {
  std::vector<double> g;
  for (int i = 0; i < n; ++i) g.push_back(a + (b - a) * i / (n - 1));
  return g;
}

Outcome curve_shape() {
  struct Case {
    std::string name;
    FamilySpec spec;
    ExtendedPoint z;
    std::vector<double> grid;
    TruncationPolicy p;
  };
  const std::vector<Case> cases{
      {"exp 0.2", FamilySpec::exponential(0.2), kExpBase, even_grid(1.1, 2.0, 8), policy(3, 6)},
      {"tan 0.5", FamilySpec::tangent(0.5), kExpBase, even_grid(0.6, 2.0, 8), policy(3, 6)},
      {"quad 0", FamilySpec::quadratic(0.0), 1.0, even_grid(0.25, 2.0, 8), policy(12, 4)}};
  bool ok = true;
  std::string detail;
  for (const Case& c : cases) {
    const PressureCurve curve = pressure_curve(c.spec, c.z, c.grid, c.p);
    ok = ok && curve.monotone_excess <= 0.0 && curve.convexity_excess <= 0.0;
    detail += fmt::format("{}: monotone excess {:.3g}, convexity excess {:.3g}; ", c.name, curve.monotone_excess,
                          curve.convexity_excess);
  }
  return {ok, detail + "8-point grids"};
}

/// R^2 of the least-squares line through (x_i, y_i).
double r_squared(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
    syy += y[i] * y[i];
  }
  const double cov = sxy - sx * sy / n, vx = sxx - sx * sx / n, vy = syy - sy * sy / n;
  return vy > 0.0 ? cov * cov / (vx * vy) : 1.0;
}

Outcome base_point_independence() {
  const FamilySpec spec = FamilySpec::exponential(0.2);
  const ExtendedPoint z1 = kExpBase, z2 = cplx(10.0, std::numbers::pi);
  const OrbitTable orbit = postsingular_orbit(spec, 32);
  const bool gps = gps_check(z1, orbit).consistent_with_gps && gps_check(z2, orbit).consistent_with_gps;
  const TruncationPolicy p = policy(8, 4, false, 0);
  const std::vector<SumInterval> a = level_sums(spec, 1.5, z1, p), b = level_sums(spec, 1.5, z2, p);
  std::vector<double> inv_n, diff;
  for (int n = 2; n <= 8; ++n) {
    inv_n.push_back(1.0 / n);
    diff.push_back(std::abs(a[n - 1].log_estimate - b[n - 1].log_estimate) / n);
  }
  const double r2 = r_squared(inv_n, diff);
  const bool decays = diff.back() < diff.front();
  return {gps && decays && r2 >= 0.9,
          fmt::format("|P_n(z1) - P_n(z2)| from {:.4g} (n=2) to {:.4g} (n=8), R^2 vs 1/n = {:.4f}, gps evidence {}",
                      diff.front(), diff.back(), r2, gps)};
}

Outcome subsystem_below_pressure() {
  bool ok = true;
  std::string detail;
  struct Case {
    std::string name;
    FamilySpec spec;
    ExtendedPoint z;
    TruncationPolicy p;
    double t;
    int budget;
    int samples;
  };
  const std::vector<Case> cases{
      {"quad 0", FamilySpec::quadratic(0.0), 1.0, policy(12, 4), 1.0, 64, 256},
      {"quad 0", FamilySpec::quadratic(0.0), 1.0, policy(12, 4), 1.5, 24, 64},
      {"exp 0.2", FamilySpec::exponential(0.2), kExpBase, policy(4, 8), 1.2, 8, 64}};
  for (const Case& c : cases) {
    const PressureEstimate e = pressure_estimate(c.spec, c.t, c.z, c.p);
    const PhypReport r = phyp_lower_bound(c.spec, c.t, c.budget, 1, c.samples);
    int checked = 0;
    for (const PhypCandidate& cand : r.candidates) {
      if (!cand.valid) continue;
      ++checked;
      ok = ok && cand.pressure.per_iterate <= e.headline_upper;
    }
    detail += fmt::format("{} t={}: {} systems, best {:.5f} <= upper {:.3g}; ", c.name, c.t, checked, r.value,
                          e.headline_upper);
    if (c.name == "quad 0" && c.t == 1.0) {
      const std::size_t branches = r.best ? r.best->branches.size() : 0;
      ok = ok && r.value >= -0.05 && branches >= 8;
      detail += fmt::format("best system has {} branches; ", branches);
    }
  }
  return {ok, detail + "target >= -0.05 with >= 8 branches"};
}

bool tallies_exact(const std::vector<InequalityTally>& checks, long min_samples, std::string& detail,
                   const std::string& label) {
  bool ok = !checks.empty();
  for (const InequalityTally& c : checks) {
    ok = ok && c.evaluated >= min_samples && c.violations == 0 && c.worst <= 1.0 + kRelativeSlack;
    if (c.violations != 0 || c.evaluated < min_samples)
      detail += fmt::format("{} {}: {} of {} violated; ", label, c.name, c.violations, c.evaluated);
  }
  return ok;
}

Outcome proven_inequalities() {
  constexpr long kSamples = 10000;
  std::string detail;
  bool ok = tallies_exact(verify_koebe(kSamples, 7).checks, kSamples, detail, "koebe");
  long evaluated = 3 * kSamples;
  for (const FamilySpec& spec : {FamilySpec::exponential(1.0), FamilySpec::exponential(0.2), FamilySpec::tangent(0.5)}) {
    const TractChart chart(spec, 10.0);
    const std::string label = fmt::format("{} {}", to_string(spec.kind()), spec.parameter().real());
    const TractReport el = verify_el_bound(chart, kSamples, 7);
    const TractReport growth = verify_tract_growth(chart, 2.0, kSamples, 7);
    ok = tallies_exact(el.checks, kSamples, detail, label) && ok;
    ok = tallies_exact(growth.checks, kSamples, detail, label) && ok;
    for (const auto& c : el.checks) evaluated += c.evaluated;
    for (const auto& c : growth.checks) evaluated += c.evaluated;
  }
  return {ok, detail + fmt::format("koebe, EL and growth suites: {} evaluations, relative slack {}", evaluated,
                                   kRelativeSlack)};
}

double relative_change(double a, double b) { return a > 0.0 ? std::abs(b - a) / a : 0.0; }

Outcome fitted_constants_stable() {
  constexpr long kSamples = 10000;
  const SphericalKoebeReport s1 = verify_spherical_koebe(kSamples, 7), s2 = verify_spherical_koebe(2 * kSamples, 7);
  bool finite = true;
  for (const auto& f : s1.fits) finite = finite && std::isfinite(f.fitted_c);
  double drift = fit_drift(s1, s2);
  std::string detail = fmt::format("spherical Koebe drift {:.3g}; ", drift);
  for (const FamilySpec& spec : {FamilySpec::exponential(1.0), FamilySpec::tangent(0.5)}) {
    const TractChart chart(spec, 10.0);
    const SandwichReport a = verify_tract_sandwich(chart, 2.0, kSamples, 7);
    const SandwichReport b = verify_tract_sandwich(chart, 2.0, 2 * kSamples, 7);
    finite = finite && std::isfinite(a.fit_best) && std::isfinite(a.modulus_fit_best);
    const double d = std::max(relative_change(a.fit_best, b.fit_best),
                              relative_change(a.modulus_fit_best, b.modulus_fit_best));
    drift = std::max(drift, d);
    detail += fmt::format("{} sandwich {:.4f} -> {:.4f}, modulus {:.4f} -> {:.4f}; ", to_string(spec.kind()),
                          a.fit_best, b.fit_best, a.modulus_fit_best, b.modulus_fit_best);
  }
  return {finite && drift < 0.1, detail + fmt::format("max drift {:.3g} (limit 0.1)", drift)};
}

Outcome supermultiplicativity() {
  std::vector<std::pair<int, int>> pairs;
  for (int n = 2; n <= 4; ++n)
    for (int m = n; m <= 4; ++m) pairs.emplace_back(n, m);
  const SupermultiplicativityReport r =
      supermultiplicativity_check(FamilySpec::exponential(0.2), kExpBase, 1.5, pairs, policy(8, 4, false, 0));
  const bool ok = std::isfinite(r.log_c) && r.spread < 1.0;
  return {ok, fmt::format("{} pairs, ln c = {:.4f}, spread {:.4f} nat", r.pairs.size(), r.log_c, r.spread)};
}

Outcome thread_determinism() {
  const std::vector<std::vector<std::string>> commands{
      {"pressure", "--family", "exp", "--lambda", "0.2", "--z", "2+3.14159i", "--t", "1.5", "--depth", "4", "--cutoff",
       "12"},
      {"curve", "--family", "tan", "--lambda", "0.5", "--depth", "3", "--cutoff", "6"},
      {"delta", "--family", "quad", "--c", "0", "--tol", "0.005"},
      {"repeller", "--family", "quad", "--c", "0", "--t", "1", "--budget", "24"},
      {"gps", "--family", "exp", "--lambda", "0.2", "--z", "2+3.14159i"},
      {"verify", "--samples", "2000", "--format", "csv"}};
  bool ok = true;
  int mismatches = 0;
  for (const auto& cmd : commands) {
    std::string first;
    for (const char* threads : {"1", "2", "8"}) {
      std::vector<std::string> args{"bowen-press"};
      args.insert(args.end(), cmd.begin(), cmd.end());
      args.insert(args.end(), {"--threads", threads, "--seed", "7"});
      std::vector<const char*> argv;
      for (const auto& a : args) argv.push_back(a.c_str());
      std::ostringstream out, err;
      const int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
      ok = ok && code == 0;
      if (first.empty()) {
        first = out.str();
      } else if (out.str() != first) {
        ok = false;
        ++mismatches;
      }
    }
  }
  return {ok, fmt::format("{} commands x 3 thread counts, {} mismatches", commands.size(), mismatches)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"circle oracle", circle_oracle},
      {"P(2) <= 0", pressure_at_two},
      {"hyperbolic exp dimension in (1, 2)", hyperbolic_exp_dimension},
      {"monotone convex curves", curve_shape},
      {"base-point independence", base_point_independence},
      {"subsystem pressure below pressure", subsystem_below_pressure},
      {"proven inequalities", proven_inequalities},
      {"fitted constants stable", fitted_constants_stable},
      {"supermultiplicativity", supermultiplicativity},
      {"thread determinism", thread_determinism}};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::cout << fmt::format("{} {:2d} {}: {} [{:.1f} s]", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                             o.detail, seconds_since(start))
              << std::endl;
  }
  std::cout << fmt::format("{} of {} criteria passed", criteria.size() - failed, criteria.size()) << std::endl;
  return failed == 0 ? 0 : 1;
}
