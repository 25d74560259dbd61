#include "commands.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "bowen_press/bowen.hpp"
#include "bowen_press/distortion.hpp"
#include "bowen_press/repeller.hpp"

namespace bowen::cli {

namespace {

Value real(double v) { return Value(v); }
Value integer(long long v) { return Value(v); }
Value text(std::string s) { return Value(std::move(s)); }

std::string evidence_name(SignEvidence e) {
  switch (e) {
    case SignEvidence::positive: return "positive";
    case SignEvidence::negative: return "negative";
    case SignEvidence::ambiguous: return "ambiguous";
  }
  return "?";
}

void describe_run(Report& r, const RunConfig& cfg, bool with_policy) {
  const FamilySpec spec = cfg.family_spec();
  r.set("family", text(to_string(spec.kind())));
  r.set("parameter", text(format_point(ExtendedPoint(spec.parameter()))));
  if (!with_policy) return;
  r.set("z", text(format_point(cfg.base_point())));
  const TruncationPolicy p = cfg.policy();
  r.set("depth", integer(p.depth));
  r.set("cutoff", integer(p.sheet_cutoff));
  r.set("decay_cutoff", p.decay_cutoff);
  r.set("prune", real(p.prune_log_weight));
  r.set("far_panels", integer(p.far_panels));
  r.set("tail_ignored", p.tail_mode == TailMode::ignore_with_flag);
}

void level_table(Report& r, const PressureEstimate& est) {
  Table& tab = r.table("levels", {"n", "log_s_lower", "log_s_estimate", "log_s_upper", "p_lower", "p_estimate",
                                  "p_upper", "ratio_lower", "ratio_estimate", "ratio_upper"});
  for (const LevelRecord& rec : est.levels)
    tab.add({integer(rec.n), real(rec.sum.log_lower), real(rec.sum.log_estimate), real(rec.sum.log_upper),
             real(rec.p_lower), real(rec.p_estimate), real(rec.p_upper), real_or_null(rec.has_ratio, rec.ratio_lower),
             real_or_null(rec.has_ratio, rec.ratio_estimate), real_or_null(rec.has_ratio, rec.ratio_upper)});
}

std::vector<double> default_grid(FamilyKind kind) {
  switch (kind) {
    case FamilyKind::exponential: return parse_t_grid("1.1:2:8");
    case FamilyKind::tangent: return parse_t_grid("0.6:2:8");
    case FamilyKind::quadratic: return parse_t_grid("0.25:2:8");
  }
  return {};
}

void add_tally_rows(Table& tab, const std::string& suite, const std::string& chart,
                    const std::vector<InequalityTally>& checks, bool& all_hold) {
  for (const InequalityTally& c : checks) {
    tab.add({text(suite), text(chart), text(c.name), integer(c.evaluated), integer(c.violations), real(c.worst),
             c.holds()});
    all_hold = all_hold && c.holds();
  }
}

double relative_drift(double a, double b) { return a > 0.0 ? std::abs(b - a) / a : 0.0; }

}  // namespace

CommandResult cmd_pressure(const RunConfig& cfg) {
  CommandResult res{0, Report("pressure")};
  Report& r = res.report;
  describe_run(r, cfg, true);
  r.set("t", real(*cfg.t));
  const PressureEstimate est =
      pressure_estimate(cfg.family_spec(), *cfg.t, cfg.base_point(), cfg.policy(), cfg.thread_count());
  r.set("divergent", est.divergent);
  r.set("headline_lower", real(est.headline_lower));
  r.set("headline", real(est.headline));
  r.set("headline_upper", real(est.headline_upper));
  r.set("sign", text(evidence_name(sign_evidence(est))));
  r.set("gps_warning", est.gps_warning);
  level_table(r, est);
  if (est.divergent) res.exit_code = 3;
  return res;
}

CommandResult cmd_curve(const RunConfig& cfg) {
  CommandResult res{0, Report("curve")};
  Report& r = res.report;
  describe_run(r, cfg, true);
  const FamilySpec spec = cfg.family_spec();
  const std::vector<double> grid = cfg.t_grid.empty() ? default_grid(spec.kind()) : cfg.t_grid;
  const PressureCurve curve = pressure_curve(spec, cfg.base_point(), grid, cfg.policy(), cfg.thread_count());
  r.set("monotone_violation", real(curve.monotone_violation));
  r.set("convexity_violation", real(curve.convexity_violation));
  r.set("monotone_excess", real(curve.monotone_excess));
  r.set("convexity_excess", real(curve.convexity_excess));
  bool divergent = false;
  Table& points = r.table("points", {"t", "headline_lower", "headline", "headline_upper", "divergent", "sign"});
  for (const PressureEstimate& e : curve.estimates) {
    points.add({real(e.t), real(e.headline_lower), real(e.headline), real(e.headline_upper), e.divergent,
                text(evidence_name(sign_evidence(e)))});
    divergent = divergent || e.divergent;
  }
  Table& plot = r.table("plot", {"t", "n", "p_lower", "p_estimate", "p_upper"});
  for (const PressureEstimate& e : curve.estimates)
    for (const LevelRecord& rec : e.levels)
      plot.add({real(e.t), integer(rec.n), real(rec.p_lower), real(rec.p_estimate), real(rec.p_upper)});
  r.set("divergent", divergent);
  if (divergent) res.exit_code = 3;
  return res;
}

CommandResult cmd_delta(const RunConfig& cfg) {
  CommandResult res{0, Report("delta")};
  Report& r = res.report;
  describe_run(r, cfg, true);
  r.set("tol", real(cfg.tol));
  const DeltaBracket b = delta_solve(cfg.family_spec(), cfg.base_point(), cfg.tol, cfg.policy(), cfg.thread_count());
  r.set("status", text(to_string(b.status)));
  r.set("t_low", real(b.t_low));
  r.set("t_high", real(b.t_high));
  r.set("width", real(b.width()));
  r.set("ambiguous_band", b.has_ambiguous_band);
  r.set("ambiguous_low", real_or_null(b.has_ambiguous_band, b.ambiguous_low));
  r.set("ambiguous_high", real_or_null(b.has_ambiguous_band, b.ambiguous_high));
  Table& tab = r.table("probes", {"t", "headline_lower", "headline", "headline_upper", "sign"});
  for (const DeltaProbe& p : b.probes)
    tab.add({real(p.t), real(p.headline_lower), real(p.headline), real(p.headline_upper),
             text(evidence_name(p.evidence))});
  if (b.status == DeltaStatus::ambiguous && b.width() > cfg.tol) res.exit_code = 4;
  return res;
}

CommandResult cmd_repeller(const RunConfig& cfg) {
  CommandResult res{0, Report("repeller")};
  Report& r = res.report;
  describe_run(r, cfg, true);
  const FamilySpec spec = cfg.family_spec();
  const double t = *cfg.t;
  r.set("t", real(t));
  r.set("budget", integer(cfg.budget));
  r.set("ring_samples", integer(cfg.ring_samples));
  const PhypReport ph = phyp_lower_bound(spec, t, cfg.budget, cfg.thread_count(), cfg.ring_samples);
  const PressureEstimate est = pressure_estimate(spec, t, cfg.base_point(), cfg.policy(), cfg.thread_count());
  r.set("phyp", real(ph.value));
  r.set("phyp_lower", real(ph.lower));
  r.set("phyp_upper", real(ph.upper));
  r.set("candidates_tried", integer(ph.candidates_tried));
  r.set("valid_systems", integer(ph.valid_systems));
  r.set("pressure_upper", real(est.headline_upper));
  r.set("pressure_divergent", est.divergent);
  if (ph.best) {
    r.set("best_center", text(format_point(ph.best->base_disc.center())));
    r.set("best_radius", real(ph.best->base_disc.radius()));
    r.set("best_period", integer(ph.best->path_length));
    r.set("best_branches", integer(static_cast<long long>(ph.best->branches.size())));
  }
  bool below = true;
  Table& tab = r.table("candidates", {"center", "radius", "period", "branches", "valid", "failure", "pressure",
                                      "pressure_lower", "pressure_upper", "below_pressure_upper"});
  for (const PhypCandidate& c : ph.candidates) {
    const bool ok = !c.valid || c.pressure.per_iterate <= est.headline_upper;
    below = below && ok;
    tab.add({text(format_point(c.center)), real(c.radius), integer(c.period), integer(c.branch_count), c.valid,
             text(to_string(c.failure)), real_or_null(c.valid, c.pressure.per_iterate),
             real_or_null(c.valid, c.pressure.per_iterate_lower), real_or_null(c.valid, c.pressure.per_iterate_upper),
             ok});
  }
  r.set("below_pressure_upper", below);
  return res;
}

CommandResult cmd_gps(const RunConfig& cfg) {
  CommandResult res{0, Report("gps")};
  Report& r = res.report;
  describe_run(r, cfg, false);
  const ExtendedPoint z = cfg.base_point();
  r.set("z", text(format_point(z)));
  r.set("gps_depth", integer(cfg.gps_depth));
  const GPSReport g = gps_check(z, postsingular_orbit(cfg.family_spec(), cfg.gps_depth));
  r.set("in_postsingular_set", g.in_postsingular_set);
  r.set("consistent_with_gps", g.consistent_with_gps);
  r.set("not_gps", !g.consistent_with_gps);
  Table& tab = r.table("orbit", {"n", "distance", "slope"});
  for (std::size_t i = 0; i < g.distances.size(); ++i)
    tab.add({integer(static_cast<long long>(i + 1)), real(g.distances[i]), real(g.slopes[i])});
  return res;
}

CommandResult cmd_verify(const RunConfig& cfg) {
  CommandResult res{0, Report("verify")};
  Report& r = res.report;
  const int threads = cfg.thread_count();
  const auto wants = [&](const std::string& s) { return cfg.suite == "all" || cfg.suite == s; };
  r.set("suite", text(cfg.suite));
  r.set("samples", integer(cfg.samples));
  r.set("seed", integer(static_cast<long long>(cfg.seed)));

  std::vector<TractChart> charts;
  if (wants("el") || wants("growth") || wants("sandwich")) {
    r.set("level", real(cfg.level));
    r.set("ratio", real(cfg.ratio));
    if (cfg.family) {
      const FamilySpec spec = cfg.family_spec();
      if (!spec.transcendental()) throw ConfigError("--family quad has no logarithmic tract (suite " + cfg.suite + ")");
      charts.emplace_back(spec, cfg.level);
    } else {
      for (const FamilySpec& spec : {FamilySpec::exponential(1.0), FamilySpec::tangent(0.5)}) {
        if (!(cfg.level > TractChart::minimum_level(spec)))
          throw ConfigError("--level: too small for the default " + to_string(spec.kind()) + " chart");
        charts.emplace_back(spec, cfg.level);
      }
    }
  }
  const auto chart_name = [](const TractChart& c) {
    return to_string(c.family().kind()) + " " + format_point(ExtendedPoint(c.family().parameter()));
  };

  bool all_hold = true;
  Table& checks = r.table("checks", {"suite", "chart", "check", "evaluated", "violations", "worst", "holds"});
  if (wants("koebe")) add_tally_rows(checks, "koebe", "", verify_koebe(cfg.samples, cfg.seed, threads).checks, all_hold);
  for (const TractChart& chart : charts) {
    if (wants("el"))
      add_tally_rows(checks, "el", chart_name(chart), verify_el_bound(chart, cfg.samples, cfg.seed, threads).checks,
                     all_hold);
    if (wants("growth"))
      add_tally_rows(checks, "growth", chart_name(chart),
                     verify_tract_growth(chart, cfg.ratio, cfg.samples, cfg.seed, threads).checks, all_hold);
  }

  double max_drift = 0.0;
  bool fits_finite = true;
  Table& fits = r.table("fits", {"suite", "chart", "bucket", "lambda", "samples_used", "max_ratio", "fitted",
                                 "fitted_doubled", "drift"});
  if (wants("spherical-koebe")) {
    const SphericalKoebeReport a = verify_spherical_koebe(cfg.samples, cfg.seed, threads);
    const SphericalKoebeReport b = verify_spherical_koebe(2 * cfg.samples, cfg.seed, threads);
    for (std::size_t i = 0; i < a.fits.size(); ++i) {
      const SphericalKoebeFit& f = a.fits[i];
      const double drift = relative_drift(f.fitted_c, b.fits[i].fitted_c);
      std::ostringstream bucket;
      bucket << "r1<" << f.diameter_cap << " r2>" << f.complement_floor;
      fits.add({text("spherical-koebe"), text(""), text(bucket.str()), real(f.lambda), integer(f.samples_used),
                real(f.max_ratio), real(f.fitted_c), real(b.fits[i].fitted_c), real(drift)});
      max_drift = std::max(max_drift, drift);
      fits_finite = fits_finite && std::isfinite(f.fitted_c) && std::isfinite(b.fits[i].fitted_c);
    }
  }
  if (wants("sandwich")) {
    for (const TractChart& chart : charts) {
      const SandwichReport a = verify_tract_sandwich(chart, cfg.ratio, cfg.samples, cfg.seed, threads);
      const SandwichReport b = verify_tract_sandwich(chart, cfg.ratio, 2 * cfg.samples, cfg.seed, threads);
      const std::pair<const char*, std::pair<double, double>> rows[] = {
          {"counterclockwise", {a.fit_counterclockwise, b.fit_counterclockwise}},
          {"clockwise", {a.fit_clockwise, b.fit_clockwise}},
          {"best", {a.fit_best, b.fit_best}},
          {"modulus", {a.modulus_fit_best, b.modulus_fit_best}}};
      for (const auto& [bucket, v] : rows) {
        const double drift = relative_drift(v.first, v.second);
        fits.add({text("sandwich"), text(chart_name(chart)), text(bucket), Value(Null{}), integer(a.pairs), Value(Null{}),
                  real(v.first), real(v.second), real(drift)});
        fits_finite = fits_finite && std::isfinite(v.first) && std::isfinite(v.second);
        // only the better-extension fits are expected to stabilise
        if (std::string(bucket) == "best" || std::string(bucket) == "modulus") max_drift = std::max(max_drift, drift);
      }
    }
  }
  r.set("proven_checks_hold", all_hold);
  if (wants("spherical-koebe") || wants("sandwich")) {
    r.set("fits_finite", fits_finite);
    r.set("max_fit_drift", real(max_drift));
  }
  if (!all_hold) res.exit_code = 1;
  return res;
}

CommandResult run_command(const RunConfig& cfg) {
  if (cfg.command == "pressure") return cmd_pressure(cfg);
  if (cfg.command == "curve") return cmd_curve(cfg);
  if (cfg.command == "delta") return cmd_delta(cfg);
  if (cfg.command == "repeller") return cmd_repeller(cfg);
  if (cfg.command == "gps") return cmd_gps(cfg);
  if (cfg.command == "verify") return cmd_verify(cfg);
  throw ConfigError("unknown command '" + cfg.command + "'");
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::optional<CommandResult> res;
  RunConfig cfg;
  try {
    std::string help;
    const std::optional<RunConfig> parsed = parse_run_config(argc, argv, help);
    if (!parsed) {
      out << help;
      return 0;
    }
    cfg = *parsed;
    res = run_command(cfg);
  } catch (const ConfigError& e) {
    err << "bowen-press: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "bowen-press: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "bowen-press: internal error: " << e.what() << '\n';
    return 1;
  }

  std::ofstream file;
  if (!cfg.output.empty()) {
    file.open(cfg.output, std::ios::binary);
    if (!file) {
      err << "bowen-press: --output: cannot open '" << cfg.output << "'\n";
      return 2;
    }
  }
  std::ostream& sink = cfg.output.empty() ? out : file;
  if (cfg.format == "csv")
    res->report.write_csv(sink);
  else
    res->report.write_json(sink);
  return res->exit_code;
}

}  // namespace bowen::cli
