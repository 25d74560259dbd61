#include "run_config.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "bowen_press/distortion.hpp"
#include "bowen_press/parallel.hpp"
#include "report.hpp"

namespace bowen::cli {

namespace {

const std::vector<std::string> kCommands{"pressure", "curve", "delta", "repeller", "gps", "verify"};
const std::vector<std::string> kSuites{"koebe", "spherical-koebe", "el", "growth", "sandwich", "all"};

double parse_real(const std::string& flag, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size() && std::isfinite(v)) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError(flag + ": expected a finite number, got '" + text + "'");
}

ExtendedPoint parse_complex(const std::string& flag, const std::string& text) {
  try {
    return parse_point(text);
  } catch (const std::exception&) {
    throw ConfigError(flag + ": expected a complex number such as 2+3.1i, got '" + text + "'");
  }
}

cplx parse_finite_complex(const std::string& flag, const std::string& text) {
  const ExtendedPoint p = parse_complex(flag, text);
  if (p.is_infinite()) throw ConfigError(flag + ": must be finite");
  return p.value();
}

std::string complex_flag(cplx v) { return format_point(ExtendedPoint(v)); }

std::string real_flag(double v) { return fmt::format("{:.17g}", v); }

}  // namespace

std::vector<double> parse_t_grid(const std::string& text) {
  std::vector<double> out;
  const auto colon = text.find(':');
  if (colon != std::string::npos) {
    const auto second = text.find(':', colon + 1);
    if (second == std::string::npos) throw ConfigError("--t-grid: expected a:b:n");
    const double a = parse_real("--t-grid", text.substr(0, colon));
    const double b = parse_real("--t-grid", text.substr(colon + 1, second - colon - 1));
    const std::string ns = text.substr(second + 1);
    int n = 0;
    try {
      std::size_t used = 0;
      n = std::stoi(ns, &used);
      if (used != ns.size()) n = 0;
    } catch (const std::exception&) {
      n = 0;
    }
    if (n < 2) throw ConfigError("--t-grid: point count must be an integer >= 2");
    for (int i = 0; i < n; ++i) out.push_back(i + 1 == n ? b : a + (b - a) * i / (n - 1));
  } else {
    std::size_t start = 0;
    while (start <= text.size()) {
      const auto comma = text.find(',', start);
      const std::string item = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      out.push_back(parse_real("--t-grid", item));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!(out[i] > 0.0)) throw ConfigError("--t-grid: every t must be positive");
    if (i && !(out[i] > out[i - 1])) throw ConfigError("--t-grid: values must be strictly increasing");
  }
  return out;
}

FamilySpec RunConfig::family_spec() const {
  if (!family) throw ConfigError("missing --family (exp, tan or quad)");
  if (*family == FamilyKind::quadratic) {
    if (!c) throw ConfigError("missing --c (required for --family quad)");
    return FamilySpec::quadratic(*c);
  }
  if (!lambda) throw ConfigError("missing --lambda (required for --family " + to_string(*family) + ")");
  return FamilySpec(*family, *lambda);
}

ExtendedPoint RunConfig::base_point() const { return z ? *z : ExtendedPoint(1.0, 2.0); }

TruncationPolicy RunConfig::policy() const {
  TruncationPolicy p;
  p.depth = depth ? *depth : (family == FamilyKind::quadratic ? 12 : 5);
  p.sheet_cutoff = cutoff;
  p.decay_cutoff = decay_cutoff;
  if (prune) p.prune_log_weight = *prune;
  p.tail_mode = ignore_tail ? TailMode::ignore_with_flag : TailMode::propagate_upper;
  p.far_panels = far_panels;
  return p;
}

int RunConfig::thread_count() const { return threads > 0 ? threads : default_thread_count(); }

std::optional<RunConfig> parse_run_config(int argc, const char* const* argv, std::string& help_out) {
  CLI::App app{"Topological pressure and Bowen dimension for lambda*exp, lambda*tan and z^2 + c", "bowen-press"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every command");

  std::string family, lambda, c, z, t, t_grid, tol, prune, level, ratio, format = "json", suite = "all";
  std::optional<int> depth;
  int cutoff = 4, far_panels = 16, ring_samples = 64, budget = 64, gps_depth = 32, threads = 0;
  long samples = 10000;
  std::uint64_t seed = 7;
  bool decay = false, ignore_tail = false;
  std::string output;

  for (const std::string& name : kCommands) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--family", family, "exp | tan | quad");
    sub->add_option("--lambda", lambda, "parameter of lambda*exp or lambda*tan, as a+bi");
    sub->add_option("--c", c, "parameter of z^2 + c, as a+bi");
    sub->add_option("--z", z, "base point (default 1+2i); 'inf' allowed");
    sub->add_option("--t", t, "exponent t");
    sub->add_option("--t-grid", t_grid, "a:b:n or comma-separated t values");
    sub->add_option("--depth", depth, "deepest level n (default 12 for quad, 5 otherwise)");
    sub->add_option("--cutoff", cutoff, "explicit sheets |k| <= K at the root")->capture_default_str();
    sub->add_option("--prune", prune, "log-weight threshold below which subtrees are bounded, not expanded");
    sub->add_option("--far-panels", far_panels, "Simpson panels for the far sheets (multiple of 4, 0 = off)")
        ->capture_default_str();
    sub->add_flag("--decay-cutoff", decay, "halve the sheet cutoff at every level (floor 4)");
    sub->add_flag("--ignore-tail", ignore_tail, "drop tail bounds from the upper bracket and flag it");
    sub->add_option("--tol", tol, "delta bracket tolerance (default 0.01)");
    sub->add_option("--output", output, "write to this file instead of stdout");
    sub->add_option("--seed", seed, "seed for the sampling suites")->capture_default_str();
    sub->add_option("--samples", samples, "samples per verification suite")->capture_default_str();
    sub->add_option("--ring-samples", ring_samples, "boundary samples per repeller disc")->capture_default_str();
    sub->add_option("--budget", budget, "repeller search budget (candidate discs)")->capture_default_str();
    sub->add_option("--suite", suite, "koebe | spherical-koebe | el | growth | sandwich | all")
        ->capture_default_str();
    sub->add_option("--level", level, "tract level R (default 10)");
    sub->add_option("--ratio", ratio, "tract ratio L (default 2)");
    sub->add_option("--gps-depth", gps_depth, "postsingular orbit depth")->capture_default_str();
    sub->add_option("--format", format, "json | csv")->capture_default_str();
    sub->add_option("--threads", threads, "worker threads (default: BOWEN_PRESS_THREADS or 1)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    help_out = app.help();
    return std::nullopt;
  } catch (const CLI::CallForAllHelp&) {
    help_out = app.help("", CLI::AppFormatMode::All);
    return std::nullopt;
  } catch (const CLI::ParseError& e) {
    throw ConfigError(e.what());
  }

  RunConfig cfg;
  for (const std::string& name : kCommands)
    if (app.got_subcommand(name)) cfg.command = name;
  const CLI::App* sub = app.get_subcommand(cfg.command);
  const auto given = [&](const std::string& flag) { return sub->count(flag) > 0; };

  if (given("--family")) {
    try {
      cfg.family = parse_family_kind(family);
    } catch (const std::exception&) {
      throw ConfigError("--family: expected exp, tan or quad, got '" + family + "'");
    }
  }
  if (given("--lambda")) {
    if (cfg.family == FamilyKind::quadratic) throw ConfigError("--lambda is not used by --family quad (use --c)");
    cfg.lambda = parse_finite_complex("--lambda", lambda);
    if (*cfg.lambda == cplx(0.0, 0.0)) throw ConfigError("--lambda: must be nonzero");
  }
  if (given("--c")) {
    if (cfg.family && cfg.family != FamilyKind::quadratic)
      throw ConfigError("--c is only used by --family quad (use --lambda)");
    cfg.c = parse_finite_complex("--c", c);
  }
  if (given("--z")) cfg.z = parse_complex("--z", z);

  const bool single_t = cfg.command == "pressure" || cfg.command == "repeller";
  if (given("--t")) {
    if (!single_t) throw ConfigError("--t is not used by " + cfg.command);
    cfg.t = parse_real("--t", t);
    if (!(*cfg.t > 0.0)) throw ConfigError("--t: must be positive");
  } else if (single_t) {
    throw ConfigError("missing --t (required by " + cfg.command + ")");
  }
  if (given("--t-grid")) {
    if (cfg.command != "curve") throw ConfigError("--t-grid is only used by curve");
    cfg.t_grid = parse_t_grid(t_grid);
  }

  if (depth) {
    if (*depth < 1 || *depth > 40) throw ConfigError("--depth: must lie in 1..40");
    cfg.depth = depth;
  }
  if (cutoff < 1) throw ConfigError("--cutoff: must be >= 1");
  cfg.cutoff = cutoff;
  if (given("--prune")) {
    cfg.prune = parse_real("--prune", prune);
    if (*cfg.prune > 0.0) throw ConfigError("--prune: threshold must be <= 0");
  }
  if (far_panels < 0 || far_panels % 4 != 0) throw ConfigError("--far-panels: must be a non-negative multiple of 4");
  cfg.far_panels = far_panels;
  cfg.decay_cutoff = decay;
  cfg.ignore_tail = ignore_tail;
  if (given("--tol")) {
    cfg.tol = parse_real("--tol", tol);
    if (!(cfg.tol > 0.0)) throw ConfigError("--tol: must be positive");
  }
  cfg.output = output;
  cfg.seed = seed;
  if (samples < 1) throw ConfigError("--samples: must be >= 1");
  cfg.samples = samples;
  if (ring_samples < 8) throw ConfigError("--ring-samples: must be >= 8");
  cfg.ring_samples = ring_samples;
  if (budget < 1) throw ConfigError("--budget: must be >= 1");
  cfg.budget = budget;
  if (std::find(kSuites.begin(), kSuites.end(), suite) == kSuites.end())
    throw ConfigError("--suite: unknown suite '" + suite + "'");
  cfg.suite = suite;
  if (given("--level")) cfg.level = parse_real("--level", level);
  if (given("--ratio")) {
    cfg.ratio = parse_real("--ratio", ratio);
    if (!(cfg.ratio > 1.0)) throw ConfigError("--ratio: must exceed 1");
  }
  if (gps_depth < 1) throw ConfigError("--gps-depth: must be >= 1");
  cfg.gps_depth = gps_depth;
  if (format != "json" && format != "csv") throw ConfigError("--format: expected json or csv, got '" + format + "'");
  cfg.format = format;
  if (threads < 0) throw ConfigError("--threads: must be >= 0");
  cfg.threads = threads;

  if (cfg.command != "verify" || cfg.family) {
    const FamilySpec spec = cfg.family_spec();
    if (cfg.command == "verify" && spec.transcendental() && !(cfg.level > TractChart::minimum_level(spec)))
      throw ConfigError(fmt::format("--level: must exceed {:.6g} for this family", TractChart::minimum_level(spec)));
  }
  return cfg;
}

std::vector<std::string> to_flags(const RunConfig& cfg) {
  std::vector<std::string> f{cfg.command};
  const auto add = [&](const std::string& flag, const std::string& value) {
    f.push_back(flag);
    f.push_back(value);
  };
  if (cfg.family) add("--family", cfg.family == FamilyKind::exponential ? "exp"
                                  : cfg.family == FamilyKind::tangent   ? "tan"
                                                                        : "quad");
  if (cfg.lambda) add("--lambda", complex_flag(*cfg.lambda));
  if (cfg.c) add("--c", complex_flag(*cfg.c));
  if (cfg.z) add("--z", format_point(*cfg.z));
  if (cfg.t) add("--t", real_flag(*cfg.t));
  if (!cfg.t_grid.empty()) {
    std::string g;
    for (std::size_t i = 0; i < cfg.t_grid.size(); ++i) g += (i ? "," : "") + real_flag(cfg.t_grid[i]);
    add("--t-grid", g);
  }
  if (cfg.depth) add("--depth", std::to_string(*cfg.depth));
  add("--cutoff", std::to_string(cfg.cutoff));
  if (cfg.prune) add("--prune", real_flag(*cfg.prune));
  add("--far-panels", std::to_string(cfg.far_panels));
  if (cfg.decay_cutoff) f.push_back("--decay-cutoff");
  if (cfg.ignore_tail) f.push_back("--ignore-tail");
  add("--tol", real_flag(cfg.tol));
  if (!cfg.output.empty()) add("--output", cfg.output);
  add("--seed", std::to_string(cfg.seed));
  add("--samples", std::to_string(cfg.samples));
  add("--ring-samples", std::to_string(cfg.ring_samples));
  add("--budget", std::to_string(cfg.budget));
  add("--suite", cfg.suite);
  add("--level", real_flag(cfg.level));
  add("--ratio", real_flag(cfg.ratio));
  add("--gps-depth", std::to_string(cfg.gps_depth));
  add("--format", cfg.format);
  add("--threads", std::to_string(cfg.threads));
  return f;
}

bool operator==(const RunConfig& a, const RunConfig& b) {
  const auto same_z = [](const std::optional<ExtendedPoint>& x, const std::optional<ExtendedPoint>& y) {
    return x.has_value() == y.has_value() && (!x || *x == *y);
  };
  return a.command == b.command && a.family == b.family && a.lambda == b.lambda && a.c == b.c && same_z(a.z, b.z) &&
         a.t == b.t && a.t_grid == b.t_grid && a.depth == b.depth && a.cutoff == b.cutoff && a.prune == b.prune &&
         a.far_panels == b.far_panels && a.decay_cutoff == b.decay_cutoff && a.ignore_tail == b.ignore_tail &&
         a.tol == b.tol && a.output == b.output && a.seed == b.seed && a.samples == b.samples &&
         a.ring_samples == b.ring_samples && a.budget == b.budget && a.suite == b.suite && a.level == b.level &&
         a.ratio == b.ratio && a.gps_depth == b.gps_depth && a.format == b.format && a.threads == b.threads;
}

}  // namespace bowen::cli
