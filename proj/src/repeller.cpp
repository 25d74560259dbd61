#include "bowen_press/repeller.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <stdexcept>

#include "bowen_press/parallel.hpp"

namespace bowen {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = std::numbers::pi;
constexpr double kPostsingularMargin = 0.05;

/// The sheet-k preimage of a, with the principal determination as sheet 0.
std::optional<cplx> anchor_preimage(const FamilySpec& spec, cplx a, long k) {
  const cplx p = spec.parameter();
  switch (spec.kind()) {
    case FamilyKind::exponential:
      if (a == cplx(0.0, 0.0)) return std::nullopt;
      return std::log(a / p) + cplx(0.0, 2.0 * kPi * static_cast<double>(k));
    case FamilyKind::tangent: {
      const cplx q = a / p;
      if (std::abs(1.0 + q * q) < 1e-300) return std::nullopt;
      return std::atan(q) + kPi * static_cast<double>(k);
    }
    case FamilyKind::quadratic: {
      const cplx r = std::sqrt(a - p);
      if (r == cplx(0.0, 0.0)) return std::nullopt;
      return k == 0 ? r : -r;
    }
  }
  return std::nullopt;
}

/// ln|f'(w)| where f(w) = x.
double log_fprime(const FamilySpec& spec, cplx w, cplx x) {
  const cplx p = spec.parameter();
  switch (spec.kind()) {
    case FamilyKind::exponential: return std::log(std::abs(x));
    case FamilyKind::tangent: return std::log(std::abs(p)) + std::log(std::abs(1.0 + (x / p) * (x / p)));
    case FamilyKind::quadratic: return std::log(2.0 * std::abs(w));
  }
  return 0.0;
}

std::array<double, 3> embed(const ExtendedPoint& z) {
  if (z.is_infinite()) return {0.0, 0.0, 1.0};
  const cplx v = z.value();
  const double n = std::norm(v);
  return {2.0 * v.real() / (1.0 + n), 2.0 * v.imag() / (1.0 + n), (n - 1.0) / (n + 1.0)};
}

struct BranchCheck {
  std::optional<CompositeBranch> branch;
  RepellerFailure failure = RepellerFailure::none;
};

/// Koebe growth factor (1+s)/(1-s)^3 for derivatives at relative distance s < 1.
double koebe_factor(double s) { return (1.0 + s) / ((1.0 - s) * (1.0 - s) * (1.0 - s)); }

/// Boundary samples with their distance to the postsingular set (every branch of f^-p is univalent within it).
struct Ring {
  std::vector<ExtendedPoint> points;
  std::vector<double> clearance;
};

/// One anchored continuation step x -> w with f(w) = x; acc receives -ln|f'(w)|.
std::optional<cplx> continue_step(const FamilySpec& spec, cplx a, cplx wa, cplx x, double& acc) {
  const cplx p = spec.parameter();
  cplx w;
  switch (spec.kind()) {
    case FamilyKind::exponential:
      if (x == cplx(0.0, 0.0)) return std::nullopt;
      w = wa + std::log(x / a);
      break;
    case FamilyKind::tangent: {
      const cplx den = p * p + x * a;
      if (std::abs(den) < 1e-300) return std::nullopt;
      const cplx m = (x - a) * p / den;
      if (std::abs(1.0 + m * m) < 1e-300) return std::nullopt;
      w = wa + std::atan(m);
      break;
    }
    case FamilyKind::quadratic:
      w = wa * std::sqrt((x - p) / (a - p));
      if (w == cplx(0.0, 0.0)) return std::nullopt;
      break;
  }
  if (!std::isfinite(w.real()) || !std::isfinite(w.imag())) return std::nullopt;
  acc -= log_fprime(spec, w, x);
  return w;
}

/// Inclusion, contraction and continuity checks from the centre image and the ring images.
BranchCheck finish_branch(const SphericalDisc& disc, const Ring& ring, const std::vector<long>& path, cplx hc,
                          double log_c, const std::vector<ExtendedPoint>& imgs, const std::vector<double>& logs) {
  BranchCheck out;
  const ExtendedPoint center(hc);
  const std::size_t n = ring.points.size();
  // image of each boundary arc: endpoints plus Koebe-inflated half-arc slack
  const double arc = 2.0 * kPi * std::sin(disc.radius()) / static_cast<double>(n);
  double max_log = log_c;
  double radius = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t k = (j + 1) % n;
    const double rel = 0.5 * arc / std::min(ring.clearance[j], ring.clearance[k]);
    if (!(rel < 1.0)) {
      out.failure = RepellerFailure::disc_meets_postsingular;
      return out;
    }
    const double slack = koebe_factor(std::max(rel, 0.0)) * std::exp(std::max(logs[j], logs[k])) * arc;
    // a jump between neighbouring samples means the continuation crossed a cut
    if (sph_distance(imgs[j], imgs[k]) > slack) {
      out.failure = RepellerFailure::branch_undefined;
      return out;
    }
    max_log = std::max(max_log, logs[j]);
    radius = std::max(radius, std::max(sph_distance(center, imgs[j]), sph_distance(center, imgs[k])) + 0.5 * slack);
  }
  CompositeBranch b;
  b.sheet_path = path;
  b.image_center = center;
  b.image_radius = radius;
  b.inside_margin = disc.radius() - sph_distance(disc.center(), center) - b.image_radius;
  b.log_center_deriv = log_c;
  b.log_max_deriv = max_log;
  if (!(b.inside_margin > 0.0)) {
    out.failure = RepellerFailure::escape_from_disc;
    return out;
  }
  if (!(max_log < 0.0)) {
    out.failure = RepellerFailure::non_contraction;
    return out;
  }
  out.branch = b;
  return out;
}

BranchCheck analyze_branch(const FamilySpec& spec, const SphericalDisc& disc, const Ring& ring,
                           const std::vector<long>& path) {
  BranchCheck undefined;
  undefined.failure = RepellerFailure::branch_undefined;
  std::optional<BranchMap> map;
  try {
    map.emplace(spec, disc.center().value(), path);
  } catch (const std::domain_error&) {
    return undefined;
  }
  double log_c = 0.0;
  const auto hc = map->apply(disc.center().value(), log_c);
  if (!hc) return undefined;
  std::vector<ExtendedPoint> imgs;
  std::vector<double> logs;
  for (const ExtendedPoint& s : ring.points) {
    double ld = 0.0;
    const auto img = map->apply(s.value(), ld);
    if (!img) return undefined;
    imgs.emplace_back(*img);
    logs.push_back(ld);
  }
  return finish_branch(disc, ring, path, *hc, log_c, imgs, logs);
}

/// Checks every sheet path of the given length whose centre image lies in the disc; shared prefixes are
/// continued once.
std::vector<BranchCheck> checked_branches_into_disc(const FamilySpec& spec, const SphericalDisc& disc,
                                                    const Ring& ring, int length, int max_sheet) {
  std::vector<long> sheets;
  if (spec.kind() == FamilyKind::quadratic)
    sheets = {0, 1};
  else
    for (long k = -max_sheet; k <= max_sheet; ++k) sheets.push_back(k);
  const std::size_t n = ring.points.size();
  std::vector<cplx> start{disc.center().value()};
  for (const auto& s : ring.points) start.push_back(s.value());
  std::vector<BranchCheck> out;
  std::vector<long> path;
  // x[0] is the anchor (centre image); ok[s] is false once sample s left the domain of the continuation
  auto dfs = [&](auto&& self, const std::vector<cplx>& x, const std::vector<double>& acc,
                 const std::vector<char>& ok) -> void {
    if (static_cast<int>(path.size()) == length) {
      if (!disc.contains(ExtendedPoint(x[0]))) return;
      BranchCheck undefined;
      undefined.failure = RepellerFailure::branch_undefined;
      std::vector<ExtendedPoint> imgs;
      std::vector<double> logs;
      for (std::size_t s = 1; s <= n; ++s) {
        if (!ok[s]) {
          out.push_back(undefined);
          return;
        }
        imgs.emplace_back(x[s]);
        logs.push_back(acc[s] + log1p_abs2(start[s]) - log1p_abs2(x[s]));
      }
      const double log_c = acc[0] + log1p_abs2(start[0]) - log1p_abs2(x[0]);
      out.push_back(finish_branch(disc, ring, path, x[0], log_c, imgs, logs));
      return;
    }
    for (long k : sheets) {
      const auto wa = anchor_preimage(spec, x[0], k);
      if (!wa) continue;
      std::vector<cplx> nx(n + 1);
      std::vector<double> nacc(acc);
      std::vector<char> nok(ok);
      for (std::size_t s = 0; s <= n; ++s) {
        if (!nok[s]) continue;
        const auto w = continue_step(spec, x[0], *wa, x[s], nacc[s]);
        if (w)
          nx[s] = *w;
        else
          nok[s] = 0;
      }
      if (!nok[0]) continue;
      path.push_back(k);
      self(self, nx, nacc, nok);
      path.pop_back();
    }
  };
  dfs(dfs, start, std::vector<double>(n + 1, 0.0), std::vector<char>(n + 1, 1));
  return out;
}

/// Smallest gap d(c_i, c_j) - R_i - R_j over overlapping-candidate pairs (spatial hash on the embedded sphere).
/// `keep` selects a greedy disjoint subset in index order when non-null.
double pairwise_gap(const std::vector<CompositeBranch>& bs, std::vector<char>* keep) {
  double max_r = 0.0;
  for (const auto& b : bs) max_r = std::max(max_r, b.image_radius);
  const double cell = std::max(2.0 * max_r, 1e-9);
  std::map<std::array<long, 3>, std::vector<std::size_t>> grid;
  double gap = kInf;
  for (std::size_t i = 0; i < bs.size(); ++i) {
    const auto p = embed(bs[i].image_center);
    const std::array<long, 3> key{static_cast<long>(std::floor(p[0] / cell)), static_cast<long>(std::floor(p[1] / cell)),
                                  static_cast<long>(std::floor(p[2] / cell))};
    bool clash = false;
    for (long dx = -1; dx <= 1; ++dx)
      for (long dy = -1; dy <= 1; ++dy)
        for (long dz = -1; dz <= 1; ++dz) {
          const auto it = grid.find({key[0] + dx, key[1] + dy, key[2] + dz});
          if (it == grid.end()) continue;
          for (std::size_t j : it->second) {
            const double g = sph_distance(bs[i].image_center, bs[j].image_center) - bs[i].image_radius - bs[j].image_radius;
            if (!(g > 0.0)) clash = true;
            if (!keep) gap = std::min(gap, g);
          }
        }
    if (keep) {
      (*keep)[i] = !clash;
      if (clash) continue;
    }
    grid[key].push_back(i);
  }
  if (keep) {
    // gaps among the kept branches
    std::vector<CompositeBranch> kept;
    for (std::size_t i = 0; i < bs.size(); ++i)
      if ((*keep)[i]) kept.push_back(bs[i]);
    return pairwise_gap(kept, nullptr);
  }
  // pairs in distant cells have gap >= cell - 2 max_r >= 0; report the tightest seen
  return gap;
}

std::vector<ExtendedPoint> boundary_ring(const SphericalDisc& disc, int samples) {
  std::vector<ExtendedPoint> ring;
  for (int j = 0; j < samples; ++j) ring.push_back(disc.boundary_point(2.0 * kPi * j / samples));
  return ring;
}

std::vector<ExtendedPoint> postsingular_points(const FamilySpec& spec) {
  std::vector<ExtendedPoint> pts;
  if (spec.transcendental()) pts.push_back(ExtendedPoint::infinity());
  for (const auto& row : postsingular_orbit(spec, 32).rows) pts.insert(pts.end(), row.begin(), row.end());
  return pts;
}

Ring make_ring(const FamilySpec& spec, const SphericalDisc& disc, int samples) {
  Ring r;
  r.points = boundary_ring(disc, samples);
  const auto post = postsingular_points(spec);
  for (const auto& p : r.points) {
    double d = kInf;
    for (const auto& q : post) d = std::min(d, sph_distance(p, q));
    r.clearance.push_back(d);
  }
  return r;
}

RepellerBuild fail(RepellerFailure f, std::string detail) {
  RepellerBuild b;
  b.failure = f;
  b.detail = std::move(detail);
  return b;
}

double log_sum_t(const std::vector<double>& logs, double t) {
  LogSum s;
  for (double l : logs) s.add(t * l);
  return s.log();
}

}  // namespace

BranchMap::BranchMap(const FamilySpec& spec, cplx anchor, std::vector<long> sheet_path)
    : spec_(spec), path_(std::move(sheet_path)) {
  anchors_.push_back(anchor);
  for (long k : path_) {
    const auto w = anchor_preimage(spec_, anchors_.back(), k);
    if (!w) throw std::domain_error("inverse branch undefined at the anchor");
    anchors_.push_back(*w);
  }
}

std::optional<cplx> BranchMap::apply(cplx z, double& log_deriv) const {
  cplx x = z;
  log_deriv = 0.0;
  for (std::size_t j = 0; j < path_.size(); ++j) {
    const auto w = continue_step(spec_, anchors_[j], anchors_[j + 1], x, log_deriv);
    if (!w) return std::nullopt;
    x = *w;
  }
  // the chart factors ln(1+|.|^2) telescope along the path
  log_deriv += log1p_abs2(z) - log1p_abs2(x);
  return x;
}

std::string to_string(RepellerFailure f) {
  switch (f) {
    case RepellerFailure::none: return "none";
    case RepellerFailure::too_few_branches: return "too_few_branches";
    case RepellerFailure::mixed_path_lengths: return "mixed_path_lengths";
    case RepellerFailure::disc_meets_postsingular: return "disc_meets_postsingular";
    case RepellerFailure::branch_undefined: return "branch_undefined";
    case RepellerFailure::escape_from_disc: return "escape_from_disc";
    case RepellerFailure::overlap: return "overlap";
    case RepellerFailure::non_contraction: return "non_contraction";
  }
  return "?";
}

double postsingular_distance(const FamilySpec& spec, const ExtendedPoint& z) {
  double d = kInf;
  for (const auto& p : postsingular_points(spec)) d = std::min(d, sph_distance(z, p));
  return d;
}

RepellerBuild build_repeller(const FamilySpec& spec, const SphericalDisc& disc,
                             const std::vector<std::vector<long>>& sheet_paths, int samples) {
  if (sheet_paths.size() < 2) throw std::invalid_argument("a repeller needs at least two branches");
  if (samples < 8) throw std::invalid_argument("at least 8 boundary samples are required");
  const std::size_t len = sheet_paths.front().size();
  if (len == 0) throw std::invalid_argument("sheet paths must be non-empty");
  for (const auto& p : sheet_paths)
    if (p.size() != len) return fail(RepellerFailure::mixed_path_lengths, "all sheet paths must have the same length");
  if (disc.center().is_infinite() || !(postsingular_distance(spec, disc.center()) > disc.radius()))
    return fail(RepellerFailure::disc_meets_postsingular, "disc meets the postsingular orbit");
  const Ring ring = make_ring(spec, disc, samples);
  for (const auto& s : ring.points)
    if (s.is_infinite()) return fail(RepellerFailure::disc_meets_postsingular, "disc contains infinity");

  RepellerSystem sys{spec, disc, {}, kInf, samples, static_cast<int>(len)};
  for (std::size_t i = 0; i < sheet_paths.size(); ++i) {
    const BranchCheck chk = analyze_branch(spec, disc, ring, sheet_paths[i]);
    if (!chk.branch) return fail(chk.failure, "branch " + std::to_string(i) + ": " + to_string(chk.failure));
    sys.separation_margin = std::min(sys.separation_margin, chk.branch->inside_margin);
    sys.branches.push_back(*chk.branch);
  }
  const double gap = pairwise_gap(sys.branches, nullptr);
  if (!(gap > 0.0)) return fail(RepellerFailure::overlap, "branch images overlap");
  sys.separation_margin = std::min(sys.separation_margin, gap);
  RepellerBuild out;
  out.system = std::move(sys);
  return out;
}

std::vector<std::vector<long>> paths_into_disc(const FamilySpec& spec, const SphericalDisc& disc, int length,
                                               int max_sheet) {
  if (length < 1) throw std::invalid_argument("path length must be >= 1");
  if (disc.center().is_infinite()) return {};
  std::vector<long> sheets;
  if (spec.kind() == FamilyKind::quadratic)
    sheets = {0, 1};
  else
    for (long k = -max_sheet; k <= max_sheet; ++k) sheets.push_back(k);
  std::vector<std::vector<long>> out;
  std::vector<long> path;
  auto dfs = [&](auto&& self, cplx x) -> void {
    if (static_cast<int>(path.size()) == length) {
      if (disc.contains(ExtendedPoint(x))) out.push_back(path);
      return;
    }
    for (long k : sheets) {
      const auto w = anchor_preimage(spec, x, k);
      if (!w) continue;
      path.push_back(k);
      self(self, *w);
      path.pop_back();
    }
  };
  dfs(dfs, disc.center().value());
  return out;
}

WordSums word_sums(const RepellerSystem& system, int depth, int threads) {
  if (depth < 1) throw std::invalid_argument("word depth must be >= 1");
  const cplx c = system.base_disc.center().value();
  std::vector<BranchMap> maps;
  for (const auto& b : system.branches) maps.emplace_back(system.spec, c, b.sheet_path);
  std::vector<cplx> start{c};
  for (const auto& s : boundary_ring(system.base_disc, system.samples)) start.push_back(s.value());

  const std::size_t m = maps.size();
  std::vector<std::vector<double>> parts(m);
  std::vector<double> part_dist(m, 0.0);
  auto descend = [&](auto&& self, const std::vector<cplx>& pts, const std::vector<double>& logs, int level,
                     std::size_t slot) -> void {
    if (level == depth) {
      parts[slot].push_back(logs[0]);
      for (std::size_t s = 1; s < logs.size(); ++s)
        part_dist[slot] = std::max(part_dist[slot], std::abs(logs[s] - logs[0]));
      return;
    }
    for (const auto& map : maps) {
      std::vector<cplx> next(pts.size());
      std::vector<double> nl(pts.size());
      for (std::size_t s = 0; s < pts.size(); ++s) {
        double ld = 0.0;
        const auto img = map.apply(pts[s], ld);
        if (!img) throw std::domain_error("word left the domain of a branch");
        next[s] = *img;
        nl[s] = logs[s] + ld;
      }
      self(self, next, nl, level + 1, slot);
    }
  };
  parallel_for(m, threads, [&](std::size_t i) {
    std::vector<cplx> pts(start.size());
    std::vector<double> logs(start.size());
    for (std::size_t s = 0; s < start.size(); ++s) {
      double ld = 0.0;
      const auto img = maps[i].apply(start[s], ld);
      if (!img) throw std::domain_error("branch undefined on the disc");
      pts[s] = *img;
      logs[s] = ld;
    }
    descend(descend, pts, logs, 1, i);
  });
  WordSums out;
  out.depth = depth;
  out.path_length = system.path_length;
  for (std::size_t i = 0; i < m; ++i) {
    out.center_log_derivs.insert(out.center_log_derivs.end(), parts[i].begin(), parts[i].end());
    out.log_distortion = std::max(out.log_distortion, part_dist[i]);
  }
  return out;
}

WordSums moran_word_sums(int branches, double log_ratio, int depth) {
  if (branches < 1 || depth < 1) throw std::invalid_argument("branches and depth must be >= 1");
  const double count = std::pow(static_cast<double>(branches), depth);
  if (count > 1e7) throw std::invalid_argument("too many words");
  WordSums w;
  w.depth = depth;
  w.center_log_derivs.assign(static_cast<std::size_t>(count), depth * log_ratio);
  return w;
}

SubsystemPressureValue subsystem_pressure(const WordSums& sums, double t) {
  SubsystemPressureValue v;
  v.t = t;
  v.word_depth = sums.depth;
  const double d = sums.depth;
  v.value = log_sum_t(sums.center_log_derivs, t) / d;
  v.lower = v.value - t * sums.log_distortion / d;
  v.upper = v.value + t * sums.log_distortion / d;
  const double p = sums.path_length;
  v.per_iterate = v.value / p;
  v.per_iterate_lower = v.lower / p;
  v.per_iterate_upper = v.upper / p;
  return v;
}

SubsystemPressureValue subsystem_pressure(const RepellerSystem& system, double t, int word_depth, int threads) {
  return subsystem_pressure(word_sums(system, word_depth, threads), t);
}

DimensionBracket subsystem_dimension(const WordSums& sums, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  auto zero = [&](double shift_sign) {
    auto f = [&](double t) {
      const SubsystemPressureValue v = subsystem_pressure(sums, t);
      return v.value + shift_sign * t * sums.log_distortion / sums.depth;
    };
    double a = 0.0, b = 2.0;
    if (f(b) >= 0.0) return b;
    while (b - a > tol) {
      const double m = 0.5 * (a + b);
      (f(m) > 0.0 ? a : b) = m;
    }
    return 0.5 * (a + b);
  };
  return {zero(0.0), zero(-1.0), zero(1.0)};
}

DimensionBracket subsystem_dimension(const RepellerSystem& system, double tol, int word_depth, int threads) {
  return subsystem_dimension(word_sums(system, word_depth, threads), tol);
}

PhypReport phyp_lower_bound(const FamilySpec& spec, double t, int search_budget, int threads, int samples) {
  if (samples < 8) throw std::invalid_argument("at least 8 boundary samples are required");
  if (search_budget < 0) throw std::invalid_argument("search budget must be >= 0");
  if (!(t > 0.0)) throw std::invalid_argument("t must be positive");
  PhypReport rep;
  rep.t = t;
  rep.value = rep.lower = rep.upper = -kInf;
  if (search_budget == 0) return rep;

  // centres: repelling fixed points of single inverse branches
  std::vector<ExtendedPoint> centers;
  const std::vector<long> fixed_sheets =
      spec.kind() == FamilyKind::quadratic ? std::vector<long>{0, 1} : std::vector<long>{0, 1, -1};
  for (long k : fixed_sheets) {
    cplx w(1.0, 0.5);
    bool ok = true;
    for (int i = 0; i < 200 && ok; ++i) {
      const auto nx = anchor_preimage(spec, w, k);
      if (!nx) ok = false;
      else w = *nx;
    }
    if (!ok || !std::isfinite(std::abs(w))) continue;
    const ExtendedPoint p(w);
    bool dup = false;
    for (const auto& c : centers) dup = dup || sph_distance(c, p) < 1e-6;
    if (!dup) centers.push_back(p);
  }
  const std::vector<int> periods = spec.kind() == FamilyKind::quadratic ? std::vector<int>{1, 2, 3, 4, 6, 8, 12, 16}
                                                                         : std::vector<int>{1, 2, 3};
  const int max_sheet = 3;
  const std::array<double, 4> fractions{0.3, 0.6, 0.8, 0.95};

  struct Job {
    ExtendedPoint center;
    double radius;
    int period;
  };
  std::vector<Job> jobs;
  for (int p : periods)
    for (const auto& c : centers) {
      const double cap = std::min(postsingular_distance(spec, c) - kPostsingularMargin, kPi - kPostsingularMargin);
      if (!(cap > 0.0)) continue;
      for (double f : fractions) jobs.push_back({c, cap * f, p});
    }
  if (static_cast<int>(jobs.size()) > search_budget) jobs.resize(static_cast<std::size_t>(search_budget));

  std::vector<PhypCandidate> cands(jobs.size());
  std::vector<std::optional<RepellerSystem>> systems(jobs.size());
  parallel_for(jobs.size(), threads, [&](std::size_t i) {
    const Job& job = jobs[i];
    PhypCandidate& cand = cands[i];
    cand.center = job.center;
    cand.radius = job.radius;
    cand.period = job.period;
    const SphericalDisc disc(job.center, job.radius);
    const Ring ring = make_ring(spec, disc, samples);
    for (const auto& s : ring.points)
      if (s.is_infinite()) {
        cand.failure = RepellerFailure::disc_meets_postsingular;
        return;
      }
    std::vector<CompositeBranch> good;
    RepellerFailure last = RepellerFailure::too_few_branches;
    for (const BranchCheck& chk : checked_branches_into_disc(spec, disc, ring, job.period, max_sheet)) {
      if (chk.branch)
        good.push_back(*chk.branch);
      else
        last = chk.failure;
    }
    std::vector<char> keep(good.size(), 0);
    const double gap = good.empty() ? kInf : pairwise_gap(good, &keep);
    RepellerSystem sys{spec, disc, {}, gap, samples, job.period};
    for (std::size_t j = 0; j < good.size(); ++j)
      if (keep[j]) {
        sys.branches.push_back(good[j]);
        sys.separation_margin = std::min(sys.separation_margin, good[j].inside_margin);
      }
    cand.branch_count = static_cast<int>(sys.branches.size());
    if (sys.branches.size() < 2) {
      cand.failure = good.size() >= 2 ? RepellerFailure::overlap : last;
      return;
    }
    int depth = 1;
    while (std::pow(static_cast<double>(sys.branches.size()), depth + 1) <= 4096.0) ++depth;
    cand.valid = true;
    cand.pressure = subsystem_pressure(sys, t, depth, 1);
    systems[i] = std::move(sys);
  });

  rep.candidates_tried = static_cast<int>(jobs.size());
  for (std::size_t i = 0; i < cands.size(); ++i) {
    if (!cands[i].valid) continue;
    ++rep.valid_systems;
    if (cands[i].pressure.per_iterate > rep.value) {
      rep.value = cands[i].pressure.per_iterate;
      rep.lower = cands[i].pressure.per_iterate_lower;
      rep.upper = cands[i].pressure.per_iterate_upper;
      rep.best = systems[i];
    }
  }
  rep.candidates = std::move(cands);
  return rep;
}

}  // namespace bowen
