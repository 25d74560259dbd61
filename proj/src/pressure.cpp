#include "bowen_press/pressure.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>

#include "bowen_press/parallel.hpp"

namespace bowen {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = std::numbers::pi;

double log_add(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == -kInf) return a;
  if (a == kInf) return a;
  return a + std::log1p(std::exp(b - a));
}

/// ln(e^a - e^b), -inf when the difference is not positive.
double log_sub(double a, double b) {
  if (!(a > b)) return -kInf;
  if (b == -kInf) return a;
  return a + std::log1p(-std::exp(b - a));
}

struct Triple {
  double est = -kInf;
  double lo = -kInf;
  double hi = -kInf;
};

/// Rows r = 1..m, columns t; index (r-1)*nt + ti.
struct NodeTable {
  int m = 0;
  int nt = 0;
  std::vector<Triple> cells;
  NodeTable(int m_, int nt_) : m(m_), nt(nt_), cells(static_cast<std::size_t>(m_) * nt_) {}
  Triple& at(int r, int ti) { return cells[static_cast<std::size_t>(r - 1) * nt + ti]; }
  const Triple& at(int r, int ti) const { return cells[static_cast<std::size_t>(r - 1) * nt + ti]; }
};

/// Composite Simpson rule in u = ln x over [ln(K+1/2), ln(limit)]; weights already include dx = x du.
struct FarRule {
  std::vector<double> x;
  std::vector<double> log_fine;
  std::vector<double> log_coarse;  ///< -inf on odd nodes
  double corr_scale = 0.0;         ///< 1/(24 (x1 - x0)); midpoint-sum correction g'(K+1/2)/24
};

FarRule make_far_rule(int cutoff, int panels, double limit) {
  FarRule rule;
  if (panels <= 0) return rule;
  const double a = std::log(cutoff + 0.5);
  const double b = std::log(limit);
  const double h = (b - a) / panels;
  for (int i = 0; i <= panels; ++i) {
    const double xi = std::exp(a + i * h);
    const double wf = (i == 0 || i == panels) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    rule.x.push_back(xi);
    rule.log_fine.push_back(std::log(wf * h / 3.0 * xi));
    if (i % 2) {
      rule.log_coarse.push_back(-kInf);
    } else {
      const int j = i / 2;
      const int half = panels / 2;
      const double wc = (j == 0 || j == half) ? 1.0 : (j % 2 ? 4.0 : 2.0);
      rule.log_coarse.push_back(std::log(wc * 2.0 * h / 3.0 * xi));
    }
  }
  rule.corr_scale = 1.0 / (24.0 * (rule.x[1] - rule.x[0]));
  return rule;
}

/// ln T(A) with T(A) = A^{-t} + 2 sum_{l>=1} (A^2 + pi^2 (2l-1)^2)^{-t/2}; bounds sum_l |v_l|^{-t} over a vertical lattice.
double log_vertical_sum(double a, double t) {
  if (!(a > 0.0) || !(t > 1.0)) return kInf;
  LogSum s;
  s.add(-t * std::log(a));
  constexpr int kExplicit = 200;
  for (int l = 1; l <= kExplicit; ++l) {
    const double y = kPi * (2.0 * l - 1.0);
    s.add(std::log(2.0) - 0.5 * t * std::log(a * a + y * y));
  }
  // remaining l > 200: (pi (2l-1))^{-t} summed by the integral from 200
  s.add(std::log(2.0) - t * std::log(kPi) + (1.0 - t) * std::log(2.0 * kExplicit - 1.0) -
        std::log(2.0 * (t - 1.0)));
  return s.log();
}

/// ln E_m(rho): sup over |w| >= rho of (|w|/(1+|w|^2))^t S_m(t, w) for the exponential family.
double log_exp_envelope(int m, double rho, double t, double log_abs_lambda) {
  if (m == 0) return rho >= 1.0 ? t * (std::log(rho) - log1p_abs2(cplx(rho, 0.0))) : -t * std::log(2.0);
  const double a = std::log(rho) - log_abs_lambda;
  if (!(a > 0.0)) return kInf;
  return log_vertical_sum(a, t) + log_exp_envelope(m - 1, a, t, log_abs_lambda);
}

struct Edge {
  cplx w;
  double log_deriv = 0.0;  ///< ln|f*(w)|
  double log_fine = 0.0;   ///< ln of the fine quadrature coefficient (0 for explicit sheets)
  double log_coarse = -kInf;
  bool far = false;
  int side = 0;
  int node = 0;
};

class Engine {
 public:
  Engine(const FamilySpec& spec, std::vector<double> ts, const TruncationPolicy& policy)
      : spec_(spec), ts_(std::move(ts)), policy_(policy), nt_(static_cast<int>(ts_.size())) {
    t_min_ = *std::min_element(ts_.begin(), ts_.end());
    for (int level = 0; level < policy_.depth; ++level) {
      rules_.push_back(spec_.transcendental() && use_tails()
                           ? make_far_rule(policy_.cutoff_at(level), policy_.far_panels, policy_.far_limit)
                           : FarRule{});
    }
  }

  bool use_tails() const { return policy_.tail_mode == TailMode::propagate_upper; }

  std::vector<Edge> edges(cplx u, int level, std::optional<SheetLattice>& lattice) const {
    std::vector<Edge> out;
    if (spec_.kind() == FamilyKind::quadratic) {
      const cplx r = std::sqrt(u - spec_.parameter());
      for (int s = 0; s < 2; ++s) {
        Edge e;
        e.w = s == 0 ? r : -r;
        e.log_deriv = e.w == cplx(0.0, 0.0) ? -kInf : sph_derivative(e.w, u, std::log(2.0 * std::abs(e.w))).log_magnitude;
        e.node = s;
        out.push_back(e);
      }
      return out;
    }
    lattice = sheet_lattice(spec_, u);
    if (!lattice) return out;
    const int k_cut = policy_.cutoff_at(level);
    for (int k = -k_cut; k <= k_cut; ++k) {
      Edge e;
      e.w = lattice->point(k);
      e.log_deriv = lattice->log_sph_deriv(e.w);
      e.node = k;
      out.push_back(e);
    }
    const FarRule& rule = rules_[static_cast<std::size_t>(level)];
    for (int side : {1, -1}) {
      for (std::size_t i = 0; i < rule.x.size(); ++i) {
        Edge e;
        e.w = lattice->point(side * rule.x[i]);
        e.log_deriv = lattice->log_sph_deriv(e.w);
        e.log_fine = rule.log_fine[i];
        e.log_coarse = rule.log_coarse[i];
        e.far = true;
        e.side = side;
        e.node = static_cast<int>(i);
        out.push_back(e);
      }
    }
    return out;
  }

  /// Sums of depth 1..m below u; acc_log_weight is the ancestry weight at the smallest t.
  NodeTable evaluate(cplx u, int m, int level, double acc_log_weight, int threads) const {
    NodeTable out(m, nt_);
    std::optional<SheetLattice> lattice;
    const std::vector<Edge> es = edges(u, level, lattice);
    if (es.empty()) return out;  // omitted value: empty sum

    const double thr1 = level_divergence_threshold(spec_);
    const double thr_deep = deep_divergence_threshold(spec_);
    const int k_cut = policy_.cutoff_at(level);

    for (int ti = 0; ti < nt_; ++ti) {
      const double t = ts_[ti];
      LogSum ex;
      for (const Edge& e : es)
        if (!e.far) ex.add(-t * e.log_deriv);
      Triple& cell = out.at(1, ti);
      cell.lo = ex.log();
      cell.est = cell.hi = cell.lo;
      if (lattice && use_tails()) {
        if (!(t > thr1)) {
          cell = {kInf, kInf, kInf};
        } else {
          const double explicit_sum = cell.lo;
          cell.lo = log_add(explicit_sum, log_lattice_tail_lower(*lattice, k_cut, t));
          cell.est = log_add(explicit_sum, log_lattice_tail_estimate(*lattice, k_cut, t));
          cell.hi = log_add(explicit_sum, log_lattice_tail_bound(*lattice, k_cut, t));
        }
      }
    }
    if (m == 1) return out;

    // children: full subtree or, when pruned, only the level-1 sums for the crude bound
    std::vector<NodeTable> kids(es.size(), NodeTable(0, 0));
    std::vector<char> pruned(es.size(), 0);
    for (std::size_t i = 0; i < es.size(); ++i) {
      const double w = acc_log_weight + es[i].log_fine - t_min_ * es[i].log_deriv;
      pruned[i] = w < policy_.prune_log_weight;
    }
    auto expand = [&](std::size_t i) {
      const double w = acc_log_weight + es[i].log_fine - t_min_ * es[i].log_deriv;
      kids[i] = evaluate(es[i].w, pruned[i] ? 1 : m - 1, level + 1, w, 1);
    };
    parallel_for(es.size(), threads, expand);

    const FarRule& rule = rules_[static_cast<std::size_t>(level)];
    for (int r = 2; r <= m; ++r) {
      for (int ti = 0; ti < nt_; ++ti) {
        const double t = ts_[ti];
        Triple& cell = out.at(r, ti);
        if (!(t > thr_deep)) {
          cell = {kInf, kInf, kInf};
          continue;
        }
        LogSum ex_est, ex_lo, ex_hi, f_est, f_coarse, f_lo, f_hi, pruned_hi;
        double first[2][2] = {{-kInf, -kInf}, {-kInf, -kInf}};  // [side][node] est terms, nodes 0 and 1
        bool corr_ok = true;
        for (std::size_t i = 0; i < es.size(); ++i) {
          const Edge& e = es[i];
          const double lw = -t * e.log_deriv;
          if (pruned[i]) {
            pruned_hi.add(e.log_fine + lw + (r - 1) * kids[i].at(1, ti).hi);
            if (e.far && e.node <= 1) corr_ok = false;
            continue;
          }
          const Triple& c = kids[i].at(r - 1, ti);
          if (!e.far) {
            ex_est.add(lw + c.est);
            ex_lo.add(lw + c.lo);
            ex_hi.add(lw + c.hi);
            continue;
          }
          f_est.add(e.log_fine + lw + c.est);
          f_coarse.add(e.log_coarse + lw + c.est);
          f_lo.add(e.log_fine + lw + c.lo);
          f_hi.add(e.log_fine + lw + c.hi);
          if (e.node <= 1) first[e.side > 0 ? 0 : 1][e.node] = lw + c.est;
        }

        double est = ex_est.log();
        double lo = ex_lo.log();
        double hi = log_add(ex_hi.log(), pruned_hi.log());
        if (!rule.x.empty()) {
          const double fine = f_est.log();
          const double coarse = f_coarse.log();
          double err = fine > coarse ? log_sub(fine, coarse) : log_sub(coarse, fine);
          // signed midpoint correction, applied per side
          double corr_pos = -kInf, corr_neg = -kInf;
          if (corr_ok) {
            for (auto& side : first) {
              const double d = side[1] > side[0] ? log_sub(side[1], side[0]) : log_sub(side[0], side[1]);
              const double term = d + std::log(rule.corr_scale);
              if (side[1] > side[0])
                corr_pos = log_add(corr_pos, term);
              else
                corr_neg = log_add(corr_neg, term);
            }
          }
          err = log_add(err, log_add(corr_pos, corr_neg));
          const double fine_corr = log_sub(log_add(fine, corr_pos), corr_neg);
          est = log_add(est, fine_corr);
          lo = log_add(lo, log_sub(f_lo.log(), err));
          hi = log_add(hi, log_add(f_hi.log(), err));
        }
        if (lattice && use_tails()) hi = log_add(hi, remainder(*lattice, r, t, k_cut, rule, kids, es));
        cell = {est, lo, hi};
      }
    }
    return out;
  }

 private:
  /// Bound on the sheets beyond the explicit range and the quadrature window.
  double remainder(const SheetLattice& lattice, int r, double t, int k_cut, const FarRule& rule,
                   const std::vector<NodeTable>& kids, const std::vector<Edge>& es) const {
    const double j = rule.x.empty() ? static_cast<double>(k_cut) : policy_.far_limit;
    if (spec_.kind() == FamilyKind::exponential) {
      const double rho = kPi * (2.0 * j + 1.0);
      const double env = log_exp_envelope(r - 1, rho, t, std::log(std::abs(spec_.parameter())));
      const double lattice_sum = std::log(2.0) - t * std::log(kPi) + (1.0 - t) * std::log(2.0 * j - 1.0) -
                                 std::log(2.0 * (t - 1.0));
      return t * lattice.log_scale + env + lattice_sum;
    }
    // tangent: level-one tail mass times the largest level-one upper sum among the explicit children
    const int ti = static_cast<int>(std::find(ts_.begin(), ts_.end(), t) - ts_.begin());
    double u1 = -kInf;
    for (std::size_t i = 0; i < es.size(); ++i)
      if (!es[i].far && kids[i].m >= 1) u1 = std::max(u1, kids[i].at(1, ti).hi);
    return log_lattice_tail_bound(lattice, j, t) + (r - 1) * std::max(u1, 0.0);
  }

  const FamilySpec& spec_;
  std::vector<double> ts_;
  TruncationPolicy policy_;
  int nt_;
  double t_min_ = 0.0;
  std::vector<FarRule> rules_;
};

void check_inputs(const FamilySpec& spec, const std::vector<double>& ts, const ExtendedPoint& z) {
  for (double t : ts)
    if (!(t > 0.0) || !std::isfinite(t)) throw std::invalid_argument("t must be a positive finite number");
  if (z.is_infinite()) throw std::invalid_argument("base point must be finite");
  (void)spec;
}

SumInterval to_interval(const Triple& c, bool divergent, bool tail_ignored) {
  SumInterval s;
  s.log_lower = c.lo;
  s.log_estimate = c.est;
  s.log_upper = c.hi;
  s.divergent = divergent || c.hi == kInf;
  s.tail_ignored = tail_ignored;
  if (s.divergent) s.log_lower = s.log_estimate = s.log_upper = kInf;
  return s;
}

}  // namespace

void TruncationPolicy::validate() const {
  if (depth < 1) throw std::invalid_argument("depth must be >= 1");
  if (sheet_cutoff < 1) throw std::invalid_argument("sheet cutoff K must be >= 1");
  if (prune_log_weight > 0.0) throw std::invalid_argument("prune threshold must be <= 0");
  if (far_panels < 0 || far_panels % 4 != 0) throw std::invalid_argument("far panels must be a non-negative multiple of 4");
  if (far_panels > 0 && !(far_limit > sheet_cutoff + 1.0)) throw std::invalid_argument("far limit must exceed the cutoff");
  if (level_offset < 0) throw std::invalid_argument("level offset must be >= 0");
}

int TruncationPolicy::cutoff_at(int level) const {
  if (!decay_cutoff) return sheet_cutoff;
  const int d = std::min(level + level_offset, 30);
  return std::max(sheet_cutoff >> d, std::min(sheet_cutoff, 4));
}

TruncationPolicy TruncationPolicy::shifted() const {
  TruncationPolicy p = *this;
  p.level_offset += 1;
  p.depth = std::max(1, depth - 1);
  return p;
}

std::vector<TreeEdge> tree_edges(const FamilySpec& spec, cplx z, const TruncationPolicy& policy, int level) {
  policy.validate();
  TruncationPolicy p = policy;
  p.depth = std::max(p.depth, level + 1);
  const Engine engine(spec, {1.0}, p);
  std::optional<SheetLattice> lattice;
  const std::vector<Edge> es = engine.edges(z, level, lattice);
  std::vector<TreeEdge> out;
  for (const Edge& e : es) out.push_back({e.w, e.log_fine, e.log_deriv, e.far, e.far ? e.side * (e.node + 1) : e.node});
  // fold the midpoint correction into the first two far nodes of each side
  const FarRule rule = spec.transcendental() && p.tail_mode == TailMode::propagate_upper
                           ? make_far_rule(p.cutoff_at(level), p.far_panels, p.far_limit)
                           : FarRule{};
  if (!rule.x.empty()) {
    for (TreeEdge& e : out) {
      if (!e.far) continue;
      const long node = std::abs(e.index) - 1;
      if (node > 1) continue;
      const double coeff = std::exp(e.log_coeff) + (node == 0 ? -rule.corr_scale : rule.corr_scale);
      e.log_coeff = std::log(coeff);
    }
  }
  return out;
}

std::vector<WeightedPreimage> enumerate_preimages(const FamilySpec& spec, double t, const ExtendedPoint& z,
                                                  int depth, int cutoff) {
  if (depth < 0) throw std::invalid_argument("depth must be >= 0");
  std::vector<WeightedPreimage> layer{{z, 0.0, 0, {}}};
  for (int d = 0; d < depth; ++d) {
    std::vector<WeightedPreimage> next;
    for (const auto& node : layer) {
      const BranchSet bs = inverse_branches(spec, node.point, cutoff, t);
      for (const auto& b : bs.branches) {
        WeightedPreimage child{b.point, node.log_weight - t * b.sph_deriv.log_magnitude, d + 1, node.sheet_path};
        child.sheet_path.push_back(b.index);
        next.push_back(std::move(child));
      }
    }
    layer = std::move(next);
  }
  return layer;
}

std::vector<std::vector<SumInterval>> level_sums_grid(const FamilySpec& spec, const std::vector<double>& ts,
                                                      const ExtendedPoint& z, const TruncationPolicy& policy,
                                                      int threads) {
  policy.validate();
  check_inputs(spec, ts, z);
  const bool ignored = policy.tail_mode == TailMode::ignore_with_flag && spec.transcendental();
  const double thr1 = level_divergence_threshold(spec);
  const double thr_deep = deep_divergence_threshold(spec);
  std::vector<std::vector<SumInterval>> out(ts.size(), std::vector<SumInterval>(static_cast<std::size_t>(policy.depth)));

  // group by how deep the sums stay finite: full depth, level one only, or nowhere
  std::vector<std::size_t> full, shallow;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (ignored || ts[i] > thr_deep || policy.depth == 1)
      full.push_back(i);
    else if (ts[i] > thr1)
      shallow.push_back(i);
    else
      for (auto& s : out[i]) s = to_interval({}, true, false);
  }
  auto run = [&](const std::vector<std::size_t>& idx, int m) {
    if (idx.empty()) return;
    std::vector<double> sub;
    for (std::size_t i : idx) sub.push_back(ts[i]);
    const Engine engine(spec, sub, policy);
    const NodeTable table = engine.evaluate(z.value(), m, 0, 0.0, threads);
    for (std::size_t j = 0; j < idx.size(); ++j) {
      for (int r = 1; r <= policy.depth; ++r) {
        const bool structural = !ignored && ((r == 1 && !(sub[j] > thr1)) || (r > 1 && !(sub[j] > thr_deep)));
        out[idx[j]][static_cast<std::size_t>(r - 1)] =
            r <= m ? to_interval(table.at(r, static_cast<int>(j)), structural, ignored) : to_interval({}, true, ignored);
      }
    }
  };
  run(full, policy.depth);
  run(shallow, 1);
  return out;
}

std::vector<SumInterval> level_sums(const FamilySpec& spec, double t, const ExtendedPoint& z,
                                    const TruncationPolicy& policy, int threads) {
  return level_sums_grid(spec, {t}, z, policy, threads).front();
}

SumInterval level_sum(const FamilySpec& spec, double t, const ExtendedPoint& z, int cutoff) {
  TruncationPolicy p;
  p.depth = 1;
  p.sheet_cutoff = cutoff;
  return level_sums(spec, t, z, p).front();
}

SumInterval s_n(const FamilySpec& spec, double t, const ExtendedPoint& z, const TruncationPolicy& policy,
                int threads) {
  return level_sums(spec, t, z, policy, threads).back();
}

PressureEstimate make_estimate(double t, const std::vector<SumInterval>& sums) {
  PressureEstimate p;
  p.t = t;
  for (std::size_t i = 0; i < sums.size(); ++i) {
    LevelRecord rec;
    rec.n = static_cast<int>(i + 1);
    rec.sum = sums[i];
    const double n = rec.n;
    rec.p_lower = rec.sum.log_lower / n;
    rec.p_estimate = rec.sum.log_estimate / n;
    rec.p_upper = rec.sum.log_upper / n;
    if (i > 0) {
      const SumInterval& prev = sums[i - 1];
      rec.has_ratio = true;
      if (rec.sum.divergent || prev.divergent) {
        rec.ratio_lower = rec.ratio_estimate = rec.ratio_upper = kInf;
      } else if (rec.sum.log_estimate == -kInf || prev.log_estimate == -kInf) {
        rec.ratio_lower = rec.ratio_estimate = rec.ratio_upper = -kInf;
      } else {
        rec.ratio_estimate = rec.sum.log_estimate - prev.log_estimate;
        rec.ratio_lower = rec.sum.log_lower - prev.log_upper;
        rec.ratio_upper = rec.sum.log_upper - prev.log_lower;
        if (std::isnan(rec.ratio_lower)) rec.ratio_lower = -kInf;
        if (std::isnan(rec.ratio_upper)) rec.ratio_upper = kInf;
      }
    }
    p.divergent = p.divergent || rec.sum.divergent;
    p.levels.push_back(rec);
  }
  if (!p.levels.empty()) {
    const LevelRecord& last = p.levels.back();
    if (last.has_ratio) {
      p.headline_lower = last.ratio_lower;
      p.headline = last.ratio_estimate;
      p.headline_upper = last.ratio_upper;
    } else {
      p.headline_lower = last.p_lower;
      p.headline = last.p_estimate;
      p.headline_upper = last.p_upper;
    }
  }
  if (p.divergent) p.headline_lower = p.headline = p.headline_upper = kInf;
  return p;
}

SignEvidence sign_evidence(const PressureEstimate& p) {
  if (p.divergent || p.headline_lower > 0.0) return SignEvidence::positive;
  if (p.headline_upper < 0.0) return SignEvidence::negative;
  return SignEvidence::ambiguous;
}

std::vector<PressureEstimate> pressure_estimates(const FamilySpec& spec, const std::vector<double>& ts,
                                                 const ExtendedPoint& z, const TruncationPolicy& policy,
                                                 int threads) {
  const auto grid = level_sums_grid(spec, ts, z, policy, threads);
  const GPSReport gps = gps_check(z, postsingular_orbit(spec, 32));
  std::vector<PressureEstimate> out;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    PressureEstimate p = make_estimate(ts[i], grid[i]);
    p.gps_warning = !gps.consistent_with_gps;
    out.push_back(std::move(p));
  }
  return out;
}

PressureEstimate pressure_estimate(const FamilySpec& spec, double t, const ExtendedPoint& z,
                                   const TruncationPolicy& policy, int threads) {
  return pressure_estimates(spec, {t}, z, policy, threads).front();
}

}  // namespace bowen
