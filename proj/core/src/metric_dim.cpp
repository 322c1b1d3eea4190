#include "rmdim/metric_dim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "rmdim/error.hpp"
#include "rmdim/parallel.hpp"

namespace rmdim {

EpsProcess EpsProcess::constant(double eps) { return per_state({eps}); }

EpsProcess EpsProcess::per_state(std::vector<double> eps) {
  if (eps.empty()) throw ConfigError("eps needs at least one value", "eps");
  for (double e : eps)
    if (!(e > 0.0) || !std::isfinite(e)) throw ConfigError("eps values must be positive and finite", "eps");
  EpsProcess p;
  p.values_ = std::move(eps);
  return p;
}

EpsProcess EpsProcess::scaled(double factor) const {
  std::vector<double> v = values_;
  for (double& e : v) e *= factor;
  return per_state(std::move(v));
}

std::string_view to_string(SolveMode m) noexcept {
  switch (m) {
    case SolveMode::Exact: return "exact";
    case SolveMode::Greedy: return "greedy";
    case SolveMode::Auto: return "auto";
  }
  return "?";
}

SolveMode solve_mode_from_string(std::string_view s) {
  if (s == "exact") return SolveMode::Exact;
  if (s == "greedy") return SolveMode::Greedy;
  if (s == "auto") return SolveMode::Auto;
  throw ConfigError("mode must be exact, greedy or auto", "mode");
}

std::string_view to_string(Bound b) noexcept {
  switch (b) {
    case Bound::Exact: return "exact";
    case Bound::Lower: return "greedy-lower";
    case Bound::Upper: return "greedy-upper";
  }
  return "?";
}

namespace {

// Pairs with scaled distance below this are "close"; the slack absorbs rounding at d = 1.
constexpr double kClose = 1.0 - kDistanceTol;

// Orbits of a set of fiber points under one path, with per-step inverse resolutions.
struct Cloud {
  const FiniteMetricSpace* metric = nullptr;
  std::vector<std::size_t> pts;
  std::vector<std::vector<std::size_t>> orbit;  // orbit[k][i]
  std::vector<double> inv_eps;

  std::size_t size() const noexcept { return pts.size(); }

  double dist(std::size_t i, std::size_t j) const noexcept {
    double d = 0.0;
    for (std::size_t k = 0; k < orbit.size(); ++k)
      d = std::max(d, metric->distance(orbit[k][i], orbit[k][j]) * inv_eps[k]);
    return d;
  }
  bool close(std::size_t i, std::size_t j) const noexcept { return dist(i, j) < kClose; }
};

Cloud make_cloud(const BundleSystem& sys, const EnvPath& path, const EpsProcess& eps, std::size_t n,
                 const std::vector<std::size_t>& points) {
  if (n == 0) throw InputError("n must be at least 1");
  Cloud c;
  c.metric = &sys.metric();
  const OrbitTable t = iterate(sys, path, n);
  std::vector<std::size_t> pos;
  if (points.empty()) {
    c.pts = t.points;
    pos.resize(t.points.size());
    std::iota(pos.begin(), pos.end(), 0);
  } else {
    for (auto x : points) {
      auto it = std::lower_bound(t.points.begin(), t.points.end(), x);
      if (it == t.points.end() || *it != x) throw InputError("point " + std::to_string(x) + " is not in the fiber");
      c.pts.push_back(x);
      pos.push_back(static_cast<std::size_t>(it - t.points.begin()));
    }
  }
  c.orbit.assign(n, std::vector<std::size_t>(c.pts.size()));
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < c.pts.size(); ++i) c.orbit[k][i] = t.orbit[k][pos[i]];
  for (std::size_t k = 0; k < n; ++k) c.inv_eps.push_back(1.0 / eps.at(path[k]));
  return c;
}

std::vector<std::uint64_t> close_masks(const Cloud& c) {
  std::vector<std::uint64_t> close(c.size(), 0);
  for (std::size_t i = 0; i < c.size(); ++i)
    for (std::size_t j = i + 1; j < c.size(); ++j)
      if (c.close(i, j)) {
        close[i] |= std::uint64_t{1} << j;
        close[j] |= std::uint64_t{1} << i;
      }
  return close;
}

// Grid index over a few feature coordinates. On weighted-sup and line carriers the Bowen distance
// is a sup over features u = weight * coord / eps, so d < 1 forces |du| < 1 on every indexed feature.
class NeighbourIndex {
 public:
  explicit NeighbourIndex(const Cloud& c) : cloud_(c) {
    const auto& m = *c.metric;
    std::vector<double> w;
    std::size_t cdim = 0;
    if (m.kind() == FiniteMetricSpace::Kind::WeightedSup) {
      w = m.weights();
      cdim = w.size();
    } else if (m.kind() == FiniteMetricSpace::Kind::Line) {
      w = {1.0};
      cdim = 1;
    } else {
      return;
    }
    cdim_ = cdim;
    // Candidate features (k, coordinate), ranked by spread; proportional duplicates skipped.
    std::vector<Feature> feats;
    for (std::size_t k = 0; k < c.orbit.size(); ++k)
      for (std::size_t d = 0; d < cdim; ++d) {
        const double s = w[d] * c.inv_eps[k];
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (std::size_t i = 0; i < c.size(); ++i) {
          const double v = s * m.coords()[c.orbit[k][i] * cdim + d];
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
        if (hi - lo >= 1.0) feats.push_back({k, d, s, lo, hi - lo});
      }
    std::stable_sort(feats.begin(), feats.end(),
                     [](const Feature& a, const Feature& b) { return a.spread > b.spread; });
    for (const auto& f : feats) {
      if (chosen_.size() == 3) break;
      bool dup = false;
      for (const auto& g : chosen_) {
        bool prop = true;
        for (std::size_t i = 0; i < c.size() && prop; ++i)
          prop = std::abs((value(f, i) - f.lo) / f.spread - (value(g, i) - g.lo) / g.spread) < 1e-12;
        if (prop) dup = true;
      }
      if (!dup) chosen_.push_back(f);
    }
  }

  bool active() const noexcept { return !chosen_.empty(); }

  void insert(std::size_t i) { cells_[key(cell_of(i))].push_back(i); }

  // Every indexed point within d < 1 of point i lands in the returned cells.
  template <class F>
  void for_candidates(std::size_t i, F&& f) const {
    const auto base = cell_of(i);
    std::vector<std::int64_t> cur(base.size());
    const std::size_t total = static_cast<std::size_t>(std::pow(3, base.size()));
    for (std::size_t code = 0; code < total; ++code) {
      std::size_t r = code;
      for (std::size_t d = 0; d < base.size(); ++d) {
        cur[d] = base[d] + static_cast<std::int64_t>(r % 3) - 1;
        r /= 3;
      }
      auto it = cells_.find(key(cur));
      if (it == cells_.end()) continue;
      for (auto j : it->second) f(j);
    }
  }

 private:
  struct Feature {
    std::size_t k, c;
    double scale, lo, spread;
  };

  double value(const Feature& f, std::size_t i) const {
    return f.scale * cloud_.metric->coords()[cloud_.orbit[f.k][i] * cdim_ + f.c];
  }

  std::vector<std::int64_t> cell_of(std::size_t i) const {
    std::vector<std::int64_t> out;
    for (const auto& f : chosen_) out.push_back(static_cast<std::int64_t>(std::floor(value(f, i) - f.lo)));
    return out;
  }
  static std::uint64_t key(const std::vector<std::int64_t>& cell) {
    std::uint64_t h = 1469598103934665603ull;
    for (auto v : cell) {
      h ^= static_cast<std::uint64_t>(v + (1 << 20));
      h *= 1099511628211ull;
    }
    return h;
  }

  const Cloud& cloud_;
  std::size_t cdim_ = 0;
  std::vector<Feature> chosen_;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> cells_;
};

// Sequential scan; value is a lower bound on sep.
std::vector<std::size_t> greedy_separated(const Cloud& c) {
  std::vector<std::size_t> s;
  NeighbourIndex idx(c);
  for (std::size_t i = 0; i < c.size(); ++i) {
    bool ok = true;
    if (idx.active()) {
      idx.for_candidates(i, [&](std::size_t j) { ok = ok && !c.close(i, j); });
    } else {
      for (auto j : s)
        if (c.close(i, j)) {
          ok = false;
          break;
        }
    }
    if (ok) {
      s.push_back(i);
      if (idx.active()) idx.insert(i);
    }
  }
  return s;
}

// Greedy clique growth from the lowest uncovered point; value is an upper bound on cov.
std::vector<std::vector<std::size_t>> greedy_cliques(const Cloud& c) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<char> covered(c.size(), 0);
  NeighbourIndex idx(c);
  if (idx.active())
    for (std::size_t i = 0; i < c.size(); ++i) idx.insert(i);
  std::vector<std::size_t> cand;
  for (std::size_t v = 0; v < c.size(); ++v) {
    if (covered[v]) continue;
    cand.clear();
    if (idx.active()) {
      idx.for_candidates(v, [&](std::size_t j) {
        if (!covered[j] && j != v && c.close(v, j)) cand.push_back(j);
      });
      std::sort(cand.begin(), cand.end());
    } else {
      for (std::size_t j = v + 1; j < c.size(); ++j)
        if (!covered[j] && c.close(v, j)) cand.push_back(j);
    }
    std::vector<std::size_t> clique{v};
    covered[v] = 1;
    for (auto j : cand) {
      bool ok = true;
      for (auto m : clique)
        if (!c.close(j, m)) {
          ok = false;
          break;
        }
      if (ok) {
        clique.push_back(j);
        covered[j] = 1;
      }
    }
    out.push_back(std::move(clique));
  }
  return out;
}

struct MisSearch {
  const std::vector<std::uint64_t>& close;
  std::size_t best = 0;
  std::uint64_t best_set = 0;

  std::size_t partition_bound(std::uint64_t cand) const {
    std::size_t k = 0;
    while (cand) {
      const auto v = static_cast<std::size_t>(std::countr_zero(cand));
      std::uint64_t clique = std::uint64_t{1} << v;
      std::uint64_t pool = cand & close[v];
      while (pool) {
        const auto u = static_cast<std::size_t>(std::countr_zero(pool));
        clique |= std::uint64_t{1} << u;
        pool &= close[u];
      }
      cand &= ~clique;
      ++k;
    }
    return k;
  }

  void run(std::uint64_t cand, std::size_t cur, std::uint64_t set) {
    if (!cand) {
      if (cur > best) {
        best = cur;
        best_set = set;
      }
      return;
    }
    if (cur + partition_bound(cand) <= best) return;
    std::size_t v = 0;
    int deg = -1;
    for (std::uint64_t b = cand; b; b &= b - 1) {
      const auto u = static_cast<std::size_t>(std::countr_zero(b));
      const int d = std::popcount(close[u] & cand);
      if (d > deg) {
        deg = d;
        v = u;
      }
    }
    const std::uint64_t bit = std::uint64_t{1} << v;
    if (deg == 0) {
      run(0, cur + static_cast<std::size_t>(std::popcount(cand)), set | cand);
      return;
    }
    run(cand & ~close[v] & ~bit, cur + 1, set | bit);
    run(cand & ~bit, cur, set);
  }
};

struct ColourSearch {
  std::size_t n;
  std::vector<std::uint64_t> far;
  std::size_t lower;
  std::size_t best;
  std::vector<std::uint64_t> best_classes;
  std::vector<std::uint64_t> classes;
  std::uint64_t coloured = 0;

  void run() {
    if (best <= lower) return;
    const std::uint64_t all = n == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1;
    if (coloured == all) {
      if (classes.size() < best) {
        best = classes.size();
        best_classes = classes;
      }
      return;
    }
    // DSATUR choice: most classes blocked, then most uncoloured far neighbours.
    std::size_t v = 0;
    int best_sat = -1, best_deg = -1;
    for (std::uint64_t b = all & ~coloured; b; b &= b - 1) {
      const auto u = static_cast<std::size_t>(std::countr_zero(b));
      int sat = 0;
      for (auto c : classes) sat += (c & far[u]) != 0;
      const int deg = std::popcount(far[u] & ~coloured);
      if (sat > best_sat || (sat == best_sat && deg > best_deg)) {
        best_sat = sat;
        best_deg = deg;
        v = u;
      }
    }
    const std::uint64_t bit = std::uint64_t{1} << v;
    coloured |= bit;
    for (std::size_t c = 0; c < classes.size(); ++c) {
      if (classes[c] & far[v]) continue;
      classes[c] |= bit;
      run();
      classes[c] &= ~bit;
      if (best <= lower) break;
    }
    if (best > lower && classes.size() + 1 < best) {
      classes.push_back(bit);
      run();
      classes.pop_back();
    }
    coloured &= ~bit;
  }
};

bool use_exact(const SolveOptions& opt, std::size_t size) {
  switch (opt.mode) {
    case SolveMode::Exact:
      if (size > std::min<std::size_t>(opt.exact_cap, 64))
        throw SizeError("exact solver is capped at " + std::to_string(std::min<std::size_t>(opt.exact_cap, 64)) +
                        " points, fiber has " + std::to_string(size));
      return true;
    case SolveMode::Greedy: return false;
    case SolveMode::Auto: return size <= std::min<std::size_t>(opt.exact_cap, 64);
  }
  return false;
}

}  // namespace

double bowen_distance(const BundleSystem& sys, const EnvPath& path, const EpsProcess& eps, std::size_t n,
                      std::size_t x, std::size_t y) {
  const Cloud c = make_cloud(sys, path, eps, n, {std::min(x, y), std::max(x, y)});
  return x == y ? 0.0 : c.dist(0, 1);
}

std::size_t max_independent_set(const std::vector<std::uint64_t>& close, std::uint64_t* witness) {
  if (close.size() > 64) throw SizeError("graph solvers handle at most 64 vertices");
  if (close.empty()) {
    if (witness) *witness = 0;
    return 0;
  }
  MisSearch s{close};
  const std::uint64_t all = close.size() == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << close.size()) - 1;
  s.run(all, 0, 0);
  if (witness) *witness = s.best_set;
  return s.best;
}

std::size_t min_clique_cover(const std::vector<std::uint64_t>& close, std::vector<std::uint64_t>* witness) {
  const std::size_t n = close.size();
  if (n > 64) throw SizeError("graph solvers handle at most 64 vertices");
  if (n == 0) {
    if (witness) witness->clear();
    return 0;
  }
  const std::uint64_t all = n == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1;
  ColourSearch s;
  s.n = n;
  for (std::size_t v = 0; v < n; ++v) s.far.push_back(all & ~close[v] & ~(std::uint64_t{1} << v));
  // Independent points of the close graph need separate cliques.
  s.lower = max_independent_set(close);
  // Greedy first-fit in index order seeds the incumbent.
  for (std::size_t v = 0; v < n; ++v) {
    bool placed = false;
    for (auto& c : s.best_classes)
      if (!(c & s.far[v])) {
        c |= std::uint64_t{1} << v;
        placed = true;
        break;
      }
    if (!placed) s.best_classes.push_back(std::uint64_t{1} << v);
  }
  s.best = s.best_classes.size();
  s.run();
  if (witness) *witness = s.best_classes;
  return s.best;
}

SepCovResult sep(const BundleSystem& sys, const EnvPath& path, const EpsProcess& eps, std::size_t n,
                 const SolveOptions& opt) {
  const Cloud c = make_cloud(sys, path, eps, n, opt.points);
  SepCovResult r;
  if (use_exact(opt, c.size())) {
    std::uint64_t w = 0;
    r.value = max_independent_set(close_masks(c), &w);
    for (std::uint64_t b = w; b; b &= b - 1) r.points.push_back(c.pts[static_cast<std::size_t>(std::countr_zero(b))]);
    r.bound = Bound::Exact;
  } else {
    for (auto i : greedy_separated(c)) r.points.push_back(c.pts[i]);
    r.value = r.points.size();
    r.bound = Bound::Lower;
  }
  return r;
}

SepCovResult cov(const BundleSystem& sys, const EnvPath& path, const EpsProcess& eps, std::size_t n,
                 const SolveOptions& opt) {
  const Cloud c = make_cloud(sys, path, eps, n, opt.points);
  SepCovResult r;
  if (use_exact(opt, c.size())) {
    std::vector<std::uint64_t> w;
    r.value = min_clique_cover(close_masks(c), &w);
    for (auto m : w) {
      std::vector<std::size_t> set;
      for (std::uint64_t b = m; b; b &= b - 1) set.push_back(c.pts[static_cast<std::size_t>(std::countr_zero(b))]);
      r.sets.push_back(std::move(set));
    }
    r.bound = Bound::Exact;
  } else {
    for (const auto& clique : greedy_cliques(c)) {
      std::vector<std::size_t> set;
      for (auto i : clique) set.push_back(c.pts[i]);
      r.sets.push_back(std::move(set));
    }
    r.value = r.sets.size();
    r.bound = Bound::Upper;
  }
  return r;
}

SandwichResult sandwich_check(const BundleSystem& sys, const EnvPath& path, const EpsProcess& eps, std::size_t n,
                              const std::vector<std::size_t>& points) {
  SolveOptions opt;
  opt.mode = SolveMode::Exact;
  opt.points = points;
  const EpsProcess two = eps.scaled(2.0);
  SandwichResult r;
  r.sep_2eps = sep(sys, path, two, n, opt).value;
  r.cov_2eps = cov(sys, path, two, n, opt).value;
  r.sep_eps = sep(sys, path, eps, n, opt).value;
  r.pass = r.sep_2eps <= r.cov_2eps && r.cov_2eps <= r.sep_eps;
  return r;
}

std::vector<std::size_t> subsample_fiber(const Subset& fiber, std::size_t cap) {
  auto pts = fiber.indices();
  if (cap == 0 || pts.size() <= cap) return pts;
  std::vector<std::size_t> out;
  out.reserve(cap);
  for (std::size_t i = 0; i < cap; ++i) out.push_back(pts[i * pts.size() / cap]);
  return out;
}

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : std::numeric_limits<double>::quiet_NaN();
}

namespace {

void check_grid(const std::vector<double>& eps_grid, const std::vector<std::size_t>& n_list) {
  if (eps_grid.empty()) throw ConfigError("eps grid is empty", "eps_grid");
  for (std::size_t i = 0; i < eps_grid.size(); ++i) {
    if (!(eps_grid[i] > 0.0 && eps_grid[i] < 1.0)) throw ConfigError("eps values must lie in (0, 1)", "eps_grid");
    if (i && !(eps_grid[i] < eps_grid[i - 1])) throw ConfigError("eps grid must be strictly decreasing", "eps_grid");
  }
  if (n_list.empty()) throw ConfigError("n list is empty", "n_list");
  for (std::size_t i = 0; i < n_list.size(); ++i)
    if (n_list[i] == 0 || (i && n_list[i] <= n_list[i - 1]))
      throw ConfigError("n list must be strictly increasing positive integers", "n_list");
}

SolveOptions cell_options(const BundleSystem& sys, const EnvPath& path, const MmdimOptions& opt) {
  SolveOptions s = opt.solve;
  if (opt.subsample > 0 && s.points.empty()) s.points = subsample_fiber(sys.fiber(path[0]), opt.subsample);
  return s;
}

MmdimCell compute_cell(const BundleSystem& sys, const EnvPath& path, double e, std::size_t n, const MmdimOptions& opt) {
  const SolveOptions s = cell_options(sys, path, opt);
  const EpsProcess eps = EpsProcess::constant(e);
  MmdimCell cell;
  cell.path = path.index;
  cell.eps = e;
  cell.n = n;
  const auto sr = sep(sys, path, eps, n, s);
  cell.sep = sr.value;
  cell.sep_bound = sr.bound;
  if (opt.compute_cov) {
    const auto cr = cov(sys, path, eps, n, s);
    cell.cov = cr.value;
    cell.cov_bound = cr.bound;
  }
  return cell;
}

MmdimFiber summarize(std::size_t path, const std::vector<double>& eps_grid, const std::vector<std::size_t>& n_list,
                     const MmdimCell* cells, bool with_cov) {
  MmdimFiber f;
  f.path = path;
  f.eps = eps_grid;
  std::vector<double> x;
  for (std::size_t e = 0; e < eps_grid.size(); ++e) {
    std::vector<double> seq;
    double s_cov = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n_list.size(); ++k) {
      const MmdimCell& c = cells[e * n_list.size() + k];
      const double n = static_cast<double>(c.n);
      seq.push_back(std::log(static_cast<double>(c.sep)) / n);
      if (with_cov) s_cov = std::min(s_cov, std::log(static_cast<double>(c.cov)) / n);
    }
    f.s_cov.push_back(with_cov ? s_cov : std::numeric_limits<double>::quiet_NaN());
    f.s_sep.push_back(seq.back());
    f.s_sep_sequence.push_back(std::move(seq));
    const double scale = -std::log(eps_grid[e]);
    x.push_back(scale);
    f.ratio.push_back(f.s_sep.back() / scale);
  }
  f.min_ratio = *std::min_element(f.ratio.begin(), f.ratio.end());
  f.slope = eps_grid.size() >= 2 ? least_squares_slope(x, f.s_sep) : f.ratio.front();
  return f;
}

double weighted_mean(const std::vector<double>& v, const std::vector<double>& w) {
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) s += w[i] * v[i];
  return s;
}

double standard_error(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double n = static_cast<double>(v.size());
  const double m = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / (n - 1.0) / n);
}

}  // namespace

MmdimFiber mmdim_fiber(const BundleSystem& sys, const EnvPath& path, const std::vector<double>& eps_grid,
                       const std::vector<std::size_t>& n_list, const MmdimOptions& opt, std::vector<MmdimCell>* cells) {
  check_grid(eps_grid, n_list);
  std::vector<MmdimCell> local(eps_grid.size() * n_list.size());
  parallel_for(local.size(), opt.threads, [&](std::size_t t) {
    local[t] = compute_cell(sys, path, eps_grid[t / n_list.size()], n_list[t % n_list.size()], opt);
  });
  MmdimFiber f = summarize(path.index, eps_grid, n_list, local.data(), opt.compute_cov);
  if (cells) cells->insert(cells->end(), local.begin(), local.end());
  return f;
}

MmdimReport mmdim_estimate(const BundleSystem& sys, const WeightedPaths& paths, const std::vector<double>& eps_grid,
                           const std::vector<std::size_t>& n_list, const MmdimOptions& opt) {
  check_grid(eps_grid, n_list);
  if (paths.paths.empty()) throw InputError("no environment paths");
  const std::size_t per_path = eps_grid.size() * n_list.size();
  MmdimReport rep;
  rep.exact_expectation = paths.exact;
  rep.cells.resize(paths.paths.size() * per_path);
  parallel_for(rep.cells.size(), opt.threads, [&](std::size_t t) {
    const std::size_t p = t / per_path, r = t % per_path;
    rep.cells[t] = compute_cell(sys, paths.paths[p], eps_grid[r / n_list.size()], n_list[r % n_list.size()], opt);
  });
  std::vector<double> mins, slopes;
  for (std::size_t p = 0; p < paths.paths.size(); ++p) {
    rep.fibers.push_back(
        summarize(paths.paths[p].index, eps_grid, n_list, rep.cells.data() + p * per_path, opt.compute_cov));
    mins.push_back(rep.fibers.back().min_ratio);
    slopes.push_back(rep.fibers.back().slope);
  }
  for (const auto& c : rep.cells)
    if (c.sep_bound != Bound::Exact || (opt.compute_cov && c.cov_bound != Bound::Exact)) rep.mixed_modes = true;
  rep.mean_min_ratio = weighted_mean(mins, paths.weights);
  rep.mean_slope = weighted_mean(slopes, paths.weights);
  if (!paths.exact) {
    rep.stderr_min_ratio = standard_error(mins);
    rep.stderr_slope = standard_error(slopes);
  }
  return rep;
}

HtopReport htop_estimate(const BundleSystem& sys, const WeightedPaths& paths, double eps_min,
                         const std::vector<std::size_t>& n_list, const MmdimOptions& opt) {
  check_grid({eps_min}, n_list);
  if (paths.paths.empty()) throw InputError("no environment paths");
  HtopReport rep;
  rep.eps_min = eps_min;
  rep.exact_expectation = paths.exact;
  rep.rows.resize(paths.paths.size() * n_list.size());
  parallel_for(rep.rows.size(), opt.threads, [&](std::size_t t) {
    const EnvPath& path = paths.paths[t / n_list.size()];
    const std::size_t n = n_list[t % n_list.size()];
    const auto r = sep(sys, path, EpsProcess::constant(eps_min), n, cell_options(sys, path, opt));
    rep.rows[t] = {path.index, n, r.value, r.bound, std::log(static_cast<double>(r.value)) / static_cast<double>(n)};
  });
  for (std::size_t p = 0; p < paths.paths.size(); ++p) rep.per_path.push_back(rep.rows[(p + 1) * n_list.size() - 1].rate);
  rep.estimate = weighted_mean(rep.per_path, paths.weights);
  if (!paths.exact) rep.stderr_estimate = standard_error(rep.per_path);
  return rep;
}

}  // namespace rmdim
