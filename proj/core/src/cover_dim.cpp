#include "rmdim/cover_dim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "rmdim/error.hpp"
#include "rmdim/parallel.hpp"

namespace rmdim {

int ord(const Cover& alpha, const Subset& target) {
  int best = 0;
  bool any = false;
  target.for_each([&](std::size_t x) {
    int m = 0;
    for (const auto& u : alpha.members)
      if (x < u.universe() && u.contains(x)) ++m;
    if (m == 0) throw InputError("cover misses point " + std::to_string(x));
    best = std::max(best, m);
    any = true;
  });
  return any ? best - 1 : -1;
}

namespace {

bool equivalent_from(const std::vector<Subset>& f, const std::vector<Subset>& g, std::size_t next, const Subset& fi,
                     const Subset& gi) {
  for (std::size_t i = next; i < f.size(); ++i) {
    Subset a = fi & f[i];
    Subset b = gi & g[i];
    if (a.empty() != b.empty()) return false;
    // Both empty: every superset of this index set is empty on both sides.
    if (!a.empty() && !equivalent_from(f, g, i + 1, a, b)) return false;
  }
  return true;
}

}  // namespace

bool combinatorially_equivalent(const std::vector<Subset>& f, const std::vector<Subset>& g) {
  if (f.size() != g.size()) throw InputError("families have different index sets");
  if (f.size() > 20) throw SizeError("combinatorial equivalence check is limited to 20 members");
  if (f.empty()) return true;
  return equivalent_from(f, g, 0, Subset::full(f.front().universe()), Subset::full(g.front().universe()));
}

namespace {

// Branch-and-bound over covers built from candidate masks on at most 64 points.
struct CoverSearch {
  std::size_t n = 0;
  std::uint64_t full = 0;
  std::vector<std::uint64_t> cands;
  std::vector<std::vector<std::size_t>> by_point;
  std::uint64_t budget = 0;  // 0: unlimited
  std::uint64_t nodes = 0;
  bool exhausted = false;

  int best = 0;
  std::vector<std::uint64_t> best_cover;
  std::vector<std::uint64_t> chosen;
  int mult[64] = {};

  void prepare() {
    std::sort(cands.begin(), cands.end());
    cands.erase(std::unique(cands.begin(), cands.end()), cands.end());
    by_point.assign(n, {});
    for (std::size_t c = 0; c < cands.size(); ++c)
      for (std::size_t x = 0; x < n; ++x)
        if (cands[c] >> x & 1u) by_point[x].push_back(c);
  }

  bool irredundant() const {
    for (auto m : chosen) {
      bool priv = false;
      for (std::uint64_t b = m; b; b &= b - 1)
        if (mult[std::countr_zero(b)] == 1) {
          priv = true;
          break;
        }
      if (!priv) return false;
    }
    return true;
  }

  void run(std::uint64_t covered, int curmax) {
    if (budget && nodes >= budget) {
      exhausted = true;
      return;
    }
    ++nodes;
    if (covered == full) {
      if (curmax - 1 < best) {
        best = curmax - 1;
        best_cover = chosen;
      }
      return;
    }
    const std::size_t x = static_cast<std::size_t>(std::countr_zero(~covered & full));
    for (std::size_t c : by_point[x]) {
      const std::uint64_t m = cands[c];
      int nm = curmax;
      for (std::uint64_t b = m; b; b &= b - 1) nm = std::max(nm, mult[std::countr_zero(b)] + 1);
      if (nm - 1 >= best) continue;
      for (std::uint64_t b = m; b; b &= b - 1) ++mult[std::countr_zero(b)];
      chosen.push_back(m);
      if (irredundant()) run(covered | m, nm);
      chosen.pop_back();
      for (std::uint64_t b = m; b; b &= b - 1) --mult[std::countr_zero(b)];
      if (best <= 0 || exhausted) return;
    }
  }
};

int mask_ord(const std::vector<std::uint64_t>& cover, std::size_t n) {
  int best = 0;
  for (std::size_t x = 0; x < n; ++x) {
    int m = 0;
    for (auto c : cover) m += static_cast<int>(c >> x & 1u);
    best = std::max(best, m);
  }
  return best - 1;
}

std::uint64_t to_mask(const Subset& s, const std::vector<std::size_t>& index_map) {
  std::uint64_t m = 0;
  for (std::size_t k = 0; k < index_map.size(); ++k)
    if (s.contains(index_map[k])) m |= std::uint64_t{1} << k;
  return m;
}

Cover from_masks(const std::vector<std::uint64_t>& masks, const std::vector<std::size_t>& index_map,
                 std::size_t universe) {
  Cover c;
  for (auto m : masks) {
    Subset s(universe);
    for (std::uint64_t b = m; b; b &= b - 1) s.insert(index_map[static_cast<std::size_t>(std::countr_zero(b))]);
    c.members.push_back(std::move(s));
  }
  return c;
}

Subset mask_subset(std::uint64_t m, std::size_t k) {
  Subset s(k);
  for (std::uint64_t b = m; b; b &= b - 1) s.insert(static_cast<std::size_t>(std::countr_zero(b)));
  return s;
}

struct Prepared {
  FinitePoset sub;
  std::vector<std::size_t> index_map;
  std::vector<std::uint64_t> members;  // alpha cut to target, distinct nonempty
  std::uint64_t full = 0;
};

Prepared prepare(const FinitePoset& p, const Subset& target, const Cover& alpha, std::size_t max_elements) {
  if (alpha.universe() != p.size()) throw InputError("cover does not live on the poset");
  if (target.count() > max_elements)
    throw SizeError("poset has " + std::to_string(target.count()) + " elements, exact search is capped at " +
                    std::to_string(max_elements) + "; use dim_cover_upper");
  Prepared pr;
  pr.sub = p.induced(target, &pr.index_map);
  const std::size_t k = pr.index_map.size();
  pr.full = k == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << k) - 1;
  std::uint64_t covered = 0;
  for (const auto& u : alpha.members) {
    const Subset cut = u & target;
    if (!pr.sub.is_up_set(mask_subset(to_mask(cut, pr.index_map), k)))
      throw InputError("cover member is not open in the target");
    const std::uint64_t m = to_mask(cut, pr.index_map);
    covered |= m;
    if (m) pr.members.push_back(m);
  }
  if (covered != pr.full) throw InputError("cover does not cover the target");
  std::sort(pr.members.begin(), pr.members.end());
  pr.members.erase(std::unique(pr.members.begin(), pr.members.end()), pr.members.end());
  return pr;
}

// Minimal-neighbourhood cover {U_x : x minimal}; every U_x sits inside any open set holding x.
std::vector<std::uint64_t> minimal_neighbourhoods(const Prepared& pr) {
  std::vector<std::uint64_t> out;
  const std::size_t k = pr.index_map.size();
  for (std::size_t x = 0; x < k; ++x) {
    bool minimal = true;
    for (std::size_t y = 0; y < k && minimal; ++y)
      if (y != x && pr.sub.leq(y, x)) minimal = false;
    if (minimal) out.push_back(pr.sub.up_set(x).mask64());
  }
  return out;
}

DimResult solve(const Prepared& pr, std::vector<std::uint64_t> cands, std::uint64_t budget, std::size_t universe) {
  DimResult r;
  const std::size_t k = pr.index_map.size();
  if (k == 0) {
    r.value = -1;
    r.exact = true;
    return r;
  }
  CoverSearch s;
  s.n = k;
  s.full = pr.full;
  s.budget = budget;
  s.cands = std::move(cands);
  s.prepare();
  s.best = mask_ord(pr.members, k);
  s.best_cover = pr.members;
  const auto mins = minimal_neighbourhoods(pr);
  if (const int o = mask_ord(mins, k); o < s.best) {
    s.best = o;
    s.best_cover = mins;
  }
  if (s.best > 0) s.run(0, 0);
  r.value = s.best;
  r.witness = from_masks(s.best_cover, pr.index_map, universe);
  r.nodes_explored = s.nodes;
  r.exact = !s.exhausted;
  return r;
}

}  // namespace

DimResult dim_cover_exact_on(const FinitePoset& p, const Subset& target, const Cover& alpha, const DimOptions& opt) {
  const Prepared pr = prepare(p, target, alpha, std::min<std::size_t>(opt.element_cap, 64));
  const auto opens = open_sets(pr.sub, opt.element_cap);
  if (opens.size() > opt.open_set_cap)
    throw SizeError("open-set lattice has " + std::to_string(opens.size()) + " members, cap is " +
                    std::to_string(opt.open_set_cap));
  std::vector<std::uint64_t> cands;
  for (const auto& o : opens) {
    const std::uint64_t m = o.mask64();
    if (m == 0) continue;
    for (auto a : pr.members)
      if ((m & ~a) == 0) {
        cands.push_back(m);
        break;
      }
  }
  DimResult r = solve(pr, std::move(cands), 0, p.size());
  r.exact = true;
  return r;
}

DimResult dim_cover_exact(const FinitePoset& p, const Cover& alpha, const DimOptions& opt) {
  return dim_cover_exact_on(p, Subset::full(p.size()), alpha, opt);
}

DimResult dim_cover_upper(const FinitePoset& p, const Cover& alpha, std::uint64_t budget) {
  const Subset all = Subset::full(p.size());
  if (budget == 0) {
    DimResult r;
    r.value = ord(alpha, all);
    r.witness = alpha;
    r.exact = false;
    return r;
  }
  DimResult r;
  if (p.size() <= 16) {
    r = dim_cover_exact(p, alpha);
    if (r.nodes_explored > budget) {
      // Re-run under the budget so the reported node count honours it.
      const Prepared pr = prepare(p, all, alpha, 64);
      std::vector<std::uint64_t> cands;
      for (const auto& o : open_sets(pr.sub, 16))
        if (const auto m = o.mask64(); m)
          for (auto a : pr.members)
            if ((m & ~a) == 0) {
              cands.push_back(m);
              break;
            }
      r = solve(pr, std::move(cands), budget, p.size());
    }
  } else if (p.size() <= 64) {
    const Prepared pr = prepare(p, all, alpha, 64);
    std::vector<std::uint64_t> cands = pr.members;
    for (auto m : minimal_neighbourhoods(pr)) cands.push_back(m);
    for (std::size_t x = 0; x < pr.index_map.size(); ++x) cands.push_back(pr.sub.up_set(x).mask64());
    r = solve(pr, std::move(cands), budget, p.size());
  } else {
    r.value = ord(alpha, all);
    r.witness = alpha;
    std::vector<Subset> mins;
    for (std::size_t x = 0; x < p.size(); ++x) {
      bool minimal = true;
      for (std::size_t y = 0; y < p.size() && minimal; ++y)
        if (y != x && p.leq(y, x)) minimal = false;
      if (minimal) mins.push_back(p.up_set(x));
    }
    Cover m(std::move(mins));
    if (const int o = ord(m, all); o < r.value) {
      r.value = o;
      r.witness = std::move(m);
    }
  }
  r.exact = false;
  return r;
}

DimResult q_n_result(const BundleSystem& sys, const EnvPath& path, const Cover& alpha, std::size_t n,
                     const DimOptions& opt) {
  const Subset& fiber = sys.fiber(path.states.at(0));
  const auto members = joined_members(sys, path, alpha, n);
  if (!is_poset(sys.carrier())) {
    DimResult r;
    r.exact = true;
    r.value = fiber.empty() ? -1 : 0;
    fiber.for_each([&](std::size_t x) { r.witness.members.push_back(Subset(sys.carrier_size(), {x})); });
    return r;
  }
  return dim_cover_exact_on(sys.poset(), fiber, Cover(members), opt);
}

int q_n(const BundleSystem& sys, const EnvPath& path, const Cover& alpha, std::size_t n, const DimOptions& opt) {
  return q_n_result(sys, path, alpha, n, opt).value;
}

MdimReport mdim_estimate(const BundleSystem& sys, const Cover& alpha, const WeightedPaths& paths, std::size_t n_max,
                         std::size_t threads, const DimOptions& opt) {
  if (n_max == 0) throw InputError("n_max must be at least 1");
  if (paths.paths.empty()) throw InputError("no environment paths");
  MdimReport rep;
  rep.exact_expectation = paths.exact;
  const std::size_t np = paths.paths.size();
  rep.rows.resize(np * n_max);
  parallel_for(np * n_max, threads, [&](std::size_t t) {
    const std::size_t i = t / n_max, n = t % n_max + 1;
    const EnvPath& path = paths.paths[i];
    const auto members = joined_members(sys, path, alpha, n);
    const Subset& fiber = sys.fiber(path.states.at(0));
    MdimRow row;
    row.path = path.index;
    row.n = n;
    row.joined_members = members.size();
    row.ord_joined = ord(Cover(members), fiber);
    if (is_poset(sys.carrier())) {
      const DimResult d = dim_cover_exact_on(sys.poset(), fiber, Cover(members), opt);
      row.q = d.value;
      row.nodes = d.nodes_explored;
    } else {
      row.q = fiber.empty() ? -1 : 0;
    }
    rep.rows[t] = row;
  });
  rep.mean_over_n.assign(n_max, 0.0);
  for (std::size_t t = 0; t < rep.rows.size(); ++t) {
    const auto& row = rep.rows[t];
    rep.mean_over_n[row.n - 1] += paths.weights[t / n_max] * row.q / static_cast<double>(row.n);
    const double bound = std::pow(static_cast<double>(alpha.size()), static_cast<double>(row.n)) - 1.0;
    if (row.q > bound || row.q > row.ord_joined) ++rep.corollary_violations;
  }
  rep.running_inf.resize(n_max);
  double inf = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < n_max; ++k) rep.running_inf[k] = inf = std::min(inf, rep.mean_over_n[k]);
  rep.estimate = rep.running_inf.back();
  return rep;
}

std::vector<KingmanViolation> kingman_check(const BundleSystem& sys, const EnvPath& path, const Cover& alpha,
                                            std::size_t n_max, const DimOptions& opt) {
  if (path.length() < n_max) throw InputError("path shorter than n_max");
  // q[s][m] = q_m(theta^s w)
  std::vector<std::vector<int>> q(n_max, std::vector<int>(n_max + 1, 0));
  for (std::size_t s = 0; s < n_max; ++s) {
    const EnvPath shifted = path.shifted(s);
    for (std::size_t m = 1; s + m <= n_max; ++m) q[s][m] = q_n(sys, shifted, alpha, m, opt);
  }
  std::vector<KingmanViolation> out;
  for (std::size_t n = 1; n < n_max; ++n)
    for (std::size_t m = 1; n + m <= n_max; ++m) {
      const int lhs = q[0][n + m], rhs = q[0][n] + q[n][m];
      if (lhs > rhs) out.push_back({n, m, lhs, rhs});
    }
  return out;
}

MdimSupReport mdim_sup_estimate(const BundleSystem& sys, const std::vector<Cover>& covers,
                                const std::vector<std::pair<std::size_t, std::size_t>>& refinement_pairs,
                                const WeightedPaths& paths, std::size_t n_max, std::size_t threads,
                                const DimOptions& opt) {
  if (covers.empty()) throw InputError("cover sequence is empty");
  MdimSupReport rep;
  rep.estimate = -std::numeric_limits<double>::infinity();
  for (const auto& c : covers) {
    rep.per_cover.push_back(mdim_estimate(sys, c, paths, n_max, threads, opt));
    rep.estimate = std::max(rep.estimate, rep.per_cover.back().estimate);
  }
  for (auto [fine, coarse] : refinement_pairs) {
    if (fine >= covers.size() || coarse >= covers.size()) throw InputError("refinement pair index out of range");
    for (std::size_t n = 0; n < n_max; ++n)
      if (rep.per_cover[fine].mean_over_n[n] < rep.per_cover[coarse].mean_over_n[n] - 1e-12)
        rep.monotonicity_failures.emplace_back(fine, coarse, n + 1);
  }
  return rep;
}

}  // namespace rmdim
