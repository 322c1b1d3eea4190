#pragma once

// Brute-force reference implementations used by the unit and acceptance tests.
// They deliberately share no code with the library beyond reading poset order,
// point distances and the fiber map tables.

#include <algorithm>
#include <bit>
#include <bitset>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "rmdim/bundle.hpp"
#include "rmdim/spaces.hpp"

namespace oracle {

using Mask = std::uint32_t;

inline Mask to_mask(const rmdim::Subset& s) {
  Mask m = 0;
  s.for_each([&](std::size_t x) { m |= Mask{1} << x; });
  return m;
}

inline std::vector<Mask> to_masks(const rmdim::Cover& c) {
  std::vector<Mask> out;
  for (const auto& m : c.members) out.push_back(to_mask(m));
  return out;
}

inline bool is_open(const rmdim::FinitePoset& p, Mask m) {
  for (std::size_t x = 0; x < p.size(); ++x)
    if (m >> x & 1)
      for (std::size_t y = 0; y < p.size(); ++y)
        if (p.leq(x, y) && !(m >> y & 1)) return false;
  return true;
}

inline std::vector<Mask> all_open_sets(const rmdim::FinitePoset& p) {
  std::vector<Mask> out;
  for (Mask m = 0; m < (Mask{1} << p.size()); ++m)
    if (is_open(p, m)) out.push_back(m);
  return out;
}

// Maximum multiplicity minus one over points of `target`; -1 for an empty target.
inline int order(const std::vector<Mask>& fam, Mask target) {
  int best = -1;
  for (std::size_t x = 0; x < 32; ++x)
    if (target >> x & 1) {
      int c = 0;
      for (Mask m : fam) c += static_cast<int>(m >> x & 1);
      best = std::max(best, c - 1);
    }
  return best;
}

// Exhaustive D(alpha): every family of at most |X| opens, each inside some alpha member,
// covering X. Irredundant covers have at most |X| members, so this is the full minimum.
inline int dim(const rmdim::FinitePoset& p, const std::vector<Mask>& alpha) {
  const std::size_t n = p.size();
  const Mask full = n == 32 ? ~Mask{0} : (Mask{1} << n) - 1;
  std::vector<Mask> cand;
  for (Mask m : all_open_sets(p))
    if (m && std::any_of(alpha.begin(), alpha.end(), [&](Mask a) { return (m & ~a) == 0; })) cand.push_back(m);
  int best = order(alpha, full);
  std::vector<Mask> pick;
  std::function<void(std::size_t, Mask)> rec = [&](std::size_t start, Mask covered) {
    if (covered == full) {
      best = std::min(best, order(pick, full));
      return;
    }
    if (pick.size() == n) return;
    for (std::size_t i = start; i < cand.size(); ++i) {
      pick.push_back(cand[i]);
      rec(i + 1, covered | cand[i]);
      pick.pop_back();
    }
  };
  rec(0, 0);
  return best;
}

// orbit[k][x] for x in E_{w_0}; entries for points outside the fiber stay -1.
inline std::vector<std::vector<long>> orbit(const rmdim::BundleSystem& sys, const rmdim::EnvPath& path,
                                            std::size_t n) {
  const std::size_t size = sys.carrier_size();
  std::vector<std::vector<long>> out(n, std::vector<long>(size, -1));
  for (std::size_t x = 0; x < size; ++x) {
    if (!sys.fiber(path[0]).contains(x)) continue;
    long y = static_cast<long>(x);
    for (std::size_t k = 0; k < n; ++k) {
      out[k][x] = y;
      if (k + 1 < n) y = sys.map(path[k], path[k + 1]).image[static_cast<std::size_t>(y)];
    }
  }
  return out;
}

inline double bowen(const rmdim::BundleSystem& sys, const rmdim::EnvPath& path, double eps, std::size_t n,
                    std::size_t x, std::size_t y) {
  const auto& m = sys.metric();
  const auto orb = orbit(sys, path, n);
  double d = 0.0;
  for (std::size_t k = 0; k < n; ++k)
    d = std::max(d, m.distance(static_cast<std::size_t>(orb[k][x]), static_cast<std::size_t>(orb[k][y])) / eps);
  return d;
}

inline bool close(double d) { return d < 1.0 - rmdim::kDistanceTol; }

// Pairwise closeness on an explicit point list.
inline std::vector<std::vector<bool>> close_matrix(const rmdim::BundleSystem& sys, const rmdim::EnvPath& path,
                                                   double eps, std::size_t n, const std::vector<std::size_t>& pts) {
  std::vector<std::vector<bool>> c(pts.size(), std::vector<bool>(pts.size(), true));
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = 0; j < pts.size(); ++j)
      if (i != j) c[i][j] = close(bowen(sys, path, eps, n, pts[i], pts[j]));
  return c;
}

// Largest pairwise far subset by enumerating all subsets (k <= 20).
inline std::size_t sep_brute(const std::vector<std::vector<bool>>& c) {
  const std::size_t k = c.size();
  std::size_t best = 0;
  for (Mask s = 1; s < (Mask{1} << k); ++s) {
    bool ok = true;
    for (std::size_t i = 0; i < k && ok; ++i)
      if (s >> i & 1)
        for (std::size_t j = i + 1; j < k && ok; ++j)
          if ((s >> j & 1) && c[i][j]) ok = false;
    if (ok) best = std::max<std::size_t>(best, static_cast<std::size_t>(std::popcount(s)));
  }
  return best;
}

// Fewest pairwise close groups covering all points, by subset dynamic programming (k <= 16).
inline std::size_t cov_brute(const std::vector<std::vector<bool>>& c) {
  const std::size_t k = c.size();
  const Mask full = (Mask{1} << k) - 1;
  std::vector<char> clique(full + 1, 0);
  clique[0] = 1;
  for (Mask s = 1; s <= full; ++s) {
    const std::size_t v = static_cast<std::size_t>(std::countr_zero(s));
    const Mask rest = s & (s - 1);
    bool ok = clique[rest];
    for (std::size_t j = 0; j < k && ok; ++j)
      if ((rest >> j & 1) && !c[v][j]) ok = false;
    clique[s] = ok;
  }
  std::vector<std::size_t> best(full + 1, k + 1);
  best[0] = 0;
  for (Mask s = 1; s <= full; ++s) {
    const Mask low = s & (~s + 1);
    const Mask rest = s & ~low;
    for (Mask sub = rest;; sub = (sub - 1) & rest) {
      if (clique[sub | low]) best[s] = std::min(best[s], best[s & ~(sub | low)] + 1);
      if (sub == 0) break;
    }
  }
  return best[full];
}

// Exact independence number for up to 256 vertices by plain branch and bound: branch on a
// vertex of the remaining graph (take it or drop it) and prune with a greedy clique cover,
// whose size bounds any independent set from above.
inline std::size_t clique_cover_bound(const std::vector<std::bitset<256>>& adj, std::bitset<256> alive) {
  std::size_t cliques = 0;
  while (alive.any()) {
    std::size_t v = 0;
    while (!alive[v]) ++v;
    std::bitset<256> cand = adj[v] & alive;
    alive[v] = false;
    for (std::size_t u = 0; u < adj.size(); ++u)
      if (cand[u]) {
        alive[u] = false;
        cand &= adj[u];
      }
    ++cliques;
  }
  return cliques;
}

inline void mis_search(const std::vector<std::bitset<256>>& adj, std::bitset<256> alive, std::size_t taken,
                       std::size_t& best) {
  if (alive.none()) {
    best = std::max(best, taken);
    return;
  }
  if (taken + clique_cover_bound(adj, alive) <= best) return;
  std::size_t v = 0, deg = 0;
  for (std::size_t i = 0; i < adj.size(); ++i)
    if (alive[i]) {
      const std::size_t d = (adj[i] & alive).count();
      if (d >= deg) deg = d, v = i;
    }
  if (deg == 0) {
    best = std::max(best, taken + alive.count());
    return;
  }
  std::bitset<256> with = alive & ~adj[v];
  with[v] = false;
  mis_search(adj, with, taken + 1, best);
  alive[v] = false;
  mis_search(adj, alive, taken, best);
}

inline std::size_t mis_small(const std::vector<std::bitset<256>>& adj, std::bitset<256> alive) {
  std::size_t best = 0;
  mis_search(adj, alive, 0, best);
  return best;
}

// Largest number of values pairwise at least `t` apart (sorted greedy is optimal on a line).
inline std::size_t line_packing(std::vector<double> v, double t) {
  std::sort(v.begin(), v.end());
  std::size_t count = 0;
  double last = 0.0;
  for (double x : v)
    if (count == 0 || !close((x - last) / t)) {
      ++count;
      last = x;
    }
  return count;
}

// sep for the truncated full shift: the Bowen metric is a weighted sup over the original
// coordinates j in -W..W with weight max over k < n of 2^-|j-k| (when |j-k| <= W), so the
// separated set is a product of one-dimensional packings.
inline std::size_t product_shift_sep(const std::vector<double>& alphabet, std::size_t window, double eps,
                                     std::size_t n) {
  const long w = static_cast<long>(window);
  std::size_t total = 1;
  for (long j = -w; j <= w; ++j) {
    double weight = 0.0;
    for (long k = 0; k < static_cast<long>(n); ++k)
      if (std::labs(j - k) <= w) weight = std::max(weight, std::ldexp(1.0, -static_cast<int>(std::labs(j - k))));
    total *= weight == 0.0 ? 1 : line_packing(alphabet, eps / weight);
  }
  return total;
}

}  // namespace oracle
