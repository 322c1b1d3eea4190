#include "rmdim/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "rmdim/error.hpp"
#include "rmdim/parallel.hpp"

namespace rmdim {

BirkhoffResult birkhoff_count(const BundleSystem& sys, const EnvPath& path, const Subset& e, std::size_t n) {
  if (e.universe() != sys.carrier_size()) throw InputError("set does not live on the system carrier");
  BirkhoffResult r;
  if (n == 0) {
    r.argmax = sys.fiber(path.states.at(0)).first();
    return r;
  }
  const OrbitTable t = iterate(sys, path, n);
  bool first = true;
  for (std::size_t p = 0; p < t.points.size(); ++p) {
    std::size_t c = 0;
    for (std::size_t k = 0; k < n; ++k) c += e.contains(t.orbit[k][p]);
    if (first || c > r.b) {
      r.b = c;
      r.argmax = t.points[p];
      first = false;
    }
  }
  return r;
}

std::pair<std::size_t, std::size_t> ocap_subadditivity(const BundleSystem& sys, const EnvPath& path, const Subset& e,
                                                       std::size_t n_max) {
  if (path.length() < n_max) throw InputError("path shorter than n_max");
  // b[s][m] = b_m(theta^s w)
  std::vector<std::vector<std::size_t>> b(n_max, std::vector<std::size_t>(n_max + 1, 0));
  for (std::size_t s = 0; s < n_max; ++s) {
    const EnvPath shifted = path.shifted(s);
    const OrbitTable t = iterate(sys, shifted, n_max - s);
    std::vector<std::size_t> acc(t.points.size(), 0);
    for (std::size_t m = 1; s + m <= n_max; ++m) {
      std::size_t best = 0;
      for (std::size_t p = 0; p < t.points.size(); ++p) best = std::max(best, acc[p] += e.contains(t.orbit[m - 1][p]));
      b[s][m] = best;
    }
  }
  std::size_t checked = 0, bad = 0;
  for (std::size_t n = 1; n < n_max; ++n)
    for (std::size_t m = 1; n + m <= n_max; ++m) {
      ++checked;
      if (b[0][n + m] > b[0][n] + b[n][m]) ++bad;
    }
  return {checked, bad};
}

OcapReport ocap_estimate(const BundleSystem& sys, const WeightedPaths& paths, const Subset& e,
                         const std::vector<std::size_t>& n_list, std::size_t threads, bool check_subadditivity) {
  if (n_list.empty()) throw ConfigError("n list is empty", "n_list");
  for (std::size_t i = 0; i < n_list.size(); ++i)
    if (n_list[i] == 0 || (i && n_list[i] <= n_list[i - 1]))
      throw ConfigError("n list must be strictly increasing positive integers", "n_list");
  OcapReport rep;
  rep.exact_expectation = paths.exact;
  const std::size_t np = paths.paths.size();
  rep.rows.resize(np * n_list.size());
  std::vector<std::pair<std::size_t, std::size_t>> sub(np);
  parallel_for(np, threads, [&](std::size_t p) {
    const EnvPath& path = paths.paths[p];
    for (std::size_t k = 0; k < n_list.size(); ++k) {
      const std::size_t n = n_list[k];
      const auto r = birkhoff_count(sys, path, e, n);
      rep.rows[p * n_list.size() + k] = {path.index, n, r.b, static_cast<double>(r.b) / static_cast<double>(n)};
    }
    if (check_subadditivity) sub[p] = ocap_subadditivity(sys, path, e, n_list.back());
  });
  for (std::size_t p = 0; p < np; ++p) {
    rep.per_path.push_back(rep.rows[(p + 1) * n_list.size() - 1].rate);
    rep.estimate += paths.weights[p] * rep.per_path.back();
    rep.subadditivity_checked += sub[p].first;
    rep.subadditivity_violations += sub[p].second;
  }
  return rep;
}

SmallnessVerdict smallness_test(const BundleSystem& sys, const Subset& e, const WeightedPaths& paths, std::size_t n_max,
                                double tol) {
  SmallnessVerdict v;
  for (const auto& path : paths.paths) {
    const double rate = static_cast<double>(birkhoff_count(sys, path, e, n_max).b) / static_cast<double>(n_max);
    v.per_path.push_back(rate);
    v.max_estimate = std::max(v.max_estimate, rate);
  }
  v.small = v.max_estimate <= tol;
  return v;
}

EmpiricalMeasure empirical_maximizing_measure(const BundleSystem& sys, const EnvPath& path, const Subset& e,
                                              std::size_t n) {
  if (n == 0) throw InputError("n must be at least 1");
  if (path.length() < n + 1) throw InputError("path must extend one step beyond n");
  const BirkhoffResult best = birkhoff_count(sys, path, e, n);
  EmpiricalMeasure mu;
  mu.n = n;
  std::size_t x = best.argmax;
  for (std::size_t i = 0; i <= n; ++i) {
    mu.orbit.emplace_back(path[i], x);
    if (i < n) {
      if (e.contains(x)) ++mu.b;
      x = sys.map(path[i], path[i + 1])(x);
    }
  }
  return mu;
}

double TestFunction::sup_norm() const {
  double s = 0.0;
  for (const auto& row : values)
    for (double v : row) s = std::max(s, std::abs(v));
  return s;
}

double invariance_defect(const EmpiricalMeasure& mu, const TestFunction& f) {
  double push = 0.0, base = 0.0;
  for (std::size_t i = 0; i < mu.n; ++i) {
    base += f(mu.orbit[i].first, mu.orbit[i].second);
    push += f(mu.orbit[i + 1].first, mu.orbit[i + 1].second);
  }
  return std::abs(push - base) / static_cast<double>(mu.n);
}

Subset discrete_boundary(const FiniteMetricSpace& space, const Subset& s, double radius) {
  const Subset rest = s.complement();
  Subset out(space.size());
  if (rest.empty()) return out;
  s.for_each([&](std::size_t x) {
    if (space.distance_to(x, rest) <= radius + kDistanceTol) out.insert(x);
  });
  return out;
}

ShrunkCover shrink_cover(const FiniteMetricSpace& space, const Cover& alpha, const std::vector<double>& margins,
                         double radius) {
  if (alpha.universe() != space.size()) throw InputError("cover does not live on the space");
  if (margins.size() != alpha.size() && margins.size() != 1)
    throw ConfigError("need one margin per cover member or a single margin", "margins");
  ShrunkCover sc;
  sc.original = alpha;
  sc.radius = radius > 0.0 ? radius : space.min_positive_distance();
  Subset covered(space.size());
  for (std::size_t j = 0; j < alpha.size(); ++j) {
    const double margin = margins.size() == 1 ? margins[0] : margins[j];
    if (margin < 0.0) throw ConfigError("margins must be nonnegative", "margins");
    const Subset& u = alpha.members[j];
    const Subset rest = u.complement();
    Subset v(space.size());
    u.for_each([&](std::size_t x) {
      if (margin == 0.0 || space.distance_to(x, rest) > margin + kDistanceTol) v.insert(x);
    });
    covered |= v;
    sc.boundaries.push_back(discrete_boundary(space, v, sc.radius));
    sc.shrunk.members.push_back(std::move(v));
    sc.shrunk.labels.push_back(alpha.label(j));
  }
  if (covered != Subset::full(space.size())) {
    const std::size_t miss = (Subset::full(space.size()) - covered).first();
    throw MarginError("shrunk members no longer cover point " + std::to_string(miss) + "; use smaller margins");
  }
  return sc;
}

PartitionOfUnity partition_of_unity(const FiniteMetricSpace& space, const ShrunkCover& cover, double delta,
                                    PhiVariant variant) {
  if (!(delta > 0.0)) throw DeltaError("delta must be positive");
  const std::size_t n = space.size();
  const std::size_t k = cover.shrunk.size();
  PartitionOfUnity pu;
  pu.cover = cover;
  pu.delta = delta;
  pu.variant = variant;
  pu.psi.assign(k, std::vector<double>(n, 0.0));
  pu.phi.assign(k, std::vector<double>(n, 0.0));
  for (std::size_t j = 0; j < k; ++j) {
    const Subset& bd = cover.boundaries[j];
    const Subset& inner = cover.shrunk.members[j];
    const Subset& outer = cover.original.members[j];
    for (std::size_t x = 0; x < n; ++x) {
      const double d = space.distance_to(x, bd);
      if (d < delta - kDistanceTol && !outer.contains(x))
        throw DeltaError("delta-neighbourhood of boundary " + std::to_string(j) + " leaves its cover member at point " +
                         std::to_string(x));
      pu.psi[j][x] = inner.contains(x) ? 1.0 : std::max(0.0, 1.0 - d / delta);
    }
  }
  pu.fractional = Subset(n);
  for (std::size_t x = 0; x < n; ++x) {
    double used = 0.0, psi_sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const double room = variant == PhiVariant::Recursive ? 1.0 - used : 1.0 - psi_sum;
      const double v = std::max(0.0, std::min(pu.psi[j][x], room));
      pu.phi[j][x] = v;
      used += v;
      psi_sum += pu.psi[j][x];
      if (v > 0.0 && v < 1.0) pu.fractional.insert(x);
    }
  }
  return pu;
}

namespace {

void check_stages(const BundleSystem& sys, const std::vector<PartitionOfUnity>& pus) {
  if (pus.size() != sys.env().size()) throw ConfigError("need one partition of unity per environment state", "sbp");
  for (const auto& pu : pus) {
    if (pu.psi.empty() || pu.psi.front().size() != sys.carrier_size())
      throw ConfigError("partition of unity does not live on the carrier", "sbp");
    if (pu.size() != pus.front().size()) throw ConfigError("all states need covers of the same size", "sbp.cover");
  }
}

}  // namespace

CrossingReport crossing_frequency(const BundleSystem& sys, const EnvPath& path,
                                  const std::vector<PartitionOfUnity>& pus, std::size_t n) {
  check_stages(sys, pus);
  const OrbitTable t = iterate(sys, path, n);
  CrossingReport r;
  const std::size_t k = pus.front().size();
  for (std::size_t p = 0; p < t.points.size(); ++p) {
    std::size_t hits = 0;
    std::vector<std::size_t> bd(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& pu = pus[path[i]];
      const std::size_t y = t.orbit[i][p];
      hits += pu.fractional.contains(y);
      for (std::size_t j = 0; j < k; ++j) bd[j] += pu.cover.boundaries[j].contains(y);
    }
    const double f = static_cast<double>(hits) / static_cast<double>(n);
    r.frequency.push_back(f);
    if (p == 0 || f > r.max) {
      r.max = f;
      r.argmax = t.points[p];
    }
    for (auto c : bd) r.max_boundary = std::max(r.max_boundary, static_cast<double>(c) / static_cast<double>(n));
  }
  return r;
}

EmbeddingCertificate sbp_embedding(const BundleSystem& sys, const EnvPath& path,
                                   const std::vector<PartitionOfUnity>& pus, std::size_t n, double eps) {
  check_stages(sys, pus);
  const OrbitTable t = iterate(sys, path, n);
  EmbeddingCertificate c;
  c.n = n;
  c.k = pus.front().size();
  c.eps = eps;
  c.points = t.points;
  c.dimension_bound = eps * static_cast<double>(c.k) * static_cast<double>(n);
  c.index_bound_ok = true;
  c.corner_ok = true;
  const double limit = eps * static_cast<double>(n);
  for (std::size_t p = 0; p < t.points.size(); ++p) {
    std::vector<double> f(c.k * n);
    std::vector<std::uint8_t> xi(c.k * n);
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& pu = pus[path[i]];
      const std::size_t y = t.orbit[i][p];
      bool frac = false;
      for (std::size_t j = 0; j < c.k; ++j) {
        const double v = pu.phi[j][y];
        f[i * c.k + j] = v;
        xi[i * c.k + j] = v >= 0.5 ? 1 : 0;
        if (v > 0.0 && v < 1.0) frac = true;
      }
      if (frac) idx.push_back(i);
    }
    // Coordinates outside I(x) must already be the corner.
    std::size_t next = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (next < idx.size() && idx[next] == i) {
        ++next;
        continue;
      }
      for (std::size_t j = 0; j < c.k; ++j) {
        const double v = f[i * c.k + j];
        if (!(v == 0.0 || v == 1.0) || v != static_cast<double>(xi[i * c.k + j])) c.corner_ok = false;
      }
    }
    c.max_index_size = std::max(c.max_index_size, idx.size());
    if (!(static_cast<double>(idx.size()) < limit)) c.index_bound_ok = false;
    c.f.push_back(std::move(f));
    c.xi.push_back(std::move(xi));
    c.index.push_back(std::move(idx));
  }
  // Group equal images exactly, then require every pair in a group to share a cover member at every stage.
  std::map<std::vector<double>, std::vector<std::size_t>> groups;
  for (std::size_t p = 0; p < c.points.size(); ++p) groups[c.f[p]].push_back(p);
  c.compatibility_ok = true;
  for (const auto& [image, members] : groups) {
    if (members.size() < 2) continue;
    ++c.collision_groups;
    for (std::size_t a = 0; a < members.size(); ++a)
      for (std::size_t b = a + 1; b < members.size(); ++b)
        for (std::size_t i = 0; i < n; ++i) {
          const auto& alpha = pus[path[i]].cover.original;
          const std::size_t x = t.orbit[i][members[a]], y = t.orbit[i][members[b]];
          bool shared = false;
          for (const auto& u : alpha.members)
            if (u.contains(x) && u.contains(y)) {
              shared = true;
              break;
            }
          if (!shared) c.compatibility_ok = false;
        }
  }
  return c;
}

std::vector<SbpScanRow> sbp_scan(const BundleSystem& sys, const EnvPath& path, const std::vector<PartitionOfUnity>& pus,
                                 const std::vector<std::size_t>& n_list, double eps, std::size_t threads) {
  std::vector<SbpScanRow> rows(n_list.size());
  parallel_for(n_list.size(), threads, [&](std::size_t i) {
    const auto cert = sbp_embedding(sys, path, pus, n_list[i], eps);
    const auto cross = crossing_frequency(sys, path, pus, n_list[i]);
    rows[i] = {n_list[i], cert.max_index_size, cross.max, cert.pass()};
  });
  return rows;
}

std::vector<BallScanRow> ball_boundary_scan(const BundleSystem& sys, const EnvPath& path, std::size_t center,
                                            const std::vector<double>& radii, std::size_t n, double tol) {
  const auto& space = sys.metric();
  const double r0 = space.min_positive_distance();
  std::vector<BallScanRow> out;
  for (double r : radii) {
    Subset ball(space.size());
    for (std::size_t x = 0; x < space.size(); ++x)
      if (space.distance(center, x) < r - kDistanceTol) ball.insert(x);
    const Subset bd = discrete_boundary(space, ball, r0);
    const double rate = static_cast<double>(birkhoff_count(sys, path, bd, n).b) / static_cast<double>(n);
    out.push_back({r, bd.count(), rate, rate <= tol});
  }
  return out;
}

}  // namespace rmdim
