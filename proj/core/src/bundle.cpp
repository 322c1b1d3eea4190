#include "rmdim/bundle.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "rmdim/error.hpp"

namespace rmdim {

BundleSystem::BundleSystem(BaseEnvironment env, std::shared_ptr<const Carrier> carrier, std::vector<Subset> fibers,
                           std::map<Edge, PointMap> maps, std::string name)
    : env_(std::move(env)),
      carrier_(std::move(carrier)),
      fibers_(std::move(fibers)),
      maps_(std::move(maps)),
      name_(std::move(name)) {
  if (!carrier_) throw InputError("bundle system needs a carrier");
  if (fibers_.size() != env_.size()) throw InputError("bundle system needs one fiber per environment state");
  for (const auto& f : fibers_)
    if (f.universe() != rmdim::carrier_size(*carrier_)) throw InputError("fiber does not live on the carrier");
}

const PointMap& BundleSystem::map(EnvState from, EnvState to) const {
  auto it = maps_.find({from, to});
  if (it == maps_.end())
    throw InputError("no fiber map for edge " + env_.label(from) + " -> " + env_.label(to));
  return it->second;
}

const FiniteMetricSpace& BundleSystem::metric() const {
  if (const auto* m = std::get_if<FiniteMetricSpace>(carrier_.get())) return *m;
  throw UnsupportedCarrier("operation requires a metric carrier");
}

const FinitePoset& BundleSystem::poset() const {
  if (const auto* p = std::get_if<FinitePoset>(carrier_.get())) return *p;
  throw UnsupportedCarrier("operation requires a poset carrier");
}

ValidationReport validate(const BundleSystem& sys) {
  ValidationReport r;
  const auto& env = sys.env();
  using K = ValidationIssue::Kind;
  for (EnvState w = 0; w < env.size(); ++w)
    if (sys.fiber(w).empty())
      r.issues.push_back({K::EmptyFiber, w, w, 0, 0, "fiber of " + env.label(w) + " is empty"});
  const auto* poset = std::get_if<FinitePoset>(&sys.carrier());
  for (EnvState w = 0; w < env.size(); ++w) {
    for (EnvState v : env.successors(w)) {
      auto it = sys.maps().find({w, v});
      if (it == sys.maps().end()) {
        r.issues.push_back({K::MissingMap, w, v, 0, 0, "no map for edge " + env.label(w) + " -> " + env.label(v)});
        continue;
      }
      const PointMap& f = it->second;
      if (f.domain != sys.fiber(w) || f.codomain_size != sys.carrier_size()) {
        r.issues.push_back({K::DomainMismatch, w, v, 0, 0,
                            "map on edge " + env.label(w) + " -> " + env.label(v) + " is not defined on the fiber"});
        continue;
      }
      sys.fiber(w).for_each([&](std::size_t x) {
        const auto y = f.image[x];
        if (y < 0 || !sys.fiber(v).contains(static_cast<std::size_t>(y)))
          r.issues.push_back({K::Containment, w, v, x, 0,
                              "point " + std::to_string(x) + " of fiber " + env.label(w) +
                                  " maps outside the fiber of " + env.label(v)});
      });
      if (poset)
        if (auto bad = monotonicity_violation(*poset, *poset, f))
          r.issues.push_back({K::Monotonicity, w, v, bad->first, bad->second,
                              "map on edge " + env.label(w) + " -> " + env.label(v) + " breaks order: " +
                                  poset->label(bad->first) + " <= " + poset->label(bad->second)});
    }
  }
  return r;
}

void check_path(const BundleSystem& sys, const EnvPath& path) {
  for (std::size_t k = 0; k + 1 < path.length(); ++k) {
    const EnvState a = path[k], b = path[k + 1];
    if (a >= sys.env().size() || b >= sys.env().size() || sys.env().transition(a, b) <= 0.0)
      throw InputError("path step " + std::to_string(k) + " is not an edge of the environment");
  }
}

OrbitTable iterate(const BundleSystem& sys, const EnvPath& path, std::size_t n) {
  if (n == 0) throw InputError("iterate needs n >= 1");
  if (path.length() < n) throw InputError("path shorter than the requested number of steps");
  check_path(sys, path);
  OrbitTable t;
  t.path = path;
  t.points = sys.fiber(path[0]).indices();
  t.orbit.assign(n, {});
  t.orbit[0] = t.points;
  for (std::size_t k = 1; k < n; ++k) {
    const PointMap& f = sys.map(path[k - 1], path[k]);
    t.orbit[k].resize(t.points.size());
    for (std::size_t p = 0; p < t.points.size(); ++p) t.orbit[k][p] = f(t.orbit[k - 1][p]);
  }
  return t;
}

namespace {

void require_continuous_steps(const BundleSystem& sys, const EnvPath& path, std::size_t n) {
  const auto* poset = std::get_if<FinitePoset>(&sys.carrier());
  if (!poset) return;
  for (std::size_t k = 0; k + 1 < n; ++k)
    if (auto bad = monotonicity_violation(*poset, *poset, sys.map(path[k], path[k + 1])))
      throw ContinuityError("fiber map at step " + std::to_string(k) + " is not order-preserving (" +
                            poset->label(bad->first) + " <= " + poset->label(bad->second) + ")");
}

// Preimage under T^k of (A cap E_{theta^k w}), as a subset of E_{w_0}.
Subset stage_preimage(const BundleSystem& sys, const OrbitTable& t, std::size_t k, const Subset& a) {
  Subset out(sys.carrier_size());
  const Subset& fk = sys.fiber(t.path[k]);
  for (std::size_t p = 0; p < t.points.size(); ++p) {
    const std::size_t y = t.orbit[k][p];
    if (a.contains(y) && fk.contains(y)) out.insert(t.points[p]);
  }
  return out;
}

}  // namespace

Cover join_orbit_cover(const BundleSystem& sys, const EnvPath& path, const Cover& alpha, std::size_t n) {
  if (alpha.universe() != sys.carrier_size()) throw InputError("cover does not live on the system carrier");
  require_continuous_steps(sys, path, n);
  const OrbitTable t = iterate(sys, path, n);
  std::vector<Cover> stages;
  stages.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    Cover c;
    for (std::size_t j = 0; j < alpha.size(); ++j) {
      c.members.push_back(stage_preimage(sys, t, k, alpha.members[j]));
      c.labels.push_back(alpha.label(j));
    }
    stages.push_back(std::move(c));
  }
  return join(stages);
}

std::vector<Subset> joined_members(const BundleSystem& sys, const EnvPath& path, const Cover& alpha, std::size_t n) {
  if (alpha.universe() != sys.carrier_size()) throw InputError("cover does not live on the system carrier");
  require_continuous_steps(sys, path, n);
  const OrbitTable t = iterate(sys, path, n);
  std::vector<Subset> current{sys.fiber(path[0])};
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<Subset> stage;
    for (const auto& a : alpha.members) stage.push_back(stage_preimage(sys, t, k, a));
    std::vector<Subset> next;
    for (const auto& m : current)
      for (const auto& s : stage) {
        Subset i = m & s;
        if (!i.empty()) next.push_back(std::move(i));
      }
    std::sort(next.begin(), next.end());
    next.erase(std::unique(next.begin(), next.end()), next.end());
    current = std::move(next);
  }
  return current;
}

BundleSystem restrict_to(const BundleSystem& sys, const std::vector<Subset>& sub_fibers) {
  if (sub_fibers.size() != sys.env().size()) throw InputError("need one sub-fiber per environment state");
  std::map<BundleSystem::Edge, PointMap> maps;
  for (const auto& [edge, f] : sys.maps()) {
    const Subset& c = sub_fibers[edge.first];
    if (!c.is_subset_of(sys.fiber(edge.first))) throw InputError("sub-fiber is not inside the fiber");
    PointMap g;
    g.domain = c;
    g.codomain_size = f.codomain_size;
    g.image.assign(f.image.size(), -1);
    c.for_each([&](std::size_t x) {
      if (!sub_fibers[edge.second].contains(f(x)))
        throw InputError("sub-bundle is not forward invariant at point " + std::to_string(x));
      g.image[x] = f.image[x];
    });
    maps.emplace(edge, std::move(g));
  }
  return BundleSystem(sys.env(), sys.carrier_ptr(), sub_fibers, std::move(maps), sys.name() + "|sub");
}

std::vector<Subset> forward_invariant_closure(const BundleSystem& sys, std::vector<Subset> seeds) {
  if (seeds.size() != sys.env().size()) throw InputError("need one seed set per environment state");
  for (EnvState w = 0; w < seeds.size(); ++w) seeds[w] &= sys.fiber(w);
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& [edge, f] : sys.maps()) {
      Subset img = f.image_of(seeds[edge.first]);
      if (!img.is_subset_of(seeds[edge.second])) {
        seeds[edge.second] |= img;
        changed = true;
      }
    }
  }
  return seeds;
}

// ------------------------------------------------------------------ generators

std::map<BundleSystem::Edge, PointMap> per_state_maps(const BaseEnvironment& env, const std::vector<Subset>& fibers,
                                                       std::size_t carrier_size,
                                                       const std::vector<std::vector<std::size_t>>& tables) {
  if (tables.size() != env.size()) throw ConfigError("need one map table per environment state", "system.maps");
  std::map<BundleSystem::Edge, PointMap> maps;
  for (EnvState w = 0; w < env.size(); ++w) {
    if (tables[w].size() != carrier_size)
      throw ConfigError("map table for state " + env.label(w) + " must cover every carrier point", "system.maps");
    PointMap f;
    f.domain = fibers.at(w);
    f.codomain_size = carrier_size;
    f.image.assign(carrier_size, -1);
    fibers[w].for_each([&](std::size_t x) {
      if (tables[w][x] >= carrier_size) throw ConfigError("map table entry out of range", "system.maps");
      f.image[x] = static_cast<std::int64_t>(tables[w][x]);
    });
    for (EnvState v : env.successors(w)) maps.emplace(BundleSystem::Edge{w, v}, f);
  }
  return maps;
}

namespace {

BundleSystem checked(BundleSystem sys) {
  const auto report = validate(sys);
  if (!report.pass()) throw ConfigError(report.issues.front().message, "system");
  return sys;
}

}  // namespace

BundleSystem make_inclusion_system(const BaseEnvironment& env, std::shared_ptr<const Carrier> carrier,
                                   std::vector<Subset> fibers) {
  const std::size_t n = rmdim::carrier_size(*carrier);
  std::vector<std::vector<std::size_t>> tables(env.size(), std::vector<std::size_t>(n));
  for (auto& t : tables)
    for (std::size_t x = 0; x < n; ++x) t[x] = x;
  auto maps = per_state_maps(env, fibers, n, tables);
  return checked(BundleSystem(env, std::move(carrier), std::move(fibers), std::move(maps), "inclusion"));
}

BundleSystem make_rotation_grid(const BaseEnvironment& env, std::size_t m, const std::vector<std::size_t>& offsets,
                                GridGeometry geometry) {
  if (m == 0 || m > 4096) throw ConfigError("rotation grid size must be in [1, 4096]", "system.params.m");
  if (offsets.size() != env.size()) throw ConfigError("need one rotation offset per environment state", "system.params.offsets");
  std::shared_ptr<const Carrier> carrier;
  if (geometry == GridGeometry::Circle) {
    carrier = std::make_shared<const Carrier>(FiniteMetricSpace::circle(m));
  } else {
    std::vector<double> pos(m, 0.0);
    for (std::size_t j = 0; j < m; ++j) pos[j] = m > 1 ? static_cast<double>(j) / static_cast<double>(m - 1) : 0.0;
    carrier = std::make_shared<const Carrier>(FiniteMetricSpace::line(std::move(pos)));
  }
  std::vector<Subset> fibers(env.size(), Subset::full(m));
  std::vector<std::vector<std::size_t>> tables(env.size(), std::vector<std::size_t>(m));
  for (EnvState w = 0; w < env.size(); ++w)
    for (std::size_t x = 0; x < m; ++x) tables[w][x] = (x + offsets[w]) % m;
  auto maps = per_state_maps(env, fibers, m, tables);
  return checked(BundleSystem(env, std::move(carrier), std::move(fibers), std::move(maps), "rotation_grid"));
}

std::size_t word_index(const std::vector<std::size_t>& letters, std::size_t alphabet_size) {
  std::size_t idx = 0;
  for (auto a : letters) idx = idx * alphabet_size + a;
  return idx;
}

std::vector<std::size_t> word_letters(std::size_t index, std::size_t alphabet_size, std::size_t window) {
  std::vector<std::size_t> letters(2 * window + 1);
  for (std::size_t c = letters.size(); c-- > 0;) {
    letters[c] = index % alphabet_size;
    index /= alphabet_size;
  }
  return letters;
}

namespace {

constexpr std::size_t kMaxWords = 1u << 20;

std::size_t word_count(std::size_t alphabet_size, std::size_t window) {
  std::size_t total = 1;
  for (std::size_t c = 0; c < 2 * window + 1; ++c) {
    if (total > kMaxWords / alphabet_size) throw ConfigError("word space exceeds 2^20 points", "system.params");
    total *= alphabet_size;
  }
  return total;
}

std::shared_ptr<const Carrier> word_carrier(const std::vector<double>& values, std::size_t window) {
  const std::size_t a = values.size();
  const std::size_t dim = 2 * window + 1;
  const std::size_t total = word_count(a, window);
  std::vector<double> weights(dim);
  for (std::size_t c = 0; c < dim; ++c) {
    const int i = static_cast<int>(c) - static_cast<int>(window);
    weights[c] = std::ldexp(1.0, -std::abs(i));
  }
  std::vector<double> coords(total * dim);
  for (std::size_t w = 0; w < total; ++w) {
    const auto letters = word_letters(w, a, window);
    for (std::size_t c = 0; c < dim; ++c) coords[w * dim + c] = values[letters[c]];
  }
  return std::make_shared<const Carrier>(FiniteMetricSpace::weighted_sup(std::move(coords), std::move(weights)));
}

std::size_t shifted_word(std::size_t w, std::size_t alphabet_size, std::size_t total, std::size_t pad) {
  // Dropping the most significant letter and appending `pad` on the right.
  return (w % (total / alphabet_size)) * alphabet_size + pad;
}

}  // namespace

BundleSystem make_product_shift(const BaseEnvironment& env, std::vector<double> alphabet, std::size_t window) {
  if (alphabet.empty()) throw ConfigError("alphabet must be nonempty", "system.params.alphabet");
  std::sort(alphabet.begin(), alphabet.end());
  if (std::adjacent_find(alphabet.begin(), alphabet.end()) != alphabet.end())
    throw ConfigError("alphabet letters must be distinct", "system.params.alphabet");
  const std::size_t a = alphabet.size();
  const std::size_t total = word_count(a, window);
  auto carrier = word_carrier(alphabet, window);
  std::vector<Subset> fibers(env.size(), Subset::full(total));
  std::map<BundleSystem::Edge, PointMap> maps;
  PointMap shift;
  shift.domain = Subset::full(total);
  shift.codomain_size = total;
  shift.image.resize(total);
  for (std::size_t w = 0; w < total; ++w) shift.image[w] = static_cast<std::int64_t>(shifted_word(w, a, total, 0));
  for (EnvState s = 0; s < env.size(); ++s)
    for (EnvState v : env.successors(s)) maps.emplace(BundleSystem::Edge{s, v}, shift);
  return checked(BundleSystem(env, std::move(carrier), std::move(fibers), std::move(maps), "product_shift"));
}

BundleSystem make_random_subshift(const BaseEnvironment& env, std::size_t window, std::size_t alphabet_size,
                                  const std::vector<std::vector<std::size_t>>& allowed) {
  if (alphabet_size < 2) throw ConfigError("subshift alphabet needs at least two letters", "system.params.alphabet_size");
  if (allowed.size() != env.size()) throw ConfigError("need allowed letters for every environment state", "system.params.allowed");
  std::vector<double> values(alphabet_size);
  for (std::size_t i = 0; i < alphabet_size; ++i)
    values[i] = static_cast<double>(i) / static_cast<double>(alphabet_size - 1);
  const std::size_t total = word_count(alphabet_size, window);
  auto carrier = word_carrier(values, window);
  std::vector<Subset> fibers;
  std::vector<std::size_t> pad(env.size());
  for (EnvState s = 0; s < env.size(); ++s) {
    if (allowed[s].empty()) throw ConfigError("allowed letter set is empty for " + env.label(s), "system.params.allowed");
    Subset newest(alphabet_size);
    for (auto l : allowed[s]) {
      if (l >= alphabet_size) throw ConfigError("allowed letter out of range", "system.params.allowed");
      newest.insert(l);
    }
    pad[s] = newest.first();
    Subset f(total);
    for (std::size_t w = 0; w < total; ++w)
      if (newest.contains(w % alphabet_size)) f.insert(w);
    fibers.push_back(std::move(f));
  }
  std::map<BundleSystem::Edge, PointMap> maps;
  for (EnvState s = 0; s < env.size(); ++s)
    for (EnvState v : env.successors(s)) {
      PointMap f;
      f.domain = fibers[s];
      f.codomain_size = total;
      f.image.assign(total, -1);
      fibers[s].for_each(
          [&](std::size_t w) { f.image[w] = static_cast<std::int64_t>(shifted_word(w, alphabet_size, total, pad[v])); });
      maps.emplace(BundleSystem::Edge{s, v}, std::move(f));
    }
  return checked(BundleSystem(env, std::move(carrier), std::move(fibers), std::move(maps), "random_subshift"));
}

BundleSystem make_poset_bundle(const BaseEnvironment& env, const FinitePoset& poset,
                               const std::vector<std::vector<std::size_t>>& maps, std::vector<Subset> fibers) {
  const std::size_t n = poset.size();
  if (fibers.empty()) fibers.assign(env.size(), Subset::full(n));
  auto edge_maps = per_state_maps(env, fibers, n, maps);
  auto carrier = std::make_shared<const Carrier>(poset);
  BundleSystem sys(env, std::move(carrier), std::move(fibers), std::move(edge_maps), "poset_bundle");
  const auto report = validate(sys);
  for (const auto& issue : report.issues)
    if (issue.kind == ValidationIssue::Kind::Monotonicity) throw ContinuityError(issue.message);
  if (!report.pass()) throw ConfigError(report.issues.front().message, "system");
  return sys;
}

}  // namespace rmdim
