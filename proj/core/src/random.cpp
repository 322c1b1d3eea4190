#include "rmdim/random.hpp"

#include <memory>

#include "rmdim/error.hpp"

namespace rmdim {

FinitePoset random_poset(std::size_t n, double p, Philox4x32& gen) {
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < n; ++i) labels.push_back("p" + std::to_string(i));
  std::vector<std::pair<std::size_t, std::size_t>> less;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (gen.uniform() < p) less.emplace_back(i, j);
  return FinitePoset::from_relations(std::move(labels), less);
}

Cover random_open_cover(const FinitePoset& poset, std::size_t members, Philox4x32& gen) {
  const std::size_t n = poset.size();
  if (members == 0) throw InputError("cover needs at least one member");
  Cover c;
  for (std::size_t m = 0; m < members; ++m) {
    Subset s(n);
    for (std::size_t x = 0; x < n; ++x)
      if (gen.uniform() < 0.3) s.insert(x);
    c.members.push_back(poset.up_closure(s));
  }
  const Subset all = c.union_all();
  for (std::size_t x = 0; x < n; ++x)
    if (!all.contains(x)) c.members[gen.below(members)] |= poset.up_set(x);
  return c;
}

std::vector<std::size_t> random_monotone_map(const FinitePoset& poset, Philox4x32& gen) {
  const std::size_t n = poset.size();
  std::vector<Subset> down(n, Subset(n));
  for (std::size_t z = 0; z < n; ++z)
    for (std::size_t w = 0; w < n; ++w)
      if (poset.leq(w, z)) down[z].insert(w);
  for (int attempt = 0; attempt < 20; ++attempt) {
    std::vector<std::size_t> f(n);
    bool stuck = false;
    for (std::size_t x = n; x-- > 0 && !stuck;) {
      Subset allowed = Subset::full(n);
      for (std::size_t y = x + 1; y < n; ++y)
        if (poset.leq(x, y)) allowed &= down[f[y]];
      const auto cand = allowed.indices();
      if (cand.empty()) {
        stuck = true;
        break;
      }
      f[x] = cand[gen.below(cand.size())];
    }
    if (!stuck) return f;
  }
  std::vector<std::size_t> id(n);
  for (std::size_t x = 0; x < n; ++x) id[x] = x;
  return id;
}

BundleSystem random_poset_bundle(const BaseEnvironment& env, std::size_t n, double p, Philox4x32& gen) {
  const FinitePoset poset = random_poset(n, p, gen);
  std::vector<std::vector<std::size_t>> maps;
  for (std::size_t s = 0; s < env.size(); ++s) maps.push_back(random_monotone_map(poset, gen));
  return make_poset_bundle(env, poset, maps);
}

FiniteMetricSpace random_cloud(std::size_t k, std::size_t dim, Philox4x32& gen) {
  std::vector<double> coords(k * dim);
  for (auto& c : coords) c = static_cast<double>(gen.below(1025)) / 1024.0;
  return FiniteMetricSpace::weighted_sup(std::move(coords), std::vector<double>(dim, 1.0));
}

BundleSystem random_metric_bundle(const BaseEnvironment& env, std::size_t k, std::size_t dim, Philox4x32& gen) {
  auto carrier = std::make_shared<const Carrier>(random_cloud(k, dim, gen));
  std::vector<Subset> fibers(env.size(), Subset::full(k));
  std::vector<std::vector<std::size_t>> tables(env.size(), std::vector<std::size_t>(k));
  for (auto& t : tables)
    for (auto& v : t) v = gen.below(k);
  auto maps = per_state_maps(env, fibers, k, tables);
  return BundleSystem(env, std::move(carrier), std::move(fibers), std::move(maps), "random_metric");
}

}  // namespace rmdim
