#include "rmdim/spaces.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rmdim/error.hpp"

namespace rmdim {

// ---------------------------------------------------------------- metric space

FiniteMetricSpace FiniteMetricSpace::from_table(std::vector<std::vector<double>> dist) {
  FiniteMetricSpace s;
  s.kind_ = Kind::Table;
  s.size_ = dist.size();
  s.table_.resize(s.size_ * s.size_);
  for (std::size_t i = 0; i < s.size_; ++i) {
    if (dist[i].size() != s.size_) throw InputError("distance table must be square");
    for (std::size_t j = 0; j < s.size_; ++j) s.table_[i * s.size_ + j] = dist[i][j];
  }
  s.validate();
  return s;
}

FiniteMetricSpace FiniteMetricSpace::from_lower_triangular(const std::vector<std::vector<double>>& rows) {
  const std::size_t n = rows.size();
  std::vector<std::vector<double>> full(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != i)
      throw InputError("lower-triangular row " + std::to_string(i) + " must have " + std::to_string(i) + " entries");
    for (std::size_t j = 0; j < i; ++j) full[i][j] = full[j][i] = rows[i][j];
  }
  return from_table(std::move(full));
}

FiniteMetricSpace FiniteMetricSpace::weighted_sup(std::vector<double> coords, std::vector<double> weights) {
  if (weights.empty()) throw InputError("weighted sup metric needs at least one coordinate");
  for (double w : weights)
    if (!(w > 0.0)) throw InputError("coordinate weights must be positive");
  if (coords.size() % weights.size() != 0) throw InputError("coordinate array does not match dimension");
  FiniteMetricSpace s;
  s.kind_ = Kind::WeightedSup;
  s.size_ = coords.size() / weights.size();
  s.coords_ = std::move(coords);
  s.weights_ = std::move(weights);
  return s;
}

FiniteMetricSpace FiniteMetricSpace::circle(std::size_t m) {
  if (m == 0) throw InputError("circle grid needs at least one point");
  FiniteMetricSpace s;
  s.kind_ = Kind::Circle;
  s.size_ = m;
  return s;
}

FiniteMetricSpace FiniteMetricSpace::line(std::vector<double> positions) {
  FiniteMetricSpace s;
  s.kind_ = Kind::Line;
  s.size_ = positions.size();
  s.coords_ = std::move(positions);
  return s;
}

double FiniteMetricSpace::distance_to(std::size_t i, const Subset& s) const {
  double best = std::numeric_limits<double>::infinity();
  s.for_each([&](std::size_t j) { best = std::min(best, distance(i, j)); });
  return best;
}

double FiniteMetricSpace::min_positive_distance() const {
  double best = std::numeric_limits<double>::infinity();
  if (kind_ == Kind::Circle) return size_ > 1 ? 1.0 / static_cast<double>(size_) : best;
  for (std::size_t i = 0; i < size_; ++i)
    for (std::size_t j = i + 1; j < size_; ++j) {
      const double d = distance(i, j);
      if (d > 0.0) best = std::min(best, d);
    }
  return best;
}

void FiniteMetricSpace::validate() const {
  if (kind_ != Kind::Table) return;
  const std::size_t n = size_;
  for (std::size_t i = 0; i < n; ++i) {
    if (distance(i, i) != 0.0) throw InputError("distance table has nonzero diagonal at " + std::to_string(i));
    for (std::size_t j = 0; j < n; ++j) {
      const double d = distance(i, j);
      if (!(d >= 0.0) || !std::isfinite(d)) throw InputError("distances must be finite and nonnegative");
      if (d != distance(j, i))
        throw InputError("distance table not symmetric at (" + std::to_string(i) + "," + std::to_string(j) + ")");
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k)
        if (distance(i, k) > distance(i, j) + distance(j, k) + kDistanceTol)
          throw InputError("triangle inequality fails for (" + std::to_string(i) + "," + std::to_string(j) + "," +
                           std::to_string(k) + ")");
}

// ----------------------------------------------------------------------- poset

FinitePoset FinitePoset::from_relations(std::vector<std::string> labels,
                                        const std::vector<std::pair<std::size_t, std::size_t>>& less) {
  const std::size_t n = labels.size();
  std::vector<std::vector<bool>> leq(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i) leq[i][i] = true;
  for (auto [a, b] : less) {
    if (a >= n || b >= n) throw InputError("poset relation references unknown element");
    leq[a][b] = true;
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      if (leq[i][k])
        for (std::size_t j = 0; j < n; ++j)
          if (leq[k][j]) leq[i][j] = true;
  return from_leq(std::move(labels), leq);
}

FinitePoset FinitePoset::from_relations(std::vector<std::string> labels,
                                        const std::vector<std::pair<std::string, std::string>>& less) {
  auto find = [&](const std::string& s) {
    auto it = std::find(labels.begin(), labels.end(), s);
    if (it == labels.end()) throw InputError("poset relation references unknown element '" + s + "'");
    return static_cast<std::size_t>(it - labels.begin());
  };
  std::vector<std::pair<std::size_t, std::size_t>> idx;
  for (const auto& [a, b] : less) idx.emplace_back(find(a), find(b));
  return from_relations(std::move(labels), idx);
}

FinitePoset FinitePoset::from_leq(std::vector<std::string> labels, const std::vector<std::vector<bool>>& leq) {
  const std::size_t n = labels.size();
  if (leq.size() != n) throw InputError("leq table has wrong size");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (labels[i] == labels[j]) throw InputError("duplicate poset element '" + labels[i] + "'");
  for (std::size_t i = 0; i < n; ++i) {
    if (leq[i].size() != n) throw InputError("leq table has wrong size");
    if (!leq[i][i]) throw InputError("leq is not reflexive at '" + labels[i] + "'");
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && leq[i][j] && leq[j][i])
        throw InputError("leq is not antisymmetric: '" + labels[i] + "' and '" + labels[j] + "'");
      for (std::size_t k = 0; k < n; ++k)
        if (leq[i][j] && leq[j][k] && !leq[i][k]) throw InputError("leq is not transitive");
    }
  }
  FinitePoset p;
  p.labels_ = std::move(labels);
  p.up_.assign(n, Subset(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (leq[i][j]) p.up_[i].insert(j);
  return p;
}

FinitePoset FinitePoset::antichain(std::size_t n) {
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < n; ++i) labels.push_back("p" + std::to_string(i));
  return from_relations(std::move(labels), std::vector<std::pair<std::size_t, std::size_t>>{});
}

std::size_t FinitePoset::index_of(std::string_view label) const {
  for (std::size_t i = 0; i < labels_.size(); ++i)
    if (labels_[i] == label) return i;
  throw InputError("unknown poset element '" + std::string(label) + "'");
}

bool FinitePoset::is_up_set(const Subset& s) const {
  bool ok = true;
  s.for_each([&](std::size_t x) {
    if (ok && !up_[x].is_subset_of(s)) ok = false;
  });
  return ok;
}

Subset FinitePoset::up_closure(const Subset& s) const {
  Subset out(size());
  s.for_each([&](std::size_t x) { out |= up_[x]; });
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> FinitePoset::covering_pairs() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  const std::size_t n = size();
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y) {
      if (x == y || !leq(x, y)) continue;
      bool direct = true;
      for (std::size_t z = 0; z < n && direct; ++z)
        if (z != x && z != y && leq(x, z) && leq(z, y)) direct = false;
      if (direct) out.emplace_back(x, y);
    }
  return out;
}

FinitePoset FinitePoset::induced(const Subset& members, std::vector<std::size_t>* index_map) const {
  const auto idx = members.indices();
  std::vector<std::string> labels;
  for (auto i : idx) labels.push_back(labels_.at(i));
  std::vector<std::vector<bool>> leq_table(idx.size(), std::vector<bool>(idx.size(), false));
  for (std::size_t a = 0; a < idx.size(); ++a)
    for (std::size_t b = 0; b < idx.size(); ++b) leq_table[a][b] = leq(idx[a], idx[b]);
  if (index_map) *index_map = idx;
  return from_leq(std::move(labels), leq_table);
}

std::size_t carrier_size(const Carrier& c) noexcept {
  return std::visit([](const auto& s) { return s.size(); }, c);
}

bool is_poset(const Carrier& c) noexcept { return std::holds_alternative<FinitePoset>(c); }

// ----------------------------------------------------------------------- cover

Subset Cover::union_all() const {
  Subset u(universe());
  for (const auto& m : members) u |= m;
  return u;
}

Cover Cover::restricted(const Subset& s) const {
  Cover c = *this;
  for (auto& m : c.members) m &= s;
  return c;
}

std::vector<Subset> Cover::distinct_nonempty() const {
  std::vector<Subset> out;
  for (const auto& m : members)
    if (!m.empty()) out.push_back(m);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

PointMap PointMap::identity(const Subset& domain) {
  PointMap f;
  f.domain = domain;
  f.codomain_size = domain.universe();
  f.image.assign(domain.universe(), -1);
  domain.for_each([&](std::size_t x) { f.image[x] = static_cast<std::int64_t>(x); });
  return f;
}

std::size_t PointMap::operator()(std::size_t x) const {
  if (x >= image.size() || image[x] < 0) throw InputError("point " + std::to_string(x) + " outside map domain");
  return static_cast<std::size_t>(image[x]);
}

Subset PointMap::image_of(const Subset& s) const {
  Subset out(codomain_size);
  s.for_each([&](std::size_t x) { out.insert((*this)(x)); });
  return out;
}

Subset PointMap::preimage(const Subset& s) const {
  Subset out(domain.universe());
  domain.for_each([&](std::size_t x) {
    if (s.contains(static_cast<std::size_t>(image[x]))) out.insert(x);
  });
  return out;
}

// ------------------------------------------------------------------ operations

std::vector<Subset> open_sets(const FinitePoset& p, std::size_t element_cap) {
  const std::size_t n = p.size();
  if (n > element_cap)
    throw SizeError("poset has " + std::to_string(n) + " elements, above the open-set enumeration cap of " +
                    std::to_string(element_cap) + "; use dim_cover_upper instead");
  // Deciding elements with smaller up-sets first means every strict upper bound of x
  // is already decided when x is reached.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return p.up_set(a).count() < p.up_set(b).count(); });
  std::vector<Subset> out;
  Subset current(n);
  auto rec = [&](auto&& self, std::size_t k) -> void {
    if (k == n) {
      out.push_back(current);
      return;
    }
    const std::size_t x = order[k];
    self(self, k + 1);
    Subset strict_up = p.up_set(x);
    strict_up.erase(x);
    if (strict_up.is_subset_of(current)) {
      current.insert(x);
      self(self, k + 1);
      current.erase(x);
    }
  };
  rec(rec, 0);
  std::sort(out.begin(), out.end());
  return out;
}

Subset minimal_open_neighborhood(const FinitePoset& p, std::size_t x) {
  if (x >= p.size()) throw InputError("element out of range");
  return p.up_set(x);
}

bool is_open_cover(const Carrier& carrier, const Subset& target, const Cover& alpha) {
  if (target.empty()) return true;
  if (!target.is_subset_of(alpha.union_all())) return false;
  if (const auto* p = std::get_if<FinitePoset>(&carrier))
    for (const auto& m : alpha.members)
      if (!p->is_up_set(m)) return false;
  return true;
}

bool refines(const Cover& beta, const Cover& alpha) {
  for (const auto& b : beta.members) {
    if (b.empty()) continue;
    bool inside = false;
    for (const auto& a : alpha.members)
      if (b.is_subset_of(a)) {
        inside = true;
        break;
      }
    if (!inside) return false;
  }
  return true;
}

Cover join(const std::vector<Cover>& covers) {
  if (covers.empty()) throw InputError("join of an empty list of covers");
  Cover acc = covers.front();
  if (acc.labels.empty())
    for (std::size_t i = 0; i < acc.size(); ++i) acc.labels.push_back({i});
  for (std::size_t c = 1; c < covers.size(); ++c) {
    const Cover& next = covers[c];
    if (next.universe() != acc.universe() && next.size() && acc.size())
      throw InputError("join requires covers on the same carrier");
    Cover out;
    out.members.reserve(acc.size() * next.size());
    out.labels.reserve(acc.size() * next.size());
    for (std::size_t i = 0; i < acc.size(); ++i)
      for (std::size_t j = 0; j < next.size(); ++j) {
        out.members.push_back(acc.members[i] & next.members[j]);
        Label l = acc.labels[i];
        const Label r = next.label(j);
        l.insert(l.end(), r.begin(), r.end());
        out.labels.push_back(std::move(l));
      }
    acc = std::move(out);
  }
  return acc;
}

Cover pullback(const Cover& alpha, const PointMap& f) {
  Cover out;
  out.labels = alpha.labels;
  out.members.reserve(alpha.size());
  for (const auto& a : alpha.members) {
    if (a.universe() != f.codomain_size) throw InputError("pullback: cover does not live on the map's codomain");
    out.members.push_back(f.preimage(a));
  }
  return out;
}

std::optional<std::pair<std::size_t, std::size_t>> monotonicity_violation(const FinitePoset& dom,
                                                                         const FinitePoset& cod,
                                                                         const PointMap& f) {
  std::optional<std::pair<std::size_t, std::size_t>> bad;
  f.domain.for_each([&](std::size_t x) {
    if (bad) return;
    f.domain.for_each([&](std::size_t y) {
      if (bad || !dom.leq(x, y)) return;
      if (!cod.leq(f(x), f(y))) bad = std::make_pair(x, y);
    });
  });
  return bad;
}

Cover pullback(const Cover& alpha, const PointMap& f, const Carrier& domain, const Carrier& codomain) {
  const auto* dp = std::get_if<FinitePoset>(&domain);
  const auto* cp = std::get_if<FinitePoset>(&codomain);
  if (dp && cp) {
    if (auto bad = monotonicity_violation(*dp, *cp, f))
      throw ContinuityError("map is not order-preserving: " + dp->label(bad->first) + " <= " + dp->label(bad->second) +
                            " but images are not ordered");
  }
  return pullback(alpha, f);
}

}  // namespace rmdim
