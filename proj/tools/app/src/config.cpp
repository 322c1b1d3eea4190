#include "rmdim/app/config.hpp"

#include <algorithm>

#include "rmdim/error.hpp"

namespace rmdim::app {

FinitePoset preset_poset(const std::string& name) {
  using P = std::vector<std::pair<std::string, std::string>>;
  if (name == "interval3") return FinitePoset::from_relations({"a", "b", "c"}, P{{"a", "c"}, {"b", "c"}});
  if (name == "circle4")
    return FinitePoset::from_relations({"a", "b", "c", "d"}, P{{"a", "c"}, {"a", "d"}, {"b", "c"}, {"b", "d"}});
  if (name == "pseudo_circle6")
    return FinitePoset::from_relations({"a", "b", "c", "d", "e", "f"},
                                       P{{"a", "d"}, {"a", "e"}, {"b", "e"}, {"b", "f"}, {"c", "f"}, {"c", "d"}});
  if (name == "sphere6")
    return FinitePoset::from_relations({"a", "b", "c", "d", "e", "f"}, P{{"a", "c"},
                                                                         {"a", "d"},
                                                                         {"b", "c"},
                                                                         {"b", "d"},
                                                                         {"c", "e"},
                                                                         {"c", "f"},
                                                                         {"d", "e"},
                                                                         {"d", "f"}});
  throw ConfigError("unknown preset '" + name + "' (interval3, circle4, pseudo_circle6, sphere6)", "space.preset");
}

BaseEnvironment parse_environment(const Reader& r) {
  const EnvKind kind = env_kind_from_string(r.get<std::string>("kind"));
  const bool ergodic = r.get_or<bool>("assume_ergodic", false);
  BaseEnvironment env = [&] {
    switch (kind) {
      case EnvKind::PointMass: {
        const auto states = r.get_or<std::vector<std::string>>("states", {"w0"});
        if (states.size() != 1) throw ConfigError("point-mass environment has exactly one state", r.path_of("states"));
        return BaseEnvironment::point_mass(states[0]);
      }
      case EnvKind::CyclicRotation: {
        auto states = r.get<std::vector<std::string>>("states");
        std::optional<std::vector<double>> law;
        if (r.has("law")) law = r.get<std::vector<double>>("law");
        return BaseEnvironment::cyclic(std::move(states), r.get_or<std::size_t>("shift", 1), std::move(law));
      }
      case EnvKind::Iid:
        return BaseEnvironment::iid(r.get<std::vector<std::string>>("states"), r.get<std::vector<double>>("law"));
      case EnvKind::Markov:
        return BaseEnvironment::markov(r.get<std::vector<std::string>>("states"),
                                       r.get<std::vector<std::vector<double>>>("transition"),
                                       r.get<std::vector<double>>("law"));
    }
    throw ConfigError("unsupported environment kind", r.path_of("kind"));
  }();
  env.assume_ergodic = ergodic;
  r.finish();
  return env;
}

namespace {

// Re-throws core validation errors with the config path attached.
template <class F>
auto at_path(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what(), path);
  }
}

}  // namespace

std::shared_ptr<const Carrier> parse_space(const Reader& r) {
  const std::string type = r.get<std::string>("type");
  std::shared_ptr<const Carrier> out;
  if (type == "poset") {
    if (r.has("preset")) {
      out = std::make_shared<const Carrier>(preset_poset(r.get<std::string>("preset")));
    } else {
      auto elements = r.get<std::vector<std::string>>("elements");
      const auto less = r.get_or<std::vector<std::vector<std::string>>>("less", {});
      std::vector<std::pair<std::string, std::string>> pairs;
      for (std::size_t i = 0; i < less.size(); ++i) {
        if (less[i].size() != 2)
          throw ConfigError("each relation is a pair [lower, upper]", r.path_of("less") + "[" + std::to_string(i) + "]");
        pairs.emplace_back(less[i][0], less[i][1]);
      }
      out = at_path(r.path(), [&] {
        return std::make_shared<const Carrier>(FinitePoset::from_relations(std::move(elements), pairs));
      });
    }
  } else if (type == "metric") {
    FiniteMetricSpace m = at_path(r.path(), [&] {
      if (r.has("distances"))
        return FiniteMetricSpace::from_lower_triangular(r.get<std::vector<std::vector<double>>>("distances"));
      const auto points = r.get<std::vector<std::vector<double>>>("points");
      if (points.empty()) throw ConfigError("metric space needs points", r.path_of("points"));
      const std::size_t dim = points.front().size();
      std::vector<double> coords;
      for (std::size_t i = 0; i < points.size(); ++i) {
        if (points[i].size() != dim)
          throw ConfigError("all points need the same dimension", r.path_of("points") + "[" + std::to_string(i) + "]");
        coords.insert(coords.end(), points[i].begin(), points[i].end());
      }
      auto weights = r.get_or<std::vector<double>>("weights", std::vector<double>(dim, 1.0));
      if (weights.size() != dim) throw ConfigError("one weight per coordinate", r.path_of("weights"));
      return FiniteMetricSpace::weighted_sup(std::move(coords), std::move(weights));
    });
    if (r.has("labels")) {
      m.labels = r.get<std::vector<std::string>>("labels");
      if (m.labels.size() != m.size()) throw ConfigError("one label per point", r.path_of("labels"));
    }
    out = std::make_shared<const Carrier>(std::move(m));
  } else if (type == "line") {
    out = at_path(r.path(), [&] {
      return std::make_shared<const Carrier>(FiniteMetricSpace::line(r.get<std::vector<double>>("positions")));
    });
  } else if (type == "circle") {
    out = at_path(r.path(),
                  [&] { return std::make_shared<const Carrier>(FiniteMetricSpace::circle(r.get<std::size_t>("m"))); });
  } else {
    throw ConfigError("space type must be poset, metric, line or circle", r.path_of("type"));
  }
  r.finish();
  return out;
}

std::size_t parse_point(const Json& j, const Carrier& carrier, const std::string& path) {
  const std::size_t n = carrier_size(carrier);
  if (j.is_number_unsigned()) {
    const auto x = j.get<std::size_t>();
    if (x >= n) throw ConfigError("point index out of range", path);
    return x;
  }
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (const auto* p = std::get_if<FinitePoset>(&carrier)) {
      try {
        return p->index_of(s);
      } catch (const Error&) {
        throw ConfigError("unknown element '" + s + "'", path);
      }
    }
    const auto& m = std::get<FiniteMetricSpace>(carrier);
    auto it = std::find(m.labels.begin(), m.labels.end(), s);
    if (it == m.labels.end()) throw ConfigError("unknown point label '" + s + "'", path);
    return static_cast<std::size_t>(it - m.labels.begin());
  }
  throw ConfigError("a point is an element label or a nonnegative index", path);
}

Subset parse_subset(const Json& j, const Carrier& carrier, const std::string& path) {
  if (!j.is_array()) throw ConfigError("expected a list of points", path);
  Subset s(carrier_size(carrier));
  for (std::size_t i = 0; i < j.size(); ++i) s.insert(parse_point(j[i], carrier, path + "[" + std::to_string(i) + "]"));
  return s;
}

Cover parse_cover(const Json& j, const Carrier& carrier, const std::string& path) {
  if (!j.is_array() || j.empty()) throw ConfigError("expected a nonempty list of members", path);
  Cover c;
  for (std::size_t i = 0; i < j.size(); ++i) c.members.push_back(parse_subset(j[i], carrier, path + "[" + std::to_string(i) + "]"));
  return c;
}

namespace {

// {"state": value} with every environment state present exactly once.
template <class F>
void per_state(const Reader& r, std::string_view key, const BaseEnvironment& env, F&& f) {
  const Reader m = r.child(key);
  for (EnvState w = 0; w < env.size(); ++w) f(w, m.at(env.label(w)), m.path_of(env.label(w)));
  m.finish();
}

std::vector<std::size_t> parse_table(const Json& j, const Carrier& carrier, const Subset& domain,
                                     const std::string& path) {
  const std::size_t n = carrier_size(carrier);
  if (!j.is_array() || j.size() != n) throw ConfigError("map table needs one entry per carrier point", path);
  std::vector<std::size_t> t(n, 0);
  for (std::size_t x = 0; x < n; ++x) {
    const std::string p = path + "[" + std::to_string(x) + "]";
    if (j[x].is_null()) {
      if (domain.contains(x)) throw ConfigError("fiber point needs an image", p);
      continue;
    }
    t[x] = parse_point(j[x], carrier, p);
  }
  return t;
}

BundleSystem explicit_system(const Reader& p, const BaseEnvironment& env, std::shared_ptr<const Carrier> space) {
  const std::size_t n = carrier_size(*space);
  std::vector<Subset> fibers(env.size(), Subset::full(n));
  if (p.has("fibers"))
    per_state(p, "fibers", env, [&](EnvState w, const Json& j, const std::string& path) {
      fibers[w] = parse_subset(j, *space, path);
    });
  std::map<BundleSystem::Edge, PointMap> maps;
  auto as_map = [&](EnvState w, const std::vector<std::size_t>& t) {
    PointMap f;
    f.domain = fibers[w];
    f.codomain_size = n;
    f.image.assign(n, -1);
    fibers[w].for_each([&](std::size_t x) { f.image[x] = static_cast<std::int64_t>(t[x]); });
    return f;
  };
  if (p.has("maps")) {
    per_state(p, "maps", env, [&](EnvState w, const Json& j, const std::string& path) {
      const PointMap f = as_map(w, parse_table(j, *space, fibers[w], path));
      for (EnvState v : env.successors(w)) maps[{w, v}] = f;
    });
  }
  if (const auto edges = p.child_opt("edge_maps")) {
    for (EnvState w = 0; w < env.size(); ++w)
      for (EnvState v : env.successors(w)) {
        const std::string key = env.label(w) + "->" + env.label(v);
        if (!edges->has(key)) continue;
        maps[{w, v}] = as_map(w, parse_table(edges->at(key), *space, fibers[w], edges->path_of(key)));
      }
    edges->finish();
  }
  if (!p.has("maps") && !p.has("edge_maps")) throw ConfigError("explicit system needs maps or edge_maps", p.path());
  return BundleSystem(env, std::move(space), std::move(fibers), std::move(maps), "explicit");
}

}  // namespace

BundleSystem parse_system(const Reader& r, const BaseEnvironment& env, std::shared_ptr<const Carrier> space) {
  const std::string gen = r.get<std::string>("generator");
  const Json empty = Json::object();
  const Json* params_json = r.find("params");
  const Reader p(params_json ? *params_json : empty, r.path_of("params"));
  auto need_space = [&](bool poset) {
    if (!space) throw ConfigError("generator '" + gen + "' needs a space section", "space");
    if (poset && !is_poset(*space)) throw ConfigError("generator '" + gen + "' needs a poset space", "space.type");
  };
  auto no_space = [&] {
    if (space) throw ConfigError("generator '" + gen + "' builds its own carrier; remove the space section", "space");
  };
  auto sys = at_path(r.path(), [&]() -> BundleSystem {
    if (gen == "inclusion") {
      need_space(false);
      std::vector<Subset> fibers(env.size());
      per_state(p, "fibers", env, [&](EnvState w, const Json& j, const std::string& path) {
        fibers[w] = parse_subset(j, *space, path);
      });
      return make_inclusion_system(env, space, std::move(fibers));
    }
    if (gen == "rotation_grid") {
      no_space();
      const auto m = p.get<std::size_t>("m");
      std::vector<std::size_t> offsets;
      if (p.has("offsets")) {
        offsets = p.get<std::vector<std::size_t>>("offsets");
        if (offsets.size() != env.size()) throw ConfigError("one offset per environment state", p.path_of("offsets"));
      } else {
        offsets.assign(env.size(), p.get<std::size_t>("offset"));
      }
      const auto geometry = p.get_or<std::string>("geometry", "circle");
      if (geometry != "circle" && geometry != "line") throw ConfigError("geometry is circle or line", p.path_of("geometry"));
      return make_rotation_grid(env, m, offsets, geometry == "circle" ? GridGeometry::Circle : GridGeometry::Line);
    }
    if (gen == "product_shift") {
      no_space();
      std::vector<double> alphabet;
      if (p.has("alphabet_grid")) {
        const auto k = p.get<std::size_t>("alphabet_grid");
        if (k == 0) throw ConfigError("grid needs at least one step", p.path_of("alphabet_grid"));
        for (std::size_t j = 0; j <= k; ++j) alphabet.push_back(static_cast<double>(j) / static_cast<double>(k));
      } else {
        alphabet = p.get<std::vector<double>>("alphabet");
      }
      return make_product_shift(env, std::move(alphabet), p.get<std::size_t>("window"));
    }
    if (gen == "random_subshift") {
      no_space();
      return make_random_subshift(env, p.get<std::size_t>("window"), p.get<std::size_t>("alphabet_size"),
                                  p.get<std::vector<std::vector<std::size_t>>>("allowed"));
    }
    if (gen == "poset_bundle") {
      need_space(true);
      std::vector<Subset> fibers;
      if (p.has("fibers")) {
        fibers.resize(env.size());
        per_state(p, "fibers", env, [&](EnvState w, const Json& j, const std::string& path) {
          fibers[w] = parse_subset(j, *space, path);
        });
      }
      const Subset full = Subset::full(carrier_size(*space));
      std::vector<std::vector<std::size_t>> tables(env.size());
      per_state(p, "maps", env, [&](EnvState w, const Json& j, const std::string& path) {
        tables[w] = parse_table(j, *space, fibers.empty() ? full : fibers[w], path);
      });
      return make_poset_bundle(env, std::get<FinitePoset>(*space), tables, std::move(fibers));
    }
    if (gen == "explicit") {
      need_space(false);
      return explicit_system(p, env, space);
    }
    throw ConfigError(
        "unknown generator (inclusion, rotation_grid, product_shift, random_subshift, poset_bundle, explicit)",
        r.path_of("generator"));
  });
  p.finish();
  r.finish();
  const auto report = validate(sys);
  if (!report.pass()) throw ConfigError(report.issues.front().message, r.path());
  return sys;
}

PathSpec parse_paths(const Reader* r, std::size_t min_length) {
  PathSpec s;
  s.length = min_length;
  if (!r) return s;
  s.count = r->get_or<std::size_t>("count", 1);
  s.length = r->get_or<std::size_t>("length", min_length);
  if (s.count == 0) throw ConfigError("need at least one path", r->path_of("count"));
  if (s.length < min_length)
    throw ConfigError("paths must have length at least " + std::to_string(min_length), r->path_of("length"));
  r->finish();
  return s;
}

std::string point_label(const Carrier& carrier, std::size_t x) {
  if (const auto* p = std::get_if<FinitePoset>(&carrier)) return p->label(x);
  const auto& m = std::get<FiniteMetricSpace>(carrier);
  return m.labels.empty() ? std::to_string(x) : m.labels.at(x);
}

Json system_to_json(const BundleSystem& sys) {
  Json j;
  j["name"] = sys.name();
  const auto& env = sys.env();
  Json e;
  e["kind"] = std::string(to_string(env.kind()));
  Json states = Json::array(), law = Json::array();
  for (EnvState w = 0; w < env.size(); ++w) {
    states.push_back(env.label(w));
    law.push_back(env.law()[w]);
  }
  e["states"] = states;
  e["law"] = law;
  Json trans = Json::array();
  for (EnvState w = 0; w < env.size(); ++w) {
    Json row = Json::array();
    for (EnvState v = 0; v < env.size(); ++v) row.push_back(env.transition(w, v));
    trans.push_back(row);
  }
  e["transition"] = trans;
  j["environment"] = e;

  Json c;
  if (const auto* p = std::get_if<FinitePoset>(&sys.carrier())) {
    c["type"] = "poset";
    c["elements"] = p->labels();
    Json less = Json::array();
    for (auto [a, b] : p->covering_pairs()) less.push_back({p->label(a), p->label(b)});
    c["less"] = less;
  } else {
    const auto& m = sys.metric();
    switch (m.kind()) {
      case FiniteMetricSpace::Kind::Circle:
        c["type"] = "circle";
        c["m"] = m.size();
        break;
      case FiniteMetricSpace::Kind::Line:
        c["type"] = "line";
        c["positions"] = m.coords();
        break;
      case FiniteMetricSpace::Kind::WeightedSup:
        c["type"] = "metric";
        c["coords"] = m.coords();
        c["weights"] = m.weights();
        break;
      case FiniteMetricSpace::Kind::Table: {
        c["type"] = "metric";
        Json rows = Json::array();
        for (std::size_t i = 0; i < m.size(); ++i) {
          Json row = Json::array();
          for (std::size_t k = 0; k < i; ++k) row.push_back(m.distance(i, k));
          rows.push_back(row);
        }
        c["distances"] = rows;
        break;
      }
    }
  }
  j["carrier"] = c;

  Json fibers;
  for (EnvState w = 0; w < env.size(); ++w) fibers[env.label(w)] = sys.fiber(w).indices();
  j["fibers"] = fibers;
  Json maps;
  for (const auto& [edge, f] : sys.maps()) maps[env.label(edge.first) + "->" + env.label(edge.second)] = f.image;
  j["maps"] = maps;
  return j;
}

}  // namespace rmdim::app
