#pragma once

#include <memory>
#include <string>
#include <vector>

#include "rmdim/app/json_io.hpp"
#include "rmdim/bundle.hpp"
#include "rmdim/environment.hpp"
#include "rmdim/spaces.hpp"

namespace rmdim::app {

/// Named finite models: "interval3" {a,b < c}, "circle4" {a,b < c,d},
/// "pseudo_circle6" (hexagon: a<d,e  b<e,f  c<f,d), "sphere6" (a,b < c,d < e,f).
FinitePoset preset_poset(const std::string& name);

BaseEnvironment parse_environment(const Reader& r);

/// {"type": "poset" | "metric" | "line" | "circle", ...}
std::shared_ptr<const Carrier> parse_space(const Reader& r);

/// A point is a label (poset or labelled metric) or a carrier index.
std::size_t parse_point(const Json& j, const Carrier& carrier, const std::string& path);
Subset parse_subset(const Json& j, const Carrier& carrier, const std::string& path);
Cover parse_cover(const Json& j, const Carrier& carrier, const std::string& path);

/// Generator name plus params, or explicit fibers and maps on the configured space.
BundleSystem parse_system(const Reader& r, const BaseEnvironment& env, std::shared_ptr<const Carrier> space);

struct PathSpec {
  std::size_t count = 1;
  std::size_t length = 0;
};

/// "paths": {"count": N, "length": L}; length defaults to min_length.
PathSpec parse_paths(const Reader* r, std::size_t min_length);

/// Canonical export: sorted keys, dense map tables keyed "from->to".
Json system_to_json(const BundleSystem& sys);

std::string point_label(const Carrier& carrier, std::size_t x);

}  // namespace rmdim::app
