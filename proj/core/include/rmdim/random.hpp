#pragma once

#include <cstddef>
#include <vector>

#include "rmdim/bundle.hpp"
#include "rmdim/rng.hpp"
#include "rmdim/spaces.hpp"

namespace rmdim {

/// Random order on 0..n-1 generated by relations i < j (i < j as integers) with probability p,
/// so the identity order is a linear extension. Labels are p0, p1, ...
FinitePoset random_poset(std::size_t n, double p, Philox4x32& gen);

/// `members` random up-sets, patched so that they cover the poset.
Cover random_open_cover(const FinitePoset& poset, std::size_t members, Philox4x32& gen);

/// Order-preserving self-map built top-down along the linear extension; falls back to the
/// identity when a random attempt gets stuck.
std::vector<std::size_t> random_monotone_map(const FinitePoset& poset, Philox4x32& gen);

/// Poset bundle with a random monotone map per state and full fibers.
BundleSystem random_poset_bundle(const BaseEnvironment& env, std::size_t n, double p, Philox4x32& gen);

/// k points in [0,1]^dim under a weighted sup metric; coordinates snapped to multiples of 1/1024.
FiniteMetricSpace random_cloud(std::size_t k, std::size_t dim, Philox4x32& gen);

/// Bundle with random self-maps (any function is continuous on a metric cloud) and full fibers.
BundleSystem random_metric_bundle(const BaseEnvironment& env, std::size_t k, std::size_t dim, Philox4x32& gen);

}  // namespace rmdim
