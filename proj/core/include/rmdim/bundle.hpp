#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "rmdim/environment.hpp"
#include "rmdim/spaces.hpp"

namespace rmdim {

/// A continuous bundle RDS on a finite carrier: fibers E_w per environment state and
/// fiber maps T_w : E_w -> E_{theta w}. Maps are keyed by environment edge (w, w')
/// so stochastic environments know the codomain fiber of each step.
class BundleSystem {
 public:
  using Edge = std::pair<EnvState, EnvState>;

  BundleSystem(BaseEnvironment env, std::shared_ptr<const Carrier> carrier, std::vector<Subset> fibers,
               std::map<Edge, PointMap> maps, std::string name = {});

  const BaseEnvironment& env() const noexcept { return env_; }
  const Carrier& carrier() const noexcept { return *carrier_; }
  std::shared_ptr<const Carrier> carrier_ptr() const noexcept { return carrier_; }
  std::size_t carrier_size() const noexcept { return rmdim::carrier_size(*carrier_); }
  const Subset& fiber(EnvState w) const { return fibers_.at(w); }
  const std::vector<Subset>& fibers() const noexcept { return fibers_; }
  const PointMap& map(EnvState from, EnvState to) const;
  const std::map<Edge, PointMap>& maps() const noexcept { return maps_; }
  const std::string& name() const noexcept { return name_; }

  const FiniteMetricSpace& metric() const;
  const FinitePoset& poset() const;

 private:
  BaseEnvironment env_;
  std::shared_ptr<const Carrier> carrier_;
  std::vector<Subset> fibers_;
  std::map<Edge, PointMap> maps_;
  std::string name_;
};

struct ValidationIssue {
  enum class Kind { EmptyFiber, MissingMap, DomainMismatch, Containment, Monotonicity };
  Kind kind;
  EnvState from = 0;
  EnvState to = 0;
  std::size_t x = 0;
  std::size_t y = 0;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  bool pass() const noexcept { return issues.empty(); }
};

/// Checks nonempty fibers, T_w(E_w) inside E_{theta w} on every edge, and monotonicity on posets.
ValidationReport validate(const BundleSystem& sys);

/// orbit[k][p] = T^k_w applied to the p-th point of E_{w_0}.
struct OrbitTable {
  EnvPath path;
  std::vector<std::size_t> points;
  std::vector<std::vector<std::size_t>> orbit;

  std::size_t steps() const noexcept { return orbit.size(); }
};

/// Throws InputError when the path takes an edge the environment forbids.
void check_path(const BundleSystem& sys, const EnvPath& path);

OrbitTable iterate(const BundleSystem& sys, const EnvPath& path, std::size_t n);

/// Labelled cover of E_{w_0}: member (j_0..j_{n-1}) = intersection over k of
/// (T^k_w)^{-1}(A^{(j_k)} cap E_{theta^k w}). Empty members are kept.
Cover join_orbit_cover(const BundleSystem& sys, const EnvPath& path, const Cover& alpha, std::size_t n);

/// Distinct nonempty members of join_orbit_cover, built by successive refinement
/// without materializing the (#alpha)^n labels.
std::vector<Subset> joined_members(const BundleSystem& sys, const EnvPath& path, const Cover& alpha, std::size_t n);

/// Same system with fibers C_w; requires C_w inside E_w and T(C_w) inside C_{w'} on every edge.
BundleSystem restrict_to(const BundleSystem& sys, const std::vector<Subset>& sub_fibers);

/// Smallest forward-invariant family containing `seeds` (closure under every edge map).
std::vector<Subset> forward_invariant_closure(const BundleSystem& sys, std::vector<Subset> seeds);

// ------------------------------------------------------------------ generators

/// T_w is the inclusion E_w -> E_{theta w}; requires nested fibers along every edge.
BundleSystem make_inclusion_system(const BaseEnvironment& env, std::shared_ptr<const Carrier> carrier,
                                   std::vector<Subset> fibers);

enum class GridGeometry { Circle, Line };

/// m grid points, T_w(x) = x + offsets[w] (mod m). Circle geometry makes every T_w an isometry;
/// line geometry places point j at j/(m-1) on [0,1].
BundleSystem make_rotation_grid(const BaseEnvironment& env, std::size_t m, const std::vector<std::size_t>& offsets,
                                GridGeometry geometry = GridGeometry::Circle);

/// Truncated sequence model on window {-W..W}: letters carry the given values, the metric is
/// max_i 2^{-|i|} |x_i - y_i|, and T drops the leftmost coordinate and pads with the
/// smallest letter. Every fiber is the full word set.
BundleSystem make_product_shift(const BaseEnvironment& env, std::vector<double> alphabet, std::size_t window);

/// Letters 0..A-1 placed at a/(A-1); E_w holds the words whose newest (rightmost) letter is in
/// allowed[w], and T pads with the smallest letter allowed at the successor state.
BundleSystem make_random_subshift(const BaseEnvironment& env, std::size_t window, std::size_t alphabet_size,
                                  const std::vector<std::vector<std::size_t>>& allowed);

/// One monotone self-map table per environment state (applied on every outgoing edge).
BundleSystem make_poset_bundle(const BaseEnvironment& env, const FinitePoset& poset,
                               const std::vector<std::vector<std::size_t>>& maps,
                               std::vector<Subset> fibers = {});

/// Builds per-edge maps from one table per state: T_w is used on every edge leaving w.
std::map<BundleSystem::Edge, PointMap> per_state_maps(const BaseEnvironment& env, const std::vector<Subset>& fibers,
                                                       std::size_t carrier_size,
                                                       const std::vector<std::vector<std::size_t>>& tables);

/// Index of a word (coordinates -W..W, leftmost most significant) in a product/subshift carrier.
std::size_t word_index(const std::vector<std::size_t>& letters, std::size_t alphabet_size);
std::vector<std::size_t> word_letters(std::size_t index, std::size_t alphabet_size, std::size_t window);

}  // namespace rmdim
