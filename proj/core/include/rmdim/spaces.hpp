#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "rmdim/subset.hpp"

namespace rmdim {

/// Slack used when comparing computed distances against thresholds.
inline constexpr double kDistanceTol = 1e-9;

/// Finite metric point cloud. Distances come from an explicit table or from a
/// structured rule (weighted sup over coordinates, circle grid, line positions)
/// so very large clouds never materialize an n^2 table.
class FiniteMetricSpace {
 public:
  enum class Kind { Table, WeightedSup, Circle, Line };

  /// Full symmetric table; validates the metric axioms.
  static FiniteMetricSpace from_table(std::vector<std::vector<double>> dist);
  /// Row i holds d(i, 0..i-1); the diagonal is implicit.
  static FiniteMetricSpace from_lower_triangular(const std::vector<std::vector<double>>& rows);
  /// d(x,y) = max_c weights[c] * |x_c - y_c|; coords is row-major, one row per point.
  static FiniteMetricSpace weighted_sup(std::vector<double> coords, std::vector<double> weights);
  /// m equally spaced points on a circle of circumference 1 with arc-length distance.
  static FiniteMetricSpace circle(std::size_t m);
  /// Points on the real line with d(x,y) = |x - y|.
  static FiniteMetricSpace line(std::vector<double> positions);

  Kind kind() const noexcept { return kind_; }
  std::size_t size() const noexcept { return size_; }

  double distance(std::size_t i, std::size_t j) const noexcept {
    switch (kind_) {
      case Kind::Table: return table_[i * size_ + j];
      case Kind::WeightedSup: {
        const std::size_t dim = weights_.size();
        const double* a = &coords_[i * dim];
        const double* b = &coords_[j * dim];
        double d = 0.0;
        for (std::size_t c = 0; c < dim; ++c) {
          const double t = weights_[c] * (a[c] > b[c] ? a[c] - b[c] : b[c] - a[c]);
          if (t > d) d = t;
        }
        return d;
      }
      case Kind::Circle: {
        const std::size_t k = i > j ? i - j : j - i;
        return static_cast<double>(k < size_ - k ? k : size_ - k) / static_cast<double>(size_);
      }
      case Kind::Line: return coords_[i] > coords_[j] ? coords_[i] - coords_[j] : coords_[j] - coords_[i];
    }
    return 0.0;
  }

  /// Distance from point i to the nearest point of s (+inf when s is empty).
  double distance_to(std::size_t i, const Subset& s) const;
  /// Smallest positive pairwise distance (+inf for a single point).
  double min_positive_distance() const;

  /// Throws InputError naming a violating triple; structured kinds are metrics by construction.
  void validate() const;

  const std::vector<double>& coords() const noexcept { return coords_; }
  const std::vector<double>& weights() const noexcept { return weights_; }

  std::vector<std::string> labels;

 private:
  Kind kind_ = Kind::Table;
  std::size_t size_ = 0;
  std::vector<double> table_;
  std::vector<double> coords_;
  std::vector<double> weights_;
};

/// Finite poset; its open sets are the up-sets (Alexandrov topology).
class FinitePoset {
 public:
  /// Reflexive-transitive closure of the given strict relations (a < b pairs).
  static FinitePoset from_relations(std::vector<std::string> labels,
                                    const std::vector<std::pair<std::size_t, std::size_t>>& less);
  static FinitePoset from_relations(std::vector<std::string> labels,
                                    const std::vector<std::pair<std::string, std::string>>& less);
  /// Full leq table; must already be a partial order.
  static FinitePoset from_leq(std::vector<std::string> labels, const std::vector<std::vector<bool>>& leq);
  static FinitePoset antichain(std::size_t n);

  std::size_t size() const noexcept { return labels_.size(); }
  bool leq(std::size_t x, std::size_t y) const noexcept { return up_[x].contains(y); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const std::string& label(std::size_t i) const { return labels_.at(i); }
  std::size_t index_of(std::string_view label) const;

  /// {y : x <= y}.
  const Subset& up_set(std::size_t x) const { return up_.at(x); }
  bool is_up_set(const Subset& s) const;
  /// Smallest up-set containing s.
  Subset up_closure(const Subset& s) const;
  /// Pairs (x, y) with x < y and no z strictly between.
  std::vector<std::pair<std::size_t, std::size_t>> covering_pairs() const;
  /// Sub-poset on `members` with the induced order; `index_map[k]` is the parent index of element k.
  FinitePoset induced(const Subset& members, std::vector<std::size_t>* index_map = nullptr) const;

 private:
  std::vector<std::string> labels_;
  std::vector<Subset> up_;
};

using Carrier = std::variant<FiniteMetricSpace, FinitePoset>;

std::size_t carrier_size(const Carrier& c) noexcept;
bool is_poset(const Carrier& c) noexcept;

/// Index tuple identifying a member of a joined cover.
using Label = std::vector<std::size_t>;

/// Indexed family of subsets; empty members are kept and labels survive join/pullback.
struct Cover {
  std::vector<Subset> members;
  /// Either empty (member i has label (i)) or one label per member.
  std::vector<Label> labels;

  Cover() = default;
  explicit Cover(std::vector<Subset> m) : members(std::move(m)) {}
  Cover(std::vector<Subset> m, std::vector<Label> l) : members(std::move(m)), labels(std::move(l)) {}

  std::size_t size() const noexcept { return members.size(); }
  std::size_t universe() const noexcept { return members.empty() ? 0 : members.front().universe(); }
  Label label(std::size_t i) const { return labels.empty() ? Label{i} : labels.at(i); }
  Subset union_all() const;
  /// Every member intersected with s, labels kept.
  Cover restricted(const Subset& s) const;
  /// Distinct nonempty members in ascending order.
  std::vector<Subset> distinct_nonempty() const;
};

/// A map between carriers: image[x] is the target index for x in domain, -1 elsewhere.
struct PointMap {
  Subset domain;
  std::size_t codomain_size = 0;
  std::vector<std::int64_t> image;

  static PointMap identity(const Subset& domain);
  std::size_t operator()(std::size_t x) const;
  Subset image_of(const Subset& s) const;
  Subset preimage(const Subset& s) const;
};

/// All up-sets of p (including the empty set and p itself), ascending by bitmask.
std::vector<Subset> open_sets(const FinitePoset& p, std::size_t element_cap = 16);

Subset minimal_open_neighborhood(const FinitePoset& p, std::size_t x);

/// Every point of target lies in some member, and on posets every member is an up-set.
bool is_open_cover(const Carrier& carrier, const Subset& target, const Cover& alpha);

/// Every nonempty member of beta lies inside some member of alpha.
bool refines(const Cover& beta, const Cover& alpha);

/// All intersections of one member from each cover, labels are concatenated index
/// tuples in lexicographic order; empty intersections are kept.
Cover join(const std::vector<Cover>& covers);

/// Members f^{-1}(A) on the domain carrier. Poset carriers require f order-preserving.
Cover pullback(const Cover& alpha, const PointMap& f);
Cover pullback(const Cover& alpha, const PointMap& f, const Carrier& domain, const Carrier& codomain);

/// First pair x <= y in f's domain with f(x) not <= f(y), if any.
std::optional<std::pair<std::size_t, std::size_t>> monotonicity_violation(const FinitePoset& dom,
                                                                         const FinitePoset& cod,
                                                                         const PointMap& f);

}  // namespace rmdim
