#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "rmdim/bundle.hpp"
#include "rmdim/environment.hpp"
#include "rmdim/spaces.hpp"

namespace rmdim {

/// -1 + max over target points of member multiplicity; -1 for an empty target.
/// Throws InputError when alpha misses a point of target.
int ord(const Cover& alpha, const Subset& target);

/// Same nerve: for every index set J, the J-intersections are empty in both or in neither.
/// Members may live on different universes. Index sets above 20 throw SizeError.
bool combinatorially_equivalent(const std::vector<Subset>& f, const std::vector<Subset>& g);

struct DimResult {
  int value = -1;
  Cover witness;
  std::uint64_t nodes_explored = 0;
  bool exact = false;
};

struct DimOptions {
  std::size_t element_cap = 16;
  std::size_t open_set_cap = 4096;
};

/// min ord(beta) over open covers beta of the whole poset refining alpha.
DimResult dim_cover_exact(const FinitePoset& p, const Cover& alpha, const DimOptions& opt = {});

/// Same minimum on the sub-poset `target` with its induced order; alpha's members are cut to target
/// and the witness is expressed in carrier indices.
DimResult dim_cover_exact_on(const FinitePoset& p, const Subset& target, const Cover& alpha,
                             const DimOptions& opt = {});

/// Upper bound on D: the better of alpha and the minimal-neighbourhood cover, then a
/// branch-and-bound capped at `budget` nodes. exact is always false. Budget 0 returns ord(alpha).
DimResult dim_cover_upper(const FinitePoset& p, const Cover& alpha, std::uint64_t budget);

/// D of the joined cover on E_{w_0}. Metric carriers give 0 (singletons refine any cover).
DimResult q_n_result(const BundleSystem& sys, const EnvPath& path, const Cover& alpha, std::size_t n,
                     const DimOptions& opt = {});
int q_n(const BundleSystem& sys, const EnvPath& path, const Cover& alpha, std::size_t n,
        const DimOptions& opt = {});

struct MdimRow {
  std::size_t path = 0;
  std::size_t n = 0;
  int q = 0;
  int ord_joined = 0;
  std::size_t joined_members = 0;
  std::uint64_t nodes = 0;
};

struct MdimReport {
  std::vector<MdimRow> rows;          // path-major, n ascending
  std::vector<double> mean_over_n;    // index n-1: E q_n / n
  std::vector<double> running_inf;    // index n-1: min_{k<=n} E q_k / k
  double estimate = 0.0;
  bool exact_expectation = false;
  std::size_t corollary_violations = 0;  // q_n > (#alpha)^n - 1 or q_n > ord of the joined cover
};

MdimReport mdim_estimate(const BundleSystem& sys, const Cover& alpha, const WeightedPaths& paths, std::size_t n_max,
                         std::size_t threads = 1, const DimOptions& opt = {});

struct KingmanViolation {
  std::size_t n = 0;
  std::size_t m = 0;
  int lhs = 0;
  int rhs = 0;
};

/// Checks q_{n+m}(w) <= q_n(w) + q_m(theta^n w) for all n, m >= 1 with n + m <= n_max.
std::vector<KingmanViolation> kingman_check(const BundleSystem& sys, const EnvPath& path, const Cover& alpha,
                                            std::size_t n_max, const DimOptions& opt = {});

struct MdimSupReport {
  std::vector<MdimReport> per_cover;
  double estimate = 0.0;  // max over covers
  /// (i, j, n) where alpha(i) refines alpha(j) yet E q_n(i) < E q_n(j).
  std::vector<std::tuple<std::size_t, std::size_t, std::size_t>> monotonicity_failures;
};

MdimSupReport mdim_sup_estimate(const BundleSystem& sys, const std::vector<Cover>& covers,
                                const std::vector<std::pair<std::size_t, std::size_t>>& refinement_pairs,
                                const WeightedPaths& paths, std::size_t n_max, std::size_t threads = 1,
                                const DimOptions& opt = {});

}  // namespace rmdim
