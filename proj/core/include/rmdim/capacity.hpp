#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "rmdim/bundle.hpp"
#include "rmdim/environment.hpp"
#include "rmdim/spaces.hpp"

namespace rmdim {

struct BirkhoffResult {
  std::size_t b = 0;
  std::size_t argmax = 0;  // carrier index, lowest among ties
};

/// b_n = max over x in E_{w_0} of #{i < n : T^i x in E}.
BirkhoffResult birkhoff_count(const BundleSystem& sys, const EnvPath& path, const Subset& e, std::size_t n);

struct OcapRow {
  std::size_t path = 0;
  std::size_t n = 0;
  std::size_t b = 0;
  double rate = 0.0;  // b / n
};

struct OcapReport {
  std::vector<OcapRow> rows;       // path-major, n ascending
  std::vector<double> per_path;    // rate at the largest n
  double estimate = 0.0;           // weighted mean of per_path
  std::size_t subadditivity_checked = 0;
  std::size_t subadditivity_violations = 0;
  bool exact_expectation = false;
};

/// Counts b_{n+m}(w) <= b_n(w) + b_m(theta^n w) violations for n, m >= 1, n + m <= n_max.
std::pair<std::size_t, std::size_t> ocap_subadditivity(const BundleSystem& sys, const EnvPath& path, const Subset& e,
                                                       std::size_t n_max);

OcapReport ocap_estimate(const BundleSystem& sys, const WeightedPaths& paths, const Subset& e,
                         const std::vector<std::size_t>& n_list, std::size_t threads = 1,
                         bool check_subadditivity = true);

struct SmallnessVerdict {
  bool small = false;
  double max_estimate = 0.0;
  std::vector<double> per_path;
};

SmallnessVerdict smallness_test(const BundleSystem& sys, const Subset& e, const WeightedPaths& paths, std::size_t n_max,
                                double tol);

/// Orbit empirical measure of a maximizing point: weight 1/n on each (theta^i w, T^i gamma), i < n.
struct EmpiricalMeasure {
  std::size_t n = 0;
  std::size_t b = 0;
  /// (state, point) for i = 0..n; entry n is the image under the skew product of entry n-1.
  std::vector<std::pair<EnvState, std::size_t>> orbit;
  double mass() const noexcept { return static_cast<double>(b) / static_cast<double>(n); }
};

/// Needs path length >= n + 1 so the skew-product image of the last atom is known.
EmpiricalMeasure empirical_maximizing_measure(const BundleSystem& sys, const EnvPath& path, const Subset& e,
                                              std::size_t n);

/// Bounded test function on (state, point): values[state][point].
struct TestFunction {
  std::vector<std::vector<double>> values;
  double operator()(EnvState w, std::size_t x) const { return values.at(w).at(x); }
  double sup_norm() const;
};

/// |int f o Theta dmu - int f dmu|.
double invariance_defect(const EmpiricalMeasure& mu, const TestFunction& f);

struct ShrunkCover {
  Cover original;
  Cover shrunk;
  std::vector<Subset> boundaries;  // discrete boundary of each shrunk member, inside the member
  double radius = 0.0;
};

/// U_j' = {x in U_j : d(x, X \ U_j) > margin_j}. Throws MarginError if the U_j' stop covering.
/// radius <= 0 selects the smallest positive pairwise distance.
ShrunkCover shrink_cover(const FiniteMetricSpace& space, const Cover& alpha, const std::vector<double>& margins,
                         double radius = 0.0);

/// Points of s within `radius` of the complement.
Subset discrete_boundary(const FiniteMetricSpace& space, const Subset& s, double radius);

enum class PhiVariant { Recursive, Literal };

struct PartitionOfUnity {
  ShrunkCover cover;
  double delta = 0.0;
  PhiVariant variant = PhiVariant::Recursive;
  std::vector<std::vector<double>> psi;  // [j][x]
  std::vector<std::vector<double>> phi;  // [j][x]
  Subset fractional;                     // points where some phi_j lies strictly in (0, 1)

  std::size_t size() const noexcept { return psi.size(); }
};

/// psi_j = 1 on U_j', else max(0, 1 - d(x, bd U_j') / delta); phi from psi by the chosen recursion.
/// Throws DeltaError when the delta-neighbourhood of some bd U_j' leaves U_j.
PartitionOfUnity partition_of_unity(const FiniteMetricSpace& space, const ShrunkCover& cover, double delta,
                                    PhiVariant variant = PhiVariant::Recursive);

struct CrossingReport {
  std::vector<double> frequency;  // per point of E_{w_0}, fraction of i < N with T^i x in A
  double max = 0.0;
  std::size_t argmax = 0;
  double max_boundary = 0.0;      // max over x and j of the boundary visit frequency
  bool below(double eps) const noexcept { return max < eps; }
};

/// Stage i uses pus[path[i]].
CrossingReport crossing_frequency(const BundleSystem& sys, const EnvPath& path,
                                  const std::vector<PartitionOfUnity>& pus, std::size_t n);

struct EmbeddingCertificate {
  std::size_t n = 0;
  std::size_t k = 0;
  double eps = 0.0;
  std::vector<std::size_t> points;
  std::vector<std::vector<double>> f;           // per point, k*N coordinates, index i*k + j
  std::vector<std::vector<std::size_t>> index;  // I(x)
  std::vector<std::vector<std::uint8_t>> xi;    // corner
  std::size_t max_index_size = 0;
  bool index_bound_ok = false;    // #I(x) < eps N everywhere
  bool corner_ok = false;         // coordinates outside I(x) are binary and equal xi
  bool compatibility_ok = false;  // equal f_N implies a shared joined-cover member
  std::size_t collision_groups = 0;
  double dimension_bound = 0.0;   // eps k N
  bool pass() const noexcept { return index_bound_ok && corner_ok && compatibility_ok; }
};

EmbeddingCertificate sbp_embedding(const BundleSystem& sys, const EnvPath& path,
                                   const std::vector<PartitionOfUnity>& pus, std::size_t n, double eps);

struct SbpScanRow {
  std::size_t n = 0;
  std::size_t max_index_size = 0;
  double max_frequency = 0.0;
  bool pass = false;
};

/// Certificates for each N; the smallest passing N is the first row with pass set.
std::vector<SbpScanRow> sbp_scan(const BundleSystem& sys, const EnvPath& path, const std::vector<PartitionOfUnity>& pus,
                                 const std::vector<std::size_t>& n_list, double eps, std::size_t threads = 1);

struct BallScanRow {
  double radius = 0.0;
  std::size_t boundary_size = 0;
  double ocap = 0.0;
  bool small = false;
};

/// Balls B(center, r) for each radius: orbit capacity of their discrete boundary at n, judged against tol.
std::vector<BallScanRow> ball_boundary_scan(const BundleSystem& sys, const EnvPath& path, std::size_t center,
                                            const std::vector<double>& radii, std::size_t n, double tol);

}  // namespace rmdim
