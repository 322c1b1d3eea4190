#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "rmdim/bundle.hpp"
#include "rmdim/environment.hpp"

namespace rmdim {

/// Positive resolution eps(w): one value per environment state, or a constant.
class EpsProcess {
 public:
  static EpsProcess constant(double eps);
  static EpsProcess per_state(std::vector<double> eps);

  double at(EnvState w) const noexcept { return values_.size() == 1 ? values_[0] : values_[w]; }
  EpsProcess scaled(double factor) const;
  bool is_constant() const noexcept { return values_.size() == 1; }
  const std::vector<double>& values() const noexcept { return values_; }

 private:
  std::vector<double> values_;
};

enum class SolveMode { Exact, Greedy, Auto };
std::string_view to_string(SolveMode m) noexcept;
SolveMode solve_mode_from_string(std::string_view s);

enum class Bound { Exact, Lower, Upper };
std::string_view to_string(Bound b) noexcept;

/// max_{k<n} d(T^k x, T^k y) / eps(theta^k w).
double bowen_distance(const BundleSystem& sys, const EnvPath& path, const EpsProcess& eps, std::size_t n,
                      std::size_t x, std::size_t y);

struct SepCovResult {
  std::size_t value = 0;
  Bound bound = Bound::Exact;
  std::vector<std::size_t> points;              // sep witness (carrier indices)
  std::vector<std::vector<std::size_t>> sets;   // cov witness (carrier indices)
};

struct SolveOptions {
  SolveMode mode = SolveMode::Auto;
  std::size_t exact_cap = 64;
  /// Restrict to these fiber points (carrier indices); empty means the whole fiber.
  std::vector<std::size_t> points;
};

/// Maximum (w, eps, n)-separated set: pairwise Bowen distance >= 1.
SepCovResult sep(const BundleSystem& sys, const EnvPath& path, const EpsProcess& eps, std::size_t n,
                 const SolveOptions& opt = {});
/// Minimum cover by sets of Bowen diameter < 1 (cliques of the d < 1 graph).
SepCovResult cov(const BundleSystem& sys, const EnvPath& path, const EpsProcess& eps, std::size_t n,
                 const SolveOptions& opt = {});

/// Graph solvers on at most 64 vertices; close[v] has bit u set iff d(u, v) < 1 (u != v).
std::size_t max_independent_set(const std::vector<std::uint64_t>& close, std::uint64_t* witness = nullptr);
std::size_t min_clique_cover(const std::vector<std::uint64_t>& close, std::vector<std::uint64_t>* witness = nullptr);

struct SandwichResult {
  std::size_t sep_2eps = 0;
  std::size_t cov_2eps = 0;
  std::size_t sep_eps = 0;
  bool pass = false;
};

/// sep(2 eps) <= cov(2 eps) <= sep(eps) with exact solvers.
SandwichResult sandwich_check(const BundleSystem& sys, const EnvPath& path, const EpsProcess& eps, std::size_t n,
                              const std::vector<std::size_t>& points = {});

/// Evenly spaced deterministic subsample of a fiber (all points when it is small enough).
std::vector<std::size_t> subsample_fiber(const Subset& fiber, std::size_t cap);

struct MmdimCell {
  std::size_t path = 0;
  double eps = 0.0;
  std::size_t n = 0;
  std::size_t sep = 0;
  std::size_t cov = 0;
  Bound sep_bound = Bound::Exact;
  Bound cov_bound = Bound::Exact;
};

struct MmdimFiber {
  std::size_t path = 0;
  std::vector<double> eps;          // decreasing
  std::vector<double> s_cov;        // per eps: min over n of log cov / n
  std::vector<double> s_sep;        // per eps: log sep / n at the largest n
  std::vector<std::vector<double>> s_sep_sequence;  // per eps, per n
  std::vector<double> ratio;        // s_sep / (-log eps)
  double min_ratio = 0.0;
  double slope = 0.0;               // least squares of s_sep against -log eps
};

struct MmdimReport {
  std::vector<MmdimCell> cells;     // path, eps, n order
  std::vector<MmdimFiber> fibers;
  double mean_min_ratio = 0.0;
  double mean_slope = 0.0;
  double stderr_min_ratio = 0.0;
  double stderr_slope = 0.0;
  bool exact_expectation = false;
  bool mixed_modes = false;         // some cells carry greedy bounds
};

struct MmdimOptions {
  SolveOptions solve;
  bool compute_cov = true;
  /// When > 0, every fiber is cut to an evenly spaced subsample of this size.
  std::size_t subsample = 0;
  std::size_t threads = 1;
};

MmdimFiber mmdim_fiber(const BundleSystem& sys, const EnvPath& path, const std::vector<double>& eps_grid,
                       const std::vector<std::size_t>& n_list, const MmdimOptions& opt,
                       std::vector<MmdimCell>* cells = nullptr);

MmdimReport mmdim_estimate(const BundleSystem& sys, const WeightedPaths& paths, const std::vector<double>& eps_grid,
                           const std::vector<std::size_t>& n_list, const MmdimOptions& opt = {});

struct HtopRow {
  std::size_t path = 0;
  std::size_t n = 0;
  std::size_t sep = 0;
  Bound bound = Bound::Exact;
  double rate = 0.0;  // log sep / n
};

struct HtopReport {
  double eps_min = 0.0;
  std::vector<HtopRow> rows;
  std::vector<double> per_path;  // S'(w, eps_min)
  double estimate = 0.0;         // weighted mean over paths
  double stderr_estimate = 0.0;
  bool exact_expectation = false;
};

HtopReport htop_estimate(const BundleSystem& sys, const WeightedPaths& paths, double eps_min,
                         const std::vector<std::size_t>& n_list, const MmdimOptions& opt = {});

/// Least-squares slope of y against x.
double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace rmdim
